// Copyright 2026 The RobustCCE Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef ROBUSTCCE_LP_HPP_
#define ROBUSTCCE_LP_HPP_

#include <span>
#include <vector>

namespace robustcce {

// Self-contained dense linear programming:
//
//   minimize  objective . x   subject to  rows,  x >= 0
//
// solved by the two-phase primal simplex method with Bland's anti-cycling
// pivot rule and pivot tolerance 1e-10.  Deterministic, no external solver.
// Intended for small verification-oracle problems (thousands of columns);
// everything is O(rows * cols) per pivot.

enum class RowSense { kLe, kEq, kGe };

struct LpRow {
  std::vector<double> coef;  // one coefficient per variable
  RowSense sense = RowSense::kLe;
  double rhs = 0.0;
};

struct LpProblem {
  int num_vars = 0;
  std::vector<double> objective;  // minimized; length num_vars
  std::vector<LpRow> rows;
};

enum class LpStatus { kOptimal, kInfeasible, kUnbounded };

struct LpSolution {
  LpStatus status = LpStatus::kInfeasible;
  std::vector<double> x;  // primal values of the original variables
  double value = 0.0;     // objective . x at the optimum
};

// Throws std::invalid_argument on malformed input (shape mismatches or
// non-finite data) and std::runtime_error if the pivot budget is exhausted
// (which Bland's rule makes unreachable short of numerical corruption).
LpSolution solve_lp(const LpProblem& problem);

}  // namespace robustcce

#endif  // ROBUSTCCE_LP_HPP_
