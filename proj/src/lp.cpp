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

#include "robustcce/lp.hpp"

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace robustcce {
namespace {

constexpr double kPivotTol = 1e-10;    // entries below this cannot pivot
constexpr double kReducedTol = 1e-9;   // optimality threshold on reduced costs
constexpr double kFeasTol = 1e-7;      // phase-1 residual accepted as feasible

// Dense simplex tableau: row-major matrix of basis-inverse-times-columns,
// separate rhs, and the index of the basic column per row.
struct Tableau {
  int rows = 0;
  int cols = 0;
  std::vector<double> t;  // rows x cols
  std::vector<double> rhs;
  std::vector<int> basis;

  double& at(int i, int j) { return t[static_cast<size_t>(i) * cols + j]; }
  double at(int i, int j) const { return t[static_cast<size_t>(i) * cols + j]; }

  void pivot(int pr, int pc) {
    const double piv = at(pr, pc);
    const double inv = 1.0 / piv;
    for (int j = 0; j < cols; ++j) at(pr, j) *= inv;
    rhs[pr] *= inv;
    at(pr, pc) = 1.0;
    for (int i = 0; i < rows; ++i) {
      if (i == pr) continue;
      const double f = at(i, pc);
      if (f == 0.0) continue;
      for (int j = 0; j < cols; ++j) at(i, j) -= f * at(pr, j);
      rhs[i] -= f * rhs[pr];
      at(i, pc) = 0.0;
      if (rhs[i] > -1e-12 && rhs[i] < 0.0) rhs[i] = 0.0;
    }
    basis[pr] = pc;
  }
};

// Minimizes cost over the first `active_cols` columns; returns false if
// unbounded.  Bland's rule: lowest eligible index enters, and among tying
// ratio-test rows the one whose basic variable has the lowest index leaves,
// which rules out cycling under degeneracy.
bool run_phase(Tableau& tab, std::span<const double> cost, int active_cols,
               long long max_pivots) {
  long long pivots = 0;
  std::vector<double> y(tab.rows);
  while (true) {
    for (int i = 0; i < tab.rows; ++i) y[i] = cost[tab.basis[i]];
    int enter = -1;
    for (int j = 0; j < active_cols && enter < 0; ++j) {
      double d = cost[j];
      for (int i = 0; i < tab.rows; ++i) d -= y[i] * tab.at(i, j);
      if (d < -kReducedTol) enter = j;
    }
    if (enter < 0) return true;  // optimal

    int leave = -1;
    double best_ratio = 0.0;
    for (int i = 0; i < tab.rows; ++i) {
      const double a = tab.at(i, enter);
      if (a <= kPivotTol) continue;
      const double ratio = tab.rhs[i] / a;
      if (leave < 0 || ratio < best_ratio - 1e-15 ||
          (ratio <= best_ratio + 1e-15 && tab.basis[i] < tab.basis[leave])) {
        leave = i;
        best_ratio = ratio;
      }
    }
    if (leave < 0) return false;  // unbounded direction

    tab.pivot(leave, enter);
    if (++pivots > max_pivots) {
      throw std::runtime_error("simplex pivot budget exhausted");
    }
  }
}

}  // namespace

LpSolution solve_lp(const LpProblem& problem) {
  const int n = problem.num_vars;
  if (n < 1) throw std::invalid_argument("LP needs at least one variable");
  if (static_cast<int>(problem.objective.size()) != n) {
    throw std::invalid_argument("objective length mismatch");
  }
  for (double v : problem.objective) {
    if (!std::isfinite(v)) throw std::invalid_argument("non-finite objective");
  }
  const int k = static_cast<int>(problem.rows.size());
  int num_slacks = 0;
  for (const LpRow& row : problem.rows) {
    if (static_cast<int>(row.coef.size()) != n) {
      throw std::invalid_argument("constraint row length mismatch");
    }
    for (double v : row.coef) {
      if (!std::isfinite(v)) throw std::invalid_argument("non-finite row");
    }
    if (!std::isfinite(row.rhs)) throw std::invalid_argument("non-finite rhs");
    if (row.sense != RowSense::kEq) ++num_slacks;
  }

  // Standard form: original variables, then slack/surplus, then one
  // artificial per row so the identity basis is always available.
  const int slack_base = n;
  const int art_base = n + num_slacks;
  const int cols = art_base + k;

  Tableau tab;
  tab.rows = k;
  tab.cols = cols;
  tab.t.assign(static_cast<size_t>(k) * cols, 0.0);
  tab.rhs.resize(k);
  tab.basis.resize(k);

  int next_slack = slack_base;
  for (int i = 0; i < k; ++i) {
    const LpRow& row = problem.rows[i];
    double sign = 1.0;
    if (row.rhs < 0.0) sign = -1.0;  // keep rhs nonnegative
    for (int j = 0; j < n; ++j) tab.at(i, j) = sign * row.coef[j];
    tab.rhs[i] = sign * row.rhs;
    if (row.sense != RowSense::kEq) {
      const double slack = row.sense == RowSense::kLe ? 1.0 : -1.0;
      tab.at(i, next_slack++) = sign * slack;
    }
    tab.at(i, art_base + i) = 1.0;
    tab.basis[i] = art_base + i;
  }

  const long long max_pivots = 100000 + 200LL * (cols + k);

  // Phase 1: minimize the sum of artificials to find a feasible basis.
  std::vector<double> phase1_cost(cols, 0.0);
  for (int i = 0; i < k; ++i) phase1_cost[art_base + i] = 1.0;
  run_phase(tab, phase1_cost, cols, max_pivots);  // always bounded below by 0

  double infeas = 0.0;
  for (int i = 0; i < k; ++i) {
    if (tab.basis[i] >= art_base) infeas += tab.rhs[i];
  }
  LpSolution sol;
  if (infeas > kFeasTol) {
    sol.status = LpStatus::kInfeasible;
    return sol;
  }

  // Drive residual artificials out of the basis; a row with no eligible
  // pivot is redundant and can be dropped.  Such artificials sit within
  // kFeasTol of zero, so snapping the row's rhs keeps the pivot degenerate.
  for (int i = tab.rows - 1; i >= 0; --i) {
    if (tab.basis[i] < art_base) continue;
    tab.rhs[i] = 0.0;
    int pc = -1;
    double best = 1e-8;
    for (int j = 0; j < art_base; ++j) {
      const double a = std::abs(tab.at(i, j));
      if (a > best) {
        best = a;
        pc = j;
      }
    }
    if (pc >= 0) {
      tab.pivot(i, pc);
      continue;
    }
    const int last = tab.rows - 1;
    if (i != last) {
      for (int j = 0; j < cols; ++j) tab.at(i, j) = tab.at(last, j);
      tab.rhs[i] = tab.rhs[last];
      tab.basis[i] = tab.basis[last];
    }
    tab.t.resize(static_cast<size_t>(last) * cols);
    tab.rhs.resize(last);
    tab.basis.resize(last);
    --tab.rows;
  }

  // Phase 2 on the original objective; artificial columns stay barred.
  std::vector<double> phase2_cost(cols, 0.0);
  for (int j = 0; j < n; ++j) phase2_cost[j] = problem.objective[j];
  if (!run_phase(tab, phase2_cost, art_base, max_pivots)) {
    sol.status = LpStatus::kUnbounded;
    return sol;
  }

  sol.status = LpStatus::kOptimal;
  sol.x.assign(n, 0.0);
  for (int i = 0; i < tab.rows; ++i) {
    if (tab.basis[i] < n) sol.x[tab.basis[i]] = std::max(tab.rhs[i], 0.0);
  }
  sol.value = 0.0;
  for (int j = 0; j < n; ++j) sol.value += problem.objective[j] * sol.x[j];
  return sol;
}

}  // namespace robustcce
