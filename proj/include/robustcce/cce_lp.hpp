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

#ifndef ROBUSTCCE_CCE_LP_HPP_
#define ROBUSTCCE_CCE_LP_HPP_

#include <span>
#include <string>
#include <vector>

#include "robustcce/game.hpp"
#include "robustcce/metrics.hpp"
#include "robustcce/types.hpp"

namespace robustcce {

// Exact optimization of a linear objective over the set of (relaxed)
// coarse-correlated equilibria of the non-ego agents, with the ego strategy
// held fixed.  The joint distribution is represented explicitly, so these
// routines are verification oracles for small games rather than scalable
// solvers.

// Joint distributions larger than this are rejected with an explicit size
// error before any allocation happens.
inline constexpr long long kDenseJointCap = 1000000;

// Explicit distribution over all joint pure-action profiles, flattened
// row-major in the same order Game uses (agent 0 slowest).
struct DenseJoint {
  std::vector<double> probabilities;
  std::vector<int> shape;
};

// Throws std::invalid_argument (mentioning `what`) unless the joint matches
// `counts`, is nonnegative, and sums to 1 within 1e-9.
void check_dense_joint(const DenseJoint& joint, std::span<const int> counts,
                       const std::string& what);

enum class OptSense { kMax, kMin };

struct CceSolution {
  DenseJoint joint;
  double value = 0.0;
};

// The ego's expected payoff at each joint profile: nu[flat(a)] =
// E_{a0~ego}[u_0(a0, a)].  This is the default objective for worst-case and
// best-case equilibrium selection.
std::vector<double> ego_payoff_profile(const Game& game, const EgoStrategy& ego);

// E_{a~joint}[nu(a)].
double dense_expected(std::span<const double> nu, const DenseJoint& joint);

// Per-agent incentive audit of an explicit joint distribution, by direct
// summation over profiles (no mixture conversion).
RegretReport dense_regret(const Game& game, const EgoStrategy& ego,
                          const DenseJoint& joint);

// Optimizes nu over { x : joint distribution, per-agent deviation gain of
// every pure action <= eps[i] }.  `eps` holds one value per agent or a single
// broadcast value; entries must be >= 0 and may be +infinity (the constraint
// block is dropped when vacuous).  `nu` has one finite entry per joint
// profile.  The LP is solved exactly (within 1e-7) by the in-repo simplex;
// since the relaxed equilibrium set is never empty, a solver report of
// infeasibility is converted to std::logic_error.
CceSolution solve_cce_lp(const Game& game, const EgoStrategy& ego,
                         std::span<const double> nu, OptSense sense,
                         std::span<const double> eps);

// True iff the equilibrium set supports more than one value of nu: the gap
// between the maximized and minimized objective exceeds 1e-7.
bool decide_nontrivial_cce(const Game& game, const EgoStrategy& ego,
                           std::span<const double> nu);

}  // namespace robustcce

#endif  // ROBUSTCCE_CCE_LP_HPP_
