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

#ifndef ROBUSTCCE_SMOOTHNESS_HPP_
#define ROBUSTCCE_SMOOTHNESS_HPP_

#include <span>
#include <vector>

#include "robustcce/game.hpp"
#include "robustcce/types.hpp"

namespace robustcce {

// Smoothness analysis of a cost-minimization game: the game is
// (lambda, mu)-smooth when for every pair of pure profiles (a*, a)
//
//   sum_i c_i(a*_i, a_{-i})  <=  lambda * sum_i c_i(a*) + mu * sum_i c_i(a),
//
// and lambda / (1 - mu) then bounds the ratio between the worst equilibrium's
// total cost and the optimum (the robust price of anarchy).  Checking pure
// profile pairs suffices: both sides are multilinear in the strategies, so
// the mixed inequality is an average of pure ones.

// Pair enumeration above this many joint profiles is refused.
inline constexpr long long kSmoothnessCap = 10000;

struct SmoothnessCertificate {
  double lambda = 0.0;
  double mu = 0.0;
  double rpoa = 0.0;  // lambda / (1 - mu)
  bool holds = false;
  // Largest value of LHS - RHS over all pure pairs, and the pair achieving
  // it (flat profile indices); holds means violation <= 1e-9.
  double violation = 0.0;
  long long witness_star = -1;
  long long witness_profile = -1;
};

// Ego-averaged cost tables for the non-ego agents: costs[i][flat(a)] =
// shift - E_{a0~ego}[u_{i+1}(a0, a)].  The default shift (the game's upper
// payoff bound) keeps costs nonnegative, the setting smoothness theory is
// built for; pass shift = 0 for a plain sign flip.
std::vector<std::vector<double>> cost_view(const Game& game,
                                           const EgoStrategy& ego);
std::vector<std::vector<double>> cost_view(const Game& game,
                                           const EgoStrategy& ego,
                                           double shift);

// Verifies the smoothness inequality for fixed (lambda, mu) over every pure
// profile pair.  Requires lambda > 0 and mu < 1.
SmoothnessCertificate check_smoothness(
    std::span<const std::vector<double>> costs, std::span<const int> counts,
    double lambda, double mu);

// Searches mu in [0, 1) for the certificate minimizing lambda / (1 - mu);
// the minimal feasible lambda at each mu has a closed form, and the winning
// pair is re-verified with check_smoothness before being returned.  When no
// (lambda, mu) works at all, the result has holds = false, rpoa = +infinity,
// and carries the violated witness pair of the (1, 0) check.
SmoothnessCertificate estimate_rpoa(std::span<const std::vector<double>> costs,
                                    std::span<const int> counts);

}  // namespace robustcce

#endif  // ROBUSTCCE_SMOOTHNESS_HPP_
