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

#ifndef ROBUSTCCE_METRICS_HPP_
#define ROBUSTCCE_METRICS_HPP_

#include <span>
#include <vector>

#include "robustcce/game.hpp"
#include "robustcce/types.hpp"

namespace robustcce {

// Ego-averaged payoff table for one agent: out[flat(a)] = E_{a0~ego} u(agent, a0, a).
// This is the workhorse representation: with the ego strategy fixed, every
// metric below is an expectation of such a table under a play distribution.
std::vector<double> ego_averaged_table(const Game& game, int agent,
                                       const EgoStrategy& ego);

// E_{a ~ product}[table(a)] by exact enumeration of pure profiles.
double expected_value(std::span<const double> table, std::span<const int> counts,
                      const ProductStrategy& strategy);
double expected_value(std::span<const double> table, std::span<const int> counts,
                      const PlayMixture& mixture);

// Deviation payoffs of `agent` when the others follow the product strategy:
// out[b] = E_{a_{-i}}[table(b, a_{-i})]. The agent's own expected value under
// the same product is dot(out, strategy.per_agent[agent]).
std::vector<double> deviation_values(std::span<const double> table,
                                     std::span<const int> counts,
                                     const ProductStrategy& strategy, int agent);

// ū_agent(ego, mixture): expected utility under the ego strategy and the play
// mixture, exact for dense and evaluator-backed games alike.
double expected_utility(const Game& game, int agent, const EgoStrategy& ego,
                        const PlayMixture& mixture);

// Per-agent external regret of the play distribution: for every agent i and
// pure deviation b, deviation_vector holds ū_i(b, x_{-i}) - ū_i(x); per_agent
// is the blockwise max.
RegretReport regret(const Game& game, const EgoStrategy& ego,
                    const PlayMixture& mixture);

// True iff per_agent_regret[i] <= eps[i] + tol for every agent. `eps` is one
// value per agent, or a single value broadcast to all agents.
bool is_epsilon_cce(const Game& game, const EgoStrategy& ego,
                    const PlayMixture& mixture, std::span<const double> eps,
                    double tol = 1e-7);

// Aggregates a bounded-rationality opponent model into the per-agent slack
// eps_i = max{ payoff_sup / (1 - gamma_m), gamma_s, 2 * gamma_p }.
double epsilon_from_bounded_rationality(const BoundedRationalityParams& p);

// Broadcast helper: per-agent slack vector from a scalar.
std::vector<double> broadcast_eps(double eps, int num_agents);

}  // namespace robustcce

#endif  // ROBUSTCCE_METRICS_HPP_
