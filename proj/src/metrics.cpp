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

#include "robustcce/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace robustcce {

std::vector<double> ego_averaged_table(const Game& game, int agent,
                                       const EgoStrategy& ego) {
  if (agent < 0 || agent > game.num_agents()) {
    throw std::invalid_argument("ego_averaged_table: agent index out of range");
  }
  check_distribution(ego.dist, "ego strategy");
  if (static_cast<int>(ego.dist.size()) != game.ego_actions()) {
    throw std::invalid_argument("ego_averaged_table: ego strategy has wrong arity");
  }
  const std::vector<int>& counts = game.action_counts();
  const long long joints = game.joint_count();
  std::vector<double> table(joints, 0.0);
  if (game.is_dense()) {
    std::span<const double> p = game.dense_payoffs();
    const long long agent_base = static_cast<long long>(agent) * game.ego_actions() * joints;
    for (int a0 = 0; a0 < game.ego_actions(); ++a0) {
      const double w = ego.dist[a0];
      if (w == 0.0) continue;
      const double* block = p.data() + agent_base + static_cast<long long>(a0) * joints;
      for (long long f = 0; f < joints; ++f) table[f] += w * block[f];
    }
  } else {
    for_each_joint(counts, [&](std::span<const int> a, long long flat) {
      double v = 0.0;
      for (int a0 = 0; a0 < game.ego_actions(); ++a0) {
        if (ego.dist[a0] == 0.0) continue;
        v += ego.dist[a0] * game.payoff(agent, a0, a);
      }
      table[flat] = v;
    });
  }
  return table;
}

double expected_value(std::span<const double> table, std::span<const int> counts,
                      const ProductStrategy& strategy) {
  check_product(strategy, counts, "product strategy");
  double total = 0.0;
  for_each_joint(counts, [&](std::span<const int> a, long long flat) {
    double prob = 1.0;
    for (size_t i = 0; i < a.size(); ++i) prob *= strategy.per_agent[i][a[i]];
    if (prob != 0.0) total += prob * table[flat];
  });
  return total;
}

double expected_value(std::span<const double> table, std::span<const int> counts,
                      const PlayMixture& mixture) {
  check_mixture(mixture, counts, "play mixture");
  double total = 0.0;
  for (const MixtureComponent& c : mixture.components) {
    if (c.weight == 0.0) continue;
    total += c.weight * expected_value(table, counts, c.strategy);
  }
  return total;
}

std::vector<double> deviation_values(std::span<const double> table,
                                     std::span<const int> counts,
                                     const ProductStrategy& strategy, int agent) {
  check_product(strategy, counts, "product strategy");
  if (agent < 0 || agent >= static_cast<int>(counts.size())) {
    throw std::invalid_argument("deviation_values: agent index out of range");
  }
  std::vector<double> dev(counts[agent], 0.0);
  // One pass over all joints: grouping by a_{-i}, the entry for deviation
  // b = a_i accumulates the probability of the *others'* actions only.
  for_each_joint(counts, [&](std::span<const int> a, long long flat) {
    double w = 1.0;
    for (size_t j = 0; j < a.size(); ++j) {
      if (static_cast<int>(j) == agent) continue;
      w *= strategy.per_agent[j][a[j]];
    }
    if (w != 0.0) dev[a[agent]] += w * table[flat];
  });
  return dev;
}

double expected_utility(const Game& game, int agent, const EgoStrategy& ego,
                        const PlayMixture& mixture) {
  check_mixture(mixture, game.action_counts(), "play mixture");
  std::vector<double> table = ego_averaged_table(game, agent, ego);
  return expected_value(table, game.action_counts(), mixture);
}

RegretReport regret(const Game& game, const EgoStrategy& ego,
                    const PlayMixture& mixture) {
  const std::vector<int>& counts = game.action_counts();
  check_mixture(mixture, counts, "play mixture");
  const int n = game.num_agents();
  RegretReport report;
  report.per_agent.resize(n);
  for (int i = 1; i <= n; ++i) {
    std::vector<double> table = ego_averaged_table(game, i, ego);
    const int mi = counts[i - 1];
    std::vector<double> dev_mix(mi, 0.0);
    double base_mix = 0.0;
    for (const MixtureComponent& c : mixture.components) {
      if (c.weight == 0.0) continue;
      std::vector<double> dev = deviation_values(table, counts, c.strategy, i - 1);
      double base = 0.0;
      for (int b = 0; b < mi; ++b) {
        dev_mix[b] += c.weight * dev[b];
        base += c.strategy.per_agent[i - 1][b] * dev[b];
      }
      base_mix += c.weight * base;
    }
    double best = -std::numeric_limits<double>::infinity();
    for (int b = 0; b < mi; ++b) {
      const double gain = dev_mix[b] - base_mix;
      report.deviation_vector.push_back(gain);
      best = std::max(best, gain);
    }
    report.per_agent[i - 1] = best;
  }
  return report;
}

bool is_epsilon_cce(const Game& game, const EgoStrategy& ego,
                    const PlayMixture& mixture, std::span<const double> eps,
                    double tol) {
  const int n = game.num_agents();
  if (eps.size() != 1 && eps.size() != static_cast<size_t>(n)) {
    throw std::invalid_argument("is_epsilon_cce: eps must have 1 or num_agents entries");
  }
  for (double e : eps) {
    if (!(e >= 0.0)) throw std::invalid_argument("is_epsilon_cce: eps must be >= 0");
  }
  RegretReport report = regret(game, ego, mixture);
  for (int i = 0; i < n; ++i) {
    const double ei = eps.size() == 1 ? eps[0] : eps[i];
    if (report.per_agent[i] > ei + tol) return false;
  }
  return true;
}

double epsilon_from_bounded_rationality(const BoundedRationalityParams& p) {
  if (!(p.gamma_m >= 0.0) || p.gamma_m >= 1.0) {
    throw std::invalid_argument(
        "epsilon_from_bounded_rationality: gamma_m must lie in [0, 1)");
  }
  if (!(p.gamma_s >= 0.0) || !(p.gamma_p >= 0.0) || !(p.payoff_sup >= 0.0)) {
    throw std::invalid_argument(
        "epsilon_from_bounded_rationality: negative parameter");
  }
  return std::max({p.payoff_sup / (1.0 - p.gamma_m), p.gamma_s, 2.0 * p.gamma_p});
}

std::vector<double> broadcast_eps(double eps, int num_agents) {
  if (!(eps >= 0.0)) throw std::invalid_argument("broadcast_eps: eps must be >= 0");
  return std::vector<double>(num_agents, eps);
}

}  // namespace robustcce
