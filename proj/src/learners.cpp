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

#include "robustcce/learners.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace robustcce {
namespace {

constexpr long long kTabulateCap = 1000000;

void check_losses_finite(std::span<const double> losses, int expected) {
  if (static_cast<int>(losses.size()) != expected) {
    throw std::invalid_argument("loss vector has " +
                                std::to_string(losses.size()) +
                                " entries, learner has " +
                                std::to_string(expected) + " actions");
  }
  for (double v : losses) {
    if (!std::isfinite(v)) {
      throw std::invalid_argument("non-finite loss rejected");
    }
  }
}

}  // namespace

Learner::Learner(LearnerKind kind, int num_actions, double learning_rate,
                 double entropy_bonus)
    : kind_(kind), m_(num_actions), lr_(learning_rate), alpha_(entropy_bonus) {
  if (m_ < 1) throw std::invalid_argument("learner needs at least one action");
  if (kind_ != LearnerKind::kRegretMatching &&
      (!std::isfinite(lr_) || lr_ <= 0.0)) {
    throw std::invalid_argument("learning rate must be positive");
  }
  if (!std::isfinite(alpha_) || alpha_ < 0.0) {
    throw std::invalid_argument("entropy bonus must be >= 0");
  }
  if (kind_ == LearnerKind::kRegretMatching) {
    cum_regret_.assign(m_, 0.0);
  } else {
    log_weights_.assign(m_, 0.0);
  }
}

std::vector<double> Learner::base_strategy() const {
  std::vector<double> p(m_);
  if (kind_ == LearnerKind::kRegretMatching) {
    double total = 0.0;
    for (int a = 0; a < m_; ++a) {
      p[a] = std::max(cum_regret_[a], 0.0);
      total += p[a];
    }
    if (total <= 0.0) return uniform_dist(m_);
    for (double& v : p) v /= total;
    return p;
  }
  // Softmax of log-weights, shifted by the max for stability.
  const double top = *std::max_element(log_weights_.begin(), log_weights_.end());
  double total = 0.0;
  for (int a = 0; a < m_; ++a) {
    p[a] = std::exp(log_weights_[a] - top);
    total += p[a];
  }
  for (double& v : p) v /= total;
  return p;
}

std::vector<double> Learner::strategy() const {
  std::vector<double> p = base_strategy();
  if (alpha_ <= 0.0) return p;
  const double keep = 1.0 / (1.0 + alpha_);
  const double lift = alpha_ / ((1.0 + alpha_) * m_);
  for (double& v : p) v = keep * v + lift;
  return p;
}

void Learner::observe(std::span<const double> losses) {
  if (kind_ == LearnerKind::kExp3) {
    throw std::logic_error("exp3 is a bandit learner; use observe_bandit");
  }
  check_losses_finite(losses, m_);
  if (kind_ == LearnerKind::kHedge) {
    for (int a = 0; a < m_; ++a) log_weights_[a] -= lr_ * losses[a];
  } else {
    // Regret matching: accumulate how much each fixed action would have
    // outperformed the strategy actually played this step.
    const std::vector<double> p = strategy();
    double played = 0.0;
    for (int a = 0; a < m_; ++a) played += p[a] * losses[a];
    for (int a = 0; a < m_; ++a) cum_regret_[a] += played - losses[a];
  }
  ++steps_;
}

void Learner::observe_bandit(int action, double loss) {
  if (kind_ != LearnerKind::kExp3) {
    throw std::logic_error(
        "observe_bandit is only valid for exp3; full-information learners "
        "take whole loss vectors");
  }
  if (action < 0 || action >= m_) {
    throw std::invalid_argument("bandit action out of range");
  }
  if (!std::isfinite(loss)) {
    throw std::invalid_argument("non-finite loss rejected");
  }
  const std::vector<double> p = strategy();
  // Importance-weighted estimate: loss/p on the played coordinate, zero
  // elsewhere, which is unbiased for the full loss vector.
  log_weights_[action] -= lr_ * (loss / p[action]);
  ++steps_;
}

std::vector<std::vector<double>> tabulate_costs(
    const CostFn& cost, std::span<const int> action_counts) {
  const long long total = num_joints(action_counts);
  if (total > kTabulateCap) {
    throw std::invalid_argument("joint action space too large to tabulate (" +
                                std::to_string(total) + " > " +
                                std::to_string(kTabulateCap) + ")");
  }
  const int n = static_cast<int>(action_counts.size());
  std::vector<std::vector<double>> tables(n);
  for (int i = 0; i < n; ++i) {
    tables[i].resize(static_cast<size_t>(total));
    for_each_joint(action_counts, [&](std::span<const int> joint,
                                      long long flat) {
      tables[i][static_cast<size_t>(flat)] = cost(i, joint);
    });
  }
  return tables;
}

DynamicsResult run_dynamics(const CostFn& cost,
                            std::span<const int> action_counts,
                            std::vector<Learner>& learners,
                            const DynamicsOptions& options) {
  const std::vector<std::vector<double>> tables =
      tabulate_costs(cost, action_counts);
  return run_dynamics(tables, action_counts, learners, options);
}

DynamicsResult run_dynamics(std::span<const std::vector<double>> costs,
                            std::span<const int> action_counts,
                            std::vector<Learner>& learners,
                            const DynamicsOptions& options) {
  const int n = static_cast<int>(action_counts.size());
  const long long total = num_joints(action_counts);
  if (static_cast<int>(learners.size()) != n) {
    throw std::invalid_argument("need exactly one learner per agent");
  }
  if (static_cast<int>(costs.size()) != n) {
    throw std::invalid_argument("need exactly one cost table per agent");
  }
  for (int i = 0; i < n; ++i) {
    if (learners[i].num_actions() != action_counts[i]) {
      throw std::invalid_argument("learner " + std::to_string(i) +
                                  " action count mismatch");
    }
    if (static_cast<long long>(costs[i].size()) != total) {
      throw std::invalid_argument("cost table " + std::to_string(i) +
                                  " has wrong size");
    }
    for (double v : costs[i]) {
      if (!std::isfinite(v)) {
        throw std::invalid_argument("non-finite cost table entry");
      }
    }
  }
  if (options.steps < 1) throw std::invalid_argument("steps must be >= 1");
  if (options.max_mixture_components < 1) {
    throw std::invalid_argument("max_mixture_components must be >= 1");
  }

  const int steps = options.steps;
  const int stride =
      static_cast<int>((steps + options.max_mixture_components - 1) /
                       options.max_mixture_components);
  Rng rng(options.seed);

  DynamicsResult result;
  result.thinning = stride;
  result.empirical_mixture.thinning = stride;
  result.regret_trace.assign(n, std::vector<double>(steps, 0.0));

  // Cumulative played loss and per-action cumulative losses, per agent, on
  // the loss signals the learners saw.
  std::vector<double> cum_played(n, 0.0);
  std::vector<std::vector<double>> cum_action(n);
  for (int i = 0; i < n; ++i) cum_action[i].assign(action_counts[i], 0.0);

  std::vector<int> sampled(n, 0);
  std::vector<std::vector<double>> loss_vecs(n);
  const std::vector<long long> strides = joint_strides(action_counts);

  for (int t = 0; t < steps; ++t) {
    ProductStrategy play;
    play.per_agent.resize(n);
    for (int i = 0; i < n; ++i) play.per_agent[i] = learners[i].strategy();
    if (options.observer) options.observer(t, play);

    if (!options.bandit) {
      // Exact expected loss for every (agent, own action) against the product
      // of the other agents' current strategies, in one pass per agent.
      for (int i = 0; i < n; ++i) {
        loss_vecs[i].assign(action_counts[i], 0.0);
        const std::vector<double>& table = costs[i];
        for_each_joint(action_counts, [&](std::span<const int> joint,
                                          long long flat) {
          double w = 1.0;
          for (int j = 0; j < n; ++j) {
            if (j != i) w *= play.per_agent[j][joint[j]];
          }
          loss_vecs[i][joint[i]] += w * table[static_cast<size_t>(flat)];
        });
      }
      for (int i = 0; i < n; ++i) {
        learners[i].observe(loss_vecs[i]);
        double played = 0.0;
        for (int a = 0; a < action_counts[i]; ++a) {
          played += play.per_agent[i][a] * loss_vecs[i][a];
          cum_action[i][a] += loss_vecs[i][a];
        }
        cum_played[i] += played;
      }
    } else {
      for (int i = 0; i < n; ++i) {
        sampled[i] = rng.sample(play.per_agent[i]);
      }
      long long flat = 0;
      for (int i = 0; i < n; ++i) flat += strides[i] * sampled[i];
      for (int i = 0; i < n; ++i) {
        const double loss = costs[i][static_cast<size_t>(flat)];
        learners[i].observe_bandit(sampled[i], loss);
        // Importance-weighted estimate: only the played coordinate is
        // nonzero, and <p, estimate> equals the realized loss.
        cum_action[i][sampled[i]] += loss / play.per_agent[i][sampled[i]];
        cum_played[i] += loss;
      }
    }

    for (int i = 0; i < n; ++i) {
      const double best =
          *std::min_element(cum_action[i].begin(), cum_action[i].end());
      result.regret_trace[i][t] = cum_played[i] - best;
    }

    if (t % stride == 0) {
      result.empirical_mixture.components.push_back({0.0, std::move(play)});
    }
  }

  const double w =
      1.0 / static_cast<double>(result.empirical_mixture.components.size());
  for (MixtureComponent& c : result.empirical_mixture.components) c.weight = w;

  result.final_strategies.per_agent.resize(n);
  for (int i = 0; i < n; ++i) {
    result.final_strategies.per_agent[i] = learners[i].strategy();
  }
  return result;
}

}  // namespace robustcce
