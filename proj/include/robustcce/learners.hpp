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

#ifndef ROBUSTCCE_LEARNERS_HPP_
#define ROBUSTCCE_LEARNERS_HPP_

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "robustcce/rng.hpp"
#include "robustcce/types.hpp"

namespace robustcce {

// Uncoupled no-regret learners over a finite action set, plus a runner that
// iterates several of them against each other and records the empirical play
// distribution.  Learners minimize LOSS (cost); callers working with utilities
// should negate and, for hedge's regret guarantee, rescale losses into [0,1].

enum class LearnerKind {
  kHedge,           // multiplicative weights on full loss vectors
  kRegretMatching,  // play proportional to positive cumulative regrets
  kExp3,            // hedge on importance-weighted bandit loss estimates
};

class Learner {
 public:
  // `learning_rate` must be > 0 for hedge and exp3 (regret matching ignores
  // it).  `entropy_bonus` (alpha >= 0) mixes every emitted strategy with the
  // uniform distribution at rate alpha/(1+alpha), so each action keeps
  // probability at least alpha/(m*(1+alpha)).  alpha = 0 disables the floor.
  Learner(LearnerKind kind, int num_actions, double learning_rate,
          double entropy_bonus = 0.0);

  static Learner hedge(int num_actions, double learning_rate,
                       double entropy_bonus = 0.0) {
    return Learner(LearnerKind::kHedge, num_actions, learning_rate,
                   entropy_bonus);
  }
  static Learner regret_matching(int num_actions, double entropy_bonus = 0.0) {
    return Learner(LearnerKind::kRegretMatching, num_actions, /*lr=*/1.0,
                   entropy_bonus);
  }
  static Learner exp3(int num_actions, double learning_rate,
                      double entropy_bonus) {
    return Learner(LearnerKind::kExp3, num_actions, learning_rate,
                   entropy_bonus);
  }

  // The strategy the learner plays right now (entropy floor applied).
  std::vector<double> strategy() const;

  // Full-information update: one finite loss per action.  Valid for hedge and
  // regret matching.  Throws std::invalid_argument on non-finite losses or a
  // length mismatch, and std::logic_error if called on an exp3 learner.
  void observe(std::span<const double> losses);

  // Bandit update: the loss of the action actually played, assumed sampled
  // from the strategy() that was current when the action was chosen.  Valid
  // for exp3 only.  Throws std::invalid_argument on a bad action index or
  // non-finite loss, and std::logic_error for full-information learners.
  void observe_bandit(int action, double loss);

  LearnerKind kind() const { return kind_; }
  int num_actions() const { return m_; }
  double learning_rate() const { return lr_; }
  double entropy_bonus() const { return alpha_; }
  int step_count() const { return steps_; }

 private:
  std::vector<double> base_strategy() const;

  LearnerKind kind_;
  int m_;
  double lr_;
  double alpha_;
  int steps_ = 0;
  // Hedge/exp3 keep log-weights (numerically stable multiplicative updates);
  // regret matching keeps cumulative regrets.  Only one vector is used.
  std::vector<double> log_weights_;
  std::vector<double> cum_regret_;
};

// Per-agent cost oracle over joint pure-action profiles.  `joint` has one
// entry per agent (the agents driven by the learners; any ego averaging has
// already been folded into the oracle by the caller).
using CostFn = std::function<double(int agent, std::span<const int> joint)>;

struct DynamicsOptions {
  int steps = 1000;
  // Full-information mode (default) feeds each learner its exact expected
  // loss vector against the product of the other agents' current strategies.
  // Bandit mode samples one joint action per step and feeds realized losses.
  bool bandit = false;
  std::uint64_t seed = 0;  // used by bandit sampling only
  // Empirical mixtures are subsampled to at most this many components
  // (uniform stride); the stride is recorded in DynamicsResult::thinning.
  int max_mixture_components = 4096;
  // Optional hook called once per step with the product strategy the agents
  // played at that step (before the losses were revealed).
  std::function<void(int step, const ProductStrategy&)> observer;
};

struct DynamicsResult {
  // Uniform mixture over the retained iterates' product strategies.
  PlayMixture empirical_mixture;
  // One kept iterate every `thinning` steps (1 = nothing dropped).
  int thinning = 1;
  // Strategies after the final update.
  ProductStrategy final_strategies;
  // regret_trace[i][t] is agent i's cumulative external regret after t+1
  // steps: sum of played expected losses minus the best fixed action's
  // cumulative loss, both measured on the loss vectors the learner saw (exact
  // expectations in full-information mode, importance-weighted estimates in
  // bandit mode).
  std::vector<std::vector<double>> regret_trace;
};

// Runs simultaneous no-regret dynamics: at each step every agent commits its
// current strategy, then observes its loss.  `costs[i]` is agent i's flat
// row-major cost table over the joint action space of shape `action_counts`.
// Deterministic given the seed.  One learner per agent is required.
DynamicsResult run_dynamics(std::span<const std::vector<double>> costs,
                            std::span<const int> action_counts,
                            std::vector<Learner>& learners,
                            const DynamicsOptions& options);

// Convenience overload that tabulates the oracle into dense cost tables
// first.  Requires the joint space to fit the same cap as DenseJoint
// (num_joints(action_counts) <= 1e6); oracle exceptions propagate.
DynamicsResult run_dynamics(const CostFn& cost,
                            std::span<const int> action_counts,
                            std::vector<Learner>& learners,
                            const DynamicsOptions& options);

// Tabulates `cost` into one flat row-major table per agent.
std::vector<std::vector<double>> tabulate_costs(
    const CostFn& cost, std::span<const int> action_counts);

}  // namespace robustcce

#endif  // ROBUSTCCE_LEARNERS_HPP_
