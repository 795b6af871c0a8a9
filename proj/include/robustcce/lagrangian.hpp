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

#ifndef ROBUSTCCE_LAGRANGIAN_HPP_
#define ROBUSTCCE_LAGRANGIAN_HPP_

#include <cstdint>
#include <vector>

#include "robustcce/game.hpp"
#include "robustcce/learners.hpp"
#include "robustcce/types.hpp"

namespace robustcce {

// Decoupled sampler of pessimistic (low ego value) relaxed equilibria.  Each
// agent plays no-regret self-play on a modified utility that blends its own
// payoff with the negated ego payoff,
//
//   u_hat_i(a) = (lambda_i * u_i(a) - u_0(a)) / (1 + lambda_i),
//
// so lambda_i = 0 is fully adversarial and lambda_i -> infinity fully
// self-interested.  A multiplier servo raises lambda_i while the agent's
// estimated regret exceeds the slack eps and lowers it otherwise, settling
// where true-utility regret is about eps: play is then a near-eps-relaxed
// equilibrium that is as bad for the ego as that slack permits.  The running
// average of the ego's value lower-bounds the exact pessimistic optimum
// (weak duality of the corresponding Lagrangian program).

enum class MultiplierMode {
  kDynamic,  // servo updates each round
  kFrozen,   // multipliers stay at their initial values (ablation)
};

struct LagrangianState {
  std::vector<double> lambdas;  // one per agent, clamped to [0, lambda_max]
  double eps = 0.0;             // per-agent regret allowance, payoff units
  double alpha_lambda = 0.25;   // multiplier learning rate
  int rounds = 60;              // servo rounds (M_tr)
  int selfplay_steps = 250;     // self-play steps per round (M_s)
  MultiplierMode mode = MultiplierMode::kDynamic;
  double lambda_max = 1e4;
  // Per-round ego value of the round's empirical play; filled by the sampler.
  std::vector<double> bound_trace;

  // Default initialization for matrix games: every multiplier starts at 1,
  // the balanced blend (self-interest and antagonism weighted equally), so
  // the servo reaches either extreme within a short horizon.
  static LagrangianState initial(int num_agents, double eps) {
    LagrangianState s;
    s.lambdas.assign(num_agents, 1.0);
    s.eps = eps;
    return s;
  }
};

struct RegretEstimator {
  enum class Kind {
    kExact,            // full regret computation; dense games only
    kMonteCarloProbe,  // clone the agent's learner, train it on its true
                       // utility against frozen opponents, report the mean
                       // reward improvement (a stochastic lower-bias estimate)
  };
  Kind kind = Kind::kExact;
  int probe_steps = 2000;
  int probe_batches = 1;  // independent probes averaged together
};

// The blackbox self-play learners, one per agent.  learning_rate 0 picks
// sqrt(8 ln m / T) over the total step horizon (hedge/exp3).  Exp3 runs the
// dynamics in bandit mode and requires a positive entropy bonus so its
// importance weights stay bounded.
struct SelfPlaySpec {
  LearnerKind kind = LearnerKind::kHedge;
  double learning_rate = 0.0;
  double entropy_bonus = 0.0;
};

// (lambda * u_agent - u_ego) / (1 + lambda).
double modified_utility(double lambda, double u_agent, double u_ego);

// One learner per agent, built from the spec.  A zero learning rate picks
// the no-regret tuning for `total_steps` of play (sqrt(8 ln m / T) full
// information, sqrt(2 ln m / (T m)) bandit).
std::vector<Learner> make_selfplay_learners(const SelfPlaySpec& spec,
                                            std::span<const int> counts,
                                            long long total_steps);

// Regret estimate for one agent.  The exact kind evaluates the play mixture;
// the probe kind clones `learners[agent]`, freezes everyone else at their
// current strategy, and trains the clone on the agent's true utility.
double estimate_regret(const RegretEstimator& estimator, const Game& game,
                       const EgoStrategy& ego, const PlayMixture& mixture,
                       const std::vector<Learner>& learners, int agent,
                       std::uint64_t seed);

struct PessimisticTrace {
  // Post-update multipliers, regret estimates, and the ego value of the
  // round's empirical play, one entry per round.
  std::vector<std::vector<double>> lambdas;
  std::vector<std::vector<double>> regrets;
  std::vector<double> ego_values;
};

struct PessimisticResult {
  PlayMixture mixture;       // final round's empirical play
  double lower_bound = 0.0;  // mean of the per-round ego values
  bool converged = true;     // multipliers stopped drifting (heuristic)
  LagrangianState state;     // final multipliers and the filled bound_trace
  PessimisticTrace trace;
};

// Runs `rounds` servo rounds: estimate per-agent regrets, update multipliers
// (dynamic mode only), then run `selfplay_steps` of no-regret self-play on
// the modified utilities with learner state persisting across rounds.
// Deterministic given the seed and an exact estimator.
PessimisticResult sample_pessimistic(const Game& game, const EgoStrategy& ego,
                                     const LagrangianState& init,
                                     const SelfPlaySpec& blackbox,
                                     const RegretEstimator& estimator,
                                     std::uint64_t seed);

}  // namespace robustcce

#endif  // ROBUSTCCE_LAGRANGIAN_HPP_
