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

#ifndef ROBUSTCCE_ROBUST_TRAINER_HPP_
#define ROBUSTCCE_ROBUST_TRAINER_HPP_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "robustcce/blackwell.hpp"
#include "robustcce/game.hpp"
#include "robustcce/lagrangian.hpp"
#include "robustcce/types.hpp"

namespace robustcce {

// Outer robust-optimization loop: an adversarial bandit over the ego's
// actions whose per-step reward is a pessimistic estimate of the ego's value
// over the slack-relaxed equilibrium set induced by that action.  Training
// therefore maximizes  max_{a0}  min_{eps-CCE given a0}  E[u_0]  -- the
// ego's worst-case payoff against approximately rational opponents.

enum class InnerSampler {
  kLpOracle,    // exact linear-programming minimum; dense games only
  kBlackwell,   // approachability sampler run on the negated objective
  kLagrangian,  // decoupled multiplier-servo self-play
};

// Lighter approachability budget than the standalone default: the trainer
// invokes the sampler once per outer step, so each call must stay cheap.
inline ApproachabilityOptions trainer_approachability_defaults() {
  ApproachabilityOptions o;
  o.eps_tol = 0.1;
  o.max_outer = 60;
  o.bits = 10;
  o.mixture_cap = 256;
  return o;
}

struct RobustTrainerConfig {
  InnerSampler inner = InnerSampler::kLpOracle;
  double eps = 0.0;     // per-agent slack, broadcast to every non-ego agent
  int outer_steps = 200;

  // Ego bandit: Exp3 with an entropy floor so every action keeps being
  // explored.  learning_rate 0 picks sqrt(2 ln m0 / (outer_steps * m0)).
  double ego_learning_rate = 0.0;
  double ego_entropy = 0.05;

  // Reward substituted when an inner run throws; defaults to the game's
  // payoff lower bound (the most pessimistic value possible).
  std::optional<double> reward_floor;

  // Inner-sampler knobs.  `eps` above overrides the slack inside each of
  // these.  An empty lagrangian.lambdas is filled with the balanced blend
  // (1 per agent) once the game is known.
  ApproachabilityOptions blackwell = trainer_approachability_defaults();
  LagrangianState lagrangian = LagrangianState::initial(0, 0.0);
  RegretEstimator estimator;  // used by the lagrangian inner sampler
  SelfPlaySpec selfplay;      // used by the lagrangian inner sampler
};

struct RobustTrainResult {
  // Time-averaged bandit strategy over all outer steps (the trained policy).
  EgoStrategy strategy;
  // The bandit's final iterate, for diagnostics.
  EgoStrategy final_strategy;
  // Per-step inner lower bound, original payoff units (floor on failure).
  std::vector<double> value_trace;
  int failures = 0;
  std::vector<std::string> failure_log;  // one entry per failed step
};

// Runs `outer_steps` rounds: draw an ego action from the bandit, run the
// configured inner sampler conditioned on that pure action, feed the
// resulting lower bound back as bandit reward (affinely recentred to [0, 1]
// by the game's payoff bounds).  Deterministic given the seed when the inner
// sampler is (lp-oracle and blackwell always; lagrangian with the exact
// estimator).  Inner failures are absorbed: the step's reward becomes the
// floor and the error message is logged in the result.
RobustTrainResult train_robust(const Game& game,
                               const RobustTrainerConfig& config,
                               std::uint64_t seed);

// The exact inner objective for one pure ego action: min over the
// eps-relaxed equilibrium set of the ego's expected payoff, by LP.  This is
// the value train_robust's bandit estimates per arm; exposed for
// enumeration-style verification on dense games.
double exact_worst_case_value(const Game& game, int ego_action, double eps);

// ---------------------------------------------------------------------------
// Cross-evaluation: trained ego strategies (rows) against opponent
// populations (columns).  A population is the same game re-expressed with
// transformed non-ego utilities (see the environment transforms); the ego's
// reward is always measured in `scoring_game`'s original payoffs.

struct CrossEvalCell {
  double mean = 0.0;
  double std_error = 0.0;  // sample standard error of the mean over episodes
};

// For each (ego, population) pair, runs `episodes` independent self-play
// runs of fresh learners on the population's utilities with the ego frozen,
// and scores the ego's expected original-game payoff under each run's
// empirical play.  All populations must share the scoring game's shape.
std::vector<std::vector<CrossEvalCell>> evaluate_cross(
    const Game& scoring_game, std::span<const Game> populations,
    std::span<const EgoStrategy> egos, const SelfPlaySpec& blackbox,
    int episodes, int steps_per_episode, std::uint64_t seed);

}  // namespace robustcce

#endif  // ROBUSTCCE_ROBUST_TRAINER_HPP_
