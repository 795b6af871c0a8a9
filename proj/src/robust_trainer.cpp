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

#include "robustcce/robust_trainer.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>

#include "robustcce/cce_lp.hpp"
#include "robustcce/learners.hpp"
#include "robustcce/metrics.hpp"
#include "robustcce/rng.hpp"

namespace robustcce {
namespace {

EgoStrategy point_ego(int ego_actions, int action) {
  EgoStrategy e;
  e.dist.assign(ego_actions, 0.0);
  e.dist[action] = 1.0;
  return e;
}

double exp3_auto_rate(int num_actions, int steps) {
  const double lnm = std::log(std::max(num_actions, 2));
  return std::sqrt(2.0 * lnm / (static_cast<double>(steps) * num_actions));
}

void validate_config(const Game& game, const RobustTrainerConfig& config) {
  if (config.outer_steps < 1) {
    throw std::invalid_argument("outer_steps must be >= 1");
  }
  if (!(config.eps >= 0.0) || !std::isfinite(config.eps)) {
    throw std::invalid_argument("eps must be finite and >= 0");
  }
  if (!(config.ego_entropy > 0.0)) {
    throw std::invalid_argument(
        "the ego bandit needs a positive entropy floor");
  }
  if (config.ego_learning_rate < 0.0) {
    throw std::invalid_argument("ego_learning_rate must be >= 0");
  }
  if (config.inner == InnerSampler::kLpOracle && !game.is_dense()) {
    throw std::invalid_argument(
        "the lp-oracle inner sampler needs a dense game");
  }
  if (game.joint_count() > kDenseJointCap) {
    throw std::invalid_argument("joint action space too large to tabulate");
  }
  if (config.reward_floor && !std::isfinite(*config.reward_floor)) {
    throw std::invalid_argument("reward_floor must be finite");
  }
}

// Worst-case lower bound for one pure ego action via the configured sampler.
double inner_lower_bound(const Game& game, int a0,
                         const RobustTrainerConfig& config,
                         std::uint64_t inner_seed) {
  const EgoStrategy ego = point_ego(game.ego_actions(), a0);
  switch (config.inner) {
    case InnerSampler::kLpOracle: {
      const std::vector<double> nu = ego_payoff_profile(game, ego);
      const std::vector<double> eps(1, config.eps);
      return solve_cce_lp(game, ego, nu, OptSense::kMin, eps).value;
    }
    case InnerSampler::kBlackwell: {
      // The approachability sampler maximizes its objective; negating nu
      // turns its maximum into the desired minimum.
      std::vector<double> nu = ego_payoff_profile(game, ego);
      for (double& x : nu) x = -x;
      ApproachabilityOptions opts = config.blackwell;
      opts.eps.assign(1, config.eps);
      return -worst_case_cce(game, ego, nu, opts).value;
    }
    case InnerSampler::kLagrangian: {
      LagrangianState state = config.lagrangian;
      state.eps = config.eps;
      if (state.lambdas.empty()) {
        state.lambdas.assign(game.num_agents(), 1.0);
      }
      return sample_pessimistic(game, ego, state, config.selfplay,
                                config.estimator, inner_seed)
          .lower_bound;
    }
  }
  throw std::logic_error("unknown inner sampler");
}

}  // namespace

double exact_worst_case_value(const Game& game, int ego_action, double eps) {
  if (ego_action < 0 || ego_action >= game.ego_actions()) {
    throw std::invalid_argument("ego_action out of range");
  }
  const EgoStrategy ego = point_ego(game.ego_actions(), ego_action);
  const std::vector<double> nu = ego_payoff_profile(game, ego);
  const std::vector<double> eps_vec(1, eps);
  return solve_cce_lp(game, ego, nu, OptSense::kMin, eps_vec).value;
}

RobustTrainResult train_robust(const Game& game,
                               const RobustTrainerConfig& config,
                               std::uint64_t seed) {
  validate_config(game, config);
  const int m0 = game.ego_actions();
  const PayoffBounds bounds = game.payoff_bounds();
  const double range = bounds.hi - bounds.lo;
  const double inv_range = range > 1e-12 ? 1.0 / range : 0.0;
  const double floor = config.reward_floor.value_or(bounds.lo);

  const double lr = config.ego_learning_rate > 0.0
                        ? config.ego_learning_rate
                        : exp3_auto_rate(m0, config.outer_steps);
  Learner bandit = Learner::exp3(m0, lr, config.ego_entropy);
  Rng rng(Rng::derive(seed, 0));

  RobustTrainResult result;
  result.value_trace.reserve(config.outer_steps);
  std::vector<double> average(m0, 0.0);

  for (int t = 0; t < config.outer_steps; ++t) {
    const std::vector<double> x0 = bandit.strategy();
    for (int b = 0; b < m0; ++b) average[b] += x0[b];
    const int a0 = rng.sample(x0);

    double bound = floor;
    try {
      bound = inner_lower_bound(game, a0, config,
                                Rng::derive(seed, 1 + static_cast<std::uint64_t>(t)));
    } catch (const std::exception& e) {
      ++result.failures;
      result.failure_log.push_back("step " + std::to_string(t) + " (action " +
                                   std::to_string(a0) + "): " + e.what());
    }
    result.value_trace.push_back(bound);

    // Recentre to [0,1] by the payoff bounds; estimator noise can spill a
    // little past the exact value, so clamp.
    const double reward = std::clamp((bound - bounds.lo) * inv_range, 0.0, 1.0);
    bandit.observe_bandit(a0, 1.0 - reward);
  }

  for (double& b : average) b /= config.outer_steps;
  result.strategy.dist = std::move(average);
  result.final_strategy.dist = bandit.strategy();
  return result;
}

std::vector<std::vector<CrossEvalCell>> evaluate_cross(
    const Game& scoring_game, std::span<const Game> populations,
    std::span<const EgoStrategy> egos, const SelfPlaySpec& blackbox,
    int episodes, int steps_per_episode, std::uint64_t seed) {
  if (populations.empty() || egos.empty()) {
    throw std::invalid_argument(
        "cross-evaluation needs at least one ego and one population");
  }
  if (episodes < 1 || steps_per_episode < 1) {
    throw std::invalid_argument("episodes and steps must be >= 1");
  }
  if (blackbox.kind == LearnerKind::kExp3 && !(blackbox.entropy_bonus > 0.0)) {
    throw std::invalid_argument("exp3 self-play needs a positive entropy bonus");
  }
  if (scoring_game.joint_count() > kDenseJointCap) {
    throw std::invalid_argument("joint action space too large to tabulate");
  }
  const std::vector<int>& counts = scoring_game.action_counts();
  for (const Game& pop : populations) {
    if (pop.num_agents() != scoring_game.num_agents() ||
        pop.ego_actions() != scoring_game.ego_actions() ||
        pop.action_counts() != counts) {
      throw std::invalid_argument(
          "every population must share the scoring game's shape");
    }
  }
  for (const EgoStrategy& ego : egos) {
    check_distribution(ego.dist, "ego strategy");
    if (static_cast<int>(ego.dist.size()) != scoring_game.ego_actions()) {
      throw std::invalid_argument("ego strategy has the wrong arity");
    }
  }

  const int n = scoring_game.num_agents();
  const std::size_t num_rows = egos.size();
  const std::size_t num_cols = populations.size();
  std::vector<std::vector<CrossEvalCell>> table(
      num_rows, std::vector<CrossEvalCell>(num_cols));

  for (std::size_t row = 0; row < num_rows; ++row) {
    for (std::size_t col = 0; col < num_cols; ++col) {
      const Game& pop = populations[col];
      const PayoffBounds pb = pop.payoff_bounds();
      const double scale = std::max({std::abs(pb.lo), std::abs(pb.hi), 1e-12});

      // The population's loss tables under this frozen ego.
      std::vector<std::vector<double>> costs(n);
      for (int i = 0; i < n; ++i) {
        costs[i] = ego_averaged_table(pop, i + 1, egos[row]);
        for (double& u : costs[i]) u = (scale - u) / (2.0 * scale);
      }

      std::vector<double> values;
      values.reserve(episodes);
      for (int ep = 0; ep < episodes; ++ep) {
        std::vector<Learner> learners =
            make_selfplay_learners(blackbox, counts, steps_per_episode);
        DynamicsOptions opts;
        opts.steps = steps_per_episode;
        opts.bandit = blackbox.kind == LearnerKind::kExp3;
        opts.seed = Rng::derive(
            seed, (row * num_cols + col) * static_cast<std::size_t>(episodes) +
                      static_cast<std::size_t>(ep));
        const DynamicsResult run = run_dynamics(costs, counts, learners, opts);
        values.push_back(expected_utility(scoring_game, 0, egos[row],
                                          run.empirical_mixture));
      }

      double mean = 0.0;
      for (double v : values) mean += v;
      mean /= episodes;
      double var = 0.0;
      for (double v : values) var += (v - mean) * (v - mean);
      const double std_error =
          episodes > 1 ? std::sqrt(var / (episodes - 1)) / std::sqrt(episodes)
                       : 0.0;
      table[row][col] = CrossEvalCell{mean, std_error};
    }
  }
  return table;
}

}  // namespace robustcce
