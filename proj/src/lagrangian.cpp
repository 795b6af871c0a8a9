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

#include "robustcce/lagrangian.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>

#include "robustcce/cce_lp.hpp"
#include "robustcce/metrics.hpp"
#include "robustcce/rng.hpp"

namespace robustcce {
namespace {

// Sup bound M on |u_hat| for any lambda >= 0: |u_hat| <= max(|u_i|, |u_0|),
// so a single affine map (M - u_hat) / (2M) keeps every round's losses in
// [0,1] regardless of how the multipliers move.
double loss_scale(const Game& game) {
  const PayoffBounds b = game.payoff_bounds();
  return std::max({std::abs(b.lo), std::abs(b.hi), 1e-12});
}

double auto_learning_rate(LearnerKind kind, int num_actions, long long steps) {
  const double lnm = std::log(std::max(num_actions, 2));
  if (kind == LearnerKind::kExp3) {
    return std::sqrt(2.0 * lnm / (static_cast<double>(steps) * num_actions));
  }
  return std::sqrt(8.0 * lnm / static_cast<double>(steps));
}

ProductStrategy current_product(const std::vector<Learner>& learners) {
  ProductStrategy p;
  p.per_agent.reserve(learners.size());
  for (const Learner& l : learners) p.per_agent.push_back(l.strategy());
  return p;
}

// Monte-Carlo probe: clone the agent's learner and train it on the agent's
// true utility against the other agents frozen in place.  The probe reward
// averages the clone's expected payoff against each sampled opponent profile
// over the whole run, so the estimate trails the exact best-response gain
// (lower bias) but approaches it as the clone converges.
double probe_estimate(const Game& game, std::span<const double> own_table,
                      const std::vector<Learner>& learners, int agent,
                      const RegretEstimator& est, std::uint64_t seed) {
  const std::vector<int>& counts = game.action_counts();
  const std::vector<long long> strides = joint_strides(counts);
  const int n = game.num_agents();
  const int m = counts[agent];
  const double scale = loss_scale(game);

  // Exact baseline: the agent's current strategy against the frozen field.
  const ProductStrategy frozen = current_product(learners);
  const std::vector<double> dev =
      deviation_values(own_table, counts, frozen, agent);
  double baseline = 0.0;
  for (int b = 0; b < m; ++b) baseline += frozen.per_agent[agent][b] * dev[b];

  double estimate_sum = 0.0;
  std::vector<double> losses(m, 0.0);
  for (int batch = 0; batch < est.probe_batches; ++batch) {
    Rng rng(Rng::derive(seed, static_cast<std::uint64_t>(batch)));
    Learner clone = learners[agent];
    double reward_sum = 0.0;
    for (int t = 0; t < est.probe_steps; ++t) {
      long long base = 0;
      for (int j = 0; j < n; ++j) {
        if (j == agent) continue;
        base += rng.sample(frozen.per_agent[j]) * strides[j];
      }
      const std::vector<double> p = clone.strategy();
      double reward = 0.0;
      for (int b = 0; b < m; ++b) {
        const double u = own_table[base + b * strides[agent]];
        reward += p[b] * u;
        losses[b] = (scale - u) / (2.0 * scale);
      }
      reward_sum += reward;
      if (clone.kind() == LearnerKind::kExp3) {
        const int a = rng.sample(p);
        clone.observe_bandit(a, losses[a]);
      } else {
        clone.observe(losses);
      }
    }
    estimate_sum += reward_sum / est.probe_steps - baseline;
  }
  const double estimate = estimate_sum / est.probe_batches;
  if (!std::isfinite(estimate)) {
    throw std::runtime_error(
        "monte-carlo regret probe diverged for agent " + std::to_string(agent));
  }
  return estimate;
}

void validate_state(const LagrangianState& s, int n) {
  if (s.lambdas.size() != static_cast<std::size_t>(n)) {
    throw std::invalid_argument("lambdas must have one entry per agent");
  }
  for (double l : s.lambdas) {
    if (!std::isfinite(l) || l < 0.0) {
      throw std::invalid_argument("lambdas must be finite and >= 0");
    }
  }
  if (!std::isfinite(s.eps) || s.eps < 0.0) {
    throw std::invalid_argument("eps must be finite and >= 0");
  }
  if (!(s.alpha_lambda > 0.0) || !std::isfinite(s.alpha_lambda)) {
    throw std::invalid_argument("alpha_lambda must be positive");
  }
  if (s.rounds < 1) throw std::invalid_argument("rounds must be >= 1");
  if (s.selfplay_steps < 1) {
    throw std::invalid_argument("selfplay_steps must be >= 1");
  }
  if (!(s.lambda_max > 0.0)) {
    throw std::invalid_argument("lambda_max must be positive");
  }
}

void validate_estimator(const RegretEstimator& est, const Game& game) {
  if (est.kind == RegretEstimator::Kind::kExact && !game.is_dense()) {
    throw std::invalid_argument("exact regret estimation needs a dense game");
  }
  if (est.probe_steps < 1 || est.probe_batches < 1) {
    throw std::invalid_argument("probe_steps and probe_batches must be >= 1");
  }
}

}  // namespace

double modified_utility(double lambda, double u_agent, double u_ego) {
  return (lambda * u_agent - u_ego) / (1.0 + lambda);
}

std::vector<Learner> make_selfplay_learners(const SelfPlaySpec& spec,
                                            std::span<const int> counts,
                                            long long total_steps) {
  std::vector<Learner> learners;
  learners.reserve(counts.size());
  for (int m : counts) {
    const double lr = spec.learning_rate > 0.0
                          ? spec.learning_rate
                          : auto_learning_rate(spec.kind, m, total_steps);
    learners.emplace_back(spec.kind, m, lr, spec.entropy_bonus);
  }
  return learners;
}

double estimate_regret(const RegretEstimator& estimator, const Game& game,
                       const EgoStrategy& ego, const PlayMixture& mixture,
                       const std::vector<Learner>& learners, int agent,
                       std::uint64_t seed) {
  if (agent < 0 || agent >= game.num_agents()) {
    throw std::invalid_argument("agent out of range");
  }
  validate_estimator(estimator, game);
  if (estimator.kind == RegretEstimator::Kind::kExact) {
    return regret(game, ego, mixture).per_agent[agent];
  }
  if (learners.size() != static_cast<std::size_t>(game.num_agents())) {
    throw std::invalid_argument("probe estimation needs one learner per agent");
  }
  const std::vector<double> own = ego_averaged_table(game, agent + 1, ego);
  return probe_estimate(game, own, learners, agent, estimator, seed);
}

PessimisticResult sample_pessimistic(const Game& game, const EgoStrategy& ego,
                                     const LagrangianState& init,
                                     const SelfPlaySpec& blackbox,
                                     const RegretEstimator& estimator,
                                     std::uint64_t seed) {
  const int n = game.num_agents();
  validate_state(init, n);
  validate_estimator(estimator, game);
  if (game.joint_count() > kDenseJointCap) {
    throw std::invalid_argument("joint action space too large to tabulate");
  }
  if (blackbox.kind == LearnerKind::kExp3 && !(blackbox.entropy_bonus > 0.0)) {
    throw std::invalid_argument("exp3 self-play needs a positive entropy bonus");
  }

  const std::vector<int>& counts = game.action_counts();
  std::vector<std::vector<double>> util(n);
  for (int i = 0; i < n; ++i) util[i] = ego_averaged_table(game, i + 1, ego);
  const std::vector<double> u0 = ego_averaged_table(game, 0, ego);
  const double scale = loss_scale(game);
  const bool bandit = blackbox.kind == LearnerKind::kExp3;

  PessimisticResult res;
  res.state = init;
  res.state.bound_trace.clear();
  std::vector<double>& lambdas = res.state.lambdas;

  const long long total_steps =
      static_cast<long long>(init.rounds) * init.selfplay_steps;
  std::vector<Learner> learners =
      make_selfplay_learners(blackbox, counts, total_steps);
  PlayMixture current = PlayMixture::single(current_product(learners));

  std::vector<std::vector<double>> costs(
      n, std::vector<double>(static_cast<std::size_t>(game.joint_count())));
  std::vector<double> regrets(n, 0.0);

  for (int round = 0; round < init.rounds; ++round) {
    // 1. Estimate each agent's true-utility regret on the current play.
    if (estimator.kind == RegretEstimator::Kind::kExact) {
      const RegretReport rep = regret(game, ego, current);
      regrets = rep.per_agent;
    } else {
      for (int i = 0; i < n; ++i) {
        const std::uint64_t probe_seed = Rng::derive(
            seed, static_cast<std::uint64_t>(round) * (n + 1) + i + 1);
        regrets[i] =
            probe_estimate(game, util[i], learners, i, estimator, probe_seed);
      }
    }

    // 2. Servo the multipliers: regret above the allowance pushes the agent
    // toward self-interest (higher lambda), regret below it releases the
    // agent toward adversarial play.
    if (init.mode == MultiplierMode::kDynamic) {
      for (int i = 0; i < n; ++i) {
        lambdas[i] = std::clamp(
            lambdas[i] + init.alpha_lambda * (regrets[i] - init.eps), 0.0,
            init.lambda_max);
      }
    }

    // 3. Self-play on the modified utilities with persistent learner state.
    for (int i = 0; i < n; ++i) {
      const double li = lambdas[i];
      std::vector<double>& c = costs[i];
      const std::vector<double>& ui = util[i];
      for (std::size_t f = 0; f < c.size(); ++f) {
        c[f] = (scale - modified_utility(li, ui[f], u0[f])) / (2.0 * scale);
      }
    }
    DynamicsOptions opts;
    opts.steps = init.selfplay_steps;
    opts.bandit = bandit;
    opts.seed = Rng::derive(seed, 1000000 + static_cast<std::uint64_t>(round));
    DynamicsResult dyn = run_dynamics(costs, counts, learners, opts);
    current = std::move(dyn.empirical_mixture);

    const double ego_value = expected_utility(game, 0, ego, current);
    res.state.bound_trace.push_back(ego_value);
    res.trace.lambdas.push_back(lambdas);
    res.trace.regrets.push_back(regrets);
    res.trace.ego_values.push_back(ego_value);
    res.lower_bound += ego_value;
  }
  res.lower_bound /= init.rounds;
  res.mixture = std::move(current);

  // Convergence heuristic: the multipliers stopped drifting over the last
  // quarter of the run (clamped rails count as stable).  Short runs pass by
  // default; frozen mode never moves.
  res.converged = true;
  if (init.mode == MultiplierMode::kDynamic && init.rounds >= 8) {
    const int q = init.rounds / 4;
    const std::vector<double>& then = res.trace.lambdas[init.rounds - 1 - q];
    for (int i = 0; i < n; ++i) {
      const double drift = std::abs(lambdas[i] - then[i]);
      if (drift > std::max(1.0, 0.05 * std::abs(lambdas[i]))) {
        res.converged = false;
      }
    }
  }
  return res;
}

}  // namespace robustcce
