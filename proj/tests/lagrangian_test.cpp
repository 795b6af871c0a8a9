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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <initializer_list>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "robustcce/cce_lp.hpp"
#include "robustcce/lagrangian.hpp"
#include "robustcce/metrics.hpp"
#include "test_util.hpp"

namespace robustcce {
namespace {

using testing::make_matching_pennies;
using testing::make_pd;
using testing::point_mass;

std::vector<double> vec(std::initializer_list<double> xs) { return xs; }

// Fresh hedge learners, optionally pre-trained toward a chosen action by
// repeatedly charging every other action.
std::vector<Learner> hedge_field(std::span<const int> counts, double lr) {
  std::vector<Learner> out;
  for (int m : counts) out.push_back(Learner::hedge(m, lr));
  return out;
}

void push_toward(Learner& learner, int action, int steps) {
  std::vector<double> losses(learner.num_actions(), 1.0);
  losses[action] = 0.0;
  for (int t = 0; t < steps; ++t) learner.observe(losses);
}

TEST_CASE("modified utility blends self-interest against the ego") {
  CHECK(modified_utility(0.0, 2.0, 4.0) == doctest::Approx(-4.0));
  CHECK(modified_utility(1.0, 2.0, 4.0) == doctest::Approx(-1.0));
  CHECK(modified_utility(1e6, 2.0, 4.0) == doctest::Approx(2.0).epsilon(1e-5));
  CHECK(modified_utility(1e6, -0.5, 3.0) ==
        doctest::Approx(-0.5).epsilon(1e-5));
}

TEST_CASE("exact estimator reproduces the regret metric") {
  const Game game = make_pd();
  const EgoStrategy ego = game.uniform_ego();
  const PlayMixture cc =
      PlayMixture::single(point_mass(game.action_counts(), {0, 0}));
  RegretEstimator est;  // exact

  // At mutual cooperation each agent gains exactly 1 by defecting.
  CHECK(estimate_regret(est, game, ego, cc, {}, 0, 0) == doctest::Approx(1.0));
  CHECK(estimate_regret(est, game, ego, cc, {}, 1, 0) == doctest::Approx(1.0));
  CHECK_THROWS_AS(estimate_regret(est, game, ego, cc, {}, 2, 0),
                  std::invalid_argument);
}

TEST_CASE("exact estimation rejects evaluator-backed games") {
  const Game game(2, 1, {2, 2},
                  [](int, int, std::span<const int>) { return 0.0; },
                  PayoffBounds{0.0, 1.0});
  const EgoStrategy ego = game.uniform_ego();
  const PlayMixture mix = PlayMixture::single(game.uniform_play());
  RegretEstimator est;
  CHECK_THROWS_AS(estimate_regret(est, game, ego, mix, {}, 0, 0),
                  std::invalid_argument);
}

TEST_CASE("probe estimator finds the defection gain at mutual cooperation") {
  const Game game = make_pd();
  const EgoStrategy ego = game.uniform_ego();
  std::vector<Learner> learners = hedge_field(game.action_counts(), 1.0);
  push_toward(learners[0], 0, 40);
  push_toward(learners[1], 0, 40);

  RegretEstimator est;
  est.kind = RegretEstimator::Kind::kMonteCarloProbe;
  est.probe_steps = 2000;
  const PlayMixture unused = PlayMixture::single(game.uniform_play());
  const double r = estimate_regret(est, game, ego, unused, learners, 0, 7);
  CHECK(r >= 0.8);  // exact gain is 1; the probe's learning lag biases down
  CHECK(r <= 1.0 + 1e-9);
}

TEST_CASE("probe estimator reads near zero at an exact equilibrium") {
  // Uniform play is the unique equilibrium of matching pennies, and fresh
  // hedge learners start uniform; the probe should see nothing to gain.
  const Game game = make_matching_pennies();
  const EgoStrategy ego = game.uniform_ego();
  std::vector<Learner> learners = hedge_field(game.action_counts(), 0.05);

  RegretEstimator est;
  est.kind = RegretEstimator::Kind::kMonteCarloProbe;
  est.probe_steps = 2000;
  est.probe_batches = 2;
  const PlayMixture unused = PlayMixture::single(game.uniform_play());
  for (int agent = 0; agent < 2; ++agent) {
    const double r =
        estimate_regret(est, game, ego, unused, learners, agent, 11 + agent);
    CHECK(std::abs(r) <= 0.05);
  }
}

TEST_CASE("multiplier servo tracks the sign of excess regret") {
  const Game game = make_pd(/*with_gambler=*/true);
  const EgoStrategy ego = game.uniform_ego();
  LagrangianState state = LagrangianState::initial(2, /*eps=*/0.2);
  state.rounds = 25;
  state.selfplay_steps = 150;
  state.alpha_lambda = 0.05;

  const PessimisticResult res =
      sample_pessimistic(game, ego, state, SelfPlaySpec{}, RegretEstimator{}, 1);
  REQUIRE(static_cast<int>(res.trace.lambdas.size()) == state.rounds);

  std::vector<double> prev = state.lambdas;
  for (int r = 0; r < state.rounds; ++r) {
    for (int i = 0; i < 2; ++i) {
      const double excess = res.trace.regrets[r][i] - state.eps;
      const double next = res.trace.lambdas[r][i];
      if (excess > 1e-12) CHECK(next >= prev[i] - 1e-12);
      if (excess < -1e-12) CHECK(next <= prev[i] + 1e-12);
    }
    prev = res.trace.lambdas[r];
  }
}

TEST_CASE("pessimistic sampling is dual-feasible and nearly at equilibrium") {
  // The gambler scores only at mutual defection.  The sampler must stay a
  // lower bound on the exact pessimistic program and end near an
  // eps-relaxed equilibrium of the true utilities.
  const Game game = make_pd(/*with_gambler=*/true);
  const EgoStrategy ego = game.uniform_ego();
  const double eps = 0.1;

  LagrangianState state = LagrangianState::initial(2, eps);
  state.rounds = 60;
  state.selfplay_steps = 250;
  const PessimisticResult res =
      sample_pessimistic(game, ego, state, SelfPlaySpec{}, RegretEstimator{}, 3);

  const std::vector<double> u0 = ego_payoff_profile(game, ego);
  const double lp_min =
      solve_cce_lp(game, ego, u0, OptSense::kMin, vec({eps})).value;
  CHECK(res.lower_bound <= lp_min + 0.1);
  CHECK(res.lower_bound >= -1e-9);  // the gambler's payoffs are nonnegative
  CHECK(res.converged);
  CHECK(is_epsilon_cce(game, ego, res.mixture, vec({eps}), 0.15));
  CHECK(static_cast<int>(res.state.bound_trace.size()) == state.rounds);
}

TEST_CASE("looser slack buys deeper pessimism") {
  const Game game = make_pd(/*with_gambler=*/true);
  const EgoStrategy ego = game.uniform_ego();

  auto run = [&](double eps) {
    LagrangianState state = LagrangianState::initial(2, eps);
    state.rounds = 50;
    state.selfplay_steps = 200;
    return sample_pessimistic(game, ego, state, SelfPlaySpec{},
                              RegretEstimator{}, 5)
        .lower_bound;
  };
  const double tight = run(0.05);
  const double loose = run(1.5);
  // With slack beyond the defection gain the agents can abandon (D,D)
  // entirely, starving the gambler; a tight slack pins play near it.
  CHECK(tight >= loose + 0.3);
}

TEST_CASE("frozen multipliers pin the blend") {
  const Game game = make_pd(/*with_gambler=*/true);
  const EgoStrategy ego = game.uniform_ego();

  auto run = [&](double lambda0) {
    LagrangianState state = LagrangianState::initial(2, 0.1);
    state.lambdas.assign(2, lambda0);
    state.mode = MultiplierMode::kFrozen;
    state.rounds = 40;
    state.selfplay_steps = 200;
    return sample_pessimistic(game, ego, state, SelfPlaySpec{},
                              RegretEstimator{}, 9);
  };

  const PessimisticResult selfish = run(1e4);
  for (const std::vector<double>& l : selfish.trace.lambdas) {
    CHECK(l == std::vector<double>(2, 1e4));
  }
  CHECK(selfish.lower_bound >= 0.75);  // defection dominates, gambler feeds
  CHECK(selfish.converged);

  const PessimisticResult adversarial = run(0.0);
  CHECK(adversarial.lower_bound <= 0.2);  // play steers clear of (D,D)
}

TEST_CASE("probe-driven sampling is reproducible by seed") {
  const Game game = make_pd(/*with_gambler=*/true);
  const EgoStrategy ego = game.uniform_ego();
  LagrangianState state = LagrangianState::initial(2, 0.2);
  state.rounds = 10;
  state.selfplay_steps = 100;
  RegretEstimator est;
  est.kind = RegretEstimator::Kind::kMonteCarloProbe;
  est.probe_steps = 300;

  const PessimisticResult a =
      sample_pessimistic(game, ego, state, SelfPlaySpec{}, est, 21);
  const PessimisticResult b =
      sample_pessimistic(game, ego, state, SelfPlaySpec{}, est, 21);
  CHECK(a.lower_bound == b.lower_bound);
  CHECK(a.state.lambdas == b.state.lambdas);
}

TEST_CASE("bandit self-play stays in bounds") {
  const Game game = make_pd(/*with_gambler=*/true);
  const EgoStrategy ego = game.uniform_ego();
  LagrangianState state = LagrangianState::initial(2, 0.3);
  state.rounds = 20;
  state.selfplay_steps = 400;
  SelfPlaySpec spec;
  spec.kind = LearnerKind::kExp3;
  spec.entropy_bonus = 0.05;

  const PessimisticResult res =
      sample_pessimistic(game, ego, state, spec, RegretEstimator{}, 13);
  CHECK(res.lower_bound >= -1e-9);
  CHECK(res.lower_bound <= 1.0 + 1e-9);
  double mass = 0.0;
  for (const MixtureComponent& c : res.mixture.components) mass += c.weight;
  CHECK(mass == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("sampler input validation") {
  const Game game = make_pd();
  const EgoStrategy ego = game.uniform_ego();
  LagrangianState state = LagrangianState::initial(2, 0.1);

  LagrangianState bad = state;
  bad.lambdas = vec({1.0});
  CHECK_THROWS_AS(sample_pessimistic(game, ego, bad, SelfPlaySpec{},
                                     RegretEstimator{}, 0),
                  std::invalid_argument);
  bad = state;
  bad.alpha_lambda = 0.0;
  CHECK_THROWS_AS(sample_pessimistic(game, ego, bad, SelfPlaySpec{},
                                     RegretEstimator{}, 0),
                  std::invalid_argument);
  bad = state;
  bad.rounds = 0;
  CHECK_THROWS_AS(sample_pessimistic(game, ego, bad, SelfPlaySpec{},
                                     RegretEstimator{}, 0),
                  std::invalid_argument);
  bad = state;
  bad.lambdas = vec({-1.0, 1.0});
  CHECK_THROWS_AS(sample_pessimistic(game, ego, bad, SelfPlaySpec{},
                                     RegretEstimator{}, 0),
                  std::invalid_argument);

  RegretEstimator est;
  est.kind = RegretEstimator::Kind::kMonteCarloProbe;
  est.probe_steps = 0;
  CHECK_THROWS_AS(
      sample_pessimistic(game, ego, state, SelfPlaySpec{}, est, 0),
      std::invalid_argument);

  SelfPlaySpec exp3;
  exp3.kind = LearnerKind::kExp3;  // entropy bonus left at zero
  CHECK_THROWS_AS(
      sample_pessimistic(game, ego, state, exp3, RegretEstimator{}, 0),
      std::invalid_argument);
}

}  // namespace
}  // namespace robustcce
