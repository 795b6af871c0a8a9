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
#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "robustcce/cce_lp.hpp"
#include "robustcce/metrics.hpp"
#include "robustcce/robust_trainer.hpp"
#include "test_util.hpp"

namespace robustcce {
namespace {

using testing::build_dense;
using testing::make_pd;

// Leader-follower bimatrix where the follower is nearly indifferent: its
// first action beats the second by exactly 1 everywhere, while the leader's
// top action is great against the first (100) and poor against the second
// (50), and its bottom action pays 99 regardless.  A tiny rationality slack
// lets the follower mix toward its second action, which flips the leader's
// safe choice from top to bottom.
Game make_near_indifferent_follower() {
  return build_dense(1, 2, {2}, [](int agent, int e, std::span<const int> a) {
    if (agent == 1) return a[0] == 0 ? 100.0 : 99.0;
    if (e == 1) return 99.0;
    return a[0] == 0 ? 100.0 : 50.0;
  });
}

// Follower-independent leader payoffs: the worst case for each leader action
// is the constant itself, so the bandit's target is plain argmax.
Game make_three_arm_game() {
  return build_dense(1, 3, {2}, [](int agent, int e, std::span<const int> a) {
    if (agent == 1) return a[0] == 0 ? 1.0 : 0.0;
    return e == 0 ? 0.2 : e == 1 ? 0.9 : 0.5;
  });
}

int argmax(std::span<const double> xs) {
  return static_cast<int>(std::max_element(xs.begin(), xs.end()) - xs.begin());
}

TEST_CASE("exact worst case traces the follower's tolerated mixing") {
  const Game game = make_near_indifferent_follower();
  // Top: the follower may put up to min(eps, 1) mass on its second action
  // (forgoing exactly 1), dragging the leader from 100 toward 50.
  CHECK(exact_worst_case_value(game, 0, 0.0) == doctest::Approx(100.0));
  CHECK(exact_worst_case_value(game, 0, 0.01) == doctest::Approx(99.5));
  CHECK(exact_worst_case_value(game, 0, 0.02) == doctest::Approx(99.0));
  CHECK(exact_worst_case_value(game, 0, 0.5) == doctest::Approx(75.0));
  CHECK(exact_worst_case_value(game, 0, 1.0) == doctest::Approx(50.0));
  CHECK(exact_worst_case_value(game, 0, 1.5) == doctest::Approx(50.0));
  // Bottom: 99 no matter what the follower does.
  for (double eps : {0.0, 0.02, 1.0, 1.5}) {
    CHECK(exact_worst_case_value(game, 1, eps) == doctest::Approx(99.0));
  }
  CHECK_THROWS_AS(exact_worst_case_value(game, 2, 0.0), std::invalid_argument);
}

TEST_CASE("training picks the brittle optimum without slack") {
  const Game game = make_near_indifferent_follower();
  RobustTrainerConfig config;
  config.eps = 0.0;
  config.outer_steps = 600;
  config.ego_learning_rate = 0.3;  // the 100-vs-99 gap is faint; amplify it
  const RobustTrainResult res = train_robust(game, config, 17);
  CHECK(argmax(res.strategy.dist) == 0);
  CHECK(res.failures == 0);
  // Every trace entry is one of the two exact worst cases.
  for (double v : res.value_trace) {
    CHECK((std::abs(v - 100.0) < 1e-6 || std::abs(v - 99.0) < 1e-6));
  }
}

TEST_CASE("training switches to the safe action under slack") {
  const Game game = make_near_indifferent_follower();
  RobustTrainerConfig config;
  config.eps = 1.5;
  config.outer_steps = 200;
  const RobustTrainResult res = train_robust(game, config, 17);
  CHECK(argmax(res.strategy.dist) == 1);
  CHECK(argmax(res.final_strategy.dist) == 1);
  CHECK(res.failures == 0);
}

TEST_CASE("bandit value approaches the best worst case") {
  const Game game = make_three_arm_game();
  RobustTrainerConfig config;
  config.eps = 0.0;
  config.outer_steps = 300;
  const RobustTrainResult res = train_robust(game, config, 5);

  // Exhaustive enumeration of the inner objective.
  std::vector<double> exact;
  for (int e = 0; e < 3; ++e) exact.push_back(exact_worst_case_value(game, e, 0.0));
  CHECK(exact[1] == doctest::Approx(0.9));

  double trained_value = 0.0;
  for (int e = 0; e < 3; ++e) trained_value += res.strategy.dist[e] * exact[e];
  // Best arm minus bandit regret ~ 2 sqrt(m ln m / T) and the entropy floor.
  CHECK(trained_value >= 0.65);
  CHECK(argmax(res.strategy.dist) == 1);
  for (double v : res.value_trace) {
    CHECK((v == doctest::Approx(0.2) || v == doctest::Approx(0.9) ||
           v == doctest::Approx(0.5)));
  }
}

TEST_CASE("constant objective makes every strategy optimal") {
  const Game game =
      build_dense(1, 2, {3}, [](int agent, int, std::span<const int> a) {
        return agent == 0 ? 3.0 : static_cast<double>(a[0]);
      });
  RobustTrainerConfig config;
  config.outer_steps = 50;
  const RobustTrainResult res = train_robust(game, config, 2);
  for (double v : res.value_trace) CHECK(v == doctest::Approx(3.0));
}

TEST_CASE("approachability inner bound sandwiches the exact minimum") {
  const Game game = make_pd(/*with_gambler=*/true);
  const double eps = 0.1;
  const EgoStrategy ego = game.uniform_ego();
  const std::vector<double> nu = ego_payoff_profile(game, ego);
  const std::vector<double> eps_vec(1, eps);
  const double lp_min =
      solve_cce_lp(game, ego, nu, OptSense::kMin, eps_vec).value;
  CHECK(lp_min == doctest::Approx(0.8));

  RobustTrainerConfig config;
  config.inner = InnerSampler::kBlackwell;
  config.eps = eps;
  config.outer_steps = 3;
  config.blackwell.eps_tol = 0.05;
  config.blackwell.max_outer = 60;
  config.blackwell.max_inner = 10000;
  config.blackwell.bits = 8;
  const RobustTrainResult res = train_robust(game, config, 7);
  CHECK(res.failures == 0);
  for (double v : res.value_trace) {
    // Lower bound up to LP tolerance; the sampler may dip below the exact
    // minimum by what its own relaxation buys (eps_tol in normalized units).
    CHECK(v <= lp_min + 0.1);
    CHECK(v >= 0.3);
  }
}

TEST_CASE("multiplier-servo inner bound stays pessimistically valid") {
  const Game game = make_pd(/*with_gambler=*/true);
  RobustTrainerConfig config;
  config.inner = InnerSampler::kLagrangian;
  config.eps = 0.1;
  config.outer_steps = 4;
  config.lagrangian.rounds = 40;
  config.lagrangian.selfplay_steps = 150;
  const RobustTrainResult res = train_robust(game, config, 11);
  CHECK(res.failures == 0);
  const double lp_min = exact_worst_case_value(game, 0, 0.1);
  for (double v : res.value_trace) {
    CHECK(v <= lp_min + 0.1);
    CHECK(v >= -1e-9);
  }
}

TEST_CASE("inner failures are absorbed at the configured floor") {
  const Game game = make_pd(/*with_gambler=*/true);
  RobustTrainerConfig config;
  config.inner = InnerSampler::kLagrangian;
  config.outer_steps = 5;
  config.reward_floor = -5.0;
  config.selfplay.kind = LearnerKind::kExp3;  // entropy bonus 0: every inner
  config.selfplay.entropy_bonus = 0.0;        // run throws immediately
  const RobustTrainResult res = train_robust(game, config, 3);
  CHECK(res.failures == 5);
  CHECK(res.failure_log.size() == 5);
  REQUIRE(res.value_trace.size() == 5);
  for (double v : res.value_trace) CHECK(v == doctest::Approx(-5.0));
  double mass = 0.0;
  for (double p : res.strategy.dist) mass += p;
  CHECK(mass == doctest::Approx(1.0));
}

TEST_CASE("training is reproducible by seed") {
  const Game game = make_near_indifferent_follower();
  RobustTrainerConfig config;
  config.eps = 0.3;
  config.outer_steps = 80;
  const RobustTrainResult a = train_robust(game, config, 123);
  const RobustTrainResult b = train_robust(game, config, 123);
  CHECK(a.strategy.dist == b.strategy.dist);
  CHECK(a.value_trace == b.value_trace);
}

TEST_CASE("trainer input validation") {
  const Game dense = make_pd();
  RobustTrainerConfig config;

  RobustTrainerConfig bad = config;
  bad.outer_steps = 0;
  CHECK_THROWS_AS(train_robust(dense, bad, 0), std::invalid_argument);
  bad = config;
  bad.eps = -0.5;
  CHECK_THROWS_AS(train_robust(dense, bad, 0), std::invalid_argument);
  bad = config;
  bad.ego_entropy = 0.0;
  CHECK_THROWS_AS(train_robust(dense, bad, 0), std::invalid_argument);

  const Game lazy(2, 1, {2, 2},
                  [](int, int, std::span<const int>) { return 0.0; },
                  PayoffBounds{0.0, 1.0});
  CHECK_THROWS_AS(train_robust(lazy, config, 0), std::invalid_argument);
}

TEST_CASE("cross-evaluation scores the ego on the original payoffs") {
  // Population A plays the dilemma (defection dominant, feeding the
  // gambler); population B has the agents' payoffs negated, making
  // cooperation dominant and starving the gambler.  The ego is always scored
  // on the original gambler payoff.
  const Game scoring = make_pd(/*with_gambler=*/true);
  const Game inverted =
      build_dense(2, 1, {2, 2}, [](int agent, int, std::span<const int> a) {
        static const double u1[2][2] = {{3, 0}, {4, 1}};
        if (agent == 0) return a[0] == 1 && a[1] == 1 ? 1.0 : 0.0;
        return -(agent == 1 ? u1[a[0]][a[1]] : u1[a[1]][a[0]]);
      });
  const std::vector<Game> populations = {scoring, inverted};
  const std::vector<EgoStrategy> egos = {scoring.uniform_ego()};

  const auto table = evaluate_cross(scoring, populations, egos, SelfPlaySpec{},
                                    /*episodes=*/3, /*steps=*/1500, 31);
  REQUIRE(table.size() == 1);
  REQUIRE(table[0].size() == 2);
  CHECK(table[0][0].mean >= 0.8);   // defection regime reaches (D,D)
  CHECK(table[0][1].mean <= 0.2);   // cooperation regime avoids it
  CHECK(table[0][0].std_error >= 0.0);
}

TEST_CASE("cross-evaluation of a constant objective is exact") {
  const Game scoring =
      build_dense(2, 1, {2, 2}, [](int agent, int, std::span<const int> a) {
        return agent == 0 ? 2.5 : static_cast<double>(a[agent - 1]);
      });
  const std::vector<Game> populations = {scoring};
  const std::vector<EgoStrategy> egos = {scoring.uniform_ego()};
  const auto table =
      evaluate_cross(scoring, populations, egos, SelfPlaySpec{}, 2, 50, 1);
  CHECK(table[0][0].mean == doctest::Approx(2.5));
  CHECK(table[0][0].std_error == doctest::Approx(0.0));
}

TEST_CASE("cross-evaluation input validation") {
  const Game scoring = make_pd(true);
  const std::vector<EgoStrategy> egos = {scoring.uniform_ego()};
  const std::vector<Game> populations = {scoring};

  CHECK_THROWS_AS(evaluate_cross(scoring, {}, egos, SelfPlaySpec{}, 1, 10, 0),
                  std::invalid_argument);
  CHECK_THROWS_AS(
      evaluate_cross(scoring, populations, egos, SelfPlaySpec{}, 0, 10, 0),
      std::invalid_argument);

  const std::vector<Game> wrong_shape = {
      build_dense(2, 1, {3, 2}, [](int, int, std::span<const int>) { return 0.0; })};
  CHECK_THROWS_AS(
      evaluate_cross(scoring, wrong_shape, egos, SelfPlaySpec{}, 1, 10, 0),
      std::invalid_argument);

  std::vector<EgoStrategy> bad_ego = {EgoStrategy{{0.5, 0.5}}};
  CHECK_THROWS_AS(
      evaluate_cross(scoring, populations, bad_ego, SelfPlaySpec{}, 1, 10, 0),
      std::invalid_argument);
}

}  // namespace
}  // namespace robustcce
