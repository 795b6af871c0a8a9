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
#include <vector>

#include "doctest.h"
#include "robustcce/learners.hpp"
#include "robustcce/metrics.hpp"
#include "test_util.hpp"

namespace robustcce {
namespace {

using testing::make_matching_pennies;
using testing::make_pd;

// Loss view of a utility game for the learner-facing agents (game agent
// index i+1), affinely mapped into [0, 1].
CostFn loss_oracle(const Game& game, double lo, double hi) {
  return [&game, lo, hi](int agent, std::span<const int> joint) {
    return (hi - game.payoff(agent + 1, 0, joint)) / (hi - lo);
  };
}

TEST_CASE("hedge stays uniform under equal losses") {
  Learner h = Learner::hedge(3, 0.5);
  const std::vector<double> losses = {0.4, 0.4, 0.4};
  for (int t = 0; t < 200; ++t) h.observe(losses);
  for (double p : h.strategy()) CHECK(p == doctest::Approx(1.0 / 3).epsilon(1e-12));
  CHECK(h.step_count() == 200);
}

TEST_CASE("hedge follows the closed form under (1,0) losses") {
  const double eta = 0.37;
  const int steps = 21;
  Learner h = Learner::hedge(2, eta);
  const std::vector<double> losses = {1.0, 0.0};
  for (int t = 0; t < steps; ++t) h.observe(losses);
  const std::vector<double> p = h.strategy();
  CHECK(p[1] == doctest::Approx(1.0 / (1.0 + std::exp(-eta * steps))).epsilon(1e-12));
  CHECK(p[0] + p[1] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("hedge meets its external regret bound") {
  // With losses in [0,1] and lr sqrt(8 ln m / T), cumulative regret is at
  // most sqrt(T ln m / 2) on every trajectory.  Exercise random sequences and
  // the adaptive worst case that always charges the currently favored action.
  for (int m : {2, 5}) {
    for (int steps : {128, 2048}) {
      const double eta = std::sqrt(8.0 * std::log(m) / steps);
      const double bound = std::sqrt(steps * std::log(m) / 2.0);
      for (int variant = 0; variant < 4; ++variant) {
        Learner h = Learner::hedge(m, eta);
        Rng rng(900 + variant);
        std::vector<double> cum_action(m, 0.0);
        double cum_played = 0.0;
        for (int t = 0; t < steps; ++t) {
          const std::vector<double> p = h.strategy();
          std::vector<double> losses(m);
          if (variant == 3) {
            // Adaptive adversary: unit loss on the most likely action.
            int fav = 0;
            for (int a = 1; a < m; ++a) {
              if (p[a] > p[fav]) fav = a;
            }
            for (int a = 0; a < m; ++a) losses[a] = a == fav ? 1.0 : 0.0;
          } else {
            for (double& v : losses) v = rng.next_double();
          }
          for (int a = 0; a < m; ++a) {
            cum_played += p[a] * losses[a];
            cum_action[a] += losses[a];
          }
          h.observe(losses);
        }
        double best = cum_action[0];
        for (double v : cum_action) best = std::min(best, v);
        CHECK(cum_played - best <= bound + 1e-6);
      }
    }
  }
}

TEST_CASE("regret matching plays positive regrets proportionally") {
  Learner rm = Learner::regret_matching(3);

  // Equal losses leave all cumulative regrets at zero: uniform fallback.
  rm.observe(std::vector<double>{0.5, 0.5, 0.5});
  for (double p : rm.strategy()) CHECK(p == doctest::Approx(1.0 / 3).epsilon(1e-12));

  // From uniform, losses (0.9, 0.1, 0.5) give played loss 0.5 and cumulative
  // regrets (-0.4, 0.4, 0); only action 1 is positive.
  rm.observe(std::vector<double>{0.9, 0.1, 0.5});
  std::vector<double> p = rm.strategy();
  CHECK(p[0] == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(p[1] == doctest::Approx(1.0).epsilon(1e-12));

  // Playing (0,1,0) against (0, 1, 0.5) adds regrets (1, 0, 0.5):
  // cumulative (0.6, 0.4, 0.5), normalized by 1.5.
  rm.observe(std::vector<double>{0.0, 1.0, 0.5});
  p = rm.strategy();
  CHECK(p[0] == doctest::Approx(0.6 / 1.5).epsilon(1e-12));
  CHECK(p[1] == doctest::Approx(0.4 / 1.5).epsilon(1e-12));
  CHECK(p[2] == doctest::Approx(0.5 / 1.5).epsilon(1e-12));
}

TEST_CASE("exp3 updates with exact importance weights") {
  const double eta = 0.2;
  const double alpha = 0.1;
  Learner base = Learner::exp3(3, eta, alpha);
  const std::vector<double> p = base.strategy();
  const std::vector<double> losses = {0.3, 0.8, 0.05};
  const double lift = alpha / (3.0 * (1.0 + alpha));
  for (int a = 0; a < 3; ++a) {
    Learner clone = base;
    clone.observe_bandit(a, losses[a]);
    // Recover the importance-weighted estimate from the strategy shift: from
    // uniform log-weights, only coordinate a moved by -eta * estimate.
    const std::vector<double> q = clone.strategy();
    const double base_a = (q[a] - lift) * (1.0 + alpha);
    const double est = -std::log(2.0 * base_a / (1.0 - base_a)) / eta;
    CHECK(est == doctest::Approx(losses[a] / p[a]).epsilon(1e-9));
    // Unbiasedness: the estimate is taken with probability p[a] and is
    // loss/p[a] on that coordinate, so its expectation is the true loss.
    CHECK(p[a] * est == doctest::Approx(losses[a]).epsilon(1e-9));
  }
}

TEST_CASE("entropy bonus floors every action probability") {
  const double alpha = 0.3;
  Learner h = Learner::hedge(4, 2.0, alpha);
  const std::vector<double> losses = {0.0, 1.0, 1.0, 1.0};
  for (int t = 0; t < 400; ++t) h.observe(losses);
  const std::vector<double> p = h.strategy();
  const double floor = alpha / (4.0 * (1.0 + alpha));
  double sum = 0.0;
  for (double v : p) {
    CHECK(v >= floor - 1e-12);
    sum += v;
  }
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("learner input validation") {
  CHECK_THROWS_AS(Learner::hedge(2, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(Learner::hedge(0, 0.1), std::invalid_argument);
  CHECK_THROWS_AS(Learner::hedge(2, 0.1, -0.5), std::invalid_argument);

  Learner h = Learner::hedge(2, 0.1);
  CHECK_THROWS_AS(h.observe(std::vector<double>{1.0}), std::invalid_argument);
  CHECK_THROWS_AS(h.observe(std::vector<double>{1.0, std::nan("")}),
                  std::invalid_argument);
  CHECK_THROWS_AS(h.observe_bandit(0, 0.5), std::logic_error);

  Learner e = Learner::exp3(2, 0.1, 0.05);
  CHECK_THROWS_AS(e.observe(std::vector<double>{0.5, 0.5}), std::logic_error);
  CHECK_THROWS_AS(e.observe_bandit(2, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(e.observe_bandit(0, std::nan("")), std::invalid_argument);
}

TEST_CASE("matching pennies hedge dynamics averages to uniform") {
  const Game game = make_matching_pennies();
  const int steps = 10000;
  const double eta = std::sqrt(std::log(2.0) / steps);
  std::vector<Learner> learners = {Learner::hedge(2, eta), Learner::hedge(2, eta)};
  DynamicsOptions opt;
  opt.steps = steps;
  const DynamicsResult res = run_dynamics(loss_oracle(game, -1.0, 1.0),
                                          game.action_counts(), learners, opt);

  for (int i = 0; i < 2; ++i) {
    double marginal = 0.0;
    for (const MixtureComponent& c : res.empirical_mixture.components) {
      marginal += c.weight * c.strategy.per_agent[i][0];
    }
    CHECK(std::abs(marginal - 0.5) <= 0.05);
  }
}

TEST_CASE("mixture regret equals the trace in full information mode") {
  const Game game = make_matching_pennies();
  const int steps = 4096;
  const double eta = std::sqrt(8.0 * std::log(2.0) / steps);
  std::vector<Learner> learners = {Learner::hedge(2, eta), Learner::hedge(2, eta)};
  DynamicsOptions opt;
  opt.steps = steps;
  opt.max_mixture_components = steps;  // keep every iterate
  const DynamicsResult res = run_dynamics(loss_oracle(game, -1.0, 1.0),
                                          game.action_counts(), learners, opt);
  CHECK(res.thinning == 1);

  const RegretReport report = regret(game, game.uniform_ego(), res.empirical_mixture);
  for (int i = 0; i < 2; ++i) {
    // Losses were (1-u)/2, so utility regret is exactly twice the loss-space
    // trace average.
    const double from_trace = 2.0 * res.regret_trace[i][steps - 1] / steps;
    CHECK(report.per_agent[i] == doctest::Approx(from_trace).epsilon(1e-7));
    // Hedge's bound, mapped back to utility units.
    CHECK(report.per_agent[i] <=
          2.0 * std::sqrt(std::log(2.0) / (2.0 * steps)) + 1e-6);
  }
}

TEST_CASE("prisoners dilemma regret matching settles on mutual defection") {
  const Game game = make_pd();
  std::vector<Learner> learners = {Learner::regret_matching(2),
                                   Learner::regret_matching(2)};
  DynamicsOptions opt;
  opt.steps = 5000;
  const DynamicsResult res = run_dynamics(loss_oracle(game, 0.0, 4.0),
                                          game.action_counts(), learners, opt);

  double mass_dd = 0.0;
  for (const MixtureComponent& c : res.empirical_mixture.components) {
    mass_dd += c.weight * c.strategy.per_agent[0][1] * c.strategy.per_agent[1][1];
  }
  CHECK(mass_dd >= 0.95);

  const RegretReport report = regret(game, game.uniform_ego(), res.empirical_mixture);
  CHECK(report.per_agent[0] <= 0.05);
  CHECK(report.per_agent[1] <= 0.05);
}

TEST_CASE("single agent with constant costs keeps the initial strategy") {
  const std::vector<int> counts = {3};
  const std::vector<std::vector<double>> costs = {{0.7, 0.7, 0.7}};
  for (Learner proto : {Learner::hedge(3, 0.5), Learner::regret_matching(3)}) {
    std::vector<Learner> learners = {proto};
    DynamicsOptions opt;
    opt.steps = 50;
    const DynamicsResult res = run_dynamics(costs, counts, learners, opt);
    CHECK(res.empirical_mixture.components.size() == 50);
    for (const MixtureComponent& c : res.empirical_mixture.components) {
      CHECK(c.weight == doctest::Approx(1.0 / 50).epsilon(1e-12));
      for (double p : c.strategy.per_agent[0]) {
        CHECK(p == doctest::Approx(1.0 / 3).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("bandit dynamics is reproducible per seed") {
  const Game game = make_matching_pennies();
  const int steps = 2000;
  const double eta = std::sqrt(std::log(2.0) / steps);
  const auto run = [&](std::uint64_t seed) {
    std::vector<Learner> learners = {Learner::exp3(2, eta, 0.05),
                                     Learner::exp3(2, eta, 0.05)};
    DynamicsOptions opt;
    opt.steps = steps;
    opt.bandit = true;
    opt.seed = seed;
    return run_dynamics(loss_oracle(game, -1.0, 1.0), game.action_counts(),
                        learners, opt);
  };
  const DynamicsResult a = run(7);
  const DynamicsResult b = run(7);
  const DynamicsResult c = run(8);

  REQUIRE(a.empirical_mixture.components.size() ==
          b.empirical_mixture.components.size());
  for (size_t k = 0; k < a.empirical_mixture.components.size(); ++k) {
    for (int i = 0; i < 2; ++i) {
      CHECK(a.empirical_mixture.components[k].strategy.per_agent[i] ==
            b.empirical_mixture.components[k].strategy.per_agent[i]);
    }
  }
  double divergence = 0.0;
  for (int i = 0; i < 2; ++i) {
    divergence += std::abs(a.final_strategies.per_agent[i][0] -
                           c.final_strategies.per_agent[i][0]);
  }
  CHECK(divergence > 1e-12);
}

TEST_CASE("long runs are thinned with the factor recorded") {
  const Game game = make_matching_pennies();
  std::vector<Learner> learners = {Learner::hedge(2, 0.01), Learner::hedge(2, 0.01)};
  DynamicsOptions opt;
  opt.steps = 10000;
  const DynamicsResult res = run_dynamics(loss_oracle(game, -1.0, 1.0),
                                          game.action_counts(), learners, opt);
  CHECK(res.thinning == 3);
  CHECK(res.empirical_mixture.thinning == 3);
  CHECK(res.empirical_mixture.components.size() == 3334);
  for (const MixtureComponent& c : res.empirical_mixture.components) {
    CHECK(c.weight == doctest::Approx(1.0 / 3334).epsilon(1e-12));
  }
  check_mixture(res.empirical_mixture, game.action_counts(), "thinned mixture");
}

TEST_CASE("empirical mixture regret shrinks like one over sqrt horizon") {
  const Game game = make_matching_pennies();
  for (int steps : {1024, 4096}) {
    const double eta = std::sqrt(8.0 * std::log(2.0) / steps);
    std::vector<Learner> learners = {Learner::hedge(2, eta), Learner::hedge(2, eta)};
    DynamicsOptions opt;
    opt.steps = steps;
    const DynamicsResult res = run_dynamics(loss_oracle(game, -1.0, 1.0),
                                            game.action_counts(), learners, opt);
    const RegretReport report = regret(game, game.uniform_ego(), res.empirical_mixture);
    // C = 2.5 comfortably covers hedge's utility-space constant
    // 2*sqrt(ln 2 / 2) ~ 1.18 plus thinning noise on this suite.
    for (double r : report.per_agent) CHECK(r <= 2.5 / std::sqrt(steps));
  }
}

TEST_CASE("dynamics input validation") {
  const std::vector<int> counts = {2, 2};
  std::vector<Learner> one = {Learner::hedge(2, 0.1)};
  std::vector<std::vector<double>> costs = {{0, 0, 0, 0}, {0, 0, 0, 0}};
  DynamicsOptions opt;
  CHECK_THROWS_AS(run_dynamics(costs, counts, one, opt), std::invalid_argument);

  std::vector<Learner> two = {Learner::hedge(2, 0.1), Learner::hedge(2, 0.1)};
  std::vector<std::vector<double>> bad = {{0, 0, 0}, {0, 0, 0, 0}};
  CHECK_THROWS_AS(run_dynamics(bad, counts, two, opt), std::invalid_argument);

  opt.steps = 0;
  CHECK_THROWS_AS(run_dynamics(costs, counts, two, opt), std::invalid_argument);

  // Oracle failures propagate through the tabulating overload.
  opt.steps = 10;
  const CostFn broken = [](int, std::span<const int>) -> double {
    throw std::runtime_error("sensor offline");
  };
  CHECK_THROWS_AS(run_dynamics(broken, counts, two, opt), std::runtime_error);
}

TEST_CASE("observer sees every step in order") {
  const Game game = make_matching_pennies();
  std::vector<Learner> learners = {Learner::hedge(2, 0.1), Learner::hedge(2, 0.1)};
  DynamicsOptions opt;
  opt.steps = 37;
  int calls = 0;
  opt.observer = [&](int step, const ProductStrategy& s) {
    CHECK(step == calls);
    CHECK(s.per_agent.size() == 2);
    ++calls;
  };
  run_dynamics(loss_oracle(game, -1.0, 1.0), game.action_counts(), learners, opt);
  CHECK(calls == 37);
}

}  // namespace
}  // namespace robustcce
