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

#include "robustcce/game.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace robustcce {
namespace {

void check_shape(int num_agents, int ego_actions, const std::vector<int>& counts) {
  if (num_agents < 1) throw std::invalid_argument("Game: num_agents must be >= 1");
  if (ego_actions < 1) throw std::invalid_argument("Game: ego_actions must be >= 1");
  if (static_cast<int>(counts.size()) != num_agents) {
    throw std::invalid_argument("Game: action_counts size must equal num_agents");
  }
  for (int m : counts) {
    if (m < 1) throw std::invalid_argument("Game: every action count must be >= 1");
  }
}

}  // namespace

Game::Game(int num_agents, int ego_actions, std::vector<int> action_counts,
           Evaluator evaluator, PayoffBounds bounds)
    : num_agents_(num_agents),
      ego_actions_(ego_actions),
      action_counts_(std::move(action_counts)),
      evaluator_(std::move(evaluator)),
      bounds_(bounds) {
  check_shape(num_agents_, ego_actions_, action_counts_);
  if (!evaluator_) throw std::invalid_argument("Game: null evaluator");
  if (!(bounds_.hi >= bounds_.lo)) {
    throw std::invalid_argument("Game: payoff bounds out of order");
  }
  strides_ = joint_strides(action_counts_);
  joint_count_ = num_joints(action_counts_);
}

Game Game::dense(int num_agents, int ego_actions, std::vector<int> action_counts,
                 std::vector<double> payoffs) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (double v : payoffs) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  if (payoffs.empty()) throw std::invalid_argument("Game: empty payoff tensor");
  return dense(num_agents, ego_actions, std::move(action_counts), std::move(payoffs),
               PayoffBounds{lo, hi});
}

Game Game::dense(int num_agents, int ego_actions, std::vector<int> action_counts,
                 std::vector<double> payoffs, PayoffBounds bounds) {
  check_shape(num_agents, ego_actions, action_counts);
  const long long joints = num_joints(action_counts);
  const long long expected =
      static_cast<long long>(num_agents + 1) * ego_actions * joints;
  if (static_cast<long long>(payoffs.size()) != expected) {
    std::ostringstream msg;
    msg << "Game: payoff tensor has " << payoffs.size() << " entries, expected "
        << expected;
    throw std::invalid_argument(msg.str());
  }
  for (double v : payoffs) {
    if (!std::isfinite(v)) throw std::invalid_argument("Game: non-finite payoff");
    if (v < bounds.lo - 1e-12 || v > bounds.hi + 1e-12) {
      throw std::invalid_argument("Game: payoff outside declared bounds");
    }
  }
  auto data = std::make_shared<const std::vector<double>>(std::move(payoffs));
  // The evaluator closure keeps the tensor alive; payoff() bypasses it for
  // dense games, but external callers may still hold the plain Evaluator view.
  auto counts_copy = action_counts;
  Game g(num_agents, ego_actions, std::move(action_counts),
         [data, counts_copy, ego_actions](int agent, int a0, std::span<const int> joint) {
           auto strides = joint_strides(counts_copy);
           long long flat = 0;
           for (size_t i = 0; i < joint.size(); ++i) flat += strides[i] * joint[i];
           const long long joints = num_joints(counts_copy);
           return (*data)[(static_cast<long long>(agent) * ego_actions + a0) * joints + flat];
         },
         bounds);
  g.dense_ = data;
  return g;
}

double Game::payoff(int agent, int ego_action, std::span<const int> joint) const {
  if (agent < 0 || agent > num_agents_) {
    throw std::invalid_argument("Game::payoff: agent index out of range");
  }
  if (ego_action < 0 || ego_action >= ego_actions_) {
    throw std::invalid_argument("Game::payoff: ego action out of range");
  }
  if (static_cast<int>(joint.size()) != num_agents_) {
    throw std::invalid_argument("Game::payoff: joint action has wrong arity");
  }
  if (dense_) {
    return (*dense_)[dense_index(agent, ego_action, joint)];
  }
  return evaluator_(agent, ego_action, joint);
}

std::span<const double> Game::dense_payoffs() const {
  if (!dense_) throw std::logic_error("Game: not a dense game");
  return *dense_;
}

long long Game::dense_index(int agent, int ego_action, std::span<const int> joint) const {
  long long flat = 0;
  for (size_t i = 0; i < joint.size(); ++i) flat += strides_[i] * joint[i];
  return (static_cast<long long>(agent) * ego_actions_ + ego_action) * joint_count_ + flat;
}

// ---------------------------------------------------------------------------

std::string game_to_json(const Game& game) {
  if (!game.is_dense()) {
    throw std::invalid_argument("game_to_json: only dense games are serializable");
  }
  nlohmann::json j;
  j["num_agents"] = game.num_agents();
  j["ego_actions"] = game.ego_actions();
  j["action_counts"] = game.action_counts();
  std::span<const double> p = game.dense_payoffs();
  j["payoffs"] = std::vector<double>(p.begin(), p.end());
  j["payoff_bounds"] = {game.payoff_bounds().lo, game.payoff_bounds().hi};
  return j.dump();
}

Game game_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("game_from_json: bad JSON: ") + e.what());
  }
  for (const char* key : {"num_agents", "ego_actions", "action_counts", "payoffs"}) {
    if (!j.contains(key)) {
      throw std::invalid_argument(std::string("game_from_json: missing field ") + key);
    }
  }
  const int n = j["num_agents"].get<int>();
  const int m0 = j["ego_actions"].get<int>();
  auto counts = j["action_counts"].get<std::vector<int>>();
  auto payoffs = j["payoffs"].get<std::vector<double>>();
  if (j.contains("payoff_bounds")) {
    auto b = j["payoff_bounds"].get<std::vector<double>>();
    if (b.size() != 2) {
      throw std::invalid_argument("game_from_json: payoff_bounds must be [lo, hi]");
    }
    return Game::dense(n, m0, std::move(counts), std::move(payoffs),
                       PayoffBounds{b[0], b[1]});
  }
  return Game::dense(n, m0, std::move(counts), std::move(payoffs));
}

void save_game(const Game& game, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_game: cannot open " + path);
  out << game_to_json(game) << "\n";
}

Game load_game(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_game: cannot open " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return game_from_json(buf.str());
}

// ---------------------------------------------------------------------------

NormalizedGame normalize_payoffs(const Game& game) {
  const PayoffBounds b = game.payoff_bounds();
  NormalizedGame out{game, (b.hi - b.lo) / 2.0, (b.hi + b.lo) / 2.0, false};
  if (b.hi - b.lo < 1e-15) {
    // Constant game: everything maps to 0 and the affine map is not
    // invertible; flag it and keep offset so to_original reports the constant.
    out.degenerate = true;
    out.scale = 0.0;
    if (game.is_dense()) {
      std::span<const double> p = game.dense_payoffs();
      out.game = Game::dense(game.num_agents(), game.ego_actions(), game.action_counts(),
                             std::vector<double>(p.size(), 0.0), PayoffBounds{0.0, 0.0});
    } else {
      out.game = Game(game.num_agents(), game.ego_actions(), game.action_counts(),
                      [](int, int, std::span<const int>) { return 0.0; },
                      PayoffBounds{0.0, 0.0});
    }
    return out;
  }
  const double scale = out.scale;
  const double offset = out.offset;
  if (game.is_dense()) {
    std::span<const double> p = game.dense_payoffs();
    std::vector<double> scaled(p.size());
    for (size_t i = 0; i < p.size(); ++i) scaled[i] = (p[i] - offset) / scale;
    out.game = Game::dense(game.num_agents(), game.ego_actions(), game.action_counts(),
                           std::move(scaled), PayoffBounds{-1.0, 1.0});
  } else {
    Game base = game;
    out.game = Game(game.num_agents(), game.ego_actions(), game.action_counts(),
                    [base, scale, offset](int agent, int a0, std::span<const int> joint) {
                      return (base.payoff(agent, a0, joint) - offset) / scale;
                    },
                    PayoffBounds{-1.0, 1.0});
  }
  return out;
}

}  // namespace robustcce
