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

#ifndef ROBUSTCCE_GAME_HPP_
#define ROBUSTCCE_GAME_HPP_

#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "robustcce/types.hpp"

namespace robustcce {

// An N-player matrix game with one distinguished ego agent (agent index 0 in
// payoff queries) and `num_agents` non-ego agents. Payoffs are served either
// by a dense tensor (row-major over (agent, a0, a1, .., an)) or by an
// arbitrary evaluator callback; every consumer in this library works through
// payoff() and therefore handles both.
class Game {
 public:
  // agent: 0 = ego utility, 1..num_agents = non-ego agents' utilities.
  using Evaluator =
      std::function<double(int agent, int ego_action, std::span<const int> joint)>;

  Game(int num_agents, int ego_actions, std::vector<int> action_counts,
       Evaluator evaluator, PayoffBounds bounds);

  // Dense game; bounds default to the exact min/max of the payoff data.
  static Game dense(int num_agents, int ego_actions, std::vector<int> action_counts,
                    std::vector<double> payoffs);
  static Game dense(int num_agents, int ego_actions, std::vector<int> action_counts,
                    std::vector<double> payoffs, PayoffBounds bounds);

  double payoff(int agent, int ego_action, std::span<const int> joint) const;

  int num_agents() const { return num_agents_; }
  int ego_actions() const { return ego_actions_; }
  const std::vector<int>& action_counts() const { return action_counts_; }
  PayoffBounds payoff_bounds() const { return bounds_; }
  double payoff_range() const { return bounds_.hi - bounds_.lo; }
  long long joint_count() const { return joint_count_; }

  bool is_dense() const { return dense_ != nullptr; }
  // Dense payoff tensor; throws std::logic_error for evaluator-backed games.
  std::span<const double> dense_payoffs() const;
  long long dense_index(int agent, int ego_action, std::span<const int> joint) const;

  EgoStrategy uniform_ego() const { return EgoStrategy{uniform_dist(ego_actions_)}; }
  ProductStrategy uniform_play() const { return uniform_product(action_counts_); }

 private:
  int num_agents_;
  int ego_actions_;
  std::vector<int> action_counts_;
  std::vector<long long> strides_;
  long long joint_count_;
  std::shared_ptr<const std::vector<double>> dense_;
  Evaluator evaluator_;
  PayoffBounds bounds_;
};

// ---------------------------------------------------------------------------
// Serialization (dense games only). The on-disk format is JSON:
//   {"num_agents": n, "ego_actions": m0, "action_counts": [m1, .., mn],
//    "payoffs": [flat row-major over (agent, a0, a1, .., an)],
//    "payoff_bounds": [lo, hi]}
// Loading validates the payoff count and that every entry lies within the
// declared bounds.

std::string game_to_json(const Game& game);
Game game_from_json(const std::string& text);
void save_game(const Game& game, const std::string& path);
Game load_game(const std::string& path);

// ---------------------------------------------------------------------------
// Affine payoff normalization onto [-1, 1]: normalized = (p - offset) / scale
// with offset = (lo + hi) / 2 and scale = (hi - lo) / 2. A constant game
// (lo == hi) maps to the all-zeros game with `degenerate` set; to_original
// then reports the constant.

struct NormalizedGame {
  Game game;
  double scale = 1.0;
  double offset = 0.0;
  bool degenerate = false;

  double to_original(double v) const { return v * scale + offset; }
  double to_normalized(double v) const { return degenerate ? 0.0 : (v - offset) / scale; }
};

NormalizedGame normalize_payoffs(const Game& game);

}  // namespace robustcce

#endif  // ROBUSTCCE_GAME_HPP_
