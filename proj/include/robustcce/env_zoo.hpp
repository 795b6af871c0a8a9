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

#ifndef ROBUSTCCE_ENV_ZOO_HPP_
#define ROBUSTCCE_ENV_ZOO_HPP_

#include <array>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "robustcce/game.hpp"

namespace robustcce {

// Test environments and opponent-population transforms: a random N-player
// matrix game with a participating gambler, a 4x4 social-dilemma position
// game with a passive gambler, pointwise reward transforms for building
// opponent populations, and the equality-times-productivity welfare
// function.

// ---------------------------------------------------------------------------
// Random N-player matrix game.  `players` counts every participant including
// the gambler, who is agent 0 (the ego) and acts like everyone else with the
// same `actions` arity.  Payoffs are i.i.d. uniform in [-1, 1] drawn from the
// portable generator, so a fixed seed reproduces the same tensors on every
// platform.  Default shape: 4 players, 7 actions each.
Game make_nmatrix(int players, int actions, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Grid position game.  The state is one cell (i, j) of a 4x4 grid: the row
// player owns coordinate i, the column player owns j, and a passive gambler
// is paid by the occupied cell.  The one-shot reading lets each player pick
// its coordinate directly; the movement reading (step_grid / stage_view)
// changes the coordinate one step at a time with toroidal wraparound.
//
// The payoff fields encode a social dilemma: each player's reward strictly
// increases in its own coordinate (so (3, 3) is the dominant-strategy Nash
// cell) but decreases faster in the opponent's, pushing the cooperative
// optimum to the opposite corner; the gambler's reward peaks exactly at the
// Nash cell.  Construction validates all of that by enumeration.

enum class GridBoundary { kToroidal };
enum RowMove : int { kUp = 0, kDown = 1 };
enum ColMove : int { kLeft = 0, kRight = 1 };

struct GridBimatrixGame {
  int size = 4;
  // Row-major cell tables, entry [i * size + j].
  std::vector<double> row_payoff;
  std::vector<double> col_payoff;
  std::vector<double> gambler_payoff;
  int episode_length = 500;
  GridBoundary boundary = GridBoundary::kToroidal;
  int nash_i = 0, nash_j = 0;  // dominant-strategy cell, found by enumeration
  int coop_i = 0, coop_j = 0;  // argmax of row+col payoff

  double r1(int i, int j) const { return row_payoff[i * size + j]; }
  double r2(int i, int j) const { return col_payoff[i * size + j]; }
  double rg(int i, int j) const { return gambler_payoff[i * size + j]; }

  // One-shot position bimatrix: agent 1 picks i, agent 2 picks j, the
  // passive gambler (one ego action) collects rg.
  Game position_game() const;

  // Movement stage game at `state`: 2x2 payoff tables over (row move, col
  // move), reading the destination cell; entry [move_i * 2 + move_j].
  struct StageView {
    std::array<double, 4> row;
    std::array<double, 4> col;
    std::array<double, 4> gambler;
  };
  StageView stage_view(std::pair<int, int> state) const;
};

// Deterministic construction; the seed only jitters payoffs (+-0.02) to keep
// them generic.  Throws std::logic_error if the built tables ever failed
// their invariant enumeration (they cannot by construction).
GridBimatrixGame make_grid_bimatrix(std::uint64_t seed);

// One toroidal move on a `size`-sided grid.  Up/left decrement, down/right
// increment, wrapping at the edges: (0,0) + (up,left) -> (3,3) on a 4-grid.
std::pair<int, int> step_grid(std::pair<int, int> state, int row_move,
                              int col_move, int size = 4);

// JSON round trip for the grid game: the three payoff tables plus the
// boundary rule and episode length.  Loading re-runs the construction audit,
// so a file whose tables no longer have the dominance/Nash/tragedy structure
// is rejected with std::logic_error.
std::string grid_to_json(const GridBimatrixGame& game);
GridBimatrixGame grid_from_json(const std::string& text);
void save_grid(const GridBimatrixGame& game, const std::string& path);
GridBimatrixGame load_grid(const std::string& path);

// ---------------------------------------------------------------------------
// Opponent-population reward transforms.

struct RewardTransform {
  enum class Kind {
    kIdentity,
    kAdversarial,  // r_i - q * r_g: the agent is paid to hurt the gambler
    kRiskAverse,   // (r^(1-eta) - 1) / (1-eta): concave utility, eta in (0,1)
    kIsoelastic,   // same curve family; conventional name for utility shaping
  };
  Kind kind = Kind::kIdentity;
  double q = 0.0;    // adversarial weight, >= 0
  double eta = 0.5;  // curvature, > 0 and != 1

  static RewardTransform identity() { return {}; }
  static RewardTransform adversarial(double q) {
    return {Kind::kAdversarial, q, 0.5};
  }
  static RewardTransform risk_averse(double eta) {
    return {Kind::kRiskAverse, 0.0, eta};
  }
  static RewardTransform isoelastic(double eta) {
    return {Kind::kIsoelastic, 0.0, eta};
  }
};

// Pointwise transform of one reward observation.  The curvature kinds apply
// the exact power formula to r_i as given and reject r_i <= 0 (callers remap
// into a positive range first; see transform_game).
double apply_transform(const RewardTransform& t, double r_i, double r_g);

// Rebuilds `game` with every non-ego utility transformed; the ego's payoff
// is untouched (populations change, the objective does not).  The curvature
// kinds first remap payoffs affinely from the game's declared bounds onto
// [0.1, 1.1] so the power is defined; this preserves each agent's preference
// order exactly (the curve is strictly increasing).  The result is dense;
// the identity kind returns the input game unchanged.
Game transform_game(const Game& game, const RewardTransform& t);

// ---------------------------------------------------------------------------
// Welfare.  gini is the mean-absolute-difference form
//   gini(z) = sum_{i,j} |z_i - z_j| / (2 N sum(z)),
// in [0, (N-1)/N] for nonnegative incomes; swf multiplies total income by the
// equality factor 1 - N/(N-1) * gini, in [0, 1].  All-zero incomes yield
// swf = 0 by convention.
double gini(std::span<const double> incomes);
double swf(std::span<const double> incomes);

}  // namespace robustcce

#endif  // ROBUSTCCE_ENV_ZOO_HPP_
