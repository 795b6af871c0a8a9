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

#include "robustcce/env_zoo.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>

#include "json.hpp"
#include "robustcce/cce_lp.hpp"
#include "robustcce/rng.hpp"

namespace robustcce {
namespace {

void validate_transform(const RewardTransform& t) {
  switch (t.kind) {
    case RewardTransform::Kind::kIdentity:
      return;
    case RewardTransform::Kind::kAdversarial:
      if (!(t.q >= 0.0) || !std::isfinite(t.q)) {
        throw std::invalid_argument("adversarial weight q must be >= 0");
      }
      return;
    case RewardTransform::Kind::kRiskAverse:
    case RewardTransform::Kind::kIsoelastic:
      if (!(t.eta > 0.0) || t.eta == 1.0 || !std::isfinite(t.eta)) {
        throw std::invalid_argument("curvature eta must be > 0 and != 1");
      }
      return;
  }
  throw std::invalid_argument("unknown transform kind");
}

double curvature(double r, double eta) {
  if (!(r > 0.0)) {
    throw std::invalid_argument(
        "curvature transform needs a positive base, got " + std::to_string(r));
  }
  return (std::pow(r, 1.0 - eta) - 1.0) / (1.0 - eta);
}

// Enumeration audit of the grid tables; throws std::logic_error naming the
// first violated invariant.
void validate_grid(GridBimatrixGame& g) {
  const int s = g.size;
  // Strict own-coordinate dominance pins the Nash cell at the max corner.
  for (int j = 0; j < s; ++j) {
    for (int i = 0; i + 1 < s; ++i) {
      if (!(g.r1(i + 1, j) > g.r1(i, j))) {
        throw std::logic_error("row payoff not increasing in own coordinate");
      }
    }
  }
  for (int i = 0; i < s; ++i) {
    for (int j = 0; j + 1 < s; ++j) {
      if (!(g.r2(i, j + 1) > g.r2(i, j))) {
        throw std::logic_error("col payoff not increasing in own coordinate");
      }
    }
  }
  // Unique pure Nash by full best-response enumeration.
  int nash_count = 0;
  for (int i = 0; i < s; ++i) {
    for (int j = 0; j < s; ++j) {
      bool row_best = true, col_best = true;
      for (int k = 0; k < s; ++k) {
        if (g.r1(k, j) > g.r1(i, j)) row_best = false;
        if (g.r2(i, k) > g.r2(i, j)) col_best = false;
      }
      if (row_best && col_best) {
        ++nash_count;
        g.nash_i = i;
        g.nash_j = j;
      }
    }
  }
  if (nash_count != 1) {
    throw std::logic_error("grid game must have a unique pure Nash cell");
  }
  // The gambler's payoff peaks exactly at the Nash cell.
  for (int i = 0; i < s; ++i) {
    for (int j = 0; j < s; ++j) {
      if ((i != g.nash_i || j != g.nash_j) &&
          !(g.rg(i, j) < g.rg(g.nash_i, g.nash_j))) {
        throw std::logic_error("gambler payoff must peak at the Nash cell");
      }
    }
  }
  // Tragedy shape: some cell beats the Nash cell in joint payoff.
  double best_sum = g.r1(0, 0) + g.r2(0, 0);
  g.coop_i = 0;
  g.coop_j = 0;
  for (int i = 0; i < s; ++i) {
    for (int j = 0; j < s; ++j) {
      const double sum = g.r1(i, j) + g.r2(i, j);
      if (sum > best_sum) {
        best_sum = sum;
        g.coop_i = i;
        g.coop_j = j;
      }
    }
  }
  if (!(best_sum > g.r1(g.nash_i, g.nash_j) + g.r2(g.nash_i, g.nash_j))) {
    throw std::logic_error("Nash cell must be jointly dominated");
  }
}

}  // namespace

Game make_nmatrix(int players, int actions, std::uint64_t seed) {
  if (players < 2) {
    throw std::invalid_argument("need the gambler plus at least one agent");
  }
  if (actions < 1) {
    throw std::invalid_argument("actions must be >= 1");
  }
  const int n = players - 1;  // non-ego agents
  long long joints = 1;
  for (int i = 0; i < n; ++i) {
    joints *= actions;
    if (joints > kDenseJointCap) {
      throw std::invalid_argument("joint action space too large to tabulate");
    }
  }

  Rng rng(seed);
  std::vector<double> payoffs;
  payoffs.reserve(static_cast<std::size_t>(players) * actions * joints);
  for (int agent = 0; agent < players; ++agent) {
    for (int e = 0; e < actions; ++e) {
      for (long long flat = 0; flat < joints; ++flat) {
        payoffs.push_back(rng.uniform(-1.0, 1.0));
      }
    }
  }
  return Game::dense(n, actions, std::vector<int>(n, actions),
                     std::move(payoffs), PayoffBounds{-1.0, 1.0});
}

Game GridBimatrixGame::position_game() const {
  std::vector<double> payoffs;
  payoffs.reserve(3 * static_cast<std::size_t>(size) * size);
  for (const std::vector<double>* table :
       {&gambler_payoff, &row_payoff, &col_payoff}) {
    payoffs.insert(payoffs.end(), table->begin(), table->end());
  }
  return Game::dense(2, 1, {size, size}, std::move(payoffs));
}

GridBimatrixGame::StageView GridBimatrixGame::stage_view(
    std::pair<int, int> state) const {
  if (state.first < 0 || state.first >= size || state.second < 0 ||
      state.second >= size) {
    throw std::invalid_argument("state outside the grid");
  }
  StageView view;
  for (int mi = 0; mi < 2; ++mi) {
    for (int mj = 0; mj < 2; ++mj) {
      const std::pair<int, int> dest = step_grid(state, mi, mj, size);
      view.row[mi * 2 + mj] = r1(dest.first, dest.second);
      view.col[mi * 2 + mj] = r2(dest.first, dest.second);
      view.gambler[mi * 2 + mj] = rg(dest.first, dest.second);
    }
  }
  return view;
}

GridBimatrixGame make_grid_bimatrix(std::uint64_t seed) {
  GridBimatrixGame g;
  const int s = g.size;
  g.row_payoff.resize(s * s);
  g.col_payoff.resize(s * s);
  g.gambler_payoff.resize(s * s);

  // Linear own-gain / cross-loss fields plus a small jitter: each player
  // strictly prefers a higher own coordinate (slope 0.3+) but loses more
  // from the opponent's (slope 0.5+), so the dominant corner (3, 3) is
  // jointly worse than (0, 0).  The gambler's bilinear field peaks at the
  // dominant corner.  The slopes dwarf the +-0.02 jitter, so the audited
  // structure cannot depend on the seed.
  Rng rng(seed);
  for (int i = 0; i < s; ++i) {
    for (int j = 0; j < s; ++j) {
      const int cell = i * s + j;
      g.row_payoff[cell] = 0.30 * i - 0.50 * j + rng.uniform(-0.02, 0.02);
      g.col_payoff[cell] = 0.32 * j - 0.55 * i + rng.uniform(-0.02, 0.02);
      g.gambler_payoff[cell] =
          static_cast<double>(i * j) / ((s - 1.0) * (s - 1.0)) +
          rng.uniform(-0.02, 0.02);
    }
  }
  validate_grid(g);
  return g;
}

std::pair<int, int> step_grid(std::pair<int, int> state, int row_move,
                              int col_move, int size) {
  if (size < 1) throw std::invalid_argument("grid size must be >= 1");
  if (state.first < 0 || state.first >= size || state.second < 0 ||
      state.second >= size) {
    throw std::invalid_argument("state outside the grid");
  }
  if ((row_move != kUp && row_move != kDown) ||
      (col_move != kLeft && col_move != kRight)) {
    throw std::invalid_argument("moves must be 0 (up/left) or 1 (down/right)");
  }
  const int di = row_move == kUp ? -1 : 1;
  const int dj = col_move == kLeft ? -1 : 1;
  return {(state.first + di + size) % size, (state.second + dj + size) % size};
}

std::string grid_to_json(const GridBimatrixGame& game) {
  nlohmann::json j;
  j["size"] = game.size;
  j["boundary"] = "toroidal";
  j["episode_length"] = game.episode_length;
  j["row_payoff"] = game.row_payoff;
  j["col_payoff"] = game.col_payoff;
  j["gambler_payoff"] = game.gambler_payoff;
  return j.dump(2);
}

GridBimatrixGame grid_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("grid_from_json: bad JSON: ") +
                                e.what());
  }
  for (const char* key :
       {"size", "boundary", "row_payoff", "col_payoff", "gambler_payoff"}) {
    if (!j.contains(key)) {
      throw std::invalid_argument(std::string("grid_from_json: missing field ") +
                                  key);
    }
  }
  if (j["boundary"].get<std::string>() != "toroidal") {
    throw std::invalid_argument("grid_from_json: unknown boundary rule");
  }
  GridBimatrixGame g;
  g.size = j["size"].get<int>();
  if (g.size < 2) throw std::invalid_argument("grid_from_json: size must be >= 2");
  if (j.contains("episode_length")) {
    g.episode_length = j["episode_length"].get<int>();
  }
  g.row_payoff = j["row_payoff"].get<std::vector<double>>();
  g.col_payoff = j["col_payoff"].get<std::vector<double>>();
  g.gambler_payoff = j["gambler_payoff"].get<std::vector<double>>();
  const std::size_t cells = static_cast<std::size_t>(g.size) * g.size;
  if (g.row_payoff.size() != cells || g.col_payoff.size() != cells ||
      g.gambler_payoff.size() != cells) {
    throw std::invalid_argument(
        "grid_from_json: payoff tables must have size*size entries");
  }
  validate_grid(g);  // re-derives nash/coop and audits the structure
  return g;
}

void save_grid(const GridBimatrixGame& game, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_grid: cannot open " + path);
  out << grid_to_json(game) << "\n";
}

GridBimatrixGame load_grid(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_grid: cannot open " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return grid_from_json(buf.str());
}

double apply_transform(const RewardTransform& t, double r_i, double r_g) {
  validate_transform(t);
  switch (t.kind) {
    case RewardTransform::Kind::kIdentity:
      return r_i;
    case RewardTransform::Kind::kAdversarial:
      return r_i - t.q * r_g;
    case RewardTransform::Kind::kRiskAverse:
    case RewardTransform::Kind::kIsoelastic:
      return curvature(r_i, t.eta);
  }
  throw std::invalid_argument("unknown transform kind");
}

Game transform_game(const Game& game, const RewardTransform& t) {
  validate_transform(t);
  if (t.kind == RewardTransform::Kind::kIdentity) return game;
  if (game.joint_count() > kDenseJointCap) {
    throw std::invalid_argument("joint action space too large to tabulate");
  }
  const PayoffBounds b = game.payoff_bounds();
  const double span = b.hi - b.lo;
  const bool curved = t.kind == RewardTransform::Kind::kRiskAverse ||
                      t.kind == RewardTransform::Kind::kIsoelastic;

  const int n = game.num_agents();
  const std::vector<int>& counts = game.action_counts();
  std::vector<double> payoffs;
  payoffs.reserve(static_cast<std::size_t>(n + 1) * game.ego_actions() *
                  game.joint_count());
  for (int agent = 0; agent <= n; ++agent) {
    for (int e = 0; e < game.ego_actions(); ++e) {
      for_each_joint(counts, [&](std::span<const int> a, long long) {
        const double r = game.payoff(agent, e, a);
        if (agent == 0) {
          payoffs.push_back(r);
        } else if (curved) {
          // Affine remap onto [0.1, 1.1] keeps the base positive and the
          // preference order intact.
          const double base =
              span > 1e-12 ? 0.1 + (r - b.lo) / span : 0.6;
          payoffs.push_back(curvature(base, t.eta));
        } else {
          payoffs.push_back(r - t.q * game.payoff(0, e, a));
        }
      });
    }
  }
  return Game::dense(n, game.ego_actions(), counts, std::move(payoffs));
}

double gini(std::span<const double> incomes) {
  const int n = static_cast<int>(incomes.size());
  if (n < 2) throw std::invalid_argument("gini needs at least two incomes");
  double total = 0.0;
  for (double z : incomes) {
    if (!(z >= 0.0) || !std::isfinite(z)) {
      throw std::invalid_argument("incomes must be finite and >= 0");
    }
    total += z;
  }
  if (total <= 0.0) {
    throw std::invalid_argument("gini of all-zero incomes is undefined");
  }
  double abs_diff = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      abs_diff += std::abs(incomes[i] - incomes[j]);
    }
  }
  return abs_diff / (2.0 * n * total);
}

double swf(std::span<const double> incomes) {
  const int n = static_cast<int>(incomes.size());
  if (n < 2) throw std::invalid_argument("swf needs at least two incomes");
  double total = 0.0;
  for (double z : incomes) {
    if (!(z >= 0.0) || !std::isfinite(z)) {
      throw std::invalid_argument("incomes must be finite and >= 0");
    }
    total += z;
  }
  if (total <= 0.0) return 0.0;  // all-zero by convention
  const double equality =
      std::max(0.0, 1.0 - n / (n - 1.0) * gini(incomes));
  return equality * total;
}

}  // namespace robustcce
