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

#include "robustcce/cli.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <utility>

#include "CLI11.hpp"
#include "json.hpp"
#include "robustcce/blackwell.hpp"
#include "robustcce/cce_lp.hpp"
#include "robustcce/env_zoo.hpp"
#include "robustcce/game.hpp"
#include "robustcce/lagrangian.hpp"
#include "robustcce/learners.hpp"
#include "robustcce/metrics.hpp"
#include "robustcce/rng.hpp"
#include "robustcce/robust_trainer.hpp"
#include "robustcce/types.hpp"

namespace robustcce {
namespace {

namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// Small formatting/file helpers.

std::string fmt_g(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

std::string hash_hex(std::uint64_t h) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

[[noreturn]] void config_error(int line_no, const std::string& what) {
  throw std::invalid_argument("config line " + std::to_string(line_no) + ": " +
                              what);
}

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

bool valid_name(const std::string& s) {
  if (s.empty()) return false;
  for (char c : s) {
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_' && c != '-') {
      return false;
    }
  }
  return true;
}

// Locale-independent full-token number parse.
bool parse_number(const std::string& tok, double* out) {
  const char* first = tok.data();
  const char* last = tok.data() + tok.size();
  auto [ptr, ec] = std::from_chars(first, last, *out);
  return ec == std::errc() && ptr == last && std::isfinite(*out);
}

// Cuts a trailing `#` comment, ignoring `#` inside double-quoted strings.
std::string strip_comment(const std::string& line) {
  bool in_string = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"') in_string = !in_string;
    else if (line[i] == '#' && !in_string) return line.substr(0, i);
  }
  return line;
}

void write_file_atomic(const fs::path& path, const std::string& content) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + tmp.string());
    out << content;
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  fs::rename(tmp, path);  // atomic replace on the same filesystem
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

// ---------------------------------------------------------------------------
// Config value parsing.

// Splits the inside of a one-level array on top-level commas (quote-aware).
std::vector<std::string> split_items(const std::string& inner, int line_no) {
  std::vector<std::string> items;
  std::string cur;
  bool in_string = false;
  for (char c : inner) {
    if (c == '"') in_string = !in_string;
    if (c == '[' || c == ']') {
      if (!in_string) config_error(line_no, "nested arrays are not supported");
    }
    if (c == ',' && !in_string) {
      items.push_back(trim(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (in_string) config_error(line_no, "unterminated string");
  const std::string last = trim(cur);
  if (!last.empty()) items.push_back(last);
  else if (!items.empty()) config_error(line_no, "trailing comma in array");
  for (const std::string& item : items) {
    if (item.empty()) config_error(line_no, "empty array item");
  }
  return items;
}

std::string parse_string_token(const std::string& tok, int line_no) {
  if (tok.size() < 2 || tok.front() != '"' || tok.back() != '"') {
    config_error(line_no, "malformed string " + tok);
  }
  const std::string body = tok.substr(1, tok.size() - 2);
  if (body.find('"') != std::string::npos) {
    config_error(line_no, "embedded quotes are not supported");
  }
  return body;
}

ConfigValue parse_value(const std::string& raw, int line_no) {
  ConfigValue v;
  if (raw.front() == '"') {
    v.kind = ConfigValue::Kind::kString;
    v.text = parse_string_token(raw, line_no);
    return v;
  }
  if (raw == "true" || raw == "false") {
    v.kind = ConfigValue::Kind::kBool;
    v.flag = raw == "true";
    return v;
  }
  if (raw.front() == '[') {
    if (raw.back() != ']') config_error(line_no, "unterminated array");
    const std::vector<std::string> items =
        split_items(raw.substr(1, raw.size() - 2), line_no);
    const bool strings = !items.empty() && items.front().front() == '"';
    v.kind = strings ? ConfigValue::Kind::kStringList
                     : ConfigValue::Kind::kNumberList;
    for (const std::string& item : items) {
      if (strings) {
        v.texts.push_back(parse_string_token(item, line_no));
      } else {
        double num = 0.0;
        if (!parse_number(item, &num)) {
          config_error(line_no, "array item is not a number: " + item);
        }
        v.numbers.push_back(num);
      }
    }
    return v;
  }
  if (parse_number(raw, &v.number)) {
    v.kind = ConfigValue::Kind::kNumber;
    return v;
  }
  config_error(line_no, "unrecognized value " + raw);
}

std::string render_value(const ConfigValue& v) {
  switch (v.kind) {
    case ConfigValue::Kind::kString:
      return "\"" + v.text + "\"";
    case ConfigValue::Kind::kNumber:
      return fmt_g(v.number);
    case ConfigValue::Kind::kBool:
      return v.flag ? "true" : "false";
    case ConfigValue::Kind::kNumberList: {
      std::string out = "[";
      for (std::size_t i = 0; i < v.numbers.size(); ++i) {
        if (i) out += ", ";
        out += fmt_g(v.numbers[i]);
      }
      return out + "]";
    }
    case ConfigValue::Kind::kStringList: {
      std::string out = "[";
      for (std::size_t i = 0; i < v.texts.size(); ++i) {
        if (i) out += ", ";
        out += "\"" + v.texts[i] + "\"";
      }
      return out + "]";
    }
  }
  throw std::logic_error("unknown config value kind");
}

const ConfigValue* find_value(const ConfigTable& table,
                              const std::string& section,
                              const std::string& key) {
  auto sec = table.find(section);
  if (sec == table.end()) return nullptr;
  auto val = sec->second.find(key);
  return val == sec->second.end() ? nullptr : &val->second;
}

[[noreturn]] void type_error(const std::string& section, const std::string& key,
                             const char* expected) {
  throw std::invalid_argument("config [" + section + "] " + key +
                              ": expected " + expected);
}

// ---------------------------------------------------------------------------
// Typed config reads shared by the experiment runner and the subcommands.

int int_value(double v, const std::string& section, const std::string& key) {
  if (!(std::isfinite(v)) || v != std::floor(v) || std::abs(v) > 2147483647.0) {
    throw std::invalid_argument("config [" + section + "] " + key +
                                ": expected an integer, got " + fmt_g(v));
  }
  return static_cast<int>(v);
}

int int_or(const ExperimentConfig& c, const std::string& section,
           const std::string& key, int fallback) {
  if (!c.has(section, key)) return fallback;
  return int_value(c.number_or(section, key, 0.0), section, key);
}

LearnerKind parse_learner(const std::string& name) {
  if (name == "hedge") return LearnerKind::kHedge;
  if (name == "regret-matching") return LearnerKind::kRegretMatching;
  if (name == "exp3") return LearnerKind::kExp3;
  throw std::invalid_argument(
      "unknown learner \"" + name +
      "\" (expected hedge, regret-matching, or exp3)");
}

InnerSampler parse_inner(const std::string& name) {
  if (name == "lp") return InnerSampler::kLpOracle;
  if (name == "blackwell") return InnerSampler::kBlackwell;
  if (name == "lagrangian") return InnerSampler::kLagrangian;
  throw std::invalid_argument("unknown inner sampler \"" + name +
                              "\" (expected lp, blackwell, or lagrangian)");
}

RegretEstimator::Kind parse_estimator(const std::string& name) {
  if (name == "exact") return RegretEstimator::Kind::kExact;
  if (name == "probe") return RegretEstimator::Kind::kMonteCarloProbe;
  throw std::invalid_argument("unknown estimator \"" + name +
                              "\" (expected exact or probe)");
}

SelfPlaySpec selfplay_from(const ExperimentConfig& c) {
  SelfPlaySpec s;
  s.kind = parse_learner(c.string_or("algo", "learner", "hedge"));
  s.learning_rate = c.number_or("algo", "learning_rate", 0.0);
  s.entropy_bonus = c.number_or("algo", "entropy", 0.0);
  if (s.kind == LearnerKind::kExp3 && s.entropy_bonus <= 0.0) {
    s.entropy_bonus = 0.05;  // exp3 requires an exploration floor
  }
  return s;
}

RegretEstimator estimator_from(const ExperimentConfig& c) {
  RegretEstimator e;
  e.kind = parse_estimator(c.string_or("algo", "estimator", "exact"));
  e.probe_steps = int_or(c, "algo", "probe_steps", 2000);
  e.probe_batches = int_or(c, "algo", "probe_batches", 1);
  return e;
}

LagrangianState lagrangian_from(const ExperimentConfig& c, int num_agents,
                                double eps) {
  LagrangianState s = LagrangianState::initial(num_agents, eps);
  s.lambdas.assign(num_agents, c.number_or("algo", "lambda0", 1.0));
  s.alpha_lambda = c.number_or("algo", "alpha_lambda", 0.25);
  s.rounds = int_or(c, "algo", "rounds", 60);
  s.selfplay_steps = int_or(c, "algo", "selfplay_steps", 250);
  s.lambda_max = c.number_or("algo", "lambda_max", 1e4);
  const std::string mode = c.string_or("algo", "mode", "dynamic");
  if (mode == "frozen") s.mode = MultiplierMode::kFrozen;
  else if (mode != "dynamic") {
    throw std::invalid_argument("config [algo] mode: expected dynamic or frozen");
  }
  return s;
}

ApproachabilityOptions blackwell_from(const ExperimentConfig& c, double eps,
                                      const ApproachabilityOptions& defaults) {
  ApproachabilityOptions o = defaults;
  o.eps.assign(1, eps);
  o.eps_tol = c.number_or("algo", "eps_tol", defaults.eps_tol);
  o.max_outer = int_or(c, "algo", "max_outer", defaults.max_outer);
  o.max_inner = int_or(c, "algo", "max_inner", defaults.max_inner);
  o.bits = int_or(c, "algo", "bits", defaults.bits);
  o.mixture_cap = int_or(c, "algo", "mixture_cap", defaults.mixture_cap);
  if (c.has("algo", "sigma")) {
    o.no_binary_search = true;
    o.sigma = c.number_or("algo", "sigma", 0.01);
  }
  return o;
}

RobustTrainerConfig trainer_from(const ExperimentConfig& c, const Game& game,
                                 double eps) {
  RobustTrainerConfig t;
  t.inner = parse_inner(c.string_or("algo", "inner", "lp"));
  t.eps = eps;
  t.outer_steps = int_or(c, "algo", "outer_steps", 200);
  t.ego_learning_rate = c.number_or("algo", "ego_learning_rate", 0.0);
  t.ego_entropy = c.number_or("algo", "ego_entropy", 0.05);
  if (c.has("algo", "reward_floor")) {
    t.reward_floor = c.number_or("algo", "reward_floor", 0.0);
  }
  t.blackwell = blackwell_from(c, eps, trainer_approachability_defaults());
  t.lagrangian = lagrangian_from(c, game.num_agents(), eps);
  t.estimator = estimator_from(c);
  t.selfplay = selfplay_from(c);
  return t;
}

// ---------------------------------------------------------------------------
// Game sources.

// The gambler-augmented prisoner's dilemma: two agents play the classic
// 3/0/4/1 dilemma and the one-action gambler is paid only at mutual
// defection.  Used by verify and available from make-game.
Game pd_gambler_game() {
  // Payoff layout: agent-major, ego action, then joints (a1 slowest).
  const std::vector<double> payoffs = {
      0.0, 0.0, 0.0, 1.0,  // gambler
      3.0, 0.0, 4.0, 1.0,  // row agent
      3.0, 4.0, 0.0, 1.0,  // column agent
  };
  return Game::dense(2, 1, std::vector<int>{2, 2}, payoffs);
}

// A game file is either the dense game-core JSON or the grid serialization
// (recognized by its payoff-table fields).
bool looks_like_grid_json(const std::string& text) {
  return text.find("\"row_payoff\"") != std::string::npos;
}

struct ConfigGame {
  Game game;                              // what the algorithms run on
  std::optional<GridBimatrixGame> grid;   // present when the source is a grid
};

ConfigGame game_from_config(const ExperimentConfig& c) {
  if (c.has("game", "file")) {
    const std::string path = c.string_or("game", "file", "");
    const std::string text = read_file(path);
    if (looks_like_grid_json(text)) {
      GridBimatrixGame grid = grid_from_json(text);
      Game position = grid.position_game();
      return ConfigGame{std::move(position), std::move(grid)};
    }
    return ConfigGame{game_from_json(text), std::nullopt};
  }
  const std::string generator = c.string_or("game", "generator", "");
  const std::uint64_t seed = static_cast<std::uint64_t>(
      int_or(c, "game", "seed", 0));
  if (generator == "nmatrix") {
    const int players = int_or(c, "game", "players", 4);
    const int actions = int_or(c, "game", "actions", 3);
    return ConfigGame{make_nmatrix(players, actions, seed), std::nullopt};
  }
  if (generator == "grid") {
    GridBimatrixGame grid = make_grid_bimatrix(seed);
    Game position = grid.position_game();
    return ConfigGame{std::move(position), std::move(grid)};
  }
  if (generator == "pd") {
    return ConfigGame{pd_gambler_game(), std::nullopt};
  }
  throw std::invalid_argument(
      "config [game]: set file = \"...\" or generator = "
      "\"nmatrix\"|\"grid\"|\"pd\"");
}

Game load_any_game(const std::string& path) {
  const std::string text = read_file(path);
  if (looks_like_grid_json(text)) return grid_from_json(text).position_game();
  return game_from_json(text);
}

// ---------------------------------------------------------------------------
// Opponent populations for cross-evaluation.

struct PopulationSpec {
  std::string label;
  enum class Kind { kOriginal, kTransform, kOurs } kind = Kind::kOriginal;
  RewardTransform transform;
  std::optional<double> lambda;  // kOurs with a pinned multiplier
};

PopulationSpec parse_population(const std::string& label) {
  PopulationSpec p;
  p.label = label;
  const auto colon = label.find(':');
  const std::string head = label.substr(0, colon);
  std::optional<double> arg;
  if (colon != std::string::npos) {
    double v = 0.0;
    if (!parse_number(label.substr(colon + 1), &v)) {
      throw std::invalid_argument("population \"" + label +
                                  "\": malformed numeric argument");
    }
    arg = v;
  }
  if (head == "original") {
    if (arg) throw std::invalid_argument("population original takes no argument");
    p.kind = PopulationSpec::Kind::kOriginal;
  } else if (head == "adversarial") {
    if (!arg) throw std::invalid_argument("population adversarial needs :q");
    p.kind = PopulationSpec::Kind::kTransform;
    p.transform = RewardTransform::adversarial(*arg);
  } else if (head == "risk-averse") {
    if (!arg) throw std::invalid_argument("population risk-averse needs :eta");
    p.kind = PopulationSpec::Kind::kTransform;
    p.transform = RewardTransform::risk_averse(*arg);
  } else if (head == "isoelastic") {
    if (!arg) throw std::invalid_argument("population isoelastic needs :eta");
    p.kind = PopulationSpec::Kind::kTransform;
    p.transform = RewardTransform::isoelastic(*arg);
  } else if (head == "ours") {
    p.kind = PopulationSpec::Kind::kOurs;
    p.lambda = arg;
  } else {
    throw std::invalid_argument(
        "unknown population \"" + label +
        "\" (expected original, adversarial:q, risk-averse:eta, "
        "isoelastic:eta, or ours[:lambda])");
  }
  if (p.kind == PopulationSpec::Kind::kTransform) {
    apply_transform(p.transform, 1.0, 0.0);  // validates the parameters
  }
  return p;
}

// Rebuilds the game with each agent's utility replaced by the
// pessimism-blended (lambda*u_i - u_0)/(1+lambda); the ego row is unchanged.
Game blended_population(const Game& base, std::span<const double> lambdas) {
  const std::vector<int>& counts = base.action_counts();
  const int n = base.num_agents();
  std::vector<double> payoffs;
  payoffs.reserve(static_cast<std::size_t>(n + 1) * base.ego_actions() *
                  base.joint_count());
  for (int agent = 0; agent <= n; ++agent) {
    for (int e = 0; e < base.ego_actions(); ++e) {
      for_each_joint(counts, [&](std::span<const int> a, long long) {
        const double u = base.payoff(agent, e, a);
        if (agent == 0) {
          payoffs.push_back(u);
        } else {
          payoffs.push_back(modified_utility(lambdas[agent - 1], u,
                                             base.payoff(0, e, a)));
        }
      });
    }
  }
  return Game::dense(n, base.ego_actions(), counts, std::move(payoffs));
}

Game build_population(const Game& base, const PopulationSpec& p,
                      const ExperimentConfig& c, double eps,
                      std::uint64_t seed) {
  switch (p.kind) {
    case PopulationSpec::Kind::kOriginal:
      return base;
    case PopulationSpec::Kind::kTransform:
      return transform_game(base, p.transform);
    case PopulationSpec::Kind::kOurs: {
      std::vector<double> lambdas;
      if (p.lambda) {
        lambdas.assign(base.num_agents(), *p.lambda);
      } else {
        // Multipliers earned by the servo on the scoring game itself.
        PessimisticResult res = sample_pessimistic(
            base, base.uniform_ego(),
            lagrangian_from(c, base.num_agents(), eps), selfplay_from(c),
            estimator_from(c), Rng::derive(seed, 51));
        lambdas = res.state.lambdas;
      }
      return blended_population(base, lambdas);
    }
  }
  throw std::logic_error("unknown population kind");
}

// ---------------------------------------------------------------------------
// Per-seed experiment runners.

nlohmann::json strategy_to_json(const EgoStrategy& s) { return s.dist; }

nlohmann::json mixture_to_json(const PlayMixture& mix, std::size_t cap = 512) {
  nlohmann::json j;
  j["thinning"] = mix.thinning;
  j["component_count"] = mix.components.size();
  const std::size_t stride =
      mix.components.size() > cap ? (mix.components.size() + cap - 1) / cap : 1;
  double kept = 0.0;
  nlohmann::json comps = nlohmann::json::array();
  for (std::size_t i = 0; i < mix.components.size(); i += stride) {
    kept += mix.components[i].weight;
  }
  for (std::size_t i = 0; i < mix.components.size(); i += stride) {
    const MixtureComponent& comp = mix.components[i];
    nlohmann::json entry;
    entry["weight"] = kept > 0.0 ? comp.weight / kept : comp.weight;
    entry["per_agent"] = comp.strategy.per_agent;
    comps.push_back(std::move(entry));
  }
  j["components"] = std::move(comps);
  return j;
}

double mean_of(std::span<const double> xs) {
  if (xs.empty()) return 0.0;
  double total = 0.0;
  for (double x : xs) total += x;
  return total / static_cast<double>(xs.size());
}

// Mean over agents of the best deviation gain against the mixture.
double mean_exact_regret(const Game& game, const EgoStrategy& ego,
                         const PlayMixture& mixture) {
  const RegretReport report = regret(game, ego, mixture);
  return mean_of(report.per_agent);
}

// Everything an experiment needs, resolved and validated before the seed
// loop starts so a malformed config fails fast rather than per seed.
struct ExperimentContext {
  const ExperimentConfig* config;
  ConfigGame source;
  double eps = 0.0;
  std::vector<PopulationSpec> populations;  // cross-eval
  std::vector<double> eps_grid;             // figure3-sweep
  std::vector<double> lambda_grid;          // ablation-frozen-lambda

  explicit ExperimentContext(const ExperimentConfig& c)
      : config(&c), source(game_from_config(c)) {}
};

struct SeedRows {
  std::vector<std::vector<std::string>> rows;
  std::vector<int> order;  // per-row merge key (figure3: eps index)
  nlohmann::json doc;
};

std::vector<std::string> csv_columns(const std::string& kind) {
  if (kind == "worst-cce") {
    return {"config_hash", "seed",      "eps",       "sense",
            "value",       "y_best",    "converged", "outer_iterations"};
  }
  if (kind == "sample-pessimistic") {
    return {"config_hash",      "seed",      "eps",        "lower_bound",
            "converged",        "mean_final_regret", "lambda_mean"};
  }
  if (kind == "train-robust") {
    return {"config_hash", "seed",          "eps",          "inner",
            "mean_tail_value", "argmax_action", "failures"};
  }
  if (kind == "cross-eval") {
    return {"config_hash", "seed", "train_population", "test_population",
            "mean",        "std_error"};
  }
  if (kind == "ablation-frozen-lambda") {
    return {"config_hash", "seed",           "mode",
            "lambda0",     "gambler_reward", "mean_agent_regret"};
  }
  if (kind == "figure3-sweep") {
    return {"config_hash", "eps", "seed", "gambler_reward",
            "mean_agent_regret"};
  }
  throw std::invalid_argument("unknown experiment kind \"" + kind + "\"");
}

SeedRows run_worst_cce_seed(const ExperimentContext& ctx, std::uint64_t seed) {
  const ExperimentConfig& c = *ctx.config;
  const Game& game = ctx.source.game;
  const EgoStrategy ego = game.uniform_ego();
  std::vector<double> nu = ego_payoff_profile(game, ego);
  const std::string sense = c.string_or("algo", "sense", "max");
  if (sense != "max" && sense != "min") {
    throw std::invalid_argument("config [algo] sense: expected max or min");
  }
  if (sense == "min") {
    for (double& v : nu) v = -v;
  }
  ApproachabilityOptions opts =
      blackwell_from(c, ctx.eps, ApproachabilityOptions{});
  WorstCaseResult res = worst_case_cce(game, ego, nu, opts);
  const double value = sense == "min" ? -res.value : res.value;
  const double y_best = sense == "min" ? -res.y_best : res.y_best;

  SeedRows out;
  out.rows.push_back({hash_hex(c.hash), std::to_string(seed), fmt_g(ctx.eps),
                      sense, fmt_g(value), fmt_g(y_best),
                      res.converged ? "1" : "0",
                      std::to_string(res.outer_iterations)});
  out.doc["sense"] = sense;
  out.doc["eps"] = ctx.eps;
  out.doc["value"] = value;
  out.doc["y_best"] = y_best;
  out.doc["converged"] = res.converged;
  out.doc["outer_iterations"] = res.outer_iterations;
  out.doc["distance_trace"] = res.distance_trace;
  out.doc["step_norm_trace"] = res.step_norm_trace;
  out.doc["mixture"] = mixture_to_json(res.mixture);
  return out;
}

nlohmann::json pessimistic_trace_json(const PessimisticResult& res) {
  nlohmann::json j;
  j["lambdas"] = res.trace.lambdas;
  j["regrets"] = res.trace.regrets;
  j["ego_values"] = res.trace.ego_values;
  j["lower_bound"] = res.lower_bound;
  j["converged"] = res.converged;
  j["final_lambdas"] = res.state.lambdas;
  return j;
}

SeedRows run_sample_pessimistic_seed(const ExperimentContext& ctx,
                                     std::uint64_t seed) {
  const ExperimentConfig& c = *ctx.config;
  const Game& game = ctx.source.game;
  PessimisticResult res = sample_pessimistic(
      game, game.uniform_ego(), lagrangian_from(c, game.num_agents(), ctx.eps),
      selfplay_from(c), estimator_from(c), seed);
  const double mean_final_regret =
      res.trace.regrets.empty() ? 0.0 : mean_of(res.trace.regrets.back());
  SeedRows out;
  out.rows.push_back({hash_hex(c.hash), std::to_string(seed), fmt_g(ctx.eps),
                      fmt_g(res.lower_bound), res.converged ? "1" : "0",
                      fmt_g(mean_final_regret),
                      fmt_g(mean_of(res.state.lambdas))});
  out.doc["eps"] = ctx.eps;
  out.doc["trace"] = pessimistic_trace_json(res);
  out.doc["mixture"] = mixture_to_json(res.mixture);
  return out;
}

SeedRows run_train_robust_seed(const ExperimentContext& ctx,
                               std::uint64_t seed) {
  const ExperimentConfig& c = *ctx.config;
  const Game& game = ctx.source.game;
  const RobustTrainerConfig cfg = trainer_from(c, game, ctx.eps);
  RobustTrainResult res = train_robust(game, cfg, seed);
  const std::size_t n = res.value_trace.size();
  const std::size_t tail = std::max<std::size_t>(1, n / 4);
  const double mean_tail =
      mean_of(std::span<const double>(res.value_trace).subspan(n - tail));
  const int argmax = static_cast<int>(
      std::max_element(res.strategy.dist.begin(), res.strategy.dist.end()) -
      res.strategy.dist.begin());
  SeedRows out;
  out.rows.push_back({hash_hex(c.hash), std::to_string(seed), fmt_g(ctx.eps),
                      c.string_or("algo", "inner", "lp"), fmt_g(mean_tail),
                      std::to_string(argmax), std::to_string(res.failures)});
  out.doc["eps"] = ctx.eps;
  out.doc["strategy"] = strategy_to_json(res.strategy);
  out.doc["final_strategy"] = strategy_to_json(res.final_strategy);
  out.doc["value_trace"] = res.value_trace;
  out.doc["failures"] = res.failures;
  out.doc["failure_log"] = res.failure_log;
  return out;
}

SeedRows run_cross_eval_seed(const ExperimentContext& ctx,
                             std::uint64_t seed) {
  const ExperimentConfig& c = *ctx.config;
  const Game& base = ctx.source.game;
  const int episodes = int_or(c, "algo", "episodes", 5);
  const int steps = int_or(c, "algo", "steps", 1000);

  std::vector<Game> populations;
  populations.reserve(ctx.populations.size());
  for (const PopulationSpec& p : ctx.populations) {
    populations.push_back(build_population(base, p, c, ctx.eps, seed));
  }
  std::vector<EgoStrategy> egos;
  egos.reserve(populations.size());
  nlohmann::json ego_docs = nlohmann::json::array();
  for (std::size_t i = 0; i < populations.size(); ++i) {
    RobustTrainResult trained =
        train_robust(populations[i], trainer_from(c, base, ctx.eps),
                     Rng::derive(seed, 200 + i));
    ego_docs.push_back(strategy_to_json(trained.strategy));
    egos.push_back(std::move(trained.strategy));
  }
  const std::vector<std::vector<CrossEvalCell>> cells =
      evaluate_cross(base, populations, egos, selfplay_from(c), episodes,
                     steps, Rng::derive(seed, 999));

  SeedRows out;
  nlohmann::json matrix = nlohmann::json::array();
  for (std::size_t r = 0; r < cells.size(); ++r) {
    nlohmann::json matrix_row = nlohmann::json::array();
    for (std::size_t t = 0; t < cells[r].size(); ++t) {
      out.rows.push_back({hash_hex(c.hash), std::to_string(seed),
                          ctx.populations[r].label, ctx.populations[t].label,
                          fmt_g(cells[r][t].mean),
                          fmt_g(cells[r][t].std_error)});
      matrix_row.push_back({{"mean", cells[r][t].mean},
                            {"std_error", cells[r][t].std_error}});
    }
    matrix.push_back(std::move(matrix_row));
  }
  nlohmann::json labels = nlohmann::json::array();
  for (const PopulationSpec& p : ctx.populations) labels.push_back(p.label);
  out.doc["populations"] = std::move(labels);
  out.doc["egos"] = std::move(ego_docs);
  out.doc["cells"] = std::move(matrix);
  return out;
}

SeedRows run_ablation_seed(const ExperimentContext& ctx, std::uint64_t seed) {
  const ExperimentConfig& c = *ctx.config;
  const Game& game = ctx.source.game;
  const EgoStrategy ego = game.uniform_ego();
  const SelfPlaySpec selfplay = selfplay_from(c);
  const RegretEstimator estimator = estimator_from(c);

  SeedRows out;
  out.doc["runs"] = nlohmann::json::array();
  auto run_one = [&](MultiplierMode mode, double lambda0, std::uint64_t run_seed) {
    LagrangianState state = lagrangian_from(c, game.num_agents(), ctx.eps);
    state.mode = mode;
    if (mode == MultiplierMode::kFrozen) {
      state.lambdas.assign(game.num_agents(), lambda0);
    }
    PessimisticResult res = sample_pessimistic(game, ego, state, selfplay,
                                               estimator, run_seed);
    const double agent_regret = mean_exact_regret(game, ego, res.mixture);
    const char* mode_name = mode == MultiplierMode::kFrozen ? "frozen" : "dynamic";
    out.rows.push_back({hash_hex(c.hash), std::to_string(seed), mode_name,
                        fmt_g(lambda0), fmt_g(res.lower_bound),
                        fmt_g(agent_regret)});
    out.doc["runs"].push_back({{"mode", mode_name},
                               {"lambda0", lambda0},
                               {"gambler_reward", res.lower_bound},
                               {"mean_agent_regret", agent_regret},
                               {"final_lambdas", res.state.lambdas},
                               {"bound_trace", res.state.bound_trace}});
  };

  run_one(MultiplierMode::kDynamic, c.number_or("algo", "lambda0", 1.0),
          Rng::derive(seed, 1));
  for (std::size_t i = 0; i < ctx.lambda_grid.size(); ++i) {
    run_one(MultiplierMode::kFrozen, ctx.lambda_grid[i],
            Rng::derive(seed, 2 + i));
  }
  return out;
}

SeedRows run_figure3_seed(const ExperimentContext& ctx, std::uint64_t seed) {
  const ExperimentConfig& c = *ctx.config;
  const Game& game = ctx.source.game;
  const EgoStrategy ego = game.uniform_ego();
  const SelfPlaySpec selfplay = selfplay_from(c);
  const RegretEstimator estimator = estimator_from(c);

  SeedRows out;
  out.doc["sweep"] = nlohmann::json::array();
  for (std::size_t k = 0; k < ctx.eps_grid.size(); ++k) {
    const double eps = ctx.eps_grid[k];
    PessimisticResult res = sample_pessimistic(
        game, ego, lagrangian_from(c, game.num_agents(), eps), selfplay,
        estimator, Rng::derive(seed, k));
    const double agent_regret = mean_exact_regret(game, ego, res.mixture);
    out.rows.push_back({hash_hex(c.hash), fmt_g(eps), std::to_string(seed),
                        fmt_g(res.lower_bound), fmt_g(agent_regret)});
    out.order.push_back(static_cast<int>(k));
    out.doc["sweep"].push_back({{"eps", eps},
                                {"gambler_reward", res.lower_bound},
                                {"mean_agent_regret", agent_regret},
                                {"final_lambdas", res.state.lambdas}});
  }
  return out;
}

ExperimentContext build_context(const ExperimentConfig& c) {
  ExperimentContext ctx(c);
  ctx.eps = c.number_or("algo", "eps", 0.0);
  if (!(std::isfinite(ctx.eps)) || ctx.eps < 0.0) {
    throw std::invalid_argument("config [algo] eps: must be finite and >= 0");
  }
  if (c.kind == "cross-eval") {
    const std::vector<std::string> labels = c.strings_or(
        "algo", "populations",
        {"original", "adversarial:0.25", "adversarial:1", "risk-averse:0.05",
         "risk-averse:0.2", "ours"});
    if (labels.empty()) {
      throw std::invalid_argument("config [algo] populations: empty list");
    }
    for (const std::string& label : labels) {
      ctx.populations.push_back(parse_population(label));
    }
  }
  if (c.kind == "figure3-sweep") {
    if (!ctx.source.grid.has_value()) {
      throw std::invalid_argument(
          "figure3-sweep needs the grid game ([game] generator = \"grid\" or "
          "a grid JSON file)");
    }
    ctx.eps_grid = c.numbers_or("algo", "eps_grid",
                                {0.0, 0.05, 0.1, 0.2, 0.4, 0.8});
    if (ctx.eps_grid.empty()) {
      throw std::invalid_argument("config [algo] eps_grid: empty list");
    }
    for (double e : ctx.eps_grid) {
      if (!std::isfinite(e) || e < 0.0) {
        throw std::invalid_argument(
            "config [algo] eps_grid: entries must be finite and >= 0");
      }
    }
  }
  if (c.kind == "ablation-frozen-lambda") {
    ctx.lambda_grid =
        c.numbers_or("algo", "lambda_grid", {0.0, 0.5, 1.0, 4.0, 16.0});
    if (ctx.lambda_grid.empty()) {
      throw std::invalid_argument("config [algo] lambda_grid: empty list");
    }
    for (double l : ctx.lambda_grid) {
      if (!std::isfinite(l) || l < 0.0) {
        throw std::invalid_argument(
            "config [algo] lambda_grid: entries must be finite and >= 0");
      }
    }
  }
  // Cheap range validation of the shared [algo] knobs so the whole seed loop
  // never starts on a bad config.
  if (int_or(c, "algo", "rounds", 60) < 1 ||
      int_or(c, "algo", "selfplay_steps", 250) < 1 ||
      int_or(c, "algo", "outer_steps", 200) < 1 ||
      int_or(c, "algo", "episodes", 5) < 1 ||
      int_or(c, "algo", "steps", 1000) < 1) {
    throw std::invalid_argument(
        "config [algo]: rounds, selfplay_steps, outer_steps, episodes, and "
        "steps must all be >= 1");
  }
  // Parse-validate the enum-ish fields up front.
  selfplay_from(c);
  estimator_from(c);
  if (c.kind == "train-robust" || c.kind == "cross-eval") {
    parse_inner(c.string_or("algo", "inner", "lp"));
  }
  return ctx;
}

SeedRows run_seed(const ExperimentContext& ctx, std::uint64_t seed) {
  const std::string& kind = ctx.config->kind;
  if (kind == "worst-cce") return run_worst_cce_seed(ctx, seed);
  if (kind == "sample-pessimistic") return run_sample_pessimistic_seed(ctx, seed);
  if (kind == "train-robust") return run_train_robust_seed(ctx, seed);
  if (kind == "cross-eval") return run_cross_eval_seed(ctx, seed);
  if (kind == "ablation-frozen-lambda") return run_ablation_seed(ctx, seed);
  if (kind == "figure3-sweep") return run_figure3_seed(ctx, seed);
  throw std::invalid_argument("unknown experiment kind \"" + kind + "\"");
}

std::string make_csv(const ExperimentConfig& c,
                     const std::vector<std::vector<std::string>>& rows) {
  std::string text = "# robustcce-csv ";
  text += kCsvSchemaVersion;
  text += " kind=" + c.kind + " config=" + hash_hex(c.hash) + " tool=";
  text += kToolVersion;
  text += "\n";
  const std::vector<std::string> columns = csv_columns(c.kind);
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (i) text += ",";
    text += columns[i];
  }
  text += "\n";
  for (const std::vector<std::string>& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) text += ",";
      text += row[i];
    }
    text += "\n";
  }
  return text;
}

}  // namespace

// ---------------------------------------------------------------------------
// Public configuration API.

ConfigTable parse_config_text(const std::string& text) {
  ConfigTable table;
  std::string section;
  std::istringstream in(text);
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string line = trim(strip_comment(raw));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') config_error(line_no, "unterminated [section]");
      section = trim(line.substr(1, line.size() - 2));
      if (!valid_name(section)) {
        config_error(line_no, "bad section name \"" + section + "\"");
      }
      table[section];
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      config_error(line_no, "expected key = value");
    }
    const std::string key = trim(line.substr(0, eq));
    if (!valid_name(key)) config_error(line_no, "bad key name \"" + key + "\"");
    if (section.empty()) config_error(line_no, "key outside any [section]");
    if (table[section].count(key)) {
      config_error(line_no, "duplicate key \"" + key + "\"");
    }
    const std::string value = trim(line.substr(eq + 1));
    if (value.empty()) config_error(line_no, "missing value for \"" + key + "\"");
    table[section][key] = parse_value(value, line_no);
  }
  return table;
}

ConfigTable load_config_file(const std::string& path) {
  return parse_config_text(read_file(path));
}

std::string canonical_config_text(const ConfigTable& table) {
  std::string out;
  for (const auto& [section, keys] : table) {
    out += "[" + section + "]\n";
    for (const auto& [key, value] : keys) {
      out += key + " = " + render_value(value) + "\n";
    }
  }
  return out;
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

bool ExperimentConfig::has(const std::string& section,
                           const std::string& key) const {
  return find_value(table, section, key) != nullptr;
}

double ExperimentConfig::number_or(const std::string& section,
                                   const std::string& key,
                                   double fallback) const {
  const ConfigValue* v = find_value(table, section, key);
  if (!v) return fallback;
  if (v->kind != ConfigValue::Kind::kNumber) type_error(section, key, "a number");
  return v->number;
}

std::string ExperimentConfig::string_or(const std::string& section,
                                        const std::string& key,
                                        const std::string& fallback) const {
  const ConfigValue* v = find_value(table, section, key);
  if (!v) return fallback;
  if (v->kind != ConfigValue::Kind::kString) type_error(section, key, "a string");
  return v->text;
}

std::vector<double> ExperimentConfig::numbers_or(
    const std::string& section, const std::string& key,
    std::vector<double> fallback) const {
  const ConfigValue* v = find_value(table, section, key);
  if (!v) return fallback;
  if (v->kind == ConfigValue::Kind::kNumber) return {v->number};
  if (v->kind != ConfigValue::Kind::kNumberList) {
    type_error(section, key, "a number array");
  }
  return v->numbers;
}

std::vector<std::string> ExperimentConfig::strings_or(
    const std::string& section, const std::string& key,
    std::vector<std::string> fallback) const {
  const ConfigValue* v = find_value(table, section, key);
  if (!v) return fallback;
  if (v->kind == ConfigValue::Kind::kString) return {v->text};
  if (v->kind != ConfigValue::Kind::kStringList) {
    type_error(section, key, "a string array");
  }
  return v->texts;
}

ExperimentConfig experiment_config_from_text(const std::string& text) {
  ExperimentConfig c;
  c.table = parse_config_text(text);

  const ConfigValue* kind = find_value(c.table, "experiment", "kind");
  if (!kind || kind->kind != ConfigValue::Kind::kString) {
    throw std::invalid_argument("config [experiment] kind: required string");
  }
  c.kind = kind->text;
  csv_columns(c.kind);  // rejects unknown kinds

  // ROBUSTCCE_SEED (comma- or space-separated) replaces the seed list before
  // hashing, so overridden runs are stamped as what they actually ran.
  if (const char* env = std::getenv("ROBUSTCCE_SEED");
      env != nullptr && *env != '\0') {
    std::string text_env(env);
    for (char& ch : text_env) {
      if (ch == ',') ch = ' ';
    }
    std::istringstream in(text_env);
    ConfigValue v;
    v.kind = ConfigValue::Kind::kNumberList;
    std::string tok;
    while (in >> tok) {
      double num = 0.0;
      if (!parse_number(tok, &num) || num < 0.0 || num != std::floor(num)) {
        throw std::invalid_argument(
            "ROBUSTCCE_SEED: expected nonnegative integers, got \"" + tok +
            "\"");
      }
      v.numbers.push_back(num);
    }
    if (v.numbers.empty()) {
      throw std::invalid_argument("ROBUSTCCE_SEED is set but holds no seeds");
    }
    c.table["run"]["seeds"] = std::move(v);
  }

  for (double s : c.numbers_or("run", "seeds", {0.0})) {
    if (!(s >= 0.0) || s != std::floor(s) || s > 9007199254740992.0) {
      throw std::invalid_argument(
          "config [run] seeds: entries must be nonnegative integers");
    }
    c.seeds.push_back(static_cast<std::uint64_t>(s));
  }
  if (c.seeds.empty()) {
    throw std::invalid_argument("config [run] seeds: empty list");
  }
  c.out_dir = c.string_or("run", "out", "out");
  c.hash = fnv1a64(canonical_config_text(c.table));
  return c;
}

ExperimentConfig load_experiment_config(const std::string& path) {
  return experiment_config_from_text(read_file(path));
}

// ---------------------------------------------------------------------------
// Experiment runner.

ExperimentArtifacts run_experiment(const ExperimentConfig& config) {
  const ExperimentContext ctx = build_context(config);

  fs::create_directories(config.out_dir);
  const std::string stem = config.kind + "-" + hash_hex(config.hash);
  const fs::path dir(config.out_dir);

  ExperimentArtifacts artifacts;
  artifacts.csv_path = (dir / (stem + ".csv")).string();
  artifacts.summary_path = (dir / (stem + "-summary.txt")).string();

  // Seeds run independently; results are merged in listed order, so this
  // loop could hand seeds to a worker pool without changing the artifacts.
  std::vector<SeedRows> results(config.seeds.size());
  std::vector<bool> ok(config.seeds.size(), false);
  for (std::size_t i = 0; i < config.seeds.size(); ++i) {
    const std::uint64_t seed = config.seeds[i];
    SeedOutcome outcome;
    outcome.seed = seed;
    const auto start = std::chrono::steady_clock::now();
    try {
      results[i] = run_seed(ctx, seed);
      nlohmann::json doc;
      doc["tool"] = kToolVersion;
      doc["kind"] = config.kind;
      doc["config_hash"] = hash_hex(config.hash);
      doc["seed"] = seed;
      doc.update(results[i].doc);
      const fs::path json_path =
          dir / (stem + "-seed" + std::to_string(seed) + ".json");
      write_file_atomic(json_path, doc.dump(2) + "\n");
      artifacts.json_paths.push_back(json_path.string());
      outcome.ok = true;
      ok[i] = true;
    } catch (const std::exception& e) {
      outcome.ok = false;
      outcome.error = e.what();
    }
    outcome.wall_ms = std::chrono::duration<double, std::milli>(
                          std::chrono::steady_clock::now() - start)
                          .count();
    artifacts.outcomes.push_back(std::move(outcome));
  }

  // Merge.  figure3-sweep interleaves eps-major (plot-friendly); everything
  // else concatenates in seed order.
  std::vector<std::vector<std::string>> rows;
  if (config.kind == "figure3-sweep") {
    int max_key = -1;
    for (std::size_t i = 0; i < results.size(); ++i) {
      if (!ok[i]) continue;
      for (int k : results[i].order) max_key = std::max(max_key, k);
    }
    for (int key = 0; key <= max_key; ++key) {
      for (std::size_t i = 0; i < results.size(); ++i) {
        if (!ok[i]) continue;
        for (std::size_t r = 0; r < results[i].rows.size(); ++r) {
          if (results[i].order[r] == key) rows.push_back(results[i].rows[r]);
        }
      }
    }
  } else {
    for (std::size_t i = 0; i < results.size(); ++i) {
      if (!ok[i]) continue;
      for (std::vector<std::string>& row : results[i].rows) {
        rows.push_back(std::move(row));
      }
    }
  }
  write_file_atomic(artifacts.csv_path, make_csv(config, rows));

  std::size_t ok_count = 0;
  for (const SeedOutcome& o : artifacts.outcomes) ok_count += o.ok ? 1 : 0;
  double total_ms = 0.0;
  std::string summary = "experiment summary\n";
  summary += "  kind:        " + config.kind + "\n";
  summary += "  config hash: " + hash_hex(config.hash) + "\n";
  summary += std::string("  tool:        ") + kToolVersion + "\n";
  summary += "  csv:         " + artifacts.csv_path + "\n";
  summary += "  seeds:       " + std::to_string(config.seeds.size()) +
             " total, " + std::to_string(ok_count) + " ok, " +
             std::to_string(config.seeds.size() - ok_count) + " failed\n";
  for (const SeedOutcome& o : artifacts.outcomes) {
    total_ms += o.wall_ms;
    summary += "  - seed " + std::to_string(o.seed) + ": " +
               (o.ok ? "ok" : "FAILED: " + o.error) + " (" + fmt_g(o.wall_ms) +
               " ms)\n";
  }
  summary += "  total wall time: " + fmt_g(total_ms) + " ms\n";
  summary += "\neffective config\n";
  std::istringstream canon(canonical_config_text(config.table));
  for (std::string line; std::getline(canon, line);) {
    summary += "  " + line + "\n";
  }
  write_file_atomic(artifacts.summary_path, summary);

  artifacts.exit_code = ok_count == 0 ? 1 : 0;
  return artifacts;
}

// ---------------------------------------------------------------------------
// Verification suite: samplers against the exact LP, plus invariants.

namespace {

struct CheckReport {
  int checks = 0;
  int failures = 0;
  std::ostream* out = nullptr;

  void record(const std::string& name, bool pass, const std::string& detail) {
    ++checks;
    if (!pass) ++failures;
    *out << (pass ? "PASS " : "FAIL ") << name << ": " << detail << "\n";
  }
};

// Worst deviation-gain overshoot of a mixture beyond the per-agent slack.
double cce_overshoot(const Game& game, const EgoStrategy& ego,
                     const PlayMixture& mixture, double eps) {
  const RegretReport report = regret(game, ego, mixture);
  double worst = -1e300;
  for (double r : report.per_agent) worst = std::max(worst, r - eps);
  return worst;
}

void verify_pd(CheckReport& rep) {
  const Game pd = pd_gambler_game();
  const EgoStrategy ego = pd.uniform_ego();
  // The objective is the row agent's payoff; its unrelaxed worst case over
  // coarse-correlated play is exactly 1 (mutual defection).
  std::vector<double> nu = ego_averaged_table(pd, 1, ego);
  const double eps = 0.02;
  const std::vector<double> eps_vec(2, eps);
  const double lp_min =
      solve_cce_lp(pd, ego, nu, OptSense::kMin, eps_vec).value;

  std::vector<double> neg(nu);
  for (double& v : neg) v = -v;
  ApproachabilityOptions opts;
  opts.eps = eps_vec;
  opts.eps_tol = 0.01;
  opts.max_outer = 60;
  opts.max_inner = 50000;
  opts.bits = 10;
  opts.mixture_cap = 120000;
  const WorstCaseResult res = worst_case_cce(pd, ego, neg, opts);
  const double bw_min = -res.value;

  const double scale = pd.payoff_range() / 2.0;
  const double overshoot = cce_overshoot(pd, ego, res.mixture, eps);
  const bool pass = bw_min >= lp_min - 0.05 && std::abs(bw_min - 1.0) <= 0.05 &&
                    overshoot <= opts.eps_tol * scale + 1e-9;
  rep.record("pd-worst-case",
             pass,
             "sampler min " + fmt_g(bw_min) + " vs LP " + fmt_g(lp_min) +
                 " at eps " + fmt_g(eps) + " (unrelaxed exact 1); deviation "
                 "overshoot " +
                 fmt_g(overshoot) + " <= " + fmt_g(opts.eps_tol * scale) +
                 " converged=" + (res.converged ? "1" : "0") + " thinning=" +
                 std::to_string(res.mixture.thinning));
}

void verify_constant(CheckReport& rep) {
  const double value = 2.5;
  const std::vector<int> counts = {2, 2};
  const std::vector<double> payoffs(3 * 1 * 4, value);
  const Game game = Game::dense(2, 1, counts, payoffs);
  const EgoStrategy ego = game.uniform_ego();
  const std::vector<double> nu = ego_payoff_profile(game, ego);
  const std::vector<double> no_slack = {0.0};

  const double lp_min =
      solve_cce_lp(game, ego, nu, OptSense::kMin, no_slack).value;
  const double lp_max =
      solve_cce_lp(game, ego, nu, OptSense::kMax, no_slack).value;

  ApproachabilityOptions opts;
  opts.eps_tol = 0.05;
  opts.max_outer = 40;
  opts.max_inner = 2000;
  opts.bits = 8;
  const double bw = worst_case_cce(game, ego, nu, opts).value;

  const PessimisticResult lag = sample_pessimistic(
      game, ego, LagrangianState::initial(2, 0.0), SelfPlaySpec{},
      RegretEstimator{}, 0);

  const double gap = std::max({std::abs(lp_min - value), std::abs(lp_max - value),
                               std::abs(bw - value),
                               std::abs(lag.lower_bound - value)});
  rep.record("constant-game", gap <= 1e-6,
             "all samplers on a constant-" + fmt_g(value) + " game, worst |gap| " +
                 fmt_g(gap) + " (limit 1e-06)");
}

void verify_random_sandwich(CheckReport& rep, bool quick) {
  const int games = quick ? 5 : 20;
  const double eps = 0.15;
  double worst_value_margin = 1e300;  // min of bw_min - (lp_min - 0.05)
  double worst_overshoot = -1e300;
  bool pass = true;
  for (int g = 0; g < games; ++g) {
    // Shapes cycle over two-agent 2x2, three-agent 2x2x2, two-agent 3x3.
    const int players = (g % 3 == 1) ? 4 : 3;
    const int actions = (g % 3 == 2) ? 3 : 2;
    const Game game = make_nmatrix(players, actions,
                                   static_cast<std::uint64_t>(1000 + g));
    const EgoStrategy ego = game.uniform_ego();
    std::vector<double> nu = ego_payoff_profile(game, ego);
    const std::vector<double> eps_vec(game.num_agents(), eps);
    const double lp_min =
        solve_cce_lp(game, ego, nu, OptSense::kMin, eps_vec).value;

    for (double& v : nu) v = -v;
    ApproachabilityOptions opts;
    opts.eps = eps_vec;
    opts.eps_tol = 0.05;
    opts.max_outer = 60;
    opts.max_inner = 20000;
    opts.bits = 8;
    opts.mixture_cap = 48000;  // keeps play thinning low; see pd-worst-case
    const WorstCaseResult res = worst_case_cce(game, ego, nu, opts);
    const double bw_min = -res.value;

    const double scale = game.payoff_range() / 2.0;
    const double overshoot = cce_overshoot(game, ego, res.mixture, eps);
    worst_value_margin = std::min(worst_value_margin, bw_min - (lp_min - 0.05));
    worst_overshoot = std::max(worst_overshoot, overshoot);
    if (bw_min < lp_min - 0.05 || overshoot > opts.eps_tol * scale + 1e-9) {
      pass = false;
    }
  }
  rep.record("random-sandwich", pass,
             std::to_string(games) +
                 " seeded games; worst value margin above LP_min-0.05: " +
                 fmt_g(worst_value_margin) + "; worst deviation overshoot " +
                 fmt_g(worst_overshoot) + " (allowance eps_tol*scale)");
}

void verify_lp_monotonicity(CheckReport& rep, bool quick) {
  const int games = quick ? 5 : 10;
  const std::vector<double> grid = {0.0, 0.05, 0.15, 0.3, 0.6, 1.2};
  double worst_rise = -1e300;
  for (int g = 0; g < games; ++g) {
    const int players = (g % 2 == 0) ? 3 : 4;
    const Game game =
        make_nmatrix(players, 2, static_cast<std::uint64_t>(7000 + g));
    const EgoStrategy ego = game.uniform_ego();
    const std::vector<double> nu = ego_payoff_profile(game, ego);
    double prev = 1e300;
    for (double eps : grid) {
      const std::vector<double> eps_vec(game.num_agents(), eps);
      const double v = solve_cce_lp(game, ego, nu, OptSense::kMin, eps_vec).value;
      worst_rise = std::max(worst_rise, v - prev);
      prev = v;
    }
  }
  rep.record("lp-eps-monotonicity", worst_rise <= 1e-7,
             std::to_string(games) + " games over a 6-point slack grid; worst "
                 "increase " + fmt_g(worst_rise) + " (limit 1e-07)");
}

void verify_user_game(CheckReport& rep, const std::string& path) {
  const Game game = load_any_game(path);
  if (!game.is_dense() || game.joint_count() > kDenseJointCap) {
    throw std::invalid_argument(
        "verify --game: the game must be dense and within the LP profile cap");
  }
  const EgoStrategy ego = game.uniform_ego();
  std::vector<double> nu = ego_payoff_profile(game, ego);
  const double range = game.payoff_range();
  const double eps = 0.075 * range;  // slack scaled to the game's own units
  const std::vector<double> eps_vec(game.num_agents(), eps);
  const double lp_min =
      solve_cce_lp(game, ego, nu, OptSense::kMin, eps_vec).value;

  for (double& v : nu) v = -v;
  ApproachabilityOptions opts;
  opts.eps = eps_vec;
  opts.eps_tol = 0.05;
  opts.max_outer = 60;
  opts.max_inner = 20000;
  opts.bits = 8;
  const WorstCaseResult res = worst_case_cce(game, ego, nu, opts);
  const double bw_min = -res.value;
  const double scale = range / 2.0;
  const double overshoot = cce_overshoot(game, ego, res.mixture, eps);
  const double margin = 0.025 * range;  // 0.05 in [-1,1] units
  const bool pass =
      bw_min >= lp_min - margin && overshoot <= opts.eps_tol * scale + 1e-9;
  rep.record("user-game-sandwich", pass,
             path + ": sampler min " + fmt_g(bw_min) + " vs LP " +
                 fmt_g(lp_min) + " (margin " + fmt_g(margin) +
                 "); deviation overshoot " + fmt_g(overshoot));
}

}  // namespace

int run_verification_suite(const std::string& game_path, bool quick,
                           std::ostream& out) {
  CheckReport rep;
  rep.out = &out;
  verify_pd(rep);
  verify_constant(rep);
  verify_random_sandwich(rep, quick);
  verify_lp_monotonicity(rep, quick);
  if (!game_path.empty()) verify_user_game(rep, game_path);
  out << "verification: " << rep.checks << " checks, " << rep.failures
      << " failed\n";
  return rep.failures;
}

// ---------------------------------------------------------------------------
// Subcommand dispatch.

namespace {

void print_json_maybe(const std::string& out_path, const nlohmann::json& doc) {
  if (out_path.empty()) return;
  write_file_atomic(out_path, doc.dump(2) + "\n");
  std::cout << "wrote " << out_path << "\n";
}

int do_make_game(const std::string& generator, int players, int actions,
                 std::uint64_t seed, const std::string& out_path,
                 bool as_position) {
  if (generator == "nmatrix") {
    const Game game = make_nmatrix(players, actions, seed);
    save_game(game, out_path);
    std::cout << "wrote " << out_path << " (nmatrix: " << game.num_agents()
              << " agents + ego, " << actions << " actions each, "
              << game.joint_count() << " joint profiles)\n";
    return 0;
  }
  if (generator == "grid") {
    const GridBimatrixGame grid = make_grid_bimatrix(seed);
    if (as_position) {
      save_game(grid.position_game(), out_path);
      std::cout << "wrote " << out_path << " (grid position game: 2 agents, "
                << grid.size << "x" << grid.size << " cells)\n";
    } else {
      save_grid(grid, out_path);
      std::cout << "wrote " << out_path << " (grid: " << grid.size << "x"
                << grid.size << ", toroidal, nash (" << grid.nash_i << ","
                << grid.nash_j << "), cooperative (" << grid.coop_i << ","
                << grid.coop_j << "))\n";
    }
    return 0;
  }
  if (generator == "pd") {
    save_game(pd_gambler_game(), out_path);
    std::cout << "wrote " << out_path
              << " (prisoner's dilemma with a defection-paid gambler)\n";
    return 0;
  }
  throw std::invalid_argument("unknown generator \"" + generator +
                              "\" (expected nmatrix, grid, or pd)");
}

}  // namespace

int run_cli(int argc, char** argv) {
  CLI::App app{"worst-case coarse-correlated equilibrium toolkit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kToolVersion));

  // ---- make-game ----
  auto* make = app.add_subcommand(
      "make-game", "generate a game file (dense JSON, or grid tables)");
  std::string mg_generator = "nmatrix";
  int mg_players = 4, mg_actions = 3;
  std::uint64_t mg_seed = 0;
  std::string mg_out;
  bool mg_position = false;
  make->add_option("--generator", mg_generator,
                   "nmatrix | grid | pd")->capture_default_str();
  make->add_option("--players", mg_players,
                   "nmatrix: total players including the ego")
      ->capture_default_str();
  make->add_option("--actions", mg_actions, "nmatrix: actions per player")
      ->capture_default_str();
  make->add_option("--seed", mg_seed, "generator seed")->capture_default_str();
  make->add_option("--out", mg_out, "output path")->required();
  make->add_flag("--position", mg_position,
                 "grid: write the 2-agent position game instead of the "
                 "payoff tables");

  // ---- worst-cce ----
  auto* wc = app.add_subcommand(
      "worst-cce",
      "approachability sampler: optimize the ego's value over relaxed "
      "equilibria");
  std::string wc_game, wc_sense = "max", wc_out;
  double wc_eps = 0.0, wc_eps_tol = 0.05, wc_sigma = 0.01;
  int wc_max_outer = 150, wc_max_inner = 0, wc_bits = 30, wc_cap = 4096;
  wc->add_option("--game", wc_game, "game JSON file")->required();
  wc->add_option("--eps", wc_eps, "per-agent slack, payoff units")
      ->capture_default_str();
  wc->add_option("--sense", wc_sense, "max | min")->capture_default_str();
  wc->add_option("--eps-tol", wc_eps_tol,
                 "convergence tolerance, normalized units")
      ->capture_default_str();
  wc->add_option("--max-outer", wc_max_outer, "iterations per feasibility probe")
      ->capture_default_str();
  wc->add_option("--max-inner", wc_max_inner,
                 "self-play steps per oracle call (0 = auto)")
      ->capture_default_str();
  wc->add_option("--bits", wc_bits, "binary-search resolution")
      ->capture_default_str();
  auto* wc_sigma_opt = wc->add_option(
      "--sigma", wc_sigma,
      "skip the binary search; ride a constant value pressure instead");
  wc->add_option("--mixture-cap", wc_cap, "returned mixture components cap")
      ->capture_default_str();
  wc->add_option("--out", wc_out, "write the result JSON here");

  // ---- sample-pessimistic ----
  auto* sp = app.add_subcommand(
      "sample-pessimistic",
      "multiplier-servo self-play: pessimistic value over relaxed equilibria");
  std::string sp_game, sp_estimator = "exact", sp_learner = "hedge", sp_out;
  double sp_eps = 0.0, sp_alpha = 0.25, sp_lambda0 = 1.0, sp_lambda_max = 1e4;
  double sp_frozen = 0.0, sp_lr = 0.0, sp_entropy = 0.0;
  int sp_rounds = 60, sp_steps = 250, sp_probe_steps = 2000, sp_probe_batches = 1;
  std::uint64_t sp_seed = 0;
  sp->add_option("--game", sp_game, "game JSON file")->required();
  sp->add_option("--eps", sp_eps, "per-agent regret allowance")
      ->capture_default_str();
  sp->add_option("--rounds", sp_rounds, "servo rounds")->capture_default_str();
  sp->add_option("--selfplay-steps", sp_steps, "self-play steps per round")
      ->capture_default_str();
  sp->add_option("--estimator", sp_estimator, "exact | probe")
      ->capture_default_str();
  sp->add_option("--probe-steps", sp_probe_steps, "probe: clone training steps")
      ->capture_default_str();
  sp->add_option("--probe-batches", sp_probe_batches,
                 "probe: independent batches averaged")
      ->capture_default_str();
  sp->add_option("--alpha-lambda", sp_alpha, "multiplier learning rate")
      ->capture_default_str();
  sp->add_option("--lambda0", sp_lambda0, "initial multiplier value")
      ->capture_default_str();
  sp->add_option("--lambda-max", sp_lambda_max, "multiplier clamp")
      ->capture_default_str();
  auto* sp_frozen_opt = sp->add_option(
      "--frozen-lambda", sp_frozen,
      "freeze every multiplier at this value (ablation mode)");
  sp->add_option("--learner", sp_learner, "hedge | regret-matching | exp3")
      ->capture_default_str();
  sp->add_option("--learning-rate", sp_lr, "0 = no-regret auto tuning")
      ->capture_default_str();
  sp->add_option("--entropy", sp_entropy, "exploration floor (exp3 needs > 0)")
      ->capture_default_str();
  sp->add_option("--seed", sp_seed, "run seed")->capture_default_str();
  sp->add_option("--out", sp_out, "write the trace JSON here");

  // ---- train-robust ----
  auto* tr = app.add_subcommand(
      "train-robust", "bandit over ego actions against the inner sampler");
  std::string tr_game, tr_inner = "lp", tr_out;
  double tr_eps = 0.0, tr_ego_entropy = 0.05, tr_ego_lr = 0.0;
  int tr_outer = 200;
  std::uint64_t tr_seed = 0;
  tr->add_option("--game", tr_game, "game JSON file")->required();
  tr->add_option("--inner", tr_inner, "lp | blackwell | lagrangian")
      ->capture_default_str();
  tr->add_option("--eps", tr_eps, "per-agent slack")->capture_default_str();
  tr->add_option("--outer-steps", tr_outer, "bandit steps")
      ->capture_default_str();
  tr->add_option("--ego-entropy", tr_ego_entropy, "ego exploration floor")
      ->capture_default_str();
  tr->add_option("--ego-learning-rate", tr_ego_lr, "0 = auto")
      ->capture_default_str();
  tr->add_option("--seed", tr_seed, "run seed")->capture_default_str();
  tr->add_option("--out", tr_out, "write the result JSON here");

  // ---- cross-eval ----
  auto* ce = app.add_subcommand(
      "cross-eval", "trained egos vs opponent populations (config-driven)");
  std::string ce_config;
  ce->add_option("--config", ce_config, "experiment config file")->required();

  // ---- verify ----
  auto* vf = app.add_subcommand(
      "verify", "oracle-equivalence and invariant checks (exit 1 on failure)");
  std::string vf_game;
  bool vf_quick = false;
  vf->add_option("--game", vf_game, "also sandwich-check this game file");
  vf->add_flag("--quick", vf_quick, "smaller battery for smoke runs");

  // ---- run ----
  auto* rn = app.add_subcommand("run", "run a config-driven experiment");
  std::string rn_config;
  rn->add_option("--config", rn_config, "experiment config file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (make->parsed()) {
      return do_make_game(mg_generator, mg_players, mg_actions, mg_seed,
                          mg_out, mg_position);
    }

    if (wc->parsed()) {
      const Game game = load_any_game(wc_game);
      const EgoStrategy ego = game.uniform_ego();
      std::vector<double> nu = ego_payoff_profile(game, ego);
      if (wc_sense == "min") {
        for (double& v : nu) v = -v;
      } else if (wc_sense != "max") {
        throw std::invalid_argument("--sense: expected max or min");
      }
      ApproachabilityOptions opts;
      opts.eps.assign(1, wc_eps);
      opts.eps_tol = wc_eps_tol;
      opts.max_outer = wc_max_outer;
      opts.max_inner = wc_max_inner;
      opts.bits = wc_bits;
      opts.mixture_cap = wc_cap;
      if (wc_sigma_opt->count() > 0) {
        opts.no_binary_search = true;
        opts.sigma = wc_sigma;
      }
      const WorstCaseResult res = worst_case_cce(game, ego, nu, opts);
      const double value = wc_sense == "min" ? -res.value : res.value;
      const double y_best = wc_sense == "min" ? -res.y_best : res.y_best;
      std::cout << "value=" << fmt_g(value) << " y_best=" << fmt_g(y_best)
                << " converged=" << (res.converged ? 1 : 0)
                << " outer_iterations=" << res.outer_iterations << "\n";
      nlohmann::json doc;
      doc["tool"] = kToolVersion;
      doc["sense"] = wc_sense;
      doc["eps"] = wc_eps;
      doc["value"] = value;
      doc["y_best"] = y_best;
      doc["converged"] = res.converged;
      doc["outer_iterations"] = res.outer_iterations;
      doc["distance_trace"] = res.distance_trace;
      doc["step_norm_trace"] = res.step_norm_trace;
      doc["mixture"] = mixture_to_json(res.mixture);
      print_json_maybe(wc_out, doc);
      return 0;
    }

    if (sp->parsed()) {
      const Game game = load_any_game(sp_game);
      LagrangianState state =
          LagrangianState::initial(game.num_agents(), sp_eps);
      state.alpha_lambda = sp_alpha;
      state.rounds = sp_rounds;
      state.selfplay_steps = sp_steps;
      state.lambda_max = sp_lambda_max;
      state.lambdas.assign(game.num_agents(), sp_lambda0);
      if (sp_frozen_opt->count() > 0) {
        state.mode = MultiplierMode::kFrozen;
        state.lambdas.assign(game.num_agents(), sp_frozen);
      }
      RegretEstimator estimator;
      estimator.kind = parse_estimator(sp_estimator);
      estimator.probe_steps = sp_probe_steps;
      estimator.probe_batches = sp_probe_batches;
      SelfPlaySpec selfplay;
      selfplay.kind = parse_learner(sp_learner);
      selfplay.learning_rate = sp_lr;
      selfplay.entropy_bonus = sp_entropy;
      if (selfplay.kind == LearnerKind::kExp3 && selfplay.entropy_bonus <= 0.0) {
        selfplay.entropy_bonus = 0.05;
      }
      const PessimisticResult res = sample_pessimistic(
          game, game.uniform_ego(), state, selfplay, estimator, sp_seed);
      std::cout << "lower_bound=" << fmt_g(res.lower_bound)
                << " converged=" << (res.converged ? 1 : 0) << "\n";
      nlohmann::json doc;
      doc["tool"] = kToolVersion;
      doc["eps"] = sp_eps;
      doc["seed"] = sp_seed;
      doc["trace"] = pessimistic_trace_json(res);
      doc["mixture"] = mixture_to_json(res.mixture);
      print_json_maybe(sp_out, doc);
      return 0;
    }

    if (tr->parsed()) {
      const Game game = load_any_game(tr_game);
      RobustTrainerConfig cfg;
      cfg.inner = parse_inner(tr_inner);
      cfg.eps = tr_eps;
      cfg.outer_steps = tr_outer;
      cfg.ego_entropy = tr_ego_entropy;
      cfg.ego_learning_rate = tr_ego_lr;
      const RobustTrainResult res = train_robust(game, cfg, tr_seed);
      const int argmax = static_cast<int>(
          std::max_element(res.strategy.dist.begin(), res.strategy.dist.end()) -
          res.strategy.dist.begin());
      std::cout << "argmax_action=" << argmax << " failures=" << res.failures
                << " strategy=[";
      for (std::size_t i = 0; i < res.strategy.dist.size(); ++i) {
        if (i) std::cout << ", ";
        std::cout << fmt_g(res.strategy.dist[i]);
      }
      std::cout << "]\n";
      nlohmann::json doc;
      doc["tool"] = kToolVersion;
      doc["eps"] = tr_eps;
      doc["inner"] = tr_inner;
      doc["seed"] = tr_seed;
      doc["strategy"] = strategy_to_json(res.strategy);
      doc["final_strategy"] = strategy_to_json(res.final_strategy);
      doc["value_trace"] = res.value_trace;
      doc["failures"] = res.failures;
      doc["failure_log"] = res.failure_log;
      print_json_maybe(tr_out, doc);
      return 0;
    }

    if (ce->parsed() || rn->parsed()) {
      const std::string path = ce->parsed() ? ce_config : rn_config;
      const ExperimentConfig config = load_experiment_config(path);
      if (ce->parsed() && config.kind != "cross-eval") {
        throw std::invalid_argument(
            "cross-eval: the config's [experiment] kind must be cross-eval");
      }
      const ExperimentArtifacts artifacts = run_experiment(config);
      std::cout << "experiment: " << config.kind
                << " config=" << hash_hex(config.hash)
                << " seeds=" << config.seeds.size() << "\n";
      std::cout << "  csv:     " << artifacts.csv_path << "\n";
      std::cout << "  summary: " << artifacts.summary_path << "\n";
      for (const SeedOutcome& o : artifacts.outcomes) {
        std::cout << "  seed " << o.seed << ": "
                  << (o.ok ? "ok" : "FAILED: " + o.error) << "\n";
      }
      return artifacts.exit_code;
    }

    if (vf->parsed()) {
      const int failures = run_verification_suite(vf_game, vf_quick, std::cout);
      return failures == 0 ? 0 : 1;
    }
  } catch (const std::exception& e) {
    std::cerr << "robustcce: error: " << e.what() << "\n";
    return 1;
  }

  std::cerr << "robustcce: no subcommand selected\n";
  return 1;
}

}  // namespace robustcce
