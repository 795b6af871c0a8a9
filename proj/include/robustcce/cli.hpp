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

#ifndef ROBUSTCCE_CLI_HPP_
#define ROBUSTCCE_CLI_HPP_

#include <cstdint>
#include <map>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace robustcce {

// Experiment harness: TOML-shaped configs, seeded experiment execution, and
// deterministic CSV/JSON artifacts.  The CSV bytes emitted for a given
// config + seed list are reproducible run over run; wall-clock data lives
// only in the human-readable summary file.

inline constexpr const char* kToolVersion = "robustcce/0.1.0";
inline constexpr const char* kCsvSchemaVersion = "v1";

// ---------------------------------------------------------------------------
// Configuration text.  A deliberately small TOML subset: `[section]`
// headers, `key = value` lines, `#` comments.  Values are double-quoted
// strings, booleans, numbers, and one-level arrays of numbers or strings.
// Anything else is rejected with the offending line number.

struct ConfigValue {
  enum class Kind { kString, kNumber, kBool, kNumberList, kStringList };
  Kind kind = Kind::kNumber;
  std::string text;                // kString
  double number = 0.0;             // kNumber
  bool flag = false;               // kBool
  std::vector<double> numbers;     // kNumberList
  std::vector<std::string> texts;  // kStringList
};

// section -> key -> value; both levels are ordered maps so iteration order
// (and therefore the canonical rendering below) is well defined.
using ConfigTable = std::map<std::string, std::map<std::string, ConfigValue>>;

ConfigTable parse_config_text(const std::string& text);
ConfigTable load_config_file(const std::string& path);

// Canonical rendering: sections and keys sorted, numbers printed with %.12g,
// one key per line.  Two configs have the same canonical text iff they agree
// on every semantic field (comments, spacing, and key order never matter),
// so the FNV-1a hash of this string is the config identity stamped on every
// artifact row.
std::string canonical_config_text(const ConfigTable& table);
std::uint64_t fnv1a64(std::string_view bytes);

// ---------------------------------------------------------------------------
// Experiment configuration.

struct ExperimentConfig {
  ConfigTable table;
  std::string kind;                  // [experiment] kind
  std::vector<std::uint64_t> seeds;  // [run] seeds (ROBUSTCCE_SEED override)
  std::string out_dir;               // [run] out
  std::uint64_t hash = 0;            // FNV-1a of the effective canonical text

  bool has(const std::string& section, const std::string& key) const;
  double number_or(const std::string& section, const std::string& key,
                   double fallback) const;
  std::string string_or(const std::string& section, const std::string& key,
                        const std::string& fallback) const;
  std::vector<double> numbers_or(const std::string& section,
                                 const std::string& key,
                                 std::vector<double> fallback) const;
  std::vector<std::string> strings_or(const std::string& section,
                                      const std::string& key,
                                      std::vector<std::string> fallback) const;
};

// Parses and validates a config: known experiment kind, nonempty seed list,
// output directory present.  The ROBUSTCCE_SEED environment variable (a
// comma- or space-separated list) replaces [run] seeds before the hash is
// computed, so artifacts produced under an override are stamped as what they
// actually are.
ExperimentConfig load_experiment_config(const std::string& path);
ExperimentConfig experiment_config_from_text(const std::string& text);

// ---------------------------------------------------------------------------
// Experiment execution.

struct SeedOutcome {
  std::uint64_t seed = 0;
  bool ok = false;
  std::string error;       // empty when ok
  double wall_ms = 0.0;    // reported in the summary, never in the CSV
};

struct ExperimentArtifacts {
  std::string csv_path;
  std::string summary_path;
  std::vector<std::string> json_paths;  // one per successful seed
  std::vector<SeedOutcome> outcomes;
  int exit_code = 0;  // nonzero only when every seed failed
};

// Runs the configured experiment across the seed list (independently; a
// failing seed is recorded and skipped), then writes, atomically:
//   <out>/<kind>-<hash>.csv          merged metrics, schema-versioned header
//   <out>/<kind>-<hash>-seed<k>.json per-seed traces and strategies (thinned)
//   <out>/<kind>-<hash>-summary.txt  human-readable report with wall times
// Re-running with the same config and seeds reproduces the CSV byte for
// byte.  Kinds: worst-cce, sample-pessimistic, train-robust, cross-eval,
// ablation-frozen-lambda, figure3-sweep.
ExperimentArtifacts run_experiment(const ExperimentConfig& config);

// Oracle-equivalence and invariant suite: the samplers against the exact LP
// on a fixed battery (prisoner's-dilemma worst case, constant game, seeded
// random games, LP slack monotonicity), plus the same sandwich check on
// `game_path` when nonempty.  Prints one PASS/FAIL line per property with
// the measured gap; returns the number of failures.  `quick` shrinks the
// battery and budgets for smoke runs.
int run_verification_suite(const std::string& game_path, bool quick,
                           std::ostream& out);

// Parses argv and dispatches to one of the toolkit subcommands.  Returns a
// process exit code (0 on success).
int run_cli(int argc, char** argv);

}  // namespace robustcce

#endif  // ROBUSTCCE_CLI_HPP_
