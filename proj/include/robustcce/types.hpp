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

#ifndef ROBUSTCCE_TYPES_HPP_
#define ROBUSTCCE_TYPES_HPP_

#include <span>
#include <string>
#include <vector>

namespace robustcce {

// One independent mixed strategy per non-ego agent; per_agent[i] is a
// probability distribution over agent i's actions.
struct ProductStrategy {
  std::vector<std::vector<double>> per_agent;
};

// Finitely supported distribution over product strategies. Expectations of
// any payoff under a PlayMixture are weight-linear combinations of product
// expectations, which keeps every metric in this library polynomial-time.
struct MixtureComponent {
  double weight = 0.0;
  ProductStrategy strategy;
};

struct PlayMixture {
  std::vector<MixtureComponent> components;
  // Thinning factor applied when the mixture was subsampled from a longer
  // trajectory (1 = untouched).
  int thinning = 1;

  static PlayMixture single(ProductStrategy s) {
    PlayMixture m;
    m.components.push_back({1.0, std::move(s)});
    return m;
  }
};

// Mixed strategy of the ego agent (the "gambler" / principal).
struct EgoStrategy {
  std::vector<double> dist;
};

struct PayoffBounds {
  double lo = -1.0;
  double hi = 1.0;
};

// Parameters of a boundedly rational opponent model: myopia (discounting of
// future play), perception noise on observed payoffs, and play noise (chance
// of acting off-policy). They aggregate into a single per-agent slack.
struct BoundedRationalityParams {
  double payoff_sup = 1.0;  // sup-norm of the agent's payoffs
  double gamma_m = 0.0;     // myopia, in [0, 1)
  double gamma_s = 0.0;     // perception noise, >= 0
  double gamma_p = 0.0;     // play noise, >= 0
};

// Per-agent incentive-compatibility audit of a play distribution.
// deviation_vector holds, agent block by agent block, the gain of every pure
// deviation over following the play distribution; per_agent[i] is the max of
// agent i's block.
struct RegretReport {
  std::vector<double> per_agent;
  std::vector<double> deviation_vector;
};

// ---------------------------------------------------------------------------
// Distribution helpers.

bool is_distribution(std::span<const double> p, double tol = 1e-9);
// Throws std::invalid_argument naming `what` if p is not a distribution.
void check_distribution(std::span<const double> p, const std::string& what,
                        double tol = 1e-9);
std::vector<double> uniform_dist(int n);

// Uniform product strategy for the given action counts.
ProductStrategy uniform_product(std::span<const int> action_counts);

// Validates shape and per-agent distributions; throws on violation.
void check_product(const ProductStrategy& s, std::span<const int> action_counts,
                   const std::string& what);
void check_mixture(const PlayMixture& m, std::span<const int> action_counts,
                   const std::string& what);

// ---------------------------------------------------------------------------
// Joint-action indexing. Joint actions of the n non-ego agents are flattened
// row-major (agent 0 slowest, agent n-1 fastest).

long long num_joints(std::span<const int> counts);
std::vector<long long> joint_strides(std::span<const int> counts);

template <typename Fn>
void for_each_joint(std::span<const int> counts, Fn&& fn) {
  const int n = static_cast<int>(counts.size());
  std::vector<int> a(n, 0);
  const long long total = num_joints(counts);
  for (long long flat = 0; flat < total; ++flat) {
    fn(std::span<const int>(a.data(), n), flat);
    for (int i = n - 1; i >= 0; --i) {
      if (++a[i] < counts[i]) break;
      a[i] = 0;
    }
  }
}

}  // namespace robustcce

#endif  // ROBUSTCCE_TYPES_HPP_
