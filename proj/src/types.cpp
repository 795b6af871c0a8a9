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

#include "robustcce/types.hpp"

#include <cmath>
#include <stdexcept>

namespace robustcce {

bool is_distribution(std::span<const double> p, double tol) {
  if (p.empty()) return false;
  double sum = 0.0;
  for (double v : p) {
    if (!(v >= -tol) || !std::isfinite(v)) return false;
    sum += v;
  }
  return std::fabs(sum - 1.0) <= tol;
}

void check_distribution(std::span<const double> p, const std::string& what,
                        double tol) {
  if (!is_distribution(p, tol)) {
    throw std::invalid_argument(what + ": not a probability distribution");
  }
}

std::vector<double> uniform_dist(int n) {
  if (n <= 0) throw std::invalid_argument("uniform_dist: n must be positive");
  return std::vector<double>(n, 1.0 / n);
}

ProductStrategy uniform_product(std::span<const int> action_counts) {
  ProductStrategy s;
  s.per_agent.reserve(action_counts.size());
  for (int m : action_counts) s.per_agent.push_back(uniform_dist(m));
  return s;
}

void check_product(const ProductStrategy& s, std::span<const int> action_counts,
                   const std::string& what) {
  if (s.per_agent.size() != action_counts.size()) {
    throw std::invalid_argument(what + ": wrong number of agent strategies");
  }
  for (size_t i = 0; i < action_counts.size(); ++i) {
    if (s.per_agent[i].size() != static_cast<size_t>(action_counts[i])) {
      throw std::invalid_argument(what + ": wrong action count for an agent");
    }
    check_distribution(s.per_agent[i], what);
  }
}

void check_mixture(const PlayMixture& m, std::span<const int> action_counts,
                   const std::string& what) {
  if (m.components.empty()) {
    throw std::invalid_argument(what + ": empty mixture");
  }
  double sum = 0.0;
  for (const MixtureComponent& c : m.components) {
    if (!(c.weight >= -1e-9) || !std::isfinite(c.weight)) {
      throw std::invalid_argument(what + ": negative mixture weight");
    }
    sum += c.weight;
    check_product(c.strategy, action_counts, what);
  }
  if (std::fabs(sum - 1.0) > 1e-9) {
    throw std::invalid_argument(what + ": mixture weights do not sum to 1");
  }
}

long long num_joints(std::span<const int> counts) {
  long long total = 1;
  for (int m : counts) {
    if (m <= 0) throw std::invalid_argument("num_joints: nonpositive action count");
    total *= m;
  }
  return total;
}

std::vector<long long> joint_strides(std::span<const int> counts) {
  std::vector<long long> strides(counts.size(), 1);
  for (int i = static_cast<int>(counts.size()) - 2; i >= 0; --i) {
    strides[i] = strides[i + 1] * counts[i + 1];
  }
  return strides;
}

}  // namespace robustcce
