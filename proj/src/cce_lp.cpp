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

#include "robustcce/cce_lp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "robustcce/lp.hpp"

namespace robustcce {
namespace {

void check_cap(const std::vector<int>& counts) {
  const long long total = num_joints(counts);
  if (total > kDenseJointCap) {
    throw std::invalid_argument(
        "joint action space has " + std::to_string(total) +
        " profiles, above the dense cap " + std::to_string(kDenseJointCap));
  }
}

std::vector<double> resolve_eps(std::span<const double> eps, int n) {
  std::vector<double> out;
  if (eps.size() == 1) {
    out.assign(n, eps[0]);
  } else if (static_cast<int>(eps.size()) == n) {
    out.assign(eps.begin(), eps.end());
  } else {
    throw std::invalid_argument("eps needs 1 or num_agents entries");
  }
  for (double e : out) {
    if (std::isnan(e) || e < 0.0) {
      throw std::invalid_argument("eps entries must be >= 0");
    }
  }
  return out;
}

}  // namespace

void check_dense_joint(const DenseJoint& joint, std::span<const int> counts,
                       const std::string& what) {
  if (joint.shape.size() != counts.size() ||
      !std::equal(counts.begin(), counts.end(), joint.shape.begin())) {
    throw std::invalid_argument(what + ": shape mismatch");
  }
  const long long total = num_joints(counts);
  if (static_cast<long long>(joint.probabilities.size()) != total) {
    throw std::invalid_argument(what + ": wrong probability count");
  }
  double sum = 0.0;
  for (double p : joint.probabilities) {
    if (!(p >= -1e-12)) {
      throw std::invalid_argument(what + ": negative probability");
    }
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    throw std::invalid_argument(what + ": probabilities sum to " +
                                std::to_string(sum));
  }
}

std::vector<double> ego_payoff_profile(const Game& game,
                                       const EgoStrategy& ego) {
  return ego_averaged_table(game, 0, ego);
}

double dense_expected(std::span<const double> nu, const DenseJoint& joint) {
  if (nu.size() != joint.probabilities.size()) {
    throw std::invalid_argument("objective length does not match joint");
  }
  double out = 0.0;
  for (size_t k = 0; k < nu.size(); ++k) out += nu[k] * joint.probabilities[k];
  return out;
}

RegretReport dense_regret(const Game& game, const EgoStrategy& ego,
                          const DenseJoint& joint) {
  const std::vector<int>& counts = game.action_counts();
  check_dense_joint(joint, counts, "dense_regret joint");
  const int n = game.num_agents();
  const std::vector<long long> strides = joint_strides(counts);

  RegretReport report;
  for (int i = 0; i < n; ++i) {
    const std::vector<double> table = ego_averaged_table(game, i + 1, ego);
    double base = 0.0;
    for (size_t k = 0; k < table.size(); ++k) {
      base += joint.probabilities[k] * table[k];
    }
    double best = -std::numeric_limits<double>::infinity();
    for (int b = 0; b < counts[i]; ++b) {
      double dev = 0.0;
      for_each_joint(counts, [&](std::span<const int> a, long long flat) {
        const long long swapped = flat + (b - a[i]) * strides[i];
        dev += joint.probabilities[static_cast<size_t>(flat)] *
               table[static_cast<size_t>(swapped)];
      });
      report.deviation_vector.push_back(dev - base);
      best = std::max(best, dev - base);
    }
    report.per_agent.push_back(best);
  }
  return report;
}

CceSolution solve_cce_lp(const Game& game, const EgoStrategy& ego,
                         std::span<const double> nu, OptSense sense,
                         std::span<const double> eps) {
  const std::vector<int>& counts = game.action_counts();
  check_cap(counts);
  const int n = game.num_agents();
  const long long total = num_joints(counts);
  if (static_cast<long long>(nu.size()) != total) {
    throw std::invalid_argument("objective length does not match joint space");
  }
  for (double v : nu) {
    if (!std::isfinite(v)) {
      throw std::invalid_argument("objective must be finite");
    }
  }
  const std::vector<double> slack = resolve_eps(eps, n);
  const std::vector<long long> strides = joint_strides(counts);

  LpProblem lp;
  lp.num_vars = static_cast<int>(total);
  lp.objective.assign(nu.begin(), nu.end());
  if (sense == OptSense::kMax) {
    for (double& v : lp.objective) v = -v;
  }

  // One deviation row per (agent, action): the expected gain of switching to
  // that action must not exceed the agent's slack.  Rows the simplex
  // constraint already implies (slack >= the largest coefficient) are
  // dropped, which also keeps infinite slacks out of the arithmetic.
  for (int i = 0; i < n; ++i) {
    const std::vector<double> table = ego_averaged_table(game, i + 1, ego);
    for (int b = 0; b < counts[i]; ++b) {
      LpRow row;
      row.sense = RowSense::kLe;
      row.rhs = slack[i];
      row.coef.resize(static_cast<size_t>(total));
      double max_coef = -std::numeric_limits<double>::infinity();
      for_each_joint(counts, [&](std::span<const int> a, long long flat) {
        const long long swapped = flat + (b - a[i]) * strides[i];
        const double c = table[static_cast<size_t>(swapped)] -
                         table[static_cast<size_t>(flat)];
        row.coef[static_cast<size_t>(flat)] = c;
        max_coef = std::max(max_coef, c);
      });
      if (slack[i] >= max_coef) continue;
      lp.rows.push_back(std::move(row));
    }
  }

  LpRow simplex_row;
  simplex_row.sense = RowSense::kEq;
  simplex_row.rhs = 1.0;
  simplex_row.coef.assign(static_cast<size_t>(total), 1.0);
  lp.rows.push_back(std::move(simplex_row));

  const LpSolution sol = solve_lp(lp);
  if (sol.status == LpStatus::kInfeasible) {
    throw std::logic_error(
        "relaxed equilibrium LP reported infeasible; the feasible set is "
        "never empty, so the solve is corrupt");
  }
  if (sol.status == LpStatus::kUnbounded) {
    throw std::logic_error("bounded equilibrium LP reported unbounded");
  }

  CceSolution out;
  out.joint.shape = counts;
  out.joint.probabilities.assign(sol.x.begin(), sol.x.end());
  double sum = 0.0;
  for (double& p : out.joint.probabilities) {
    p = std::max(p, 0.0);
    sum += p;
  }
  for (double& p : out.joint.probabilities) p /= sum;
  out.value = dense_expected(nu, out.joint);
  return out;
}

bool decide_nontrivial_cce(const Game& game, const EgoStrategy& ego,
                           std::span<const double> nu) {
  const std::vector<double> zero(game.num_agents(), 0.0);
  const double hi = solve_cce_lp(game, ego, nu, OptSense::kMax, zero).value;
  const double lo = solve_cce_lp(game, ego, nu, OptSense::kMin, zero).value;
  return hi - lo > 1e-7;
}

}  // namespace robustcce
