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

#ifndef ROBUSTCCE_BLACKWELL_HPP_
#define ROBUSTCCE_BLACKWELL_HPP_

#include <cstdint>
#include <span>
#include <vector>

#include "robustcce/game.hpp"
#include "robustcce/types.hpp"

namespace robustcce {

// Approachability-based sampler of (relaxed) coarse-correlated equilibria
// that approximately maximize a linear objective nu over joint profiles.
//
// The play distribution x is summarized by an (m+1)-vector v(x): one entry
// per pure deviation (the gain of that deviation over following x, blocked
// agent by agent, m = sum of action counts) and a final entry y - nu_bar(x)
// for the current target value y.  Driving the running average of v into the
// nonpositive orthant — shifted by the per-agent slack on the deviation
// entries — certifies an eps-relaxed equilibrium of value at least y; the
// driving force is a halfspace oracle realized as no-regret self-play
// against beta-weighted costs, and y is found by binary search.

// v(x) for a play mixture: deviation gains blocked by agent, then y - nu_bar.
// `nu` is a table over joint profiles in the game's flat order.  All entries
// are in the original (unnormalized) payoff units.
std::vector<double> v_vector(const Game& game, const EgoStrategy& ego,
                             const PlayMixture& play, std::span<const double> nu,
                             double y);

// Streamlined (n+1)-dimensional form: per-agent entry is the max over that
// agent's block of the full vector, so orthant membership is unchanged.
std::vector<double> v_vector_streamlined(const Game& game,
                                         const EgoStrategy& ego,
                                         const PlayMixture& play,
                                         std::span<const double> nu, double y);

struct OrthantProjection {
  std::vector<double> nearest;  // componentwise min(v, 0)
  std::vector<double> beta;     // (v - nearest) / dist; zeros when converged
  double dist = 0.0;            // L2 distance to the nonpositive orthant
  bool converged = false;       // dist == 0: beta is undefined
};

// Euclidean projection onto the nonpositive orthant.  Shifted orthants are
// handled by projecting v - shift.
OrthantProjection project_negative_orthant(std::span<const double> v);

// One halfspace-oracle call: T steps of full-information hedge dynamics in
// which agent i's per-profile cost is
//
//   c_i(a) = -beta_last * nu(a) / n - |beta_i|_1 * u_i(a)
//            + sum_b beta_i[b] * u_i(b, a_{-i}),
//
// i.e. the agent trades off raising nu against beating the beta-weighted
// deviation benchmark.  An agent with an all-zero block keeps only the nu
// term.  Costs are affinely rescaled to [0,1] per agent before learning.
// `beta` has m+1 nonnegative entries; `y` fixes the halfspace label but does
// not enter the costs (it only shifts v's last coordinate by a constant).
// The caller judges success by testing beta . v(returned mixture).
PlayMixture halfspace_oracle(const Game& game, const EgoStrategy& ego,
                             std::span<const double> beta,
                             std::span<const double> nu, double y, int steps);

struct ApproachabilityOptions {
  // Per-agent slack of the relaxed-equilibrium constraint, in original
  // payoff units; one entry per agent or a single broadcast entry.
  std::vector<double> eps = {0.0};
  // Convergence tolerance, oracle-failure threshold, and value slack, all in
  // normalized payoff units (the sampler internally maps payoffs to [-1,1];
  // original-unit guarantees scale by payoff_range()/2).
  double eps_tol = 0.05;
  // Approachability iterations per feasibility probe.
  int max_outer = 150;
  // Inner self-play steps per oracle call; 0 picks ceil(100/eps_tol^2)
  // capped at 1e6.
  int max_inner = 0;
  // Binary-search resolution over the normalized objective range [-1, 1].
  int bits = 30;
  // Streamlined mode: skip the binary search and replace the value entry of
  // v by the constant sigma, so a fixed small pressure toward high nu rides
  // along while the deviation blocks converge.
  bool no_binary_search = false;
  double sigma = 0.01;  // normalized units
  // The returned mixture is subsampled to at most this many components.
  int mixture_cap = 4096;
};

struct WorstCaseResult {
  PlayMixture mixture;      // averaged play of the winning probe
  double value = 0.0;       // nu_bar(mixture), original units, exact
  bool converged = false;   // the winning probe reached dist <= eps_tol
  double y_best = 0.0;      // best feasible target, original units
  int outer_iterations = 0; // oracle calls across all probes
  // Shifted-orthant distance of avg_v after each iteration of the winning
  // probe, and the step norms |v_t - P(avg_v_{t-1})| that bound the descent:
  // with M_t = max of the first t step norms, dist_t^2 <= M_t^2/t +
  // eps_tol * M_t (the classic 4/t rate once payoffs fit in the unit ball).
  std::vector<double> distance_trace;
  std::vector<double> step_norm_trace;
};

// Maximizes nu over the eps-relaxed equilibria.  Payoffs and nu are
// normalized internally; results are reported in original units.  The
// returned mixture satisfies is_epsilon_cce at
// eps + eps_tol * payoff_range()/2 (up to mixture thinning), and when
// converged its value is >= y_best - eps_tol * nu_range/2.
WorstCaseResult worst_case_cce(const Game& game, const EgoStrategy& ego,
                               std::span<const double> nu,
                               const ApproachabilityOptions& options);

// Block layout of deviation coordinates: block_start(counts) has one offset
// per agent and total(counts) = m.
std::vector<int> deviation_block_starts(std::span<const int> counts);
int deviation_total(std::span<const int> counts);

}  // namespace robustcce

#endif  // ROBUSTCCE_BLACKWELL_HPP_
