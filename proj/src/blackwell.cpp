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

#include "robustcce/blackwell.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>

#include "robustcce/cce_lp.hpp"
#include "robustcce/learners.hpp"
#include "robustcce/metrics.hpp"

namespace robustcce {
namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

std::vector<double> resolve_eps(std::span<const double> eps, int n) {
  if (eps.size() != 1 && eps.size() != static_cast<std::size_t>(n)) {
    throw std::invalid_argument("eps must have 1 or num_agents entries");
  }
  std::vector<double> out(n);
  for (int i = 0; i < n; ++i) {
    const double e = eps[eps.size() == 1 ? 0 : i];
    if (std::isnan(e) || e < 0.0) {
      throw std::invalid_argument("eps entries must be >= 0");
    }
    out[i] = e;
  }
  return out;
}

// Precomputed ego-averaged utility tables plus the objective table, all over
// the same flat joint-action space.  Units are whatever the caller put in.
struct Tables {
  std::vector<int> counts;
  std::vector<long long> strides;
  std::vector<int> starts;  // deviation block offsets
  int n = 0;
  int m = 0;
  long long joints = 0;
  std::vector<std::vector<double>> util;  // util[i][flat], play agent i
  std::vector<double> nu;
};

Tables build_tables(const Game& game, const EgoStrategy& ego,
                    std::span<const double> nu) {
  if (game.joint_count() > kDenseJointCap) {
    throw std::invalid_argument("joint action space too large to tabulate");
  }
  if (nu.size() != static_cast<std::size_t>(game.joint_count())) {
    throw std::invalid_argument("nu must have one entry per joint profile");
  }
  for (double x : nu) {
    if (!std::isfinite(x)) {
      throw std::invalid_argument("nu entries must be finite");
    }
  }
  Tables t;
  t.counts = game.action_counts();
  t.strides = joint_strides(t.counts);
  t.starts = deviation_block_starts(t.counts);
  t.n = game.num_agents();
  t.m = deviation_total(t.counts);
  t.joints = game.joint_count();
  t.util.reserve(t.n);
  for (int i = 0; i < t.n; ++i) {
    t.util.push_back(ego_averaged_table(game, i + 1, ego));
  }
  t.nu.assign(nu.begin(), nu.end());
  return t;
}

// Per-agent cost tables for the halfspace defined by beta (m+1 entries):
//   c_i(a) = -beta_last * nu(a) / n - |beta_i|_1 * u_i(a)
//            + sum_b beta_i[b] * u_i(b, a_{-i}),
// then affinely rescaled to [0,1] per agent so hedge's step size is sane.
std::vector<std::vector<double>> beta_costs(const Tables& t,
                                            std::span<const double> beta) {
  std::vector<std::vector<double>> costs(t.n);
  for (int i = 0; i < t.n; ++i) {
    double l1 = 0.0;
    for (int b = 0; b < t.counts[i]; ++b) l1 += beta[t.starts[i] + b];
    std::vector<double>& c = costs[i];
    c.assign(static_cast<std::size_t>(t.joints), 0.0);
    const std::vector<double>& util = t.util[i];
    const long long stride = t.strides[i];
    const double nu_w = -beta[t.m] / t.n;
    for_each_joint(t.counts, [&](std::span<const int> joint, long long flat) {
      double v = nu_w * t.nu[flat] - l1 * util[flat];
      const long long base = flat - joint[i] * stride;
      for (int b = 0; b < t.counts[i]; ++b) {
        const double w = beta[t.starts[i] + b];
        if (w != 0.0) v += w * util[base + b * stride];
      }
      c[flat] = v;
    });
    const auto [lo_it, hi_it] = std::minmax_element(c.begin(), c.end());
    const double lo = *lo_it, range = *hi_it - *lo_it;
    if (range > 1e-12) {
      for (double& x : c) x = (x - lo) / range;
    } else {
      std::fill(c.begin(), c.end(), 0.0);
    }
  }
  return costs;
}

// Adds the deviation-gain blocks of v(play) for one product strategy, and
// returns nu_bar(play).  All terms are linear in the play distribution, so
// accumulating per-step products averages to the exact value of the mixture.
double add_v_terms(const Tables& t, const ProductStrategy& play,
                   std::span<double> v_dev_sum) {
  for (int i = 0; i < t.n; ++i) {
    const std::vector<double> dev =
        deviation_values(t.util[i], t.counts, play, i);
    const double base = dot(dev, play.per_agent[i]);
    for (int b = 0; b < t.counts[i]; ++b) {
      v_dev_sum[t.starts[i] + b] += dev[b] - base;
    }
  }
  return expected_value(t.nu, t.counts, play);
}

struct OracleOut {
  PlayMixture mixture;
  std::vector<double> v;  // v of the mixture, exact (empty unless tracked)
  double nu_bar = 0.0;
  int thinning = 1;
};

// One halfspace-oracle call: hedge self-play against beta_costs.  When
// track_v is set, v(empirical mixture) and nu_bar are accumulated exactly
// through the per-step observer (thinning does not degrade them).
OracleOut run_oracle(const Tables& t, std::span<const double> beta,
                     double v_last, bool v_last_fixed, int steps, int cap,
                     bool track_v) {
  const std::vector<std::vector<double>> costs = beta_costs(t, beta);
  std::vector<Learner> learners;
  learners.reserve(t.n);
  for (int i = 0; i < t.n; ++i) {
    const double lr =
        std::sqrt(8.0 * std::log(std::max(t.counts[i], 2)) / steps);
    learners.push_back(Learner::hedge(t.counts[i], lr));
  }
  DynamicsOptions opts;
  opts.steps = steps;
  opts.max_mixture_components = cap;
  std::vector<double> v_sum(t.m, 0.0);
  double nu_sum = 0.0;
  if (track_v) {
    opts.observer = [&](int, const ProductStrategy& play) {
      nu_sum += add_v_terms(t, play, v_sum);
    };
  }
  DynamicsResult res = run_dynamics(costs, t.counts, learners, opts);
  OracleOut out;
  out.mixture = std::move(res.empirical_mixture);
  out.thinning = res.thinning;
  if (track_v) {
    out.v.assign(t.m + 1, 0.0);
    for (int j = 0; j < t.m; ++j) out.v[j] = v_sum[j] / steps;
    out.nu_bar = nu_sum / steps;
    out.v[t.m] = v_last_fixed ? v_last : v_last - out.nu_bar;
  }
  return out;
}

// One feasibility probe: approachability iterations toward the shifted
// nonpositive orthant {v : v_j <= shift_j}.  In target mode the last
// coordinate of v is y - nu_bar and beta's last entry is its positive part;
// in sigma mode it is the constant sigma (a fixed pressure toward high nu)
// and is excluded from the convergence distance.
struct ProbeResult {
  bool feasible = false;
  bool converged = false;
  std::vector<MixtureComponent> comps;  // weights sum to 1 across iterates
  int iterates = 0;
  int oracle_calls = 0;
  double nu_bar = 0.0;  // exact nu_bar of the unthinned averaged play
  int inner_thinning = 1;
  std::vector<double> dist_trace;
  std::vector<double> step_norm_trace;
};

struct ProbeParams {
  double eps_tol = 0.05;
  int max_outer = 150;
  int steps = 1000;
  int inner_cap = 512;
  bool sigma_mode = false;
  double sigma = 0.01;
};

ProbeResult run_probe(const Tables& t, std::span<const double> shift, double y,
                      const ProbeParams& p) {
  const int dim = t.m + 1;
  ProbeResult out;
  std::vector<double> avg_v(dim, 0.0);
  double nu_sum = 0.0;

  auto absorb = [&](const PlayMixture& mix, std::span<const double> v,
                    double nu_bar) {
    const double prev = out.iterates;
    ++out.iterates;
    for (int j = 0; j < dim; ++j) {
      avg_v[j] = (prev * avg_v[j] + v[j]) / out.iterates;
    }
    nu_sum += nu_bar;
    // Every iterate carries unit mass here; weights are normalized after the
    // loop once the iterate count is known.
    for (const MixtureComponent& c : mix.components) {
      out.comps.push_back({c.weight, c.strategy});
    }
  };

  // Free first iterate: uniform play, no oracle call needed.
  {
    ProductStrategy uni = uniform_product(t.counts);
    std::vector<double> v(dim, 0.0);
    const double nu_bar = add_v_terms(t, uni, std::span<double>(v).first(t.m));
    v[t.m] = p.sigma_mode ? p.sigma : y - nu_bar;
    absorb(PlayMixture::single(std::move(uni)), v, nu_bar);
  }

  std::vector<double> beta(dim, 0.0);
  for (;;) {
    // Projection of avg_v onto the shifted orthant along each coordinate.
    double dist_sq = 0.0, conv_sq = 0.0;
    for (int j = 0; j < dim; ++j) {
      const double g = std::max(avg_v[j] - shift[j], 0.0);
      beta[j] = g;
      dist_sq += g * g;
      if (j < t.m || !p.sigma_mode) conv_sq += g * g;
    }
    const double dist = std::sqrt(dist_sq);
    out.dist_trace.push_back(p.sigma_mode ? std::sqrt(conv_sq) : dist);
    if (out.step_norm_trace.empty()) out.step_norm_trace.push_back(dist);
    if (std::sqrt(conv_sq) <= p.eps_tol) {
      out.converged = true;
      out.feasible = true;
      break;
    }
    if (out.iterates >= p.max_outer) break;
    if (dist == 0.0) break;  // only reachable in sigma mode with sigma <= 0
    for (double& b : beta) b /= dist;

    OracleOut oracle = run_oracle(t, beta, p.sigma_mode ? p.sigma : y,
                                  p.sigma_mode, p.steps, p.inner_cap,
                                  /*track_v=*/true);
    ++out.oracle_calls;
    out.inner_thinning = std::max(out.inner_thinning, oracle.thinning);

    // Step norm |v_t - P(avg_v)| drives the descent bound
    //   dist_t^2 <= max_s(step_norm_s)^2 / t + eps_tol * max_s(step_norm_s).
    double step_sq = 0.0;
    for (int j = 0; j < dim; ++j) {
      const double d = oracle.v[j] - std::min(avg_v[j], shift[j]);
      step_sq += d * d;
    }
    out.step_norm_trace.push_back(std::sqrt(step_sq));

    // The halfspace oracle failed: no play pushes past this halfspace, so the
    // target value is unreachable.  (Sigma mode has no target to reject.)
    if (!p.sigma_mode && dot(beta, oracle.v) >= p.eps_tol) break;

    absorb(oracle.mixture, oracle.v, oracle.nu_bar);
  }

  if (p.sigma_mode) out.feasible = true;
  out.nu_bar = nu_sum / out.iterates;
  const double inv = 1.0 / out.iterates;
  for (MixtureComponent& c : out.comps) c.weight *= inv;
  return out;
}

PlayMixture assemble_mixture(std::vector<MixtureComponent> comps,
                             int inner_thinning, int cap) {
  PlayMixture mix;
  const int total = static_cast<int>(comps.size());
  const int stride = (total + cap - 1) / cap;
  double kept = 0.0;
  for (int k = 0; k < total; k += stride) {
    kept += comps[k].weight;
    mix.components.push_back(std::move(comps[k]));
  }
  if (kept > 0.0) {
    for (MixtureComponent& c : mix.components) c.weight /= kept;
  }
  mix.thinning = inner_thinning * stride;
  return mix;
}

}  // namespace

std::vector<int> deviation_block_starts(std::span<const int> counts) {
  std::vector<int> starts(counts.size(), 0);
  for (std::size_t i = 1; i < counts.size(); ++i) {
    starts[i] = starts[i - 1] + counts[i - 1];
  }
  return starts;
}

int deviation_total(std::span<const int> counts) {
  int m = 0;
  for (int c : counts) m += c;
  return m;
}

std::vector<double> v_vector(const Game& game, const EgoStrategy& ego,
                             const PlayMixture& play, std::span<const double> nu,
                             double y) {
  if (nu.size() != static_cast<std::size_t>(game.joint_count())) {
    throw std::invalid_argument("nu must have one entry per joint profile");
  }
  RegretReport rep = regret(game, ego, play);
  std::vector<double> v = std::move(rep.deviation_vector);
  v.push_back(y - expected_value(nu, game.action_counts(), play));
  return v;
}

std::vector<double> v_vector_streamlined(const Game& game,
                                         const EgoStrategy& ego,
                                         const PlayMixture& play,
                                         std::span<const double> nu, double y) {
  if (nu.size() != static_cast<std::size_t>(game.joint_count())) {
    throw std::invalid_argument("nu must have one entry per joint profile");
  }
  RegretReport rep = regret(game, ego, play);
  std::vector<double> v = std::move(rep.per_agent);
  v.push_back(y - expected_value(nu, game.action_counts(), play));
  return v;
}

OrthantProjection project_negative_orthant(std::span<const double> v) {
  OrthantProjection out;
  out.nearest.resize(v.size());
  out.beta.assign(v.size(), 0.0);
  double dist_sq = 0.0;
  for (std::size_t j = 0; j < v.size(); ++j) {
    if (!std::isfinite(v[j])) {
      throw std::invalid_argument("projection input must be finite");
    }
    out.nearest[j] = std::min(v[j], 0.0);
    const double g = v[j] - out.nearest[j];
    out.beta[j] = g;
    dist_sq += g * g;
  }
  out.dist = std::sqrt(dist_sq);
  out.converged = out.dist == 0.0;
  if (out.converged) {
    std::fill(out.beta.begin(), out.beta.end(), 0.0);
  } else {
    for (double& b : out.beta) b /= out.dist;
  }
  return out;
}

PlayMixture halfspace_oracle(const Game& game, const EgoStrategy& ego,
                             std::span<const double> beta,
                             std::span<const double> nu, double y, int steps) {
  (void)y;  // fixes the halfspace label but shifts v only by a constant
  Tables t = build_tables(game, ego, nu);
  if (beta.size() != static_cast<std::size_t>(t.m + 1)) {
    throw std::invalid_argument("beta must have m+1 entries");
  }
  for (double b : beta) {
    if (!std::isfinite(b) || b < 0.0) {
      throw std::invalid_argument("beta entries must be finite and >= 0");
    }
  }
  if (steps < 1) throw std::invalid_argument("steps must be >= 1");
  return run_oracle(t, beta, /*v_last=*/0.0, /*v_last_fixed=*/true, steps,
                    /*cap=*/4096, /*track_v=*/false)
      .mixture;
}

WorstCaseResult worst_case_cce(const Game& game, const EgoStrategy& ego,
                               std::span<const double> nu,
                               const ApproachabilityOptions& options) {
  if (!(options.eps_tol > 0.0) || !std::isfinite(options.eps_tol)) {
    throw std::invalid_argument("eps_tol must be positive");
  }
  if (options.max_outer < 1) throw std::invalid_argument("max_outer must be >= 1");
  if (options.bits < 1) throw std::invalid_argument("bits must be >= 1");
  if (options.mixture_cap < 1) {
    throw std::invalid_argument("mixture_cap must be >= 1");
  }
  if (options.no_binary_search &&
      (!(options.sigma > 0.0) || !std::isfinite(options.sigma))) {
    throw std::invalid_argument("sigma must be positive");
  }
  int steps = options.max_inner;
  if (steps < 0) throw std::invalid_argument("max_inner must be >= 0");
  if (steps == 0) {
    steps = static_cast<int>(std::min(
        1e6, std::ceil(100.0 / (options.eps_tol * options.eps_tol))));
  }

  const std::vector<double> eps =
      resolve_eps(options.eps, game.num_agents());

  // Work in normalized units: payoffs to [-1,1], nu to [-1,1] by its own
  // range so the binary search always scans [-1,1].
  Tables t = build_tables(game, ego, nu);
  const PayoffBounds gb = game.payoff_bounds();
  const double off = (gb.lo + gb.hi) / 2.0;
  const double scale = gb.hi > gb.lo ? (gb.hi - gb.lo) / 2.0 : 1.0;
  for (std::vector<double>& table : t.util) {
    for (double& u : table) u = (u - off) / scale;
  }
  const auto [nu_lo_it, nu_hi_it] = std::minmax_element(t.nu.begin(), t.nu.end());
  const double nu_off = (*nu_lo_it + *nu_hi_it) / 2.0;
  const double nu_scale =
      *nu_hi_it > *nu_lo_it ? (*nu_hi_it - *nu_lo_it) / 2.0 : 1.0;
  for (double& x : t.nu) x = (x - nu_off) / nu_scale;

  std::vector<double> shift(t.m + 1, 0.0);
  for (int i = 0; i < t.n; ++i) {
    const double e = eps[i] / scale;
    for (int b = 0; b < t.counts[i]; ++b) shift[t.starts[i] + b] = e;
  }

  ProbeParams pp;
  pp.eps_tol = options.eps_tol;
  pp.max_outer = options.max_outer;
  pp.steps = steps;
  pp.inner_cap = std::max(
      64, static_cast<int>(2LL * options.mixture_cap /
                           std::max(1, options.max_outer)));
  pp.sigma_mode = options.no_binary_search;
  pp.sigma = options.sigma;

  WorstCaseResult res;
  if (options.no_binary_search) {
    ProbeResult probe = run_probe(t, shift, /*y=*/0.0, pp);
    res.outer_iterations = probe.oracle_calls;
    res.converged = probe.converged;
    res.value = nu_off + nu_scale * probe.nu_bar;
    res.y_best = res.value;
    res.distance_trace = std::move(probe.dist_trace);
    res.step_norm_trace = std::move(probe.step_norm_trace);
    res.mixture = assemble_mixture(std::move(probe.comps),
                                   probe.inner_thinning, options.mixture_cap);
    return res;
  }

  // Binary search for the largest reachable target.  y = -1 is feasible
  // whenever the budget suffices (nu_bar >= -1 always), so lo tracks the
  // best probe that actually converged.
  double lo = -1.0, hi = 1.0;
  bool have_best = false;
  ProbeResult best;
  double best_y = -1.0;
  for (int k = 0; k < options.bits; ++k) {
    const double mid = 0.5 * (lo + hi);
    ProbeResult probe = run_probe(t, shift, mid, pp);
    res.outer_iterations += probe.oracle_calls;
    if (probe.feasible) {
      best = std::move(probe);
      best_y = mid;
      have_best = true;
      lo = mid;
    } else {
      hi = mid;
    }
  }
  if (!have_best) {
    // Even the most conservative target failed within budget; report the
    // floor probe honestly (converged=false unless it succeeds).
    best = run_probe(t, shift, -1.0, pp);
    res.outer_iterations += best.oracle_calls;
    best_y = -1.0;
  }

  res.converged = best.converged;
  res.value = nu_off + nu_scale * best.nu_bar;
  res.y_best = nu_off + nu_scale * best_y;
  res.distance_trace = std::move(best.dist_trace);
  res.step_norm_trace = std::move(best.step_norm_trace);
  res.mixture = assemble_mixture(std::move(best.comps), best.inner_thinning,
                                 options.mixture_cap);
  return res;
}

}  // namespace robustcce
