#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "kfk/core.hpp"
#include "kfk/harnack.hpp"
#include "kfk/spectral.hpp"
#include "kfk/stable.hpp"
#include "kfk/walker.hpp"

namespace kfk {

/// One named pass/fail outcome with a human-readable measurement.
struct CheckOutcome {
  std::string name;
  bool pass = false;
  std::string detail;
};

namespace detail {

inline std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
  char buf[192];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

}  // namespace detail

/// Sampler law vs the Fourier symbol exp(-dt |xi|^{2s}) at a frequency panel.
inline CheckOutcome check_stable_symbol(const Params& params, double dt, long n,
                                        std::uint64_t seed,
                                        const std::vector<Vec>& freqs) {
  const auto samples = sample_many(params, dt, n, RngStream{seed, 7001});
  const double tol = 3.0 / std::sqrt(static_cast<double>(n));
  double worst = 0.0;
  for (const Vec& xi : freqs) {
    const std::complex<double> ecf = empirical_charfn(samples, xi);
    const double target = std::exp(-dt * std::pow(norm(xi), 2.0 * params.s));
    worst = std::max({worst, std::abs(ecf.real() - target), std::abs(ecf.imag())});
  }
  char name[64];
  std::snprintf(name, sizeof name, "stable_symbol_d%d_s%g_dt%g", params.d, params.s, dt);
  return {name, worst <= tol,
          detail::fmt("max |ecf - symbol| = %.3e (tol %.3e)", worst, tol)};
}

/// 75th percentile of X_1 for d=1, s=1/2 against the closed-form Cauchy
/// quantile tan(pi/4) = 1.
inline CheckOutcome check_stable_quantile(long n, std::uint64_t seed) {
  const Params params(1, 0.5);
  Rng rng(RngStream{seed, 7002});
  std::vector<double> xs(static_cast<std::size_t>(n));
  for (long i = 0; i < n; ++i)
    xs[static_cast<std::size_t>(i)] = sample_increment(params, 1.0, rng).dx[0];
  const std::size_t k = static_cast<std::size_t>(0.75 * n);
  std::nth_element(xs.begin(), xs.begin() + k, xs.end());
  const double q = xs[k];
  // quantile stderr: sqrt(p(1-p)/n) / f(1) with f(1) = 1/(2 pi)
  const double se = 2.0 * M_PI * std::sqrt(0.1875 / static_cast<double>(n));
  return {"stable_quantile_cauchy", std::abs(q - 1.0) <= 3.0 * se,
          detail::fmt("q75 = %.5f vs 1 (3se = %.2e)", q, 3.0 * se)};
}

/// Self-similarity: samples at dt match dt^{1/2s}-rescaled unit samples in
/// distribution (two-sample Kolmogorov-Smirnov at the 1% level).
inline CheckOutcome check_stable_selfsimilarity(long n, std::uint64_t seed) {
  const Params params(1, 0.5);
  Rng ra(RngStream{seed, 7003}), rb(RngStream{seed, 7004});
  std::vector<double> a(static_cast<std::size_t>(n)), b(static_cast<std::size_t>(n));
  const double factor = std::pow(4.0, 1.0 / (2.0 * params.s));
  for (long i = 0; i < n; ++i) {
    a[static_cast<std::size_t>(i)] = sample_increment(params, 4.0, ra).dx[0];
    b[static_cast<std::size_t>(i)] = factor * sample_increment(params, 1.0, rb).dx[0];
  }
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  double d_stat = 0.0;
  std::size_t ia = 0, ib = 0;
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  while (ia < a.size() && ib < b.size()) {
    if (a[ia] <= b[ib]) ++ia;
    else ++ib;
    d_stat = std::max(d_stat, std::abs(ia / na - ib / nb));
  }
  const double crit = 1.628 * std::sqrt((na + nb) / (na * nb));
  return {"stable_selfsimilarity_ks", d_stat <= crit,
          detail::fmt("KS D = %.4e (crit %.4e)", d_stat, crit)};
}

/// Isotropy in d=2: empirical characteristic function agrees at xi and R^T xi.
inline CheckOutcome check_stable_isotropy(long n, std::uint64_t seed) {
  const Params params(2, 0.5);
  const auto samples = sample_many(params, 1.0, n, RngStream{seed, 7005});
  const double c = std::cos(M_PI / 6.0), s = std::sin(M_PI / 6.0);
  const double tol = 3.0 * std::sqrt(2.0 / static_cast<double>(n));
  double worst = 0.0;
  for (const Vec& xi : {Vec{1.0, 0.0}, Vec{0.0, 1.5}, Vec{0.8, 0.6}}) {
    const Vec rxi = {c * xi[0] + s * xi[1], -s * xi[0] + c * xi[1]};
    const std::complex<double> e1 = empirical_charfn(samples, xi);
    const std::complex<double> e2 = empirical_charfn(samples, rxi);
    worst = std::max({worst, std::abs(e1.real() - e2.real()),
                      std::abs(e1.imag() - e2.imag())});
  }
  return {"stable_isotropy_d2", worst <= tol,
          detail::fmt("max rotation dev = %.3e (tol %.3e)", worst, tol)};
}

inline CheckOutcome check_spectral_mass(const KernelGrid& grid) {
  const double mass = grid.mass();
  return {"spectral_mass", std::abs(mass - 1.0) <= 1e-3,
          detail::fmt("lattice mass = %.9f", mass)};
}

inline CheckOutcome check_spectral_invariance(const KernelGrid& grid) {
  const double dev = check_invariance(grid);
  return {"spectral_invariance", dev <= 1e-6,
          detail::fmt("max rel dev of P(x,v) vs P(tv-x,v) = %.3e", dev)};
}

inline CheckOutcome check_spectral_scaling(double eps, const Params& params,
                                           int n_lhs = 320, int n_rhs = 256) {
  const ScalingCheck sc = check_scaling(1.0, eps, params, n_lhs, n_rhs);
  return {"spectral_scaling", sc.max_rel_dev <= 0.02,
          detail::fmt("max rel dev = %.3e over %.0f nodes (tol 2e-2)", sc.max_rel_dev,
                      static_cast<double>(sc.points_compared))};
}

/// Heat-kernel reduction: the v-marginal of P_1 equals
/// (1+2s)^{d/2s} Q_1((1+2s)^{1/2s} x). Uses a wide-x lattice so periodization
/// folds stay below the tolerance.
inline CheckOutcome check_spectral_reduction(const std::vector<double>& xs = {0.0, 0.5,
                                                                              1.0, 2.0}) {
  const Params params(1, 0.5);
  const KernelGrid grid = kernel_grid(1.0, params, GridSpec{32.0, 16.0, 1024, 512});
  double worst = 0.0;
  for (double x : xs) {
    const int i = static_cast<int>(std::lround(x / grid.dx())) + grid.nx / 2;
    const double marginal = grid.v_marginal(i);
    const double target = v_integrated_kernel(1.0, Vec{grid.x_node(i)}, params);
    worst = std::max(worst, std::abs(marginal - target) / target);
  }
  return {"spectral_reduction", worst <= 0.02,
          detail::fmt("max rel dev of v-marginal vs reduction = %.3e (tol 2e-2)",
                      worst)};
}

/// Riemann normalization of the fractional heat kernel.
inline CheckOutcome check_heat_normalization(const Params& params, double extent,
                                             double dx) {
  double mass = 0.0;
  const long n = std::lround(2.0 * extent / dx);
  for (long i = 0; i < n; ++i) {
    const double x = -extent + (i + 0.5) * dx;
    mass += fractional_heat_kernel(1.0, Vec{x}, params) * dx;
  }
  char name[48];
  std::snprintf(name, sizeof name, "heat_normalization_s%g", params.s);
  return {name, std::abs(mass - 1.0) <= 1e-3, detail::fmt("Q1 mass = %.6f", mass)};
}

inline CheckOutcome check_integrated_bound(const Params& params) {
  const BoundCheck bc = integrated_upper_bound_check(params);
  return {"integrated_bound", bc.pass,
          detail::fmt("sup ratio = %.4f (stored bound %.2f)", bc.worst_ratio,
                      bc.stored_bound)};
}

/// Free-flight Euler pair vs the spectral symbol under the Galilean
/// identification, at five frequency pairs.
inline CheckOutcome check_free_flight(const Params& params, const PhasePoint& start,
                                      double t, double dt, long n,
                                      std::uint64_t seed) {
  std::vector<std::pair<Vec, Vec>> freqs = {
      {Vec{0.0}, Vec{1.0}},  {Vec{1.0}, Vec{0.0}},   {Vec{0.5}, Vec{0.5}},
      {Vec{1.0}, Vec{-0.5}}, {Vec{2.0}, Vec{1.0}}};
  const auto emp = free_flight_charfn(start, t, dt, n, seed, params, freqs);
  bool pass = true;
  double worst_sigma = 0.0;
  for (std::size_t f = 0; f < freqs.size(); ++f) {
    const Vec& eta = freqs[f].first;
    const Vec& xi = freqs[f].second;
    double phase = 0.0;
    for (int c = 0; c < params.d; ++c)
      phase += eta[c] * (start.x[c] - t * start.v[c]) + xi[c] * start.v[c];
    Vec neg_eta(eta);
    for (double& e : neg_eta) e = -e;
    const double decay = std::exp(-symbol_exponent({t, neg_eta, xi, params.s}));
    const double pre = decay * std::cos(phase);
    const double pim = decay * std::sin(phase);
    const double zr = std::abs(emp[f].re - pre) / emp[f].se_re;
    const double zi = std::abs(emp[f].im - pim) / emp[f].se_im;
    worst_sigma = std::max({worst_sigma, zr, zi});
    if (zr > 3.0 || zi > 3.0) pass = false;
  }
  return {"free_flight_charfn", pass,
          detail::fmt("worst |dev|/se = %.2f over 5 frequency pairs (tol 3)",
                      worst_sigma)};
}

/// Exit vs occupation estimators at both evaluation points for one epsilon.
inline CheckOutcome check_cross_estimator(double eps, const Params& params,
                                          const WalkConfig& walk) {
  const Geometry geom = make_geometry(eps, params);
  const auto [origin, zeta] = evaluation_points(params);
  WalkConfig w0 = walk;
  w0.seed = detail::mix_seed(walk.seed, 9001);
  const EnsembleStats a = run_ensemble(origin, geom, params, w0);
  WalkConfig wz = walk;
  wz.seed = detail::mix_seed(walk.seed, 9002);
  const EnsembleStats b = run_ensemble(zeta, geom, params, wz);
  const double d0 = std::abs(a.exit.mean - a.occupation.mean) /
                    std::max(std::hypot(a.exit.std_error, a.occupation.std_error), 1e-300);
  const double dz = std::abs(b.exit.mean - b.occupation.mean) /
                    std::max(std::hypot(b.exit.std_error, b.occupation.std_error), 1e-300);
  char name[48];
  std::snprintf(name, sizeof name, "cross_estimator_eps%g", eps);
  return {name, d0 <= 3.0 && dz <= 3.0,
          detail::fmt("|exit-occ|/se = %.2f at origin, %.2f at zeta (tol 3)", d0, dz)};
}

/// Path-coupled occupation monotonicity between B and B^eps.
inline CheckOutcome check_coupled_monotonicity(double eps, const Params& params,
                                               const WalkConfig& walk) {
  const Geometry small = make_geometry(eps, params);
  const Geometry large = small.with_domain(enlarged_domain(eps, params));
  const auto [origin, zeta] = evaluation_points(params);
  (void)zeta;
  const bool ok = coupled_domain_monotonicity(origin, small, large, params, walk);
  return {"coupled_monotonicity", ok,
          detail::fmt("pathwise occupation inequality held for all %.0f coupled paths",
                      static_cast<double>(walk.n_paths))};
}

/// Same seed, different worker counts: estimates must agree bitwise.
inline CheckOutcome check_determinism(const Params& params, std::uint64_t seed) {
  const Geometry geom = make_geometry(0.25, params);
  const auto [origin, zeta] = evaluation_points(params);
  (void)zeta;
  WalkConfig cfg;
  cfg.n_paths = 4000;
  cfg.seed = seed;
#ifdef _OPENMP
  const int saved = omp_get_max_threads();
  omp_set_num_threads(1);
#endif
  const EnsembleStats a = run_ensemble(origin, geom, params, cfg);
#ifdef _OPENMP
  omp_set_num_threads(2);
#endif
  const EnsembleStats b = run_ensemble(origin, geom, params, cfg);
#ifdef _OPENMP
  omp_set_num_threads(saved);
#endif
  const bool ok = a.exit.mean == b.exit.mean && a.exit.std_error == b.exit.std_error &&
                  a.occupation.mean == b.occupation.mean &&
                  a.occupation.std_error == b.occupation.std_error;
  return {"determinism_across_workers", ok,
          ok ? "bitwise identical estimates with 1 and 2 workers"
             : "estimates differ across worker counts"};
}

/// Maximum principle: every estimate lies in [-3se, 1+3se].
inline CheckOutcome check_max_principle(const std::vector<SweepRow>& rows) {
  bool ok = true;
  double worst = 0.0;
  for (const SweepRow& r : rows) {
    for (const Estimate* e : {&r.f0, &r.fzeta, &r.f0_occ, &r.fzeta_occ}) {
      if (e->mean < -3.0 * e->std_error || e->mean > 1.0 + 3.0 * e->std_error)
        ok = false;
      worst = std::max(worst, e->mean);
    }
  }
  return {"maximum_principle", ok,
          detail::fmt("all estimates within [-3se, 1+3se]; largest mean %.4g", worst)};
}

inline CheckOutcome check_censoring(const std::vector<SweepRow>& rows) {
  double worst = 0.0;
  for (const SweepRow& r : rows)
    worst = std::max({worst, r.f0.censored_fraction, r.fzeta.censored_fraction});
  return {"censoring", worst < 1e-3,
          detail::fmt("worst censored fraction = %.2e (tol 1e-3)", worst)};
}

inline CheckOutcome check_structural_hits(const std::vector<SweepRow>& rows) {
  long total = 0;
  for (const SweepRow& r : rows) total += r.structural_violations;
  return {"structural_hits", total == 0,
          detail::fmt("%.0f target hits without a qualifying jump",
                      static_cast<double>(total))};
}

}  // namespace kfk
