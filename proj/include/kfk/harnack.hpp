#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "kfk/core.hpp"
#include "kfk/errors.hpp"
#include "kfk/rng.hpp"
#include "kfk/walker.hpp"

namespace kfk {

/// Controls one epsilon sweep.
struct SweepConfig {
  Params params;
  std::vector<double> eps_list;
  WalkConfig walk;
  double tol_lower = 0.3;
  double tol_upper = 0.3;
  double tol_theorem = 0.35;

  void validate() const {
    walk.validate();
    if (eps_list.empty()) throw invalid_parameter("SweepConfig: eps_list is empty");
    for (std::size_t i = 0; i < eps_list.size(); ++i) {
      if (!(eps_list[i] > 0.0) || !(eps_list[i] <= 0.25))
        throw invalid_parameter(
            "SweepConfig: eps values must lie in (0, 1/4] (upper-bound verdict range)");
      if (i > 0 && !(eps_list[i] < eps_list[i - 1]))
        throw invalid_parameter("SweepConfig: eps_list must be strictly decreasing");
    }
  }
};

/// One epsilon of the sweep. Exit-distribution estimates are primary;
/// occupation estimates ride along as the cross-check.
struct SweepRow {
  double eps = 0.0;
  Estimate f0;
  Estimate fzeta;
  Estimate f0_occ;
  Estimate fzeta_occ;
  double ratio = 0.0;      // fzeta.mean / f0.mean
  double ratio_err = 0.0;  // propagated
  bool usable = false;     // f0 distinguishable from 0 at 3 stderr
  long structural_violations = 0;

  bool cross_check_ok(double k_sigma = 3.0) const {
    const double d0 = std::abs(f0.mean - f0_occ.mean);
    const double dz = std::abs(fzeta.mean - fzeta_occ.mean);
    const double s0 = std::hypot(f0.std_error, f0_occ.std_error);
    const double sz = std::hypot(fzeta.std_error, fzeta_occ.std_error);
    return d0 <= k_sigma * s0 && dz <= k_sigma * sz;
  }
};

namespace detail {

inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
  std::uint64_t state = seed ^ (0x9E3779B97F4A7C15ull * (salt + 1));
  return splitmix64(state);
}

}  // namespace detail

/// Runs both estimators at the origin and at zeta for every epsilon.
/// Row order follows eps_list; each (eps, point) pair gets its own seed
/// derived from the sweep seed, so rows are reproducible in isolation.
inline std::vector<SweepRow> run_sweep(const SweepConfig& cfg) {
  cfg.validate();
  const auto [origin, zeta] = evaluation_points(cfg.params);
  std::vector<SweepRow> rows;
  rows.reserve(cfg.eps_list.size());
  for (std::size_t r = 0; r < cfg.eps_list.size(); ++r) {
    const double eps = cfg.eps_list[r];
    const Geometry geom = make_geometry(eps, cfg.params);

    WalkConfig w0 = cfg.walk;
    w0.seed = detail::mix_seed(cfg.walk.seed, 2 * r);
    const EnsembleStats at0 = run_ensemble(origin, geom, cfg.params, w0);

    WalkConfig wz = cfg.walk;
    wz.seed = detail::mix_seed(cfg.walk.seed, 2 * r + 1);
    const EnsembleStats atz = run_ensemble(zeta, geom, cfg.params, wz);

    SweepRow row;
    row.eps = eps;
    row.f0 = at0.exit;
    row.fzeta = atz.exit;
    row.f0_occ = at0.occupation;
    row.fzeta_occ = atz.occupation;
    row.structural_violations = at0.structural_violations + atz.structural_violations;
    row.usable = row.f0.mean > 3.0 * row.f0.std_error && row.f0.mean > 0.0;
    if (row.usable) {
      row.ratio = row.fzeta.mean / row.f0.mean;
      const double r0 = row.f0.std_error / row.f0.mean;
      const double rz = (row.fzeta.mean > 0.0)
                            ? row.fzeta.std_error / row.fzeta.mean
                            : 0.0;
      row.ratio_err = row.ratio * std::hypot(r0, rz);
    } else {
      row.ratio = std::numeric_limits<double>::quiet_NaN();
      row.ratio_err = std::numeric_limits<double>::quiet_NaN();
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

/// One sample point for the power-law fit.
struct FitPoint {
  double eps;
  double value;
  double std_error;
};

struct FitResult {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_std_error = 0.0;
  int n_used = 0;
};

/// Weighted least squares of log(value) on log(eps), weights from relative
/// errors. Nonpositive values are excluded; fewer than two usable points is
/// an error.
inline FitResult fit_exponent(const std::vector<FitPoint>& points) {
  std::vector<double> xs, ys, sig;
  for (const FitPoint& p : points) {
    if (!(p.value > 0.0) || !std::isfinite(p.value)) continue;
    xs.push_back(std::log(p.eps));
    ys.push_back(std::log(p.value));
    sig.push_back(std::max(p.std_error / p.value, 1e-12));
  }
  if (xs.size() < 2)
    throw invalid_parameter("fit_exponent: fewer than 2 usable points");
  double sw = 0.0, sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double w = 1.0 / (sig[i] * sig[i]);
    sw += w;
    sx += w * xs[i];
    sy += w * ys[i];
    sxx += w * xs[i] * xs[i];
    sxy += w * xs[i] * ys[i];
  }
  const double delta = sw * sxx - sx * sx;
  if (!(delta > 0.0))
    throw invalid_parameter("fit_exponent: degenerate abscissae");
  FitResult out;
  out.slope = (sw * sxy - sx * sy) / delta;
  out.intercept = (sxx * sy - sx * sxy) / delta;
  out.slope_std_error = std::sqrt(sw / delta);
  out.n_used = static_cast<int>(xs.size());
  return out;
}

/// One verdict on a fitted exponent. `slope_at_most` states the direction of
/// the required inequality: true means pass iff slope <= threshold.
struct Verdict {
  std::string name;
  double fitted_slope = 0.0;
  double slope_std_error = 0.0;
  double threshold = 0.0;
  bool slope_at_most = false;
  bool pass = false;
  double intercept = 0.0;

  std::string required() const {
    return std::string("slope ") + (slope_at_most ? "<=" : ">=") + " " +
           std::to_string(threshold);
  }
};

namespace detail {

inline std::vector<FitPoint> usable_points(const std::vector<SweepRow>& rows,
                                           int which, double eps_below) {
  std::vector<FitPoint> pts;
  for (const SweepRow& r : rows) {
    if (!r.usable || !(r.eps < eps_below)) continue;
    switch (which) {
      case 0:
        pts.push_back({r.eps, r.f0.mean, r.f0.std_error});
        break;
      case 1:
        pts.push_back({r.eps, r.fzeta.mean, r.fzeta.std_error});
        break;
      default:
        pts.push_back({r.eps, r.ratio, r.ratio_err});
    }
  }
  return pts;
}

inline Verdict slope_verdict(std::string name, const std::vector<FitPoint>& pts,
                             double threshold, bool at_most) {
  if (pts.size() < 3)
    throw invalid_parameter(name + ": fewer than 3 usable rows");
  const FitResult fit = fit_exponent(pts);
  Verdict v;
  v.name = std::move(name);
  v.fitted_slope = fit.slope;
  v.slope_std_error = fit.slope_std_error;
  v.threshold = threshold;
  v.slope_at_most = at_most;
  v.pass = at_most ? (fit.slope <= threshold) : (fit.slope >= threshold);
  v.intercept = fit.intercept;
  return v;
}

}  // namespace detail

/// f_eps(0) >= c1 eps^{2s}: the fitted f0 decay must not be steeper than
/// 2s + tol (slower decay is consistent with the one-sided bound).
inline Verdict check_lemma_lower(const std::vector<SweepRow>& rows,
                                 const Params& params, double tol) {
  return detail::slope_verdict("lower_bound",
                               detail::usable_points(rows, 0, 2.0),
                               2.0 * params.s + tol, true);
}

/// f_eps(zeta) <= c2 eps^{d(1+2s)} for eps < 1/4: the fitted fzeta decay must
/// be at least d(1+2s) - tol.
inline Verdict check_lemma_upper(const std::vector<SweepRow>& rows,
                                 const Params& params, double tol) {
  return detail::slope_verdict("upper_bound",
                               detail::usable_points(rows, 1, 0.25),
                               params.d * (1.0 + 2.0 * params.s) - tol, false);
}

/// f_eps(zeta)/f_eps(0) <= c0 eps^{d(1+2s)-2s}: the fitted ratio decay must be
/// at least d(1+2s) - 2s - tol. The intercept exponential is the measured
/// c0 proxy.
inline Verdict check_theorem(const std::vector<SweepRow>& rows, const Params& params,
                             double tol) {
  return detail::slope_verdict(
      "theorem_ratio", detail::usable_points(rows, 2, 2.0),
      params.d * (1.0 + 2.0 * params.s) - 2.0 * params.s - tol, false);
}

/// Decreasing-ratio trend, asserted on the fit rather than pairwise: the
/// fitted exponent is positive and every usable row's log-ratio residual
/// stays within k_sigma of its propagated error.
inline bool ratio_trend_ok(const std::vector<SweepRow>& rows, double k_sigma = 3.0) {
  const auto pts = detail::usable_points(rows, 2, 2.0);
  if (pts.size() < 3) throw invalid_parameter("ratio_trend_ok: fewer than 3 rows");
  const FitResult fit = fit_exponent(pts);
  if (!(fit.slope > 0.0)) return false;
  for (const FitPoint& p : pts) {
    const double resid =
        std::log(p.value) - (fit.intercept + fit.slope * std::log(p.eps));
    if (std::abs(resid) > k_sigma * std::max(p.std_error / p.value, 1e-12))
      return false;
  }
  return true;
}

}  // namespace kfk
