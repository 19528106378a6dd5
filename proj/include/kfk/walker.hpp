#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <ostream>
#include <vector>

#include "kfk/core.hpp"
#include "kfk/errors.hpp"
#include "kfk/quadrature.hpp"
#include "kfk/rng.hpp"
#include "kfk/stable.hpp"

namespace kfk {

/// Euler-scheme and ensemble controls.
struct WalkConfig {
  double dt = 1e-3;
  double max_time = 64.0;
  long n_paths = 1'000'000;
  std::uint64_t seed = 0;

  void validate() const {
    if (!(dt > 0.0) || !std::isfinite(dt))
      throw invalid_parameter("WalkConfig: dt must be positive");
    if (!(dt <= max_time))
      throw invalid_parameter("WalkConfig: dt must not exceed max_time");
    if (n_paths < 1) throw invalid_parameter("WalkConfig: n_paths must be >= 1");
  }
};

/// One killed trajectory.
struct PathRecord {
  double exit_time = 0.0;
  PhasePoint exit_state;
  bool hit_target = false;
  double occupation = 0.0;
  bool censored = false;
  // Exit bookkeeping for the structural audit of target hits.
  bool exited_by_jump = false;
  double last_jump_norm = 0.0;
};

/// A Monte Carlo mean with its standard error.
struct Estimate {
  double mean = 0.0;
  double std_error = 0.0;
  long n = 0;
  double censored_fraction = 0.0;
};

namespace detail {

inline double fractional_laplacian_constant(const Params& p) {
  return std::pow(4.0, p.s) * p.s * std::tgamma(0.5 * p.d + p.s) /
         (std::pow(M_PI, 0.5 * p.d) * std::tgamma(1.0 - p.s));
}

/// integral over B_1(center) of |v - w|^{-d-2s} dw, for v at distance
/// dist > 1 from the center. Closed antiderivative in d = 1; in d = 2, 3 the
/// integrand is radial about v, so the ball integral reduces to a 1D integral
/// against the sphere/ball intersection measure.
inline double jump_ball_integral(int d, double s, double dist) {
  if (!(dist > 1.0))
    throw domain_error("jump_ball_integral: evaluation point inside the target ball");
  const double a = dist - 1.0, b = dist + 1.0;
  switch (d) {
    case 1:
      return (std::pow(a, -2.0 * s) - std::pow(b, -2.0 * s)) / (2.0 * s);
    case 2: {
      const auto f = [=](double rho) {
        double c = (rho * rho + dist * dist - 1.0) / (2.0 * rho * dist);
        c = std::clamp(c, -1.0, 1.0);
        return 2.0 * std::pow(rho, -1.0 - 2.0 * s) * std::acos(c);
      };
      return quad::integrate(f, a, b, 1e-10);
    }
    case 3: {
      const auto f = [=](double rho) {
        double c = (rho * rho + dist * dist - 1.0) / (2.0 * rho * dist);
        c = std::clamp(c, -1.0, 1.0);
        return 2.0 * M_PI * std::pow(rho, -1.0 - 2.0 * s) * (1.0 - c);
      };
      return quad::integrate(f, a, b, 1e-10);
    }
    default:
      throw invalid_parameter("jump_ball_integral: implemented for d <= 3");
  }
}

}  // namespace detail

/// c_{d,s} * integral over B_1(3 e_d) of |v - w|^{-d-2s} dw; the velocity
/// factor of the source g_eps.
inline double jump_kernel_mass(const Vec& v, const Geometry& geom,
                               const Params& params) {
  Vec diff(v);
  for (int i = 0; i < params.d; ++i) diff[i] -= geom.exterior_target.v_center[i];
  return detail::fractional_laplacian_constant(params) *
         detail::jump_ball_integral(params.d, params.s, norm(diff));
}

/// g_eps(x,v) = c_{d,s} 1_{B_{eps^{1+2s}}}(x) integral over B_1(3 e_d) of
/// |v-w|^{-d-2s} dw, for (x,v) in the domain B.
inline double g_eps(const PhasePoint& p, const Geometry& geom, const Params& params) {
  if (!contains(geom.domain, p))
    throw domain_error("g_eps: point outside the domain");
  Vec dx(p.x);
  for (int i = 0; i < params.d; ++i) dx[i] -= geom.source.x_center[i];
  if (!(norm_sq(dx) < geom.source.x_radius * geom.source.x_radius)) return 0.0;
  return jump_kernel_mass(p.v, geom, params);
}

/// One Euler path of the kinetic pair killed on exiting the domain:
///   V_{k+1} = V_k + dX_k,   Y_{k+1} = Y_k - V_k dt  (left-endpoint rule),
/// with one drift sub-step then one jump sub-step per step and an exit check
/// after each sub-step, so a jump into the target is recorded at the jump.
/// Occupation accumulates g_eps at the pre-step state. Paths alive at
/// max_time are censored. The observer sees (step, y, v, alive) after every
/// step (and the initial state at step 0).
template <class Observer>
inline PathRecord simulate_path_observed(const PhasePoint& start,
                                         const Geometry& geom,
                                         const Params& params,
                                         const WalkConfig& cfg,
                                         std::uint64_t stream_id, Observer&& observe) {
  cfg.validate();
  if (!contains(geom.domain, start))
    throw domain_error("simulate_path: start outside the domain");
  const int d = params.d;
  std::array<double, 16> y{}, v{};
  for (int i = 0; i < d; ++i) {
    y[i] = start.x[i];
    v[i] = start.v[i];
  }

  const double dom_xr2 = geom.domain.x_radius * geom.domain.x_radius;
  const double dom_vr2 = geom.domain.v_radius * geom.domain.v_radius;
  const double src_xr2 = geom.source.x_radius * geom.source.x_radius;
  const auto inside = [&]() {
    double sx = 0.0, sv = 0.0;
    for (int i = 0; i < d; ++i) {
      const double ex = y[i] - geom.domain.x_center[i];
      const double ev = v[i] - geom.domain.v_center[i];
      sx += ex * ex;
      sv += ev * ev;
    }
    return sx < dom_xr2 && sv < dom_vr2;
  };
  const auto in_strip = [&]() {
    double sx = 0.0;
    for (int i = 0; i < d; ++i) {
      const double ex = y[i] - geom.source.x_center[i];
      sx += ex * ex;
    }
    return sx < src_xr2;
  };

  Rng rng(RngStream{cfg.seed, stream_id});
  const long n_steps = static_cast<long>(std::ceil(cfg.max_time / cfg.dt - 1e-12));
  const double cds = detail::fractional_laplacian_constant(params);

  PathRecord rec;
  long k = 0;
  bool exited = false;
  observe(k, y.data(), v.data(), true);
  while (k < n_steps) {
    if (in_strip()) {
      double dist2 = 0.0;
      for (int i = 0; i < d; ++i) {
        const double e = v[i] - geom.exterior_target.v_center[i];
        dist2 += e * e;
      }
      rec.occupation += cds *
                        detail::jump_ball_integral(d, params.s, std::sqrt(dist2)) *
                        cfg.dt;
    }
    for (int i = 0; i < d; ++i) y[i] -= v[i] * cfg.dt;
    ++k;
    if (!inside()) {
      exited = true;
      break;
    }
    const StableIncrement inc = sample_increment(params, cfg.dt, rng);
    double jump2 = 0.0;
    for (int i = 0; i < d; ++i) {
      v[i] += inc.dx[i];
      jump2 += inc.dx[i] * inc.dx[i];
    }
    if (!inside()) {
      exited = true;
      rec.exited_by_jump = true;
      rec.last_jump_norm = std::sqrt(jump2);
      break;
    }
    observe(k, y.data(), v.data(), true);
  }
  if (exited) observe(k, y.data(), v.data(), false);

  rec.exit_time = k * cfg.dt;
  Vec yx(d), yv(d);
  for (int i = 0; i < d; ++i) {
    yx[i] = y[i];
    yv[i] = v[i];
  }
  rec.exit_state = PhasePoint(std::move(yx), std::move(yv));
  rec.censored = !exited;
  rec.hit_target = exited && contains(geom.exterior_target, rec.exit_state);
  return rec;
}

inline PathRecord simulate_path(const PhasePoint& start, const Geometry& geom,
                                const Params& params, const WalkConfig& cfg,
                                std::uint64_t stream_id) {
  return simulate_path_observed(start, geom, params, cfg, stream_id,
                                [](long, const double*, const double*, bool) {});
}

/// Debug trace dump: CSV columns path,step,t,y...,v...,alive, capped at 1000
/// paths. The final row of an exited path carries alive = 0 at the exit state.
inline void write_path_traces(const PhasePoint& start, const Geometry& geom,
                              const Params& params, const WalkConfig& cfg,
                              long n_paths, std::ostream& os) {
  n_paths = std::min<long>({n_paths, cfg.n_paths, 1000});
  const int d = params.d;
  os << "path,step,t";
  for (int i = 0; i < d; ++i) os << ",y" << i;
  for (int i = 0; i < d; ++i) os << ",v" << i;
  os << ",alive\n";
  char num[40];
  for (long p = 0; p < n_paths; ++p) {
    simulate_path_observed(
        start, geom, params, cfg, static_cast<std::uint64_t>(p),
        [&](long step, const double* y, const double* v, bool alive) {
          os << p << "," << step;
          std::snprintf(num, sizeof num, ",%.17g", step * cfg.dt);
          os << num;
          for (int i = 0; i < d; ++i) {
            std::snprintf(num, sizeof num, ",%.17g", y[i]);
            os << num;
          }
          for (int i = 0; i < d; ++i) {
            std::snprintf(num, sizeof num, ",%.17g", v[i]);
            os << num;
          }
          os << "," << (alive ? 1 : 0) << "\n";
        });
  }
}

/// Exit and occupation estimates from one shared ensemble, with the
/// structural audit of target hits (a hit requires a jump of norm >= 1).
struct EnsembleStats {
  Estimate exit;
  Estimate occupation;
  long structural_violations = 0;
};

namespace detail {

struct BlockStat {
  long n = 0;
  long hits = 0;
  long censored = 0;
  double occ_sum = 0.0;
  double occ_sumsq = 0.0;
  long violations = 0;
};

// Fixed-size blocks combined in block order: estimates are bitwise
// independent of the worker count.
inline constexpr long kEnsembleBlock = 4096;

}  // namespace detail

inline EnsembleStats run_ensemble(const PhasePoint& point, const Geometry& geom,
                                  const Params& params, const WalkConfig& cfg) {
  cfg.validate();
  if (!contains(geom.domain, point))
    throw domain_error("run_ensemble: start outside the domain");
  const long n = cfg.n_paths;
  const long nblocks = (n + detail::kEnsembleBlock - 1) / detail::kEnsembleBlock;
  std::vector<detail::BlockStat> stats(static_cast<std::size_t>(nblocks));

#pragma omp parallel for schedule(dynamic)
  for (long b = 0; b < nblocks; ++b) {
    detail::BlockStat st;
    const long lo = b * detail::kEnsembleBlock;
    const long hi = std::min(n, lo + detail::kEnsembleBlock);
    for (long i = lo; i < hi; ++i) {
      const PathRecord rec =
          simulate_path(point, geom, params, cfg, static_cast<std::uint64_t>(i));
      ++st.n;
      if (rec.hit_target) {
        ++st.hits;
        if (!rec.exited_by_jump || rec.last_jump_norm < 1.0) ++st.violations;
      }
      if (rec.censored) ++st.censored;
      st.occ_sum += rec.occupation;
      st.occ_sumsq += rec.occupation * rec.occupation;
    }
    stats[static_cast<std::size_t>(b)] = st;
  }

  detail::BlockStat total;
  for (const auto& st : stats) {
    total.n += st.n;
    total.hits += st.hits;
    total.censored += st.censored;
    total.occ_sum += st.occ_sum;
    total.occ_sumsq += st.occ_sumsq;
    total.violations += st.violations;
  }

  EnsembleStats out;
  const double dn = static_cast<double>(n);
  const double cens_frac = static_cast<double>(total.censored) / dn;

  const double p = static_cast<double>(total.hits) / dn;
  double var_p = (n > 1) ? p * (1.0 - p) * dn / (dn - 1.0) : 0.0;
  out.exit = Estimate{p, std::sqrt(std::max(0.0, var_p) / dn), n, cens_frac};

  const double m = total.occ_sum / dn;
  double var_o = (n > 1) ? (total.occ_sumsq - dn * m * m) / (dn - 1.0) : 0.0;
  out.occupation = Estimate{m, std::sqrt(std::max(0.0, var_o) / dn), n, cens_frac};

  out.structural_violations = total.violations;
  return out;
}

/// f_eps via the exit distribution: the fraction of killed paths landing in
/// the exterior target. Points outside the domain return the exterior datum
/// 1_{E_eps} exactly; censored paths count as misses.
inline Estimate estimate_f_exit(const PhasePoint& point, const Geometry& geom,
                                const Params& params, const WalkConfig& cfg) {
  cfg.validate();
  if (!contains(geom.domain, point)) {
    const double datum = contains(geom.exterior_target, point) ? 1.0 : 0.0;
    return Estimate{datum, 0.0, cfg.n_paths, 0.0};
  }
  return run_ensemble(point, geom, params, cfg).exit;
}

/// f_eps via the occupation-time representation: the sample mean of the
/// accumulated g_eps integral before exit.
inline Estimate estimate_f_occupation(const PhasePoint& point, const Geometry& geom,
                                      const Params& params, const WalkConfig& cfg) {
  cfg.validate();
  if (!contains(geom.domain, point))
    throw domain_error("estimate_f_occupation: point outside the domain");
  return run_ensemble(point, geom, params, cfg).occupation;
}

/// Path-coupled comparison of occupations under nested killing domains.
/// Identical streams drive both copies, so the small-domain path is a prefix
/// of the large-domain path and the inequality is exact per path. Exit times
/// are checked as well (killing happens no later in the smaller domain).
inline bool coupled_domain_monotonicity(const PhasePoint& point,
                                        const Geometry& geom_small,
                                        const Geometry& geom_large,
                                        const Params& params, const WalkConfig& cfg) {
  cfg.validate();
  if (!box_subset(geom_small.domain, geom_large.domain))
    throw invalid_parameter("coupled_domain_monotonicity: domains not nested");
  const long n = cfg.n_paths;
  const long nblocks = (n + detail::kEnsembleBlock - 1) / detail::kEnsembleBlock;
  std::vector<long> violations(static_cast<std::size_t>(nblocks), 0);

#pragma omp parallel for schedule(dynamic)
  for (long b = 0; b < nblocks; ++b) {
    long bad = 0;
    const long lo = b * detail::kEnsembleBlock;
    const long hi = std::min(n, lo + detail::kEnsembleBlock);
    for (long i = lo; i < hi; ++i) {
      const auto id = static_cast<std::uint64_t>(i);
      const PathRecord small = simulate_path(point, geom_small, params, cfg, id);
      const PathRecord large = simulate_path(point, geom_large, params, cfg, id);
      if (small.occupation > large.occupation || small.exit_time > large.exit_time)
        ++bad;
    }
    violations[static_cast<std::size_t>(b)] = bad;
  }
  long total = 0;
  for (long v : violations) total += v;
  return total == 0;
}

/// Empirical joint characteristic function of the unkilled pair at time t.
struct CharfnEstimate {
  double re = 0.0;
  double im = 0.0;
  double se_re = 0.0;
  double se_im = 0.0;
};

/// Simulates n unkilled Euler paths from `start` to time t and returns the
/// empirical E exp(i(eta.Y_t + xi.V_t)) per frequency pair, with standard
/// errors. The spectral symbol supplies the reference value.
inline std::vector<CharfnEstimate> free_flight_charfn(
    const PhasePoint& start, double t, double dt, long n_paths, std::uint64_t seed,
    const Params& params, const std::vector<std::pair<Vec, Vec>>& freqs) {
  if (!(t > 0.0) || !(dt > 0.0) || !(dt <= t))
    throw invalid_parameter("free_flight_charfn: need 0 < dt <= t");
  if (n_paths < 2) throw invalid_parameter("free_flight_charfn: n_paths too small");
  const int d = params.d;
  const long n_steps = std::lround(t / dt);
  const std::size_t nf = freqs.size();

  struct Acc {
    std::vector<double> c, s, c2, s2;
  };
  const long nblocks =
      (n_paths + detail::kEnsembleBlock - 1) / detail::kEnsembleBlock;
  std::vector<Acc> accs(static_cast<std::size_t>(nblocks));

#pragma omp parallel for schedule(dynamic)
  for (long b = 0; b < nblocks; ++b) {
    Acc acc{std::vector<double>(nf, 0.0), std::vector<double>(nf, 0.0),
            std::vector<double>(nf, 0.0), std::vector<double>(nf, 0.0)};
    const long lo = b * detail::kEnsembleBlock;
    const long hi = std::min(n_paths, lo + detail::kEnsembleBlock);
    std::array<double, 16> y{}, v{};
    for (long i = lo; i < hi; ++i) {
      for (int c = 0; c < d; ++c) {
        y[c] = start.x[c];
        v[c] = start.v[c];
      }
      Rng rng(RngStream{seed, static_cast<std::uint64_t>(i)});
      for (long k = 0; k < n_steps; ++k) {
        for (int c = 0; c < d; ++c) y[c] -= v[c] * dt;
        const StableIncrement inc = sample_increment(params, dt, rng);
        for (int c = 0; c < d; ++c) v[c] += inc.dx[c];
      }
      for (std::size_t f = 0; f < nf; ++f) {
        double phase = 0.0;
        for (int c = 0; c < d; ++c)
          phase += freqs[f].first[c] * y[c] + freqs[f].second[c] * v[c];
        const double cc = std::cos(phase), ss = std::sin(phase);
        acc.c[f] += cc;
        acc.s[f] += ss;
        acc.c2[f] += cc * cc;
        acc.s2[f] += ss * ss;
      }
    }
    accs[static_cast<std::size_t>(b)] = std::move(acc);
  }

  std::vector<CharfnEstimate> out(nf);
  const double dn = static_cast<double>(n_paths);
  for (std::size_t f = 0; f < nf; ++f) {
    double c = 0.0, s = 0.0, c2 = 0.0, s2 = 0.0;
    for (const auto& acc : accs) {
      c += acc.c[f];
      s += acc.s[f];
      c2 += acc.c2[f];
      s2 += acc.s2[f];
    }
    const double mc = c / dn, ms = s / dn;
    const double vc = std::max(0.0, (c2 - dn * mc * mc) / (dn - 1.0));
    const double vs = std::max(0.0, (s2 - dn * ms * ms) / (dn - 1.0));
    out[f] = CharfnEstimate{mc, ms, std::sqrt(vc / dn), std::sqrt(vs / dn)};
  }
  return out;
}

}  // namespace kfk
