#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "kfk/errors.hpp"

namespace kfk {

using Vec = std::vector<double>;

inline double dot(const Vec& a, const Vec& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm_sq(const Vec& a) { return dot(a, a); }
inline double norm(const Vec& a) { return std::sqrt(norm_sq(a)); }

inline Vec zeros(int d) { return Vec(static_cast<std::size_t>(d), 0.0); }

/// scale * e_d (last coordinate axis).
inline Vec axis_last(int d, double scale) {
  Vec v = zeros(d);
  v.back() = scale;
  return v;
}

/// Model parameters: dimension d >= 1 and stability index s in (0,1).
/// The kinetic scaling exponents kx = 1+2s (position) and kt = 2s (time)
/// are derived, keeping kx = kt + 1 by construction.
struct Params {
  int d;
  double s;

  Params(int d_, double s_) : d(d_), s(s_) {
    if (d < 1)
      throw invalid_parameter("Params: d must be >= 1, got " + std::to_string(d));
    if (d > 16)
      throw invalid_parameter("Params: d > 16 unsupported at desk scale");
    if (!(s > 0.0) || !(s < 1.0) || !std::isfinite(s))
      throw invalid_parameter("Params: s must lie in (0,1), got " + std::to_string(s));
  }

  double kx() const { return 1.0 + 2.0 * s; }
  double kt() const { return 2.0 * s; }
};

/// A point (x,v) of phase space R^d x R^d.
struct PhasePoint {
  Vec x;
  Vec v;

  PhasePoint() = default;
  PhasePoint(Vec x_, Vec v_) : x(std::move(x_)), v(std::move(v_)) {
    if (x.size() != v.size())
      throw dimension_mismatch("PhasePoint: x and v lengths differ");
  }

  int dim() const { return static_cast<int>(x.size()); }
};

/// Product of Euclidean balls B_{x_radius}(x_center) x B_{v_radius}(v_center).
struct PhaseBox {
  Vec x_center;
  double x_radius;
  Vec v_center;
  double v_radius;

  PhaseBox(Vec xc, double xr, Vec vc, double vr)
      : x_center(std::move(xc)), x_radius(xr), v_center(std::move(vc)), v_radius(vr) {
    if (!(x_radius > 0.0) || !(v_radius > 0.0))
      throw invalid_parameter("PhaseBox: radii must be strictly positive");
    if (x_center.size() != v_center.size())
      throw dimension_mismatch("PhaseBox: x and v centers have different lengths");
  }

  int dim() const { return static_cast<int>(x_center.size()); }
};

/// Strict membership: both components strictly inside their balls, so exit
/// states on the topological boundary count as exterior.
inline bool contains(const PhaseBox& box, const PhasePoint& p) {
  if (p.dim() != box.dim())
    throw dimension_mismatch("contains: point dimension " + std::to_string(p.dim()) +
                             " vs box dimension " + std::to_string(box.dim()));
  double dx = 0.0, dv = 0.0;
  for (int i = 0; i < box.dim(); ++i) {
    const double ex = p.x[i] - box.x_center[i];
    const double ev = p.v[i] - box.v_center[i];
    dx += ex * ex;
    dv += ev * ev;
  }
  return dx < box.x_radius * box.x_radius && dv < box.v_radius * box.v_radius;
}

/// True iff every point of `inner` lies in `outer` (per-component ball inclusion).
inline bool box_subset(const PhaseBox& inner, const PhaseBox& outer) {
  if (inner.dim() != outer.dim()) return false;
  Vec cx(inner.x_center), cv(inner.v_center);
  for (int i = 0; i < inner.dim(); ++i) {
    cx[i] -= outer.x_center[i];
    cv[i] -= outer.v_center[i];
  }
  return norm(cx) + inner.x_radius <= outer.x_radius &&
         norm(cv) + inner.v_radius <= outer.v_radius;
}

/// The counterexample sets for one epsilon:
///   domain          B      = B_1(0) x B_1(0),
///   source          G_eps  = B_{eps^{1+2s}}(0) x B_1(0),
///   exterior_target E_eps  = B_{eps^{1+2s}}(0) x B_1(3 e_d).
struct Geometry {
  PhaseBox domain;
  PhaseBox source;
  PhaseBox exterior_target;
  double eps;

  Geometry(PhaseBox dom, PhaseBox src, PhaseBox tgt, double eps_)
      : domain(std::move(dom)),
        source(std::move(src)),
        exterior_target(std::move(tgt)),
        eps(eps_) {
    if (!box_subset(source, domain))
      throw invalid_parameter("Geometry: source must be contained in the domain");
    // Disjointness of the exterior target: open v-balls may touch but not overlap.
    Vec dc(exterior_target.v_center);
    for (int i = 0; i < domain.dim(); ++i) dc[i] -= domain.v_center[i];
    if (norm(dc) < domain.v_radius + exterior_target.v_radius)
      throw invalid_parameter("Geometry: exterior target overlaps the domain");
  }

  /// Same source/target with a different (larger or equal) simulation domain.
  Geometry with_domain(PhaseBox dom) const {
    return Geometry(std::move(dom), source, exterior_target, eps);
  }
};

inline Geometry make_geometry(double eps, const Params& params) {
  if (!(eps > 0.0) || !(eps < 1.0) || !std::isfinite(eps))
    throw invalid_parameter("make_geometry: eps must lie in (0,1), got " +
                            std::to_string(eps));
  const int d = params.d;
  const double rx = std::pow(eps, params.kx());
  PhaseBox domain(zeros(d), 1.0, zeros(d), 1.0);
  PhaseBox source(zeros(d), rx, zeros(d), 1.0);
  PhaseBox target(zeros(d), rx, axis_last(d, 3.0), 1.0);
  return Geometry(std::move(domain), std::move(source), std::move(target), eps);
}

/// The blown-up domain B^eps = B_{eps^{-1-2s}} x B_{eps^{-1}} of the killed
/// kernel's scaling relation.
inline PhaseBox enlarged_domain(double eps, const Params& params) {
  if (!(eps > 0.0) || !(eps < 1.0) || !std::isfinite(eps))
    throw invalid_parameter("enlarged_domain: eps must lie in (0,1)");
  return PhaseBox(zeros(params.d), std::pow(eps, -params.kx()), zeros(params.d),
                  1.0 / eps);
}

/// The two evaluation points of the ratio: the origin and zeta = (e_d/2, 0).
inline std::pair<PhasePoint, PhasePoint> evaluation_points(const Params& params) {
  PhasePoint origin(zeros(params.d), zeros(params.d));
  PhasePoint zeta(axis_last(params.d, 0.5), zeros(params.d));
  return {origin, zeta};
}

}  // namespace kfk
