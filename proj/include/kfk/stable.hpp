#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <vector>

#include "kfk/core.hpp"
#include "kfk/errors.hpp"
#include "kfk/rng.hpp"

namespace kfk {

/// One increment of the driving rotationally symmetric 2s-stable process.
struct StableIncrement {
  Vec dx;
};

namespace detail {

/// Kanter's one-sided beta-stable draw, Laplace transform exp(-lambda^beta).
/// Returned in log scale; extreme draws stay representable for any beta.
inline double log_positive_stable(double beta, Rng& rng) {
  const double theta = M_PI * rng.uniform_open();
  const double w = rng.exponential();
  const double log_a = (1.0 - beta) * std::log(std::sin((1.0 - beta) * theta)) +
                       beta * std::log(std::sin(beta * theta)) -
                       std::log(std::sin(theta));
  return (log_a - (1.0 - beta) * std::log(w)) / beta;
}

}  // namespace detail

/// Draws an increment with characteristic function exp(-dt |xi|^{2s}).
///
/// Subordination: X = sqrt(2 S) Z with Z ~ N(0, I_d) and S one-sided
/// s-stable, so E exp(i xi . X) = E exp(-S |xi|^2) = exp(-|xi|^{2s});
/// the time step enters through self-similarity, S_dt = dt^{1/s} S.
/// Isotropy is exact because the subordinator multiplies a full Gaussian
/// vector. Magnitudes are capped at 1e300 (never clipped below that):
/// such a jump exits every geometry in scope.
inline StableIncrement sample_increment(const Params& params, double dt, Rng& rng) {
  if (!(dt >= 0.0) || !std::isfinite(dt))
    throw invalid_parameter("sample_increment: dt must be nonnegative and finite");
  StableIncrement inc{zeros(params.d)};
  if (dt == 0.0) return inc;
  const double log_s = detail::log_positive_stable(params.s, rng);
  double log_amp = std::log(dt) / (2.0 * params.s) + 0.5 * (M_LN2 + log_s);
  if (log_amp > 690.0) log_amp = 690.0;
  const double amp = std::exp(log_amp);
  for (int i = 0; i < params.d; ++i) inc.dx[i] = amp * rng.normal();
  return inc;
}

inline StableIncrement sample_increment(const Params& params, double dt,
                                        RngStream stream) {
  Rng rng(stream);
  return sample_increment(params, dt, rng);
}

/// (1/N) sum_k exp(i xi . sample_k); the validation oracle for the Fourier
/// symbol of the sampler.
inline std::complex<double> empirical_charfn(const std::vector<Vec>& samples,
                                             const Vec& xi) {
  if (samples.empty())
    throw invalid_parameter("empirical_charfn: sample list is empty");
  double re = 0.0, im = 0.0;
  for (const Vec& s : samples) {
    if (s.size() != xi.size())
      throw dimension_mismatch("empirical_charfn: sample/xi dimension mismatch");
    const double phase = dot(xi, s);
    re += std::cos(phase);
    im += std::sin(phase);
  }
  const double n = static_cast<double>(samples.size());
  return {re / n, im / n};
}

/// Convenience batch draw: n independent increments from one stream.
inline std::vector<Vec> sample_many(const Params& params, double dt, long n,
                                    RngStream stream) {
  Rng rng(stream);
  std::vector<Vec> out;
  out.reserve(static_cast<std::size_t>(n));
  for (long i = 0; i < n; ++i) out.push_back(sample_increment(params, dt, rng).dx);
  return out;
}

}  // namespace kfk
