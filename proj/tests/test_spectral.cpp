#include "kfk/spectral.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "kfk/rng.hpp"

using namespace kfk;

namespace {

// Exact antiderivative of |xi + tau eta|^{2s} in d = 1: the independent
// oracle for the quadrature path.
double symbol_oracle_1d(double t, double eta, double xi, double s) {
  const auto phi = [s](double u) {
    return std::copysign(std::pow(std::abs(u), 1.0 + 2.0 * s), u) / (1.0 + 2.0 * s);
  };
  if (eta == 0.0) return t * std::pow(std::abs(xi), 2.0 * s);
  return (phi(xi + t * eta) - phi(xi)) / eta;
}

}  // namespace

TEST(Symbol, ClosedFormExamples) {
  EXPECT_NEAR(symbol_exponent({1.0, Vec{0.0}, Vec{2.0}, 0.5}), 2.0, 1e-12);
  EXPECT_NEAR(symbol_exponent({1.0, Vec{1.0}, Vec{0.0}, 0.5}), 0.5, 1e-10);
  EXPECT_NEAR(symbol_exponent({1.0, Vec{-2.0}, Vec{1.0}, 0.5}), 0.5, 1e-10);
}

TEST(Symbol, MatchesAntiderivativeOracle) {
  Rng rng(RngStream{13, 13});
  double worst = 0.0;
  for (int i = 0; i < 300; ++i) {
    const double t = 0.1 + 3.0 * rng.uniform_open();
    const double eta = -5.0 + 10.0 * rng.uniform_open();
    const double xi = -5.0 + 10.0 * rng.uniform_open();
    for (double s : {0.25, 0.5, 0.75}) {
      const double got = symbol_exponent({t, Vec{eta}, Vec{xi}, s});
      const double want = symbol_oracle_1d(t, eta, xi, s);
      worst = std::max(worst, std::abs(got - want) / std::max(want, 1e-30));
    }
  }
  EXPECT_LE(worst, 1e-10);
}

TEST(Symbol, MonotoneInTime) {
  const Vec eta{1.3}, xi{-0.4};
  double prev = 0.0;
  for (double t : {0.1, 0.5, 1.0, 2.0, 5.0}) {
    const double v = symbol_exponent({t, eta, xi, 0.5});
    EXPECT_GE(v, prev);
    prev = v;
  }
}

TEST(Symbol, InputValidation) {
  EXPECT_THROW(symbol_exponent({0.0, Vec{1.0}, Vec{1.0}, 0.5}), invalid_parameter);
  EXPECT_THROW(symbol_exponent({-1.0, Vec{1.0}, Vec{1.0}, 0.5}), invalid_parameter);
  EXPECT_THROW(symbol_exponent({1.0, Vec{1.0, 0.0}, Vec{1.0}, 0.5}),
               dimension_mismatch);
  EXPECT_THROW(symbol_exponent({1.0, Vec{1.0}, Vec{1.0}, 1.5}), invalid_parameter);
  const double inf = std::numeric_limits<double>::infinity();
  EXPECT_THROW(symbol_exponent({1.0, Vec{inf}, Vec{1.0}, 0.5}), invalid_parameter);
}

TEST(KernelGrid, MassAndPositivity) {
  const KernelGrid g = kernel_grid(1.0, Params(1, 0.5));
  EXPECT_NEAR(g.mass(), 1.0, 1e-3);
  EXPECT_GE(g.min_value(), -1e-8 * g.max_value());
  for (double v : g.values) EXPECT_TRUE(std::isfinite(v));
}

TEST(KernelGrid, EvenSymmetry) {
  const KernelGrid g = kernel_grid(1.0, Params(1, 0.5));
  double worst = 0.0;
  for (int i = 1; i < g.nx; ++i)
    for (int k = 1; k < g.nv; ++k) {
      const double a = g.value(i, k);
      const double b = g.value(g.nx - i, g.nv - k);
      worst = std::max(worst, std::abs(a - b) / std::max(std::abs(a), 1e-300));
    }
  EXPECT_LE(worst, 1e-9);
}

TEST(KernelGrid, TransformationInvariance) {
  const KernelGrid g = kernel_grid(1.0, Params(1, 0.5));
  EXPECT_LE(check_invariance(g), 1e-6);
}

TEST(KernelGrid, NyquistGate) {
  EXPECT_THROW(kernel_grid(1.0, Params(1, 0.5), GridSpec{0.0, 0.0, 32, 32}),
               resolution_error);
  // s = 0.25 cannot be resolved at the desk default size
  EXPECT_THROW(kernel_grid(1.0, Params(1, 0.25)), resolution_error);
}

TEST(KernelGrid, OnlyD1) {
  EXPECT_THROW(kernel_grid(1.0, Params(2, 0.5)), invalid_parameter);
}

TEST(KernelGrid, CsvExport) {
  const KernelGrid g = kernel_grid(1.0, Params(1, 0.5), GridSpec{4.0, 4.0, 128, 128});
  std::ostringstream os;
  write_kernel_csv(g, os);
  const std::string text = os.str();
  EXPECT_EQ(text.rfind("x,v,value\n", 0), 0u);
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'),
            1 + static_cast<long>(g.nx) * g.nv);
}

TEST(HeatKernel, PoissonClosedFormD1) {
  const Params p(1, 0.5);
  EXPECT_NEAR(fractional_heat_kernel(1.0, Vec{0.0}, p), 1.0 / M_PI, 1e-14);
  EXPECT_NEAR(fractional_heat_kernel(2.0, Vec{0.0}, p), 0.5 / M_PI, 1e-14);
  EXPECT_NEAR(fractional_heat_kernel(1.0, Vec{1.0}, p), 0.5 / M_PI, 1e-14);
}

TEST(HeatKernel, QuadratureMatchesPoissonD1) {
  // dual route: the radial quadrature/series path against the closed form
  for (double r : {0.0, 0.5, 1.0, 2.0, 7.9, 30.0, 100.0}) {
    const double got = detail::heat_kernel_q1(1, 0.5, r);
    const double want = (1.0 / M_PI) / (1.0 + r * r);
    EXPECT_NEAR(got / want, 1.0, 2e-4) << "r=" << r;
    if (r < 8.0) EXPECT_NEAR(got / want, 1.0, 1e-8) << "r=" << r;
  }
}

TEST(HeatKernel, QuadratureMatchesPoissonD2D3) {
  for (int d : {2, 3}) {
    const double cd = std::tgamma(0.5 * (d + 1)) / std::pow(M_PI, 0.5 * (d + 1));
    for (double r : {0.0, 0.7, 2.1}) {
      const double got = detail::heat_kernel_q1(d, 0.5, r);
      const double want = cd / std::pow(1.0 + r * r, 0.5 * (d + 1));
      EXPECT_NEAR(got / want, 1.0, 1e-7) << "d=" << d << " r=" << r;
    }
  }
}

TEST(HeatKernel, NormalizationS075) {
  const Params p(1, 0.75);
  double mass = 0.0;
  const double extent = 120.0, dx = 0.05;
  const long n = std::lround(2.0 * extent / dx);
  for (long i = 0; i < n; ++i) {
    const double x = -extent + (i + 0.5) * dx;
    mass += fractional_heat_kernel(1.0, Vec{x}, p) * dx;
  }
  EXPECT_NEAR(mass, 1.0, 1e-3);
}

TEST(HeatKernel, SelfSimilarScalingInT) {
  const Params p(1, 0.75);
  // Q_t(x) = t^{-1/2s} Q_1(t^{-1/2s} x)
  const double t = 3.0, x = 0.8;
  const double lhs = fractional_heat_kernel(t, Vec{x}, p);
  const double c = std::pow(t, -1.0 / 1.5);
  const double rhs = c * fractional_heat_kernel(1.0, Vec{c * x}, p);
  EXPECT_NEAR(lhs / rhs, 1.0, 1e-9);
}

TEST(VIntegratedKernel, ClosedFormValues) {
  const Params p(1, 0.5);
  EXPECT_NEAR(v_integrated_kernel(1.0, Vec{0.0}, p), 2.0 / M_PI, 1e-12);
  EXPECT_NEAR(v_integrated_kernel(4.0, Vec{0.0}, p), 1.0 / (8.0 * M_PI), 1e-12);
}

TEST(VIntegratedKernel, GridMarginalCrossCheck) {
  // the two evaluation paths (lattice marginal vs reduction formula) agree
  const Params p(1, 0.5);
  const KernelGrid g = kernel_grid(1.0, p, GridSpec{32.0, 16.0, 1024, 512});
  for (double x : {0.0, 0.5, 1.0, 2.0, 4.0}) {
    const int i = static_cast<int>(std::lround(x / g.dx())) + g.nx / 2;
    const double marginal = g.v_marginal(i);
    const double target = v_integrated_kernel(1.0, Vec{g.x_node(i)}, p);
    EXPECT_NEAR(marginal / target, 1.0, 0.02) << "x=" << x;
  }
}

TEST(ScalingCheck, IdentityEps) {
  // identity scaling: the residual is the truncation difference between the
  // two independent lattices only
  const ScalingCheck sc = check_scaling(1.0, 1.0, Params(1, 0.5));
  EXPECT_GT(sc.points_compared, 1000);
  EXPECT_LE(sc.max_rel_dev, 1e-3);
}

TEST(ScalingCheck, HalfEpsS05) {
  const ScalingCheck sc = check_scaling(1.0, 0.5, Params(1, 0.5));
  EXPECT_GT(sc.points_compared, 1000);
  EXPECT_LE(sc.max_rel_dev, 0.02);
}

TEST(ScalingCheck, QuarterEpsS05) {
  const ScalingCheck sc = check_scaling(1.0, 0.25, Params(1, 0.5));
  EXPECT_GT(sc.points_compared, 1000);
  EXPECT_LE(sc.max_rel_dev, 0.02);
}

TEST(ScalingCheck, HalfEpsS025LargeGrids) {
  // the stretched-exponential symbol at s = 0.25 needs ~10x the lattice to
  // pass the resolution gate
  const ScalingCheck sc = check_scaling(1.0, 0.5, Params(1, 0.25), 3360, 2688);
  EXPECT_GT(sc.points_compared, 1000);
  EXPECT_LE(sc.max_rel_dev, 0.02);
}

TEST(ScalingCheck, PropagatesResolutionError) {
  EXPECT_THROW(check_scaling(1.0, 0.5, Params(1, 0.25)), resolution_error);
}

TEST(IntegratedBound, PanelD1S05) {
  const Params p(1, 0.5);
  const BoundCheck bc = integrated_upper_bound_check(p);
  EXPECT_TRUE(bc.pass);
  EXPECT_GT(bc.worst_ratio, 0.0);
  EXPECT_LE(bc.worst_ratio, bc.stored_bound);
  EXPECT_LE(bc.worst_ratio, 10.0);
  // on-diagonal value r(1, 0) = 2/pi
  const BoundCheck on_diag = integrated_upper_bound_check(p, {{1.0, 0.0}});
  EXPECT_NEAR(on_diag.worst_ratio, 2.0 / M_PI, 1e-10);
}

TEST(IntegratedBound, PanelD1S025) {
  const BoundCheck bc = integrated_upper_bound_check(Params(1, 0.25));
  EXPECT_TRUE(bc.pass);
  EXPECT_LE(bc.worst_ratio, bc.stored_bound);
}

TEST(IntegratedBound, UncalibratedParamsRejected) {
  EXPECT_THROW(integrated_upper_bound_check(Params(3, 0.5)), invalid_parameter);
}
