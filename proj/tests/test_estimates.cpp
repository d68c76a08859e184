#include "rellandau/estimates.hpp"

#include <gtest/gtest.h>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <numbers>
#include <sstream>
#include <vector>

#include "rellandau/densities.hpp"
#include "rellandau/errors.hpp"
#include "rellandau/kernel.hpp"
#include "test_util.hpp"

using namespace rellandau;
using namespace rellandau::estimates;
using rellandau::testing::near_pair;
using rellandau::testing::random_pair;

namespace {

using GK = boost::math::quadrature::gauss_kronrod<double, 61>;

std::vector<double> log_grid(double lo, double hi, int n) {
  std::vector<double> g;
  for (int i = 0; i < n; ++i) g.push_back(lo * std::pow(hi / lo, double(i) / (n - 1)));
  return g;
}

// Integral of 1/Psi over [a, b] by Gauss-Kronrod in u = log y, split at y = 1.
double psi_integral_quadrature(double a, double b) {
  auto f = [](double u) {
    const double y = std::exp(u);
    const double p = y <= 1.0 ? y * (1.0 - u) : y;
    return y / p;
  };
  double total = 0.0;
  const double la = std::log(a), lb = std::log(b);
  if (la < 0.0) total += GK::integrate(f, la, std::min(lb, 0.0), 15, 1e-13);
  if (lb > 0.0) total += GK::integrate(f, std::max(la, 0.0), lb, 15, 1e-13);
  return total;
}

}  // namespace

// ---------------------------------------------------------------- Psi, Theta

TEST(Psi, Examples) {
  EXPECT_EQ(psi(1.0), 1.0);
  EXPECT_EQ(psi(2.0), 2.0);
  EXPECT_EQ(psi(0.0), 0.0);
  EXPECT_NEAR(psi(std::exp(-1.0)), 2.0 / std::numbers::e, 1e-15);
  EXPECT_THROW(psi(-1e-300), std::domain_error);
  EXPECT_THROW(theta(-1.0), std::domain_error);
}

TEST(Theta, BranchesAgreeAtOneHalf) {
  const double left = 0.5 * (1.0 + std::log(2.0));
  const double right = 0.5 * std::log(2.0) + 0.5;
  EXPECT_NEAR(left, 0.84657359027997, 1e-13);
  EXPECT_NEAR(theta(0.5), left, 1e-15);
  EXPECT_NEAR(theta(std::nextafter(0.5, 1.0)), right, 1e-15);
}

TEST(Psi, StrictlyIncreasingAndContinuousAtOne) {
  const auto g = log_grid(1e-12, 1e3, 2000);
  for (std::size_t i = 1; i < g.size(); ++i) ASSERT_LT(psi(g[i - 1]), psi(g[i]));
  EXPECT_NEAR(psi(std::nextafter(1.0, 0.0)), 1.0, 1e-15);
  EXPECT_NEAR(psi(std::nextafter(1.0, 2.0)), 1.0, 1e-15);
}

TEST(Theta, ComparableToPsiExactly) {
  for (double x : log_grid(1e-12, 1e3, 4000)) {
    ASSERT_LE(psi(x) / 2, theta(x)) << x;
    ASSERT_LE(theta(x), 2 * psi(x)) << x;
  }
}

TEST(Theta, MidpointConcaveOnGrid) {
  const auto g = log_grid(1e-12, 1e3, 300);
  for (double x : g)
    for (double y : g) {
      // Equality holds on the affine branch, so allow the rounding of the two sides.
      const double avg = 0.5 * (theta(x) + theta(y));
      ASSERT_GE(theta(0.5 * (x + y)), avg * (1 - 4 * std::numeric_limits<double>::epsilon()))
          << x << ' ' << y;
    }
}

// ---------------------------------------------------------------- psi_integral

TEST(PsiIntegral, Examples) {
  EXPECT_EQ(psi_integral(0.3, 0.3), 0.0);
  EXPECT_NEAR(psi_integral(1.0, std::numbers::e), 1.0, 1e-15);
  const double a = std::exp(1.0 - std::numbers::e);
  EXPECT_NEAR(psi_integral(a, 1.0), 1.0, 1e-14);
  EXPECT_NEAR(psi_integral_quadrature(a, 1.0), 1.0, 1e-12);
  EXPECT_EQ(psi_integral(0.0, 1e-300), std::numeric_limits<double>::infinity());
  EXPECT_EQ(psi_integral(0.0, 0.0), 0.0);
  EXPECT_THROW(psi_integral(2.0, 1.0), std::domain_error);
  EXPECT_THROW(psi_integral(-1.0, 1.0), std::domain_error);
}

TEST(PsiIntegral, MatchesQuadrature) {
  const auto g = log_grid(1e-6, 1e3, 40);
  for (std::size_t i = 0; i < g.size(); ++i)
    for (std::size_t j = i + 1; j < g.size(); ++j) {
      const double exact = psi_integral(g[i], g[j]);
      ASSERT_NEAR(exact, psi_integral_quadrature(g[i], g[j]), 1e-8 * exact) << g[i] << ' ' << g[j];
    }
}

TEST(PsiIntegral, DivergesLikeLogLogAtZero) {
  double prev = 0.0;
  for (int k = 1; k <= 300; k += 10) {
    const double a = std::pow(10.0, -k);
    const double v = psi_integral(a, 1.0);
    EXPECT_NEAR(v, std::log(1.0 - std::log(a)), 1e-12 * v);
    EXPECT_GT(v, prev);
    prev = v;
  }
  EXPECT_GT(psi_integral(1e-300, 1.0), 6.5);
}

// ---------------------------------------------------------------- region, bound functions

TEST(Region, EnergyRatioOnA) {
  for (int i = 0; i < 100000; ++i) {
    const auto [p, q] = random_pair(40, i, i % 2 ? 10.0 : 1000.0);
    if (!in_region_a(p, q)) continue;
    ASSERT_LE(q.energy() / 3, p.energy());
    ASSERT_LE(p.energy(), 3 * q.energy());
  }
}

TEST(BoundFunctions, Examples) {
  const Momentum e1(1, 0, 0), zero(0, 0, 0);
  EXPECT_TRUE(in_region_a(e1, zero));
  EXPECT_EQ(phi_b1(e1, zero), 1.0);
  EXPECT_EQ(phi_sigma1(e1, zero), 1.0);
  const Momentum far(50, 0, 0);
  EXPECT_FALSE(in_region_a(far, zero));
  EXPECT_EQ(phi_b1(far, zero), 1.0);
  EXPECT_EQ(phi_b2(far, zero), 1.0);
  EXPECT_EQ(phi_sigma2(far, zero), 1.0);  // (q0)^5 with q = 0
  EXPECT_DOUBLE_EQ(phi_sigma2(zero, far), std::pow(far.energy(), 5));
  EXPECT_DOUBLE_EQ(phi_sigma1(far, zero), 1.0);
}

TEST(BoundFunctions, SingularOnDiagonal) {
  const Momentum p(1, 2, 3);
  EXPECT_THROW(phi_b1(p, p), SingularPair);
  EXPECT_THROW(phi_b2(p, p), SingularPair);
  EXPECT_THROW(phi_sigma1(p, p), SingularPair);
  EXPECT_THROW(phi_sigma2(p, p), SingularPair);
}

TEST(BoundFunctions, PhiB2IsNotSymmetric) {
  int asym = 0;
  for (int i = 0; i < 200; ++i) {
    const auto [p, q] = near_pair(41, i, 1e-2, 1.0);
    if (p.energy() != q.energy() && phi_b2(p, q) != phi_b2(q, p)) ++asym;
  }
  EXPECT_GT(asym, 190);
}

// ---------------------------------------------------------------- names

TEST(Names, RoundTrip) {
  for (auto id : all_bound_ids()) EXPECT_EQ(parse_bound_id(name(id)), id);
  for (auto id : all_integral_ids()) EXPECT_EQ(parse_integral_id(name(id)), id);
  EXPECT_EQ(parse_density_id("juttner"), DensityId::Juttner);
  EXPECT_EQ(parse_density_id("truncated_gaussian"), DensityId::TruncatedGaussian);
  EXPECT_THROW(parse_bound_id("nope"), ConfigError);
  EXPECT_THROW(parse_integral_id("prop44"), ConfigError);
  EXPECT_THROW(parse_density_id("maxwell"), ConfigError);
}

// ---------------------------------------------------------------- surveys

TEST(BoundSurvey, EmptySurvey) {
  for (auto id : all_bound_ids()) {
    const auto r = bound_survey(id, 0, 1);
    EXPECT_EQ(r.max_ratio, 0.0);
    EXPECT_TRUE(r.argmax.empty());
    EXPECT_EQ(r.n_samples, 0u);
  }
}

TEST(BoundSurvey, FiniteAndStableUnderDoubling) {
  for (auto id : all_bound_ids()) {
    const auto a = bound_survey(id, 20000, 7);
    const auto b = bound_survey(id, 40000, 7);
    EXPECT_TRUE(std::isfinite(a.max_ratio)) << name(id);
    EXPECT_GT(a.max_ratio, 0.0) << name(id);
    EXPECT_GE(b.max_ratio, a.max_ratio) << name(id);
    EXPECT_LE(b.max_ratio, 2 * a.max_ratio) << name(id);
    EXPECT_EQ(a.bound_id, name(id));
    EXPECT_EQ(a.argmax.size(), (id == BoundId::Lambda || id == BoundId::PhiNorm ||
                                id == BoundId::BNorm)
                                   ? 2u
                                   : 4u);
  }
}

TEST(BoundSurvey, DeterministicInSeed) {
  const auto a = bound_survey(BoundId::SigmaDiffLipschitz, 5000, 3);
  const auto b = bound_survey(BoundId::SigmaDiffLipschitz, 5000, 3);
  EXPECT_EQ(a.max_ratio, b.max_ratio);
  EXPECT_EQ(a.argmax, b.argmax);
}

TEST(BoundSurvey, BNormBoundedAlongRayToOrigin) {
  // p = t e1, q = 0: the ratio |B| / phi_b1 stays bounded as t -> 0.
  double worst = 0.0;
  for (int k = 0; k <= 80; ++k) {
    const double t = std::pow(10.0, -0.1 * k);
    const Momentum p(t, 0, 0), q(0, 0, 0);
    worst = std::max(worst, norm(kernel::drift_b(p, q, 0.0)) / phi_b1(p, q));
  }
  EXPECT_TRUE(std::isfinite(worst));
  EXPECT_LT(worst, 10.0);
}

TEST(IntegralSurvey, FiniteForEveryDensity) {
  for (auto d : {DensityId::Juttner, DensityId::TruncatedGaussian})
    for (auto id : all_integral_ids()) {
      const auto r = integral_survey(id, d, 200, 11, {64, -1.0});
      EXPECT_TRUE(std::isfinite(r.max_ratio)) << name(id);
      EXPECT_GT(r.max_ratio, 0.0) << name(id);
    }
}

TEST(IntegralSurvey, Lem41IRoughlyConstantForSmallMomenta) {
  // sup_p of int |p-q|^-1 g(q) dq is attained near the origin and is finite;
  // the ratio to its value at the origin stays in (0, 1].
  const auto r = integral_survey(IntegralId::Lem41I, DensityId::Juttner, 2000, 5);
  EXPECT_TRUE(std::isfinite(r.max_ratio));
  EXPECT_LT(r.max_ratio, 10.0);
}

TEST(IntegralSurvey, Prop42BStableAcrossSampleSizes) {
  const auto small = integral_survey(IntegralId::Prop42B, DensityId::Juttner, 10000, 9, {64, -1.0});
  const auto large = integral_survey(IntegralId::Prop42B, DensityId::Juttner, 100000, 9, {64, -1.0});
  EXPECT_LE(large.max_ratio, 2 * small.max_ratio);
  EXPECT_GE(large.max_ratio, small.max_ratio);
}

TEST(IntegralSurvey, EmptySurvey) {
  const auto r = integral_survey(IntegralId::Prop43, DensityId::Juttner, 0, 1);
  EXPECT_EQ(r.max_ratio, 0.0);
  EXPECT_TRUE(r.argmax.empty());
}

// ---------------------------------------------------------------- densities

TEST(Densities, SphereAverageMatchesQuadrature) {
  for (auto id : {DensityId::Juttner, DensityId::TruncatedGaussian}) {
    const auto g = densities::RadialDensity::make(id);
    for (double a : {0.0, 0.3, 2.0, 7.0})
      for (double r : {1e-3, 0.5, 3.0, 9.0}) {
        // (1/2) int_{-1}^{1} g(|a e3 + r w|) dcos
        auto f = [&](double c) { return g.at_radius(std::sqrt(a * a + r * r + 2 * a * r * c)); };
        const double ref = 0.5 * GK::integrate(f, -1.0, 1.0, 20, 1e-13);
        ASSERT_NEAR(g.sphere_average(a, r), ref, 1e-9 * std::max(ref, 1e-300) + 1e-300)
            << name(id) << ' ' << a << ' ' << r;
      }
  }
}

TEST(Densities, Normalized) {
  for (auto id : {DensityId::Juttner, DensityId::TruncatedGaussian}) {
    const auto g = densities::RadialDensity::make(id);
    auto f = [&](double r) { return 4 * std::numbers::pi * r * r * g.at_radius(r); };
    const double hi = id == DensityId::Juttner ? 200.0 : 6.0;
    EXPECT_NEAR(GK::integrate(f, 0.0, hi, 20, 1e-13), 1.0, 1e-10);
    EXPECT_EQ(g.sup(), g.at_radius(0.0));
  }
}

TEST(Densities, RadialMomentMatchesQuadrature) {
  for (auto id : {DensityId::Juttner, DensityId::TruncatedGaussian}) {
    const auto g = densities::RadialDensity::make(id);
    for (double s : {1e-4, 0.5, 3.0, 20.0}) {
      auto f = [&](double u) { return u * g.at_radius(u); };
      const double ref = GK::integrate(f, 0.0, s, 20, 1e-13);
      ASSERT_NEAR(g.radial_moment(s), ref, 1e-10 * ref) << s;
    }
  }
}

// ---------------------------------------------------------------- CSV

TEST(BoundReportCsv, RowMatchesHeader) {
  const auto r = bound_survey(BoundId::BDiff, 100, 2);
  std::ostringstream os;
  write_csv_row(os, r);
  const std::string row = os.str();
  const auto fields = std::count(row.begin(), row.end(), ',') + 1;
  const std::string h = csv_header();
  EXPECT_EQ(fields, std::count(h.begin(), h.end(), ',') + 1);
  EXPECT_EQ(row.rfind("b_diff,100,", 0), 0u);
  EXPECT_EQ(row.back(), '\n');
}
