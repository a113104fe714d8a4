#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "psl/errors.hpp"
#include "psl/manifold.hpp"

namespace psl {
namespace {

const ManifoldDescriptor kNominal{0.6, 1.2, 3.13};

TEST(SigmaGeneral, ZeroAtItsInitialPoint) {
  EXPECT_DOUBLE_EQ(sigma_general({1.0, 0.7}, 1.0, 0.7, 1.2, 3.13), 0.0);
}

TEST(SigmaGeneral, ReducesToApexForm) {
  oracle::Rng rng(3);
  for (int i = 0; i < 1000; ++i) {
    const SagittalState s{rng.uniform(0.5, 2.0), rng.uniform(0.05, 1.5)};
    const double a = sigma_apex(s, kNominal);
    const double g = sigma_general(s, kNominal.x_foot, kNominal.xdot_apex, kNominal.x_foot,
                                   kNominal.omega);
    EXPECT_LE(std::abs(g - a), 1e-12 * std::max(std::abs(a), sigma_scale(kNominal)));
  }
}

TEST(SigmaGeneral, VanishesAlongTheFlow) {
  for (double t = -0.4; t <= 0.4; t += 0.05) {
    const auto p = oracle::flow(1.0, 0.7, 1.2, 3.13, t);
    EXPECT_NEAR(sigma_general({p.x, p.xd}, 1.0, 0.7, 1.2, 3.13), 0.0, 1e-9);
  }
}

TEST(SigmaApex, HandValues) {
  EXPECT_DOUBLE_EQ(sigma_apex({1.2, 0.6}, kNominal), 0.0);
  // (0.36 / 3.13^2) * (0.49 - 0.36)
  EXPECT_NEAR(sigma_apex({1.2, 0.7}, kNominal), 4.7770213e-3, 1e-10);
  EXPECT_NEAR(sigma_apex({1.1, 0.7}, kNominal),
              oracle::sigma(1.1, 0.7, 0.6, 1.2, 3.13), 1e-15);
}

TEST(SigmaApex, SignFollowsSpeed) {
  EXPECT_GT(sigma_apex({1.0, 0.9}, kNominal), 0.0);
  EXPECT_LT(sigma_apex({1.0, 0.5}, kNominal), 0.0);
}

TEST(SigmaApex, ScalesWithApexSpeedSquared) {
  // Keep the bracket fixed while scaling the prefactor.
  const SagittalState s{1.05, 0.8};
  const double lambda = 1.7;
  const ManifoldDescriptor scaled{kNominal.xdot_apex * lambda, kNominal.x_foot, kNominal.omega};
  const double bracket = s.xdot * s.xdot - 0.36 - 3.13 * 3.13 * 0.15 * 0.15;
  const double expected = lambda * lambda * 0.36 / (3.13 * 3.13) * bracket;
  const double v2 = scaled.xdot_apex * scaled.xdot_apex;
  const SagittalState shifted{s.x, std::sqrt(s.xdot * s.xdot - 0.36 + v2)};
  EXPECT_NEAR(sigma_apex(shifted, scaled), expected, 1e-14);
}

TEST(Zeta, InitialValueAndFootZero) {
  EXPECT_DOUBLE_EQ(zeta({1.0, 0.7}, 1.0, 0.7, 1.2, 3.13, 2.5), 2.5);
  EXPECT_DOUBLE_EQ(zeta({1.2, 0.8}, 1.0, 0.7, 1.2, 3.13), 0.0);
}

TEST(Zeta, DomainErrors) {
  EXPECT_THROW(zeta({1.1, -0.2}, 1.0, 0.7, 1.2, 3.13), DomainError);
  EXPECT_THROW(zeta({1.1, 0.2}, 1.0, 0.0, 1.2, 3.13), DomainError);
  EXPECT_THROW(zeta({1.1, 0.2}, 1.2, 0.7, 1.2, 3.13), DomainError);
}

double normalized_inner(const SagittalState& s) {
  const double h = 1e-6;
  const auto sig = [](double x, double xd) { return sigma_apex({x, xd}, kNominal); };
  const auto zet = [](double x, double xd) {
    return zeta({x, xd}, 1.0, 0.7, kNominal.x_foot, kNominal.omega);
  };
  const double sx = (sig(s.x + h, s.xdot) - sig(s.x - h, s.xdot)) / (2 * h);
  const double sv = (sig(s.x, s.xdot + h) - sig(s.x, s.xdot - h)) / (2 * h);
  const double zx = (zet(s.x + h, s.xdot) - zet(s.x - h, s.xdot)) / (2 * h);
  const double zv = (zet(s.x, s.xdot + h) - zet(s.x, s.xdot - h)) / (2 * h);
  return std::abs(sx * zx + sv * zv) / (std::hypot(sx, sv) * std::hypot(zx, zv));
}

TEST(Zeta, OrthogonalToSigmaAtTheDisturbedState) {
  EXPECT_LE(normalized_inner({1.1, 0.7}), 1e-6);
}

TEST(Zeta, OrthogonalToSigmaEverywhere) {
  oracle::Rng rng(5);
  for (int i = 0; i < 300; ++i) {
    double x = rng.uniform(0.6, 1.8);
    if (std::abs(x - kNominal.x_foot) <= 0.05) x += 0.2;
    EXPECT_LE(normalized_inner({x, rng.uniform(0.05, 1.5)}), 1e-6);
  }
}

TEST(SensitivityNorm, ClosedFormCases) {
  const std::vector<ProgressionSample> constant{{0.0, -0.3}, {0.5, -0.3}, {1.0, -0.3}};
  EXPECT_NEAR(sensitivity_norm(constant, 0.0, 1.0), 0.3, 1e-15);
  const std::vector<ProgressionSample> zero{{0.0, 0.0}, {2.0, 0.0}};
  EXPECT_DOUBLE_EQ(sensitivity_norm(zero, 0.0, 2.0), 0.0);
  std::vector<ProgressionSample> ramp;
  const int n = 4000;
  for (int i = 0; i <= n; ++i) ramp.push_back({i / double(n), 0.5 * i / double(n)});
  EXPECT_NEAR(sensitivity_norm(ramp, 0.0, 1.0), 0.5 / std::sqrt(3.0), 1e-7);
}

TEST(SensitivityNorm, InsufficientData) {
  const std::vector<ProgressionSample> one{{0.0, 1.0}};
  EXPECT_THROW(sensitivity_norm(one, 0.0, 1.0), InsufficientData);
  EXPECT_THROW(sensitivity_norm({}, 0.0, 1.0), InsufficientData);
}

TEST(Bundle, BoundaryIsInclusive) {
  const BundleSpec b{1e-3};
  EXPECT_TRUE(bundle_contains(0.0, b));
  EXPECT_TRUE(bundle_contains(1e-3, b));
  EXPECT_TRUE(bundle_contains(-1e-3, b));
  EXPECT_FALSE(bundle_contains(1.1e-3, b));
}

}  // namespace
}  // namespace psl
