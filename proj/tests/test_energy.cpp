#include "helpers.hpp"

#include "qstrat/energy.hpp"
#include "qstrat/errors.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace qstrat;
using namespace qstrat::testing;

namespace {

const double pi = std::acos(-1.0);

}  // namespace

TEST(Theta, RadialMapInThreeDimensions) {
  SampledMap map = catalog("radial", 3);
  for (double r : {1.0, 0.5, 0.25}) EXPECT_NEAR(theta(map, Vec::Zero(3), r) / (8.0 * pi), 1.0, 0.015) << r;
}

TEST(Theta, RadialMapInFourDimensions) {
  SampledMap map = catalog("radial", 4, 3.0, 0.125);
  EXPECT_NEAR(theta(map, Vec::Zero(4), 1.0) / (3.0 * pi * pi), 1.0, 0.01);
}

TEST(Theta, ConstantMapIsZero) {
  SampledMap map = catalog("constant", 3);
  EXPECT_EQ(theta(map, unit(3, 1, 0.3), 0.7), 0.0);
  EXPECT_EQ(radial_energy(map, Vec::Zero(3), 0.1, 1.0), 0.0);
}

TEST(Theta, HomogeneousMapIsScaleInvariant) {
  SampledMap map = catalog("radial", 3);
  double lo = 1e300, hi = 0.0;
  for (int j = 0; j < 6; ++j) {
    double t = theta(map, Vec::Zero(3), std::ldexp(1.0, -j));
    lo = std::min(lo, t);
    hi = std::max(hi, t);
  }
  EXPECT_LT((hi - lo) / lo, 0.02);
}

TEST(Theta, ContainedBallComparison) {
  // B_s(y) inside B_r(x) gives theta(y, s) <= (r/s)^{m-2} theta(x, r)
  SampledMap map = catalog("perturbed", 3);
  std::mt19937_64 g(7);
  for (int t = 0; t < 10; ++t) {
    Vec x = random_in_ball(g, 3, 0.5);
    double r = 0.5;
    double s = 0.1 + 0.3 * (t / 10.0);
    Vec y = x + random_in_ball(g, 3, r - s);
    EXPECT_LE(theta(map, y, s), (r / s) * theta(map, x, r) * 1.02);
  }
}

TEST(Theta, RejectsBallOutsideValidRegion) {
  SampledMap map = catalog("radial", 3);
  EXPECT_THROW(theta(map, unit(3, 0, 2.0), 1.0), DomainError);
  EXPECT_THROW(theta(map, Vec::Zero(3), 0.0), ArgumentError);
}

TEST(ThetaHat, EqualsThetaForHarmonicMaps) {
  SampledMap map = catalog("radial", 3);
  for (Vec x : {Vec(Vec::Zero(3)), vec({0.2, 0.1, 0.0})}) EXPECT_EQ(theta_hat(map, x, 0.5), theta(map, x, 0.5));
}

TEST(ThetaHat, NeedsThreeDimensions) {
  SampledMap map = catalog("constant", 2, 1.0, 0.1);
  EXPECT_THROW(theta_hat(map, Vec::Zero(2), 0.5), UnsupportedDimensionError);
}

TEST(ThetaHat, CorrectionIsSmallForMildPerturbation) {
  SampledMap map = catalog("perturbed", 3);
  BallEnergy e = ball_energy(map, Vec::Zero(3), 0.5);
  EXPECT_NE(e.theta, e.theta_hat);
  EXPECT_LT(std::fabs(e.theta - e.theta_hat), 0.1 * e.theta);
  EXPECT_NEAR(e.theta, theta(map, Vec::Zero(3), 0.5), 1e-9 * e.theta);
}

TEST(RadialEnergy, VanishesForConeAtItsVertex) {
  SampledMap map = catalog("radial", 3);
  EXPECT_NEAR(radial_energy(map, Vec::Zero(3), 0.125, 1.0), 0.0, 1e-12);
  EXPECT_GT(radial_energy(map, vec({0.3, 0.0, 0.0}), 0.125, 1.0), 0.1);
}

TEST(Monotonicity, DefectWithinQuadratureTolerance) {
  std::vector<double> scales{1.0, 0.5, 0.25, 0.125};
  for (const char* name : {"radial", "perturbed"}) {
    SampledMap map = catalog(name, 3);
    double tau = quadrature_tolerance(map, energy_bound(map));
    std::mt19937_64 g(11);
    for (int t = 0; t < 3; ++t) {
      Vec x = random_in_ball(g, 3, 0.5);
      EXPECT_LE(monotonicity_defect(map, x, scales), tau) << name;
      for (std::size_t j = 0; j + 1 < scales.size(); ++j)
        EXPECT_GE(theta_hat(map, x, scales[j]) + tau, theta_hat(map, x, scales[j + 1])) << name;
    }
  }
}

TEST(Monotonicity, StationaryIdentityHoldsForRadialMap) {
  SampledMap map = catalog("radial", 3);
  double tau = quadrature_tolerance(map, energy_bound(map));
  EXPECT_LT(stationary_residual(map, vec({0.2, -0.1, 0.3}), 0.25, 1.0), tau);
  EXPECT_THROW(monotonicity_defect(map, Vec::Zero(3), {0.5, 1.0}), ArgumentError);
}

TEST(EnergyProfile, ScalesHalveAndDefectsAreRecorded) {
  SampledMap map = catalog("radial", 3);
  EnergyProfile p = energy_profile(map, Vec::Zero(3), 0.25, 3);
  ASSERT_EQ(p.scales.size(), 3u);
  EXPECT_DOUBLE_EQ(p.scales[2], 0.0625);
  EXPECT_EQ(p.defect[0], 0.0);
  EXPECT_GT(p.tau_q, 0.0);
  for (double t : p.theta) EXPECT_NEAR(t / (8.0 * pi), 1.0, 0.02);
}

TEST(FCondition, ZeroBoundPassesOnlyForHarmonicMaps) {
  std::vector<FBall> balls{{Vec::Zero(3), 0.5}, {vec({0.2, 0.0, 0.0}), 0.25}};
  FConditionReport a = check_f_condition(catalog("radial", 3), 0.0, 1.0, balls);
  EXPECT_TRUE(a.pass);
  EXPECT_EQ(a.max_ratio, 0.0);
  FConditionReport b = check_f_condition(catalog("perturbed", 3), 0.0, 1.0, balls);
  EXPECT_FALSE(b.pass);
  EXPECT_TRUE(std::isinf(b.ratios[0]));
  EXPECT_THROW(check_f_condition(catalog("radial", 3), 1.0, 0.0, balls), ArgumentError);
}

TEST(FCondition, HoelderBoundIsAdmissible) {
  SampledMap map = catalog("perturbed", 3);
  HoelderBound hb = hoelder_f_bound(map, 2.5, 1.0);
  EXPECT_NEAR(hb.gamma, 2.0 / 2.5 * (5.0 - 3.0), 1e-15);
  std::vector<FBall> balls{{Vec::Zero(3), 0.5}, {vec({0.3, 0.2, 0.0}), 0.25}, {vec({0.0, 0.5, 0.0}), 0.125}};
  FConditionReport rep = check_f_condition(map, hb.F * 1.02, hb.gamma, balls);
  EXPECT_TRUE(rep.pass) << rep.max_ratio;
  EXPECT_GT(rep.max_ratio, 0.0);
  EXPECT_THROW(hoelder_f_bound(map, 1.5, 1.0), ArgumentError);
}

TEST(EpsilonRegularity, FlagsSmoothAndSingularBalls) {
  SampledMap radial = catalog("radial", 3);
  EXPECT_TRUE(epsilon_regularity_flag(catalog("constant", 3), Vec::Zero(3), 1.0, 0.01));
  EXPECT_FALSE(epsilon_regularity_flag(radial, Vec::Zero(3), 0.25, 0.1));
  EXPECT_TRUE(epsilon_regularity_flag(radial, vec({0.5, 0.0, 0.0}), 0.05, 0.1));
}

TEST(RadialEnergy, OffCenterAnnulusBoundedByPinching) {
  SampledMap map = catalog("radial", 3);
  Vec x = unit(3, 0);
  double W = radial_energy(map, x, 0.1, 0.2);
  double tau = quadrature_tolerance(map, energy_bound(map));
  EXPECT_GT(W, 0.0);
  EXPECT_LE(W, theta_hat(map, x, 0.2) - theta_hat(map, x, 0.1) + tau);
}

TEST(Monotonicity, PerturbedThetaHatOrderedOverDyadicScales) {
  SampledMap map = catalog("perturbed", 3);
  double tau = quadrature_tolerance(map, energy_bound(map));
  double prev = -1.0;
  for (int j = 5; j >= 0; --j) {
    double t = theta_hat(map, Vec::Zero(3), std::ldexp(1.0, -j));
    EXPECT_GE(t + tau, prev);
    prev = t;
  }
  EXPECT_LE(monotonicity_defect(map, vec({0.5, 0.0, 0.0}), {1.0, 0.5, 0.25}), tau);
}

TEST(EpsilonRegularity, UnitThreshold) {
  SampledMap radial = catalog("radial", 3);
  EXPECT_FALSE(epsilon_regularity_flag(radial, Vec::Zero(3), 0.5, 1.0));
  EXPECT_TRUE(epsilon_regularity_flag(radial, unit(3, 0), 0.05, 1.0));
}
