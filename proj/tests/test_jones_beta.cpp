#include "helpers.hpp"

#include "qstrat/errors.hpp"
#include "qstrat/jones_beta.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>

using namespace qstrat;
using namespace qstrat::testing;

namespace {

DiscreteMeasure random_measure(std::mt19937_64& g, int m, int atoms) {
  std::uniform_real_distribution<double> W(0.1, 2.0);
  DiscreteMeasure mu(m);
  for (int i = 0; i < atoms; ++i) mu.add(random_in_ball(g, m, 1.0), W(g));
  return mu;
}

}  // namespace

TEST(Measure, RejectsBadAtoms) {
  DiscreteMeasure mu(2);
  EXPECT_THROW(mu.add(vec({1, 2, 3}), 1.0), ArgumentError);
  EXPECT_THROW(mu.add(vec({1, 2}), -1.0), ArgumentError);
  mu.add(vec({0, 0}), 0.5);
  mu.add(vec({3, 0}), 1.5);
  EXPECT_DOUBLE_EQ(mu.total_mass(), 2.0);
  EXPECT_EQ(mu.restrict_to(vec({0, 0}), 1.0).size(), 1u);
  EXPECT_EQ(mu.restrict_to(vec({0, 0}), 3.0).size(), 2u);
}

TEST(Moments, TwoAtoms) {
  DiscreteMeasure mu(2);
  mu.add(vec({0, 0}), 1.0);
  mu.add(vec({1, 0}), 1.0);
  MomentAnalysis ma = moment_analysis(mu);
  EXPECT_NEAR((ma.center_of_mass - vec({0.5, 0})).norm(), 0.0, 1e-15);
  EXPECT_NEAR(ma.eigenvalues[0], 0.5, 1e-15);
  EXPECT_NEAR(ma.eigenvalues[1], 0.0, 1e-15);
  EXPECT_NEAR(std::fabs(ma.eigenvectors(0, 0)), 1.0, 1e-15);
  EXPECT_THROW(moment_analysis(DiscreteMeasure(2)), EmptyMeasureError);
}

TEST(Moments, TraceEqualsSecondMoment) {
  std::mt19937_64 g(1);
  for (int t = 0; t < 20; ++t) {
    DiscreteMeasure mu = random_measure(g, 3, 12);
    MomentAnalysis ma = moment_analysis(mu);
    double s = 0.0;
    for (const auto& a : mu.atoms()) s += a.w * (a.x - ma.center_of_mass).squaredNorm();
    EXPECT_NEAR(ma.Q.trace(), s, 1e-12 * s);
    EXPECT_NEAR(ma.eigenvalues.sum(), s, 1e-12 * s);
    for (int i = 0; i + 1 < 3; ++i) EXPECT_GE(ma.eigenvalues[i], ma.eigenvalues[i + 1]);
    EXPECT_LT((ma.eigenvectors.transpose() * ma.eigenvectors - Mat::Identity(3, 3)).norm(), 1e-12);
  }
}

TEST(Beta2, TwoAtomsInUnitBall) {
  DiscreteMeasure mu(2);
  mu.add(vec({-0.5, 0}), 0.5);
  mu.add(vec({0.5, 0}), 0.5);
  // transverse moment about a point: 0.5 * 0.25 * 2
  EXPECT_NEAR(beta2(mu, vec({0, 0}), 1.0, 0).beta2, 0.25, 1e-15);
  EXPECT_NEAR(beta2(mu, vec({0, 0}), 1.0, 1).beta2, 0.0, 1e-15);
  EXPECT_NEAR(beta2(mu, vec({0, 0}), 0.5, 0).beta2, 0.25 / 0.25, 1e-14);
}

TEST(Beta2, CollinearAtomsAreFlat) {
  DiscreteMeasure mu(3);
  for (int i = -5; i <= 5; ++i) mu.add(vec({0.1 * i, 0.2 * i, -0.05 * i}), 1.0 + 0.1 * i * i);
  BetaResult b = beta2(mu, Vec::Zero(3), 1.0, 1);
  EXPECT_NEAR(b.beta2, 0.0, 1e-14);
  EXPECT_NEAR(std::fabs(b.plane_basis.col(0).dot(vec({0.1, 0.2, -0.05}).normalized())), 1.0, 1e-12);
}

TEST(Beta2, OffCenterAtomsAreIgnored) {
  DiscreteMeasure mu(2);
  mu.add(vec({0, 0}), 1.0);
  mu.add(vec({0.1, 0}), 1.0);
  mu.add(vec({5, 5}), 100.0);
  EXPECT_NEAR(beta2(mu, vec({0, 0}), 1.0, 0).beta2, 2.0 * 0.05 * 0.05, 1e-15);
  BetaResult e = beta2(mu, vec({-3, 0}), 1.0, 1);
  EXPECT_TRUE(e.empty);
  EXPECT_EQ(e.beta2, 0.0);
  EXPECT_THROW(beta2(mu, vec({0, 0}), 1.0, 2), ArgumentError);
  EXPECT_THROW(beta2(mu, vec({0, 0}), 0.0, 0), ArgumentError);
}

TEST(Beta2, MatchesBruteForceOracle) {
  std::mt19937_64 g(2024);
  for (int t = 0; t < 100; ++t) {
    int m = 2 + t % 3;
    int k = t % m;
    DiscreteMeasure mu = random_measure(g, m, 4 + t % 9);
    double a = beta2(mu, Vec::Zero(m), 1.0, k).beta2;
    double b = beta2_bruteforce(mu, Vec::Zero(m), 1.0, k, 20, 1000 + t);
    EXPECT_NEAR(a, b, 1e-4 * std::max(a, 1e-8)) << "m=" << m << " k=" << k;
  }
}

TEST(Beta2, RigidMotionInvariance) {
  std::mt19937_64 g(9);
  Eigen::Matrix3d Q = Eigen::AngleAxisd(1.1, Eigen::Vector3d(0.3, -1, 2).normalized()).toRotationMatrix();
  Vec shift = vec({0.4, -2.0, 1.0});
  for (int t = 0; t < 10; ++t) {
    DiscreteMeasure mu = random_measure(g, 3, 15), nu(3);
    for (const auto& a : mu.atoms()) nu.add(Q * a.x + shift, a.w);
    Vec x = random_in_ball(g, 3, 0.3);
    for (int k = 0; k < 3; ++k) {
      double a = beta2(mu, x, 0.8, k).beta2;
      double b = beta2(nu, Q * x + shift, 0.8, k).beta2;
      EXPECT_NEAR(a, b, 1e-12 * std::max(1.0, a));
    }
  }
}

TEST(Beta2, ScalingLaw) {
  // dilating atoms, center and scale by lambda multiplies beta2 by lambda^{-k}
  std::mt19937_64 g(4);
  DiscreteMeasure mu = random_measure(g, 3, 20);
  for (double lambda : {0.25, 3.0}) {
    DiscreteMeasure nu(3);
    for (const auto& a : mu.atoms()) nu.add(lambda * a.x, a.w);
    for (int k = 0; k < 3; ++k) {
      double a = beta2(mu, Vec::Zero(3), 1.0, k).beta2;
      double b = beta2(nu, Vec::Zero(3), lambda, k).beta2;
      EXPECT_NEAR(b, std::pow(lambda, -k) * a, 1e-12 * std::max(1.0, b));
    }
  }
}

TEST(Beta2, MonotoneInMeasure) {
  std::mt19937_64 g(13);
  for (int t = 0; t < 20; ++t) {
    DiscreteMeasure mu = random_measure(g, 3, 10);
    DiscreteMeasure nu = mu;
    DiscreteMeasure extra = random_measure(g, 3, 3);
    for (const auto& a : extra.atoms()) nu.add(a.x, a.w);
    for (int k = 0; k < 3; ++k)
      EXPECT_LE(beta2(mu, Vec::Zero(3), 1.0, k).beta2, beta2(nu, Vec::Zero(3), 1.0, k).beta2 + 1e-14);
  }
}

TEST(Dini, LineIsZeroAndCircleConverges) {
  const double pi = std::acos(-1.0);
  DiscreteMeasure line(2), circle(2);
  const int N = 512;
  for (int i = 0; i < N; ++i) {
    line.add(vec({-1.0 + 2.0 * i / N, 0.0}), 2.0 / N);
    double t = 2.0 * pi * i / N;
    circle.add(vec({std::cos(t), std::sin(t)}), 2.0 * pi / N);
  }
  EXPECT_NEAR(dini_integral(line, vec({0, 0}), 0.5, 1, 6).value, 0.0, 1e-20);
  // beta2 of a curve decays like s^2, so deeper sums settle geometrically
  double d4 = dini_integral(circle, vec({1, 0}), 0.5, 1, 4).value;
  double d5 = dini_integral(circle, vec({1, 0}), 0.5, 1, 5).value;
  double d6 = dini_integral(circle, vec({1, 0}), 0.5, 1, 6).value;
  EXPECT_GT(d4, 0.0);
  EXPECT_LT(d6 - d5, 0.5 * (d5 - d4));
  EXPECT_THROW(dini_integral(circle, vec({1, 0}), 0.5, 1, 2), ArgumentError);
}

TEST(Dini, AdditiveOverScales) {
  DiscreteMeasure mu(2);
  std::mt19937_64 g(21);
  for (int i = 0; i < 30; ++i) mu.add(random_in_ball(g, 2, 1.0), 1.0);
  double a = dini_integral(mu, vec({0, 0}), 1.0, 1, 3).value;
  double b = dini_integral(mu, vec({0, 0}), 1.0, 1, 4).value;
  double extra = 0.0;
  for (const auto& at : mu.atoms()) extra += at.w * beta2(mu, at.x, 1.0 / 16.0, 1).beta2 * std::log(2.0);
  EXPECT_NEAR(b - a, extra, 1e-12 * b);
}

TEST(WBound, HarmonicConeControlsFlatness) {
  SampledMap map = catalog("radial", 3);
  DiscreteMeasure mu(3);
  mu.add(Vec::Zero(3), 1.0);
  mu.add(vec({0.05, 0.0, 0.0}), 1.0);
  mu.add(vec({0.0, 0.05, 0.0}), 1.0);
  mu.add(vec({0.0, 0.0, 0.05}), 1.0);
  WBoundResult ok = w_bound_check(map, mu, Vec::Zero(3), 0.1, 0, 10.0);
  EXPECT_GT(ok.lhs, 0.0);
  EXPECT_GT(ok.integral, 0.0);
  EXPECT_TRUE(ok.pass);
  EXPECT_FALSE(w_bound_check(map, mu, Vec::Zero(3), 0.1, 0, 1e-6 * ok.lhs / ok.rhs * 10.0).pass);
  WBoundResult flat = w_bound_check(catalog("constant", 3), mu, Vec::Zero(3), 0.1, 0, 1.0);
  EXPECT_EQ(flat.integral, 0.0);
  EXPECT_FALSE(flat.pass);
  EXPECT_THROW(w_bound_check(map, mu, Vec::Zero(3), 0.1, 0, 0.0), ArgumentError);
}

TEST(Beta2, OffCenterInequality) {
  // B_r(x) inside B_2r(y) gives beta2(x, r) <= 2^{k+2} beta2(y, 2r)
  std::mt19937_64 g(31);
  for (int t = 0; t < 100; ++t) {
    DiscreteMeasure mu = random_measure(g, 3, 20);
    int k = t % 3;
    Vec y = random_in_ball(g, 3, 0.5);
    double r = 0.2 + 0.3 * (t % 7) / 7.0;
    Vec x = y + random_in_ball(g, 3, r);
    double a = beta2(mu, x, r, k).beta2;
    double b = beta2(mu, y, 2.0 * r, k).beta2;
    EXPECT_LE(a, std::ldexp(1.0, k + 2) * b * (1.0 + 1e-12) + 1e-15);
  }
}

TEST(Beta2, SmallMeasuresMatchOracleTightly) {
  std::mt19937_64 g(77);
  for (int t = 0; t < 30; ++t) {
    DiscreteMeasure mu = random_measure(g, 3, 1 + t % 3);
    int k = t % 3;
    double a = beta2(mu, Vec::Zero(3), 1.0, k).beta2;
    double b = beta2_bruteforce(mu, Vec::Zero(3), 1.0, k, 20, t);
    EXPECT_NEAR(a, b, 1e-6 * std::max(a, b) + 1e-14);
  }
}

TEST(Beta2, CircleLooksFlatterAtSmallScales) {
  const double pi = std::acos(-1.0);
  DiscreteMeasure mu(3);
  for (int i = 0; i < 64; ++i) {
    double t = 2.0 * pi * i / 64.0;
    mu.add(vec({std::cos(t), std::sin(t), 0.0}), 2.0 * pi / 64.0);
  }
  double prev = std::numeric_limits<double>::infinity();
  for (double r : {1.0, 0.5, 0.25}) {
    double b = beta2(mu, vec({1.0, 0.0, 0.0}), r, 1).beta2;
    EXPECT_GT(b, 0.0);
    EXPECT_LT(b, prev);
    prev = b;
  }
}

TEST(WBound, FittedConstantHoldsOnFreshDraws) {
  SampledMap map = catalog("radial", 3);
  auto draw = [](std::mt19937_64& g) {
    DiscreteMeasure mu(3);
    for (int i = 0; i < 20; ++i) mu.add(random_in_ball(g, 3, 0.1), 1.0);
    return mu;
  };
  std::mt19937_64 g(99);
  DiscreteMeasure fit = draw(g);
  WBoundResult f = w_bound_check(map, fit, Vec::Zero(3), 0.25, 0, 1.0);
  ASSERT_GT(f.rhs, 0.0);
  double C1 = 4.0 * f.lhs / f.rhs;
  for (int t = 0; t < 10; ++t) {
    WBoundResult w = w_bound_check(map, draw(g), Vec::Zero(3), 0.25, 0, C1);
    EXPECT_TRUE(w.pass) << w.lhs << " > " << w.rhs;
  }
}
