#include "qstrat/energy.hpp"

#include "qstrat/errors.hpp"
#include "qstrat/quadrature.hpp"

#include <cmath>

namespace qstrat {

namespace {

double grad_sq(const double* du, int mn) {
  double s = 0.0;
  for (int i = 0; i < mn; ++i) s += du[i] * du[i];
  return s;
}

// (y - x) . grad u, written into v (n numbers); returns |y - x|
double radial_derivative(const double* y, const Vec& x, const double* du, int m, int n, double* v) {
  double d2 = 0.0;
  for (int a = 0; a < n; ++a) v[a] = 0.0;
  for (int i = 0; i < m; ++i) {
    double d = y[i] - x[i];
    d2 += d * d;
    for (int a = 0; a < n; ++a) v[a] += d * du[i * n + a];
  }
  return std::sqrt(d2);
}

}  // namespace

double theta(const SampledMap& map, const Vec& x, double r) {
  const int mn = map.m() * map.n();
  double sum = 0.0;
  integrate_ball(map, x, r, {false, true, false},
                 [&](const BallSample& s) { sum += s.w * grad_sq(s.du, mn); });
  return std::pow(r, 2 - map.m()) * sum;
}

BallEnergy ball_energy(const SampledMap& map, const Vec& x, double r) {
  const int m = map.m(), n = map.n();
  if (m < 3) throw UnsupportedDimensionError("theta_hat needs m >= 3");
  BallEnergy e;
  bool zero_f = map.tension_is_zero();
  double grad = 0.0, cross = 0.0, ff = 0.0;
  double floor_dist = quadrature_spacing(map, r) / 100.0;
  std::vector<double> v(n);
  integrate_ball(map, x, r, {false, true, !zero_f}, [&](const BallSample& s) {
    grad += s.w * grad_sq(s.du, m * n);
    if (zero_f) return;
    double dist = radial_derivative(s.y, x, s.du, m, n, v.data());
    double vf = 0.0, f2 = 0.0;
    for (int a = 0; a < n; ++a) {
      vf += v[a] * s.f[a];
      f2 += s.f[a] * s.f[a];
    }
    cross += s.w * vf;
    ff += s.w * f2 * std::pow(std::max(dist, floor_dist), 4 - m);
  });
  double scale = std::pow(r, 2 - m);
  e.theta = scale * grad;
  e.theta_hat = e.theta - 2.0 / (m - 2) * scale * cross + ff / ((m - 2.0) * (m - 2.0));
  return e;
}

double theta_hat(const SampledMap& map, const Vec& x, double r) { return ball_energy(map, x, r).theta_hat; }

double radial_energy(const SampledMap& map, const Vec& x, double s, double r) {
  if (!(s < r)) throw ArgumentError("radial_energy needs s < r");
  if (!(s >= 0.0)) throw ArgumentError("radial_energy needs s >= 0");
  const int m = map.m(), n = map.n();
  double sum = 0.0;
  std::vector<double> v(n);
  double s2 = s * s;
  integrate_ball(map, x, r, {false, true, false}, [&](const BallSample& b) {
    double d2 = 0.0;
    for (int i = 0; i < m; ++i) d2 += (b.y[i] - x[i]) * (b.y[i] - x[i]);
    if (d2 < s2 || d2 == 0.0) return;
    double dist = radial_derivative(b.y, x, b.du, m, n, v.data());
    double vv = 0.0;
    for (int a = 0; a < n; ++a) vv += v[a] * v[a];
    sum += b.w * vv * std::pow(dist, -m);
  });
  return sum;
}

FConditionReport check_f_condition(const SampledMap& map, double F, double gamma,
                                   const std::vector<FBall>& balls) {
  if (!(gamma > 0.0)) throw ArgumentError("gamma must be positive");
  if (F < 0.0) throw ArgumentError("F must be nonnegative");
  const int m = map.m(), n = map.n();
  FConditionReport rep;
  for (const auto& b : balls) {
    double ff = 0.0;
    if (!map.tension_is_zero())
      integrate_ball(map, b.center, b.r, {false, false, true}, [&](const BallSample& s) {
        for (int a = 0; a < n; ++a) ff += s.w * s.f[a] * s.f[a];
      });
    double lhs = std::pow(b.r, 4 - m) * ff;
    double bound = F * std::pow(b.r, gamma);
    double ratio;
    if (lhs == 0.0)
      ratio = 0.0;
    else if (bound == 0.0)
      ratio = std::numeric_limits<double>::infinity();
    else
      ratio = lhs / bound;
    rep.lhs.push_back(lhs);
    rep.ratios.push_back(ratio);
    rep.max_ratio = std::max(rep.max_ratio, ratio);
    if (!(ratio <= 1.0)) rep.pass = false;
  }
  return rep;
}

HoelderBound hoelder_f_bound(const SampledMap& map, double p, double rho) {
  const int m = map.m(), n = map.n();
  if (!(p > 0.5 * m)) throw ArgumentError("Hoelder bound needs p > m/2");
  double acc = 0.0;
  if (!map.tension_is_zero())
    integrate_ball(map, Vec::Zero(m), rho, {false, false, true}, [&](const BallSample& s) {
      double f2 = 0.0;
      for (int a = 0; a < n; ++a) f2 += s.f[a] * s.f[a];
      acc += s.w * std::pow(f2, 0.5 * p);
    });
  HoelderBound hb;
  hb.lp_norm = std::pow(acc, 1.0 / p);
  double c = std::pow(unit_ball_volume(m), (p - 2.0) / p);
  hb.F = c * hb.lp_norm * hb.lp_norm;
  hb.gamma = (2.0 / p) * (2.0 * p - m);
  return hb;
}

double monotonicity_defect(const SampledMap& map, const Vec& x, const std::vector<double>& scales) {
  double worst = 0.0;
  for (std::size_t j = 0; j + 1 < scales.size(); ++j) {
    double r = scales[j], s = scales[j + 1];
    if (!(s < r)) throw ArgumentError("scales must be strictly descending");
    double W = radial_energy(map, x, s, r);
    double gap = theta_hat(map, x, r) - theta_hat(map, x, s);
    worst = std::max(worst, W - gap);
  }
  return worst;
}

EnergyProfile energy_profile(const SampledMap& map, const Vec& x, double top_scale, int levels,
                             double F, double gamma) {
  if (levels < 1) throw ArgumentError("profile needs at least one scale");
  EnergyProfile p;
  p.center = x;
  p.F = F;
  p.gamma = gamma;
  p.tau_q = quadrature_tolerance(map, energy_bound(map));
  for (int j = 0; j < levels; ++j) {
    double r = top_scale * std::ldexp(1.0, -j);
    BallEnergy e = ball_energy(map, x, r);
    p.scales.push_back(r);
    p.theta.push_back(e.theta);
    p.theta_hat.push_back(e.theta_hat);
    p.W.push_back(map.ball_valid(x, 8.0 * r) ? radial_energy(map, x, r, 8.0 * r)
                                              : std::numeric_limits<double>::quiet_NaN());
    if (j == 0) {
      p.defect.push_back(0.0);
    } else {
      double Wa = radial_energy(map, x, r, p.scales[j - 1]);
      p.defect.push_back(std::max(0.0, Wa - (p.theta_hat[j - 1] - e.theta_hat)));
    }
  }
  return p;
}

double stationary_residual(const SampledMap& map, const Vec& x, double s, double r) {
  double W = radial_energy(map, x, s, r);
  return std::fabs(theta(map, x, r) - theta(map, x, s) - 2.0 * W);
}

bool epsilon_regularity_flag(const SampledMap& map, const Vec& x, double r, double eps0) {
  return theta(map, x, r) <= eps0;
}

double energy_bound(const SampledMap& map) {
  return theta(map, Vec::Zero(map.m()), map.domain().valid_radius());
}

double quadrature_tolerance(const SampledMap& map, double Lambda, double factor) {
  const GridDomain& d = map.domain();
  return factor * std::max(1.0, Lambda) * (d.h / (d.R / 128.0));
}

}  // namespace qstrat
