#pragma once

#include "qstrat/sampled_map.hpp"

#include <limits>
#include <vector>

namespace qstrat {

// theta(x, r) = r^{2-m} int_{B_r(x)} |grad u|^2
double theta(const SampledMap& map, const Vec& x, double r);

// theta_hat = theta - 2/(m-2) r^{2-m} int <(y-x).grad u, f> + 1/(m-2)^2 int |f|^2 |y-x|^{4-m}
double theta_hat(const SampledMap& map, const Vec& x, double r);

// int_{B_r(x) \ B_s(x)} |(y-x).grad u|^2 |y-x|^{-m}
double radial_energy(const SampledMap& map, const Vec& x, double s, double r);

// theta, theta_hat and the annulus integral on B_r in a single pass.
struct BallEnergy {
  double theta = 0.0;
  double theta_hat = 0.0;
};
BallEnergy ball_energy(const SampledMap& map, const Vec& x, double r);

struct FBall {
  Vec center;
  double r = 0.0;
};

struct FConditionReport {
  std::vector<double> ratios;  // +inf when the bound is 0 and f is not
  std::vector<double> lhs;     // r^{4-m} int |f|^2
  bool pass = true;
  double max_ratio = 0.0;
};

FConditionReport check_f_condition(const SampledMap& map, double F, double gamma,
                                   const std::vector<FBall>& balls);

// Hoelder bound: r^{4-m} int_{B_r}|f|^2 <= c(m,p) |f|_{L^p}^2 r^{(2/p)(2p-m)},
// c = omega_m^{(p-2)/p}. Returns c |f|^2_{L^p(B)} over the ball B_rho(0) and gamma.
struct HoelderBound {
  double F = 0.0;
  double gamma = 0.0;
  double lp_norm = 0.0;
};
HoelderBound hoelder_f_bound(const SampledMap& map, double p, double rho);

struct EnergyProfile {
  Vec center;
  std::vector<double> scales;  // descending
  std::vector<double> theta;
  std::vector<double> theta_hat;
  std::vector<double> W;       // W_{r_j} on B_{8r_j} \ B_{r_j}; NaN when B_{8r_j} is not valid
  std::vector<double> defect;  // defect of the pair (r_{j-1}, r_j); 0 for j = 0
  double F = 0.0;
  double gamma = 1.0;
  double tau_q = 0.0;
};

EnergyProfile energy_profile(const SampledMap& map, const Vec& x, double top_scale, int levels,
                             double F = 0.0, double gamma = 1.0);

// max over consecutive pairs of max(0, W(s, r) - (theta_hat(r) - theta_hat(s)))
double monotonicity_defect(const SampledMap& map, const Vec& x, const std::vector<double>& scales);

// |theta(r) - theta(s) - 2 int_{B_r \ B_s} |(y-x).grad u|^2 |y-x|^{-m}|; vanishes for
// stationary harmonic maps.
double stationary_residual(const SampledMap& map, const Vec& x, double s, double r);

bool epsilon_regularity_flag(const SampledMap& map, const Vec& x, double r, double eps0);

// Lambda = theta(0, R - h), the energy bound of the sampled ball.
double energy_bound(const SampledMap& map);
// tau_q = factor * max(1, Lambda) * (h / (R/128))
double quadrature_tolerance(const SampledMap& map, double Lambda, double factor = 0.05);

}  // namespace qstrat
