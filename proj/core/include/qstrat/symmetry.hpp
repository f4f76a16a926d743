#pragma once

#include "qstrat/sampled_map.hpp"

#include <functional>
#include <memory>
#include <optional>
#include <vector>

namespace qstrat {

// A j-symmetric map about a center: homogeneous and invariant along span(basis).
struct SymmetricApproximant {
  Vec center;
  double r = 0.0;
  int order = 0;
  int n = 0;
  Mat basis;  // m x order
  std::function<void(const double* y, double* h)> evaluate;
  Vec value(const Vec& y) const;
};

struct SymmetryVerdict {
  Vec x;
  double r = 0.0;
  int k = 0;
  double eps_hat = 0.0;
  Mat basis;  // m x k, the k lowest-energy directions
  int approximant_order = 0;  // j >= k attaining eps_hat
  std::vector<double> raw;    // raw[j - k]: distance to the order-j approximant
  std::shared_ptr<const SymmetricApproximant> approximant;
};

struct HomogeneousFit {
  std::shared_ptr<const SymmetricApproximant> approximant;
  double eps0 = 0.0;
};

HomogeneousFit best_homogeneous(const SampledMap& map, const Vec& x, double r);

// E_ij = int_{B_r(x)} <d_i u, d_j u>
Mat invariant_energy_matrix(const SampledMap& map, const Vec& x, double r);

SymmetryVerdict ksym_distance(const SampledMap& map, const Vec& x, double r, int k);

// Smallest distance found to a j-symmetric approximant with j >= k, stopping as soon as
// one is <= eps (cheap orders first). Returns the value found, or nullopt if none.
std::optional<double> find_symmetry(const SampledMap& map, const Vec& x, double r, int k, double eps);

struct StrataMembership {
  Vec x;
  int k = 0;
  double eps = 0.0;
  double r = 0.0;
  bool member = true;
  double witness_scale = 0.0;  // 0 when member
  double witness_eps = 0.0;
};

StrataMembership strata_membership(const SampledMap& map, const Vec& x, int k, double eps, double r);
std::vector<StrataMembership> classify_strata(const SampledMap& map, const std::vector<Vec>& points,
                                              int k, double eps, double r);

struct PinchedSet {
  Vec center;
  double radius = 0.0;
  double E = 0.0;
  double delta = 0.0;
  double scale = 0.0;  // rho * radius * pinch_factor
  std::vector<Vec> points;
  std::vector<std::size_t> indices;  // into the candidate list
  std::vector<double> values;        // theta_hat at the pinch scale
};

// Candidates y with theta_hat(y, rho r pinch_factor) >= E - delta.
PinchedSet pinched_set(const SampledMap& map, const Vec& center, double radius, double E, double delta,
                       double rho, const std::vector<Vec>& candidates, double pinch_factor = 0.1);

struct EffectiveSpan {
  int k = 0;
  std::vector<Vec> certificate;
  std::vector<std::size_t> certificate_indices;
  Vec base;    // affine base point of L (the first point)
  Mat basis;   // m x k orthonormal directions of L
  double max_residual = 0.0;  // max distance of the inputs to L
};

EffectiveSpan effective_span(const std::vector<Vec>& points, double rho);
// Re-checks y_i notin B_{2 rho}(y_0 + span(y_1 - y_0, ..., y_{i-1} - y_0)).
bool verify_span_certificate(const std::vector<Vec>& certificate, double rho);

}  // namespace qstrat
