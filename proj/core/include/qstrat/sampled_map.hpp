#pragma once

#include "qstrat/catalog.hpp"
#include "qstrat/geometry.hpp"

#include <cstdint>
#include <memory>
#include <vector>

namespace qstrat {

struct GridDomain {
  int m = 3;
  double R = 3.0;
  double h = 3.0 / 64.0;
  Vec origin;  // lattice offset; empty means zero

  // Throws ConfigError unless m >= 2, R > 0, 0 < h <= R/8.
  void validate() const;
  Vec offset() const { return origin.size() == m ? origin : Vec::Zero(m); }
  // Balls B_r(x) with |x| + r <= valid_radius() are integrable (one stencil margin).
  double valid_radius() const { return R - h; }
};

enum class Provenance { analytic, file, perturbed };
const char* to_string(Provenance p);

// Tuning of the ball quadrature. Closed-form maps are integrated on a ball-local lattice
// anchored at the ball center with ceil(r/h) cells per radius, clamped to
// [min_cells_per_radius, max_cells_per_radius] (0 = 32 for m <= 3, 16 otherwise).
struct QuadratureOptions {
  int min_cells_per_radius = 8;
  int max_cells_per_radius = 0;
  int symmetry_cells_per_radius = 6;
  // Cells within singular_layer cells of the singular set are refined into
  // subcell_samples^m midpoint samples (0 = 8 for m <= 3, 4 otherwise); farther cells
  // at t cells use ceil(subcells * singular_layer / t) per dimension.
  double singular_layer = 2.0;
  int subcell_samples = 0;
  int ray_samples = 6;
  int workers = 1;

  int max_cells(int m) const { return max_cells_per_radius > 0 ? max_cells_per_radius : (m <= 3 ? 32 : 16); }
  int subcells(int m) const { return subcell_samples > 0 ? subcell_samples : (m <= 3 ? 8 : 4); }
};

// Node-indexed storage over the bounding box of the ball lattice.
struct DenseField {
  enum Flag : std::uint8_t { present = 1, boundary = 2, fd_gradient = 4, has_tension = 8 };
  std::vector<long> lo, extent;  // per-dimension index range
  std::vector<double> u, du, f;  // n, m*n, n per node
  std::vector<std::uint8_t> flags;
  long size() const;
};

class SampledMap {
 public:
  SampledMap() = default;

  // Lazy map backed by a closed form; values are produced on demand.
  static SampledMap from_entry(const MapCatalogEntry& entry, const GridDomain& domain);
  // Dense map with values (and optionally residuals) at every lattice node of the ball.
  // Gradients come from centered finite differences; a missing residual is filled by
  // compute_tension.
  static SampledMap from_nodes(const GridDomain& domain, int n, const std::vector<Vec>& coords,
                               const std::vector<Vec>& values, const std::vector<Vec>* residuals,
                               Provenance provenance = Provenance::file);

  int m() const { return domain_.m; }
  int n() const { return n_; }
  const GridDomain& domain() const { return domain_; }
  Provenance provenance() const { return provenance_; }
  Exactness exactness() const { return exactness_; }
  bool analytic() const { return fn_ != nullptr; }
  bool tension_is_zero() const;
  bool gradient_is_analytic() const { return analytic(); }
  const std::string& name() const { return name_; }

  const QuadratureOptions& quadrature() const { return quad_; }
  void set_quadrature(const QuadratureOptions& q) { quad_ = q; }

  // Throws DomainError if B_r(x) leaves the valid region.
  void check_ball(const Vec& x, double r) const;
  bool ball_valid(const Vec& x, double r) const;

  // Closed-form evaluation at an arbitrary point (analytic maps only). Null outputs skipped.
  void eval(const double* y, double* u, double* du, double* f) const;
  // Value at an arbitrary point: closed form, or multilinear interpolation of node values
  // renormalized to the sphere. Points exactly on the singular set are shifted by h/100
  // along e_1.
  void value_at(const double* y, double* u) const;
  double singular_distance(const double* y) const;

  // Lattice helpers.
  Vec node_position(const std::vector<long>& idx) const;
  const DenseField& dense() const { return *dense_; }
  long dense_index(const std::vector<long>& idx) const;  // -1 if outside the box

  // Closed-form view of the same function restricted to the blown-up ball.
  const std::shared_ptr<const MapFunction>& function() const { return fn_; }
  const Vec& view_center() const { return view_center_; }
  double view_scale() const { return view_scale_; }

  // Copy the closed form onto the lattice (values, analytic gradients, tension).
  SampledMap materialize() const;

 private:
  friend struct MapAccess;

  GridDomain domain_;
  int n_ = 0;
  Provenance provenance_ = Provenance::analytic;
  Exactness exactness_ = Exactness::harmonic;
  std::string name_;
  QuadratureOptions quad_;
  std::shared_ptr<const MapFunction> fn_;
  Vec view_center_;
  double view_scale_ = 1.0;
  std::shared_ptr<const DenseField> dense_;
};

struct MapAccess {
  static SampledMap blow_up(const SampledMap& map, const Vec& x, double r, double th, bool aligned);
};

SampledMap sample_map(const MapCatalogEntry& entry, const GridDomain& domain);

// Second-order finite-difference tension on the lattice; nodes without a full stencil
// are flagged as boundary and carry zero.
struct TensionField {
  std::vector<Vec> positions;
  std::vector<Vec> f;
  std::vector<bool> interior;
};
TensionField compute_tension(const SampledMap& map);

// T(y) = u(x + r y) on a unit-ball lattice aligned with the source nodes (spacing h/r),
// tension r^2 f(x + r y). No interpolation is needed.
SampledMap blow_up(const SampledMap& map, const Vec& x, double r);
// Same with an explicit target spacing; dense maps are interpolated multilinearly.
SampledMap blow_up_resampled(const SampledMap& map, const Vec& x, double r, double target_h);

// Visit every lattice index of the ball B_r(x) in lexicographic order.
void for_each_lattice_node(const GridDomain& d, const Vec& x, double r,
                           const std::function<void(const std::vector<long>&, const Vec&)>& fn);

}  // namespace qstrat
