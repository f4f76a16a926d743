#pragma once

#include "qstrat/sampled_map.hpp"

#include <functional>

namespace qstrat {

struct SampleNeeds {
  bool u = false;
  bool du = false;
  bool f = false;
};

// One midpoint-rule sample: position y, weight w (cell volume), and the requested fields.
struct BallSample {
  const double* y;
  const double* u;
  const double* du;  // du[i*n + a]
  const double* f;
  double w;
};

// Midpoint quadrature over B_r(x). On the map lattice (dense maps) a cell belongs to the
// ball when its center does. Closed-form maps use a ball-local lattice; cells cut by the
// sphere are weighted by their volume fraction against the tangent plane, and cells near
// the singular set are refined into subcells.
// Samples are visited in a fixed lexicographic order. Throws DomainError for invalid balls.
void integrate_ball(const SampledMap& map, const Vec& x, double r, SampleNeeds needs,
                    const std::function<void(const BallSample&)>& fn);

// Plain node visit (no subcell refinement), on the lattice used for symmetry quadrature:
// the map lattice for dense maps, or a ball-local lattice of spacing r/cells for closed forms.
// Values at singular nodes follow the h/100 offset rule.
struct NodeSample {
  const double* y;
  const double* u;
  double w;
};
void visit_ball_nodes(const SampledMap& map, const Vec& x, double r, int cells_per_radius,
                      const std::function<void(const NodeSample&)>& fn);

// Effective spacing integrate_ball would use for B_r(x).
double quadrature_spacing(const SampledMap& map, double r);

}  // namespace qstrat
