#pragma once

#include "qstrat/geometry.hpp"
#include "qstrat/sampled_map.hpp"

#include <cstdint>
#include <vector>

namespace qstrat {

struct Atom {
  Vec x;
  double w = 0.0;
};

class DiscreteMeasure {
 public:
  DiscreteMeasure() = default;
  explicit DiscreteMeasure(int m) : m_(m) {}
  DiscreteMeasure(int m, std::vector<Atom> atoms);

  void add(const Vec& x, double w);
  int dim() const { return m_; }
  const std::vector<Atom>& atoms() const { return atoms_; }
  std::size_t size() const { return atoms_.size(); }
  bool empty() const { return atoms_.empty(); }
  double total_mass() const { return mass_; }
  // Atoms with |y - x| <= r.
  DiscreteMeasure restrict_to(const Vec& x, double r) const;

 private:
  int m_ = 0;
  std::vector<Atom> atoms_;
  double mass_ = 0.0;
};

struct MomentAnalysis {
  Vec center_of_mass;
  Mat Q;
  Vec eigenvalues;   // descending
  Mat eigenvectors;  // columns, matching eigenvalues
  double mass = 0.0;
};

// Weighted inertia matrix about the center of mass, descending eigenpairs with a
// canonical basis inside degenerate eigenspaces. Throws EmptyMeasureError on zero mass.
MomentAnalysis moment_analysis(const DiscreteMeasure& mu);
MomentAnalysis moment_analysis(const DiscreteMeasure& mu, const Vec& x, double r);

struct BetaResult {
  double beta2 = 0.0;
  Vec plane_base;   // x_cm
  Mat plane_basis;  // m x k
  bool empty = false;  // restricted mass was zero; plane undefined
};

BetaResult beta2(const DiscreteMeasure& mu, const Vec& x, double r, int k);

// Independent oracle: minimizes the transverse second moment over affine k-planes by
// random orthonormal frames and exact coordinate descent (Givens rotations + offset).
double beta2_bruteforce(const DiscreteMeasure& mu, const Vec& x, double r, int k, int restarts,
                        std::uint64_t seed = 12345);

struct DiniResult {
  double value = 0.0;
  int depth = 0;
  // atoms whose ball at the finest scale still holds other atoms (beta may be nonzero below)
  std::size_t unresolved_atoms = 0;
};

// sum_{y in B_r(x)} w_y sum_{j=0..J} beta2(y, r 2^-j) log 2
DiniResult dini_integral(const DiscreteMeasure& mu, const Vec& x, double r, int k, int depth);

struct WBoundResult {
  double lhs = 0.0;
  double rhs = 0.0;
  double integral = 0.0;  // sum of w W_r over atoms in B_r(x)
  bool pass = false;
};

// W_r(y) = annular radial energy on B_{8r}(y) \ B_r(y)
double w_functional(const SampledMap& map, const Vec& y, double r);
WBoundResult w_bound_check(const SampledMap& map, const DiscreteMeasure& mu, const Vec& x, double r,
                           int k, double C1);

}  // namespace qstrat
