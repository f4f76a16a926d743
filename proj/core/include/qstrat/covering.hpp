#pragma once

#include "qstrat/reifenberg.hpp"
#include "qstrat/sampled_map.hpp"
#include "qstrat/symmetry.hpp"

#include <limits>
#include <string>
#include <vector>

namespace qstrat {

struct CoveringConfig {
  int k = 0;
  double eps = 0.2;
  double rho = 1.0 / 128.0;
  double delta = 0.0;  // 0: 0.05 * E
  double r = 1.0 / 64.0;
  double R = 1.0;
  Vec center;          // root ball center (default origin)
  double E = std::numeric_limits<double>::quiet_NaN();  // NaN: sup theta_hat(., 1) over the set
  double Lambda = std::numeric_limits<double>::quiet_NaN();
  int max_rounds = 64;
  double pinch_factor = 0.1;        // pinched-set scale rho r_x * pinch_factor
  double containment_factor = 0.2;  // tube radius rho r_x * containment_factor
  double C_V = 100.0;
  double C_F = 200.0;
  double c_m = 1.0;
  double tau_q = 0.0;               // slack in the energy-drop re-check
  bool enforce_decay = true;
  // Initial scale reduction: condition (f) constants of the map (F = 0 disables it).
  double F = 0.0;
  double gamma = 1.0;
  // Cell size for the Minkowski estimate (0: r/8).
  double minkowski_cell = 0.0;

  // Throws ConfigError when a structural constraint fails.
  void validate() const;
};

struct RoundRecord {
  std::string phase;  // "lemma1", "lemma2", "level"
  int level = 0;      // energy level i
  int round = 0;      // Lemma II round
  int generation = 0; // Lemma I generation
  double radius = 0.0;
  std::size_t good = 0, bad = 0, final_count = 0, r_count = 0;
  double bad_content = 0.0;  // sum r^k of bad balls produced
  double bad_bound = 0.0;
  double content = 0.0;      // sum r^k of all balls at this record
  bool disjoint = true;
};

struct CoveringReport {
  BallCovering covering;
  std::vector<RoundRecord> rounds;
  std::size_t points = 0;
  std::size_t uncovered = 0;
  bool coverage_ok = true;
  bool disjoint_ok = true;
  bool decay_ok = true;
  bool content_ok = true;
  bool energy_drop_ok = true;
  std::size_t energy_drop_checked = 0;
  bool partial = false;
  std::size_t containment_violations = 0;
  int lemma_rounds = 0;
  int levels = 0;
  double E = 0.0;
  double delta = 0.0;
  double content = 0.0;        // sum r^k
  double content_bound = 0.0;
  std::vector<std::string> warnings;
};

// Greedy by descending radius (ties by input order): keep a ball iff its fifth-radius
// shrink misses all kept shrinks. Returns kept indices in selection order.
std::vector<std::size_t> vitali_subcover(const std::vector<Ball>& balls);

struct ScaleReduction {
  double r0 = 1.0;
  bool reduction_needed = false;
  std::vector<Ball> seeds;
  bool disjoint = true;    // quarter-radius shrinks pairwise disjoint
  double content = 0.0;    // seeds * r0^k
  double bound = 0.0;      // seeds * r0^m, bounded by C(m)
};
ScaleReduction initial_scale_reduction(int m, int k, double F, double gamma, double delta);

// Covering Lemma I on the set S (typically classified strata points).
CoveringReport cover_strata_I(const SampledMap& map, const std::vector<Vec>& S, const CoveringConfig& cfg);
// Covering Lemma II (bad balls re-covered until radius r or energy drop).
CoveringReport cover_strata_II(const SampledMap& map, const std::vector<Vec>& S, const CoveringConfig& cfg);

struct StrataReport {
  std::vector<StrataMembership> rows;
  std::vector<Vec> set;  // members
  CoveringReport covering;
  double minkowski_covering = 0.0;  // Vol(union B_{2r}(centers) in B_1)
  double minkowski_points = 0.0;    // Vol(B_r(S) in B_1)
  double minkowski_cell = 0.0;
  ScaleReduction reduction;
};

// Energy-level induction over E - i delta with Lemma II at each level.
StrataReport energy_induction(const SampledMap& map, const std::vector<Vec>& S, const CoveringConfig& cfg);
// Classifies the candidates into S^k_{eps, r} first.
StrataReport energy_induction(const SampledMap& map, int k, double eps, double r, const CoveringConfig& cfg,
                              const std::vector<Vec>& candidates);

// Number of points not contained in any ball (closed balls).
std::size_t count_uncovered(const std::vector<Vec>& points, const std::vector<Ball>& balls);

}  // namespace qstrat
