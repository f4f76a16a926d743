#pragma once

#include "qstrat/jones_beta.hpp"

#include <string>
#include <vector>

namespace qstrat {

enum class BallLabel { good, bad, final_ball, r_ball };
const char* to_string(BallLabel l);
BallLabel parse_label(const std::string& token);  // throws ArgumentError

struct Ball {
  Vec center;
  double radius = 0.0;
  BallLabel label = BallLabel::final_ball;
};

struct BallCovering {
  int m = 0;
  int k = 0;
  double disjointness_factor = 0.2;
  std::vector<Ball> balls;

  double content() const;  // sum omega_k r^k
  // Sort by center (lexicographic) then radius.
  void canonicalize();
  // Index pair of two balls whose shrunken balls intersect, or {-1, -1}.
  std::pair<long, long> find_overlap() const;
};

DiscreteMeasure covering_measure(const BallCovering& c);
double packing_sum(const BallCovering& c);

struct TestBall {
  Vec center;
  double r = 0.0;
};

struct Offender {
  Vec center;
  double r = 0.0;
  double ratio = 0.0;
};

struct ReifenbergReport {
  double max_dini_ratio = 0.0;
  double packing_sum = 0.0;
  double threshold = 0.0;  // delta_R^2
  bool pass = true;
  std::vector<Offender> worst;  // top 10 by ratio
  std::size_t tested_balls = 0;
  int dini_depth = 0;
  // rectifiable check only
  double max_ahlfors_ratio = 0.0;
  double C_R = 0.0;
  bool ahlfors_bounded = true;
};

// Dyadic sweep: radii top, top/2, ... (levels values); centers on a lattice of spacing r/2
// that lie within r of some atom.
std::vector<TestBall> default_test_balls(const DiscreteMeasure& mu, double top, int levels);

// Dini ratios of the covering measure on the test balls. Throws CoveringInvalidError when
// two fifth-radius shrinks intersect.
ReifenbergReport discrete_reifenberg_check(const BallCovering& c, double delta_R,
                                           const std::vector<TestBall>& test_balls, int depth = 0);

// Same Dini machinery for atoms approximating lambda^k on a set, plus the upper Ahlfors
// ratios lambda^k(B_r(x)) / r^k over test balls centered at the atoms.
ReifenbergReport rectifiable_reifenberg_check(const DiscreteMeasure& points, int k, double delta_R,
                                              const std::vector<TestBall>& test_balls, double C_R = 40.0,
                                              int depth = 0);

// Volume of the r-neighborhood of the points inside the reference ball, by counting cells of
// the ambient lattice of spacing h (anchored at the origin). Throws ResolutionError if r < 2h.
double minkowski_content(const std::vector<Vec>& points, double r, const Vec& ref_center,
                         double ref_radius, double h);

}  // namespace qstrat
