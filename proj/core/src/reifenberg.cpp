#include "qstrat/reifenberg.hpp"

#include "qstrat/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <unordered_set>

namespace qstrat {

const char* to_string(BallLabel l) {
  switch (l) {
    case BallLabel::good: return "good";
    case BallLabel::bad: return "bad";
    case BallLabel::final_ball: return "final";
    case BallLabel::r_ball: return "r-ball";
  }
  return "?";
}

BallLabel parse_label(const std::string& t) {
  if (t == "good") return BallLabel::good;
  if (t == "bad") return BallLabel::bad;
  if (t == "final") return BallLabel::final_ball;
  if (t == "r-ball") return BallLabel::r_ball;
  throw ArgumentError("unknown ball label '" + t + "'");
}

double BallCovering::content() const {
  double s = 0.0;
  for (const auto& b : balls) s += unit_ball_volume(k) * std::pow(b.radius, k);
  return s;
}

void BallCovering::canonicalize() {
  std::stable_sort(balls.begin(), balls.end(), [](const Ball& a, const Ball& b) {
    if (lex_less(a.center, b.center)) return true;
    if (lex_less(b.center, a.center)) return false;
    return a.radius < b.radius;
  });
}

std::pair<long, long> BallCovering::find_overlap() const {
  for (std::size_t i = 0; i < balls.size(); ++i)
    for (std::size_t j = i + 1; j < balls.size(); ++j) {
      double lim = disjointness_factor * (balls[i].radius + balls[j].radius);
      if ((balls[i].center - balls[j].center).squaredNorm() < lim * lim * (1.0 - 1e-12))
        return {static_cast<long>(i), static_cast<long>(j)};
    }
  return {-1, -1};
}

DiscreteMeasure covering_measure(const BallCovering& c) {
  DiscreteMeasure mu(c.m);
  double wk = unit_ball_volume(c.k);
  for (const auto& b : c.balls) mu.add(b.center, wk * std::pow(b.radius, c.k));
  return mu;
}

double packing_sum(const BallCovering& c) {
  double s = 0.0;
  for (const auto& b : c.balls) s += std::pow(b.radius, c.k);
  return s;
}

std::vector<TestBall> default_test_balls(const DiscreteMeasure& mu, double top, int levels) {
  std::vector<TestBall> out;
  if (mu.empty()) return out;
  const int m = mu.dim();
  for (int l = 0; l < levels; ++l) {
    double r = top * std::ldexp(1.0, -l);
    double a = 0.5 * r;
    std::set<std::vector<long>> centers;
    for (const auto& at : mu.atoms()) {
      std::vector<long> lo(m), hi(m), idx(m);
      for (int i = 0; i < m; ++i) {
        lo[i] = static_cast<long>(std::ceil((at.x[i] - r) / a));
        hi[i] = static_cast<long>(std::floor((at.x[i] + r) / a));
      }
      idx = lo;
      for (;;) {
        double d2 = 0.0;
        for (int i = 0; i < m; ++i) d2 += (a * idx[i] - at.x[i]) * (a * idx[i] - at.x[i]);
        if (d2 < r * r) centers.insert(idx);
        int i = m - 1;
        while (i >= 0 && ++idx[i] > hi[i]) {
          idx[i] = lo[i];
          --i;
        }
        if (i < 0) break;
      }
    }
    for (const auto& c : centers) {
      Vec x(m);
      for (int i = 0; i < m; ++i) x[i] = a * c[i];
      out.push_back({x, r});
    }
  }
  return out;
}

namespace {

// Dini sums with beta^2(atom, s) memoized per (atom, scale).
class DiniEvaluator {
 public:
  DiniEvaluator(const DiscreteMeasure& mu, int k) : mu_(mu), k_(k) {}

  double ratio(const TestBall& tb, int depth) {
    const double log2 = std::log(2.0);
    double total = 0.0;
    const auto& atoms = mu_.atoms();
    for (std::size_t i = 0; i < atoms.size(); ++i) {
      if ((atoms[i].x - tb.center).squaredNorm() > tb.r * tb.r) continue;
      double acc = 0.0;
      for (int j = 0; j <= depth; ++j) acc += beta_cached(i, tb.r * std::ldexp(1.0, -j)) * log2;
      total += atoms[i].w * acc;
    }
    return total / std::pow(tb.r, k_);
  }

 private:
  double beta_cached(std::size_t atom, double s) {
    auto key = std::make_pair(atom, s);
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;
    double v = beta2(mu_, mu_.atoms()[atom].x, s, k_).beta2;
    cache_.emplace(key, v);
    return v;
  }
  const DiscreteMeasure& mu_;
  int k_;
  std::map<std::pair<std::size_t, double>, double> cache_;
};

int auto_depth(const DiscreteMeasure& mu, const std::vector<TestBall>& tbs) {
  double top = 0.0;
  for (const auto& t : tbs) top = std::max(top, t.r);
  double sep = std::numeric_limits<double>::infinity();
  const auto& a = mu.atoms();
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = i + 1; j < a.size(); ++j) {
      double d = (a[i].x - a[j].x).norm();
      if (d > 0.0) sep = std::min(sep, d);
    }
  if (!std::isfinite(sep) || top <= 0.0) return 3;
  int J = static_cast<int>(std::ceil(std::log2(top / sep))) + 2;
  return std::clamp(J, 3, 40);
}

void fill_dini(ReifenbergReport& rep, const DiscreteMeasure& mu, int k, double delta_R,
               const std::vector<TestBall>& tbs, int depth) {
  rep.threshold = delta_R * delta_R;
  rep.dini_depth = depth > 0 ? depth : auto_depth(mu, tbs);
  rep.tested_balls = tbs.size();
  DiniEvaluator ev(mu, k);
  std::vector<Offender> all;
  for (const auto& tb : tbs) {
    double r = ev.ratio(tb, rep.dini_depth);
    rep.max_dini_ratio = std::max(rep.max_dini_ratio, r);
    all.push_back({tb.center, tb.r, r});
  }
  std::stable_sort(all.begin(), all.end(), [](const Offender& a, const Offender& b) { return a.ratio > b.ratio; });
  if (all.size() > 10) all.resize(10);
  rep.worst = all;
  rep.pass = rep.max_dini_ratio < rep.threshold;
}

}  // namespace

ReifenbergReport discrete_reifenberg_check(const BallCovering& c, double delta_R,
                                           const std::vector<TestBall>& test_balls, int depth) {
  if (!(delta_R > 0.0)) throw ArgumentError("delta_R must be positive");
  auto ov = c.find_overlap();
  if (ov.first >= 0)
    throw CoveringInvalidError("shrunken balls " + std::to_string(ov.first) + " and " +
                               std::to_string(ov.second) + " intersect");
  ReifenbergReport rep;
  rep.packing_sum = packing_sum(c);
  if (c.balls.empty()) {
    rep.threshold = delta_R * delta_R;
    return rep;
  }
  if (c.k >= c.m) throw ArgumentError("covering dimension k must be < m");
  fill_dini(rep, covering_measure(c), c.k, delta_R, test_balls, depth);
  return rep;
}

ReifenbergReport rectifiable_reifenberg_check(const DiscreteMeasure& points, int k, double delta_R,
                                              const std::vector<TestBall>& test_balls, double C_R,
                                              int depth) {
  if (!(delta_R > 0.0)) throw ArgumentError("delta_R must be positive");
  if (k < 0 || k >= points.dim()) throw ArgumentError("k must satisfy 0 <= k < m");
  ReifenbergReport rep;
  rep.C_R = C_R;
  rep.packing_sum = points.total_mass();
  fill_dini(rep, points, k, delta_R, test_balls, depth);
  std::set<double> radii;
  for (const auto& t : test_balls) radii.insert(t.r);
  for (const auto& a : points.atoms())
    for (double r : radii) {
      double mass = points.restrict_to(a.x, r).total_mass();
      rep.max_ahlfors_ratio = std::max(rep.max_ahlfors_ratio, mass / std::pow(r, k));
    }
  rep.ahlfors_bounded = rep.max_ahlfors_ratio < C_R;
  return rep;
}

namespace {
struct IdxHash {
  std::size_t operator()(const std::vector<long>& v) const {
    std::size_t h = 1469598103934665603ull;
    for (long x : v) {
      h ^= static_cast<std::size_t>(x) + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
    }
    return h;
  }
};
}  // namespace

double minkowski_content(const std::vector<Vec>& points, double r, const Vec& ref_center,
                         double ref_radius, double h) {
  if (!(h > 0.0)) throw ArgumentError("cell size must be positive");
  if (r < 2.0 * h * (1.0 - 1e-12)) throw ResolutionError("Minkowski radius r must be >= 2h");
  if (points.empty()) return 0.0;
  const int m = static_cast<int>(points[0].size());
  std::unordered_set<std::vector<long>, IdxHash> cells;
  std::vector<long> lo(m), hi(m), idx(m);
  for (const auto& p : points) {
    for (int i = 0; i < m; ++i) {
      lo[i] = static_cast<long>(std::ceil((p[i] - r) / h));
      hi[i] = static_cast<long>(std::floor((p[i] + r) / h));
    }
    idx = lo;
    for (;;) {
      double d2 = 0.0, e2 = 0.0;
      for (int i = 0; i < m; ++i) {
        double c = h * idx[i];
        d2 += (c - p[i]) * (c - p[i]);
        e2 += (c - ref_center[i]) * (c - ref_center[i]);
      }
      if (d2 < r * r && e2 < ref_radius * ref_radius) cells.insert(idx);
      int i = m - 1;
      while (i >= 0 && ++idx[i] > hi[i]) {
        idx[i] = lo[i];
        --i;
      }
      if (i < 0) break;
    }
  }
  return static_cast<double>(cells.size()) * std::pow(h, m);
}

}  // namespace qstrat
