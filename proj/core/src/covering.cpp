#include "qstrat/covering.hpp"

#include "qstrat/energy.hpp"
#include "qstrat/errors.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <unordered_map>

namespace qstrat {

namespace {

struct KeyHash {
  std::size_t operator()(const std::vector<long>& v) const {
    std::size_t h = 1469598103934665603ull;
    for (long x : v) h ^= static_cast<std::size_t>(x) + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
    return h;
  }
};

// Buckets of points keyed by the cell of side `cell` that contains them.
class Buckets {
 public:
  explicit Buckets(double cell) : cell_(cell) {}
  std::vector<long> key(const Vec& p) const {
    std::vector<long> k(p.size());
    for (Eigen::Index i = 0; i < p.size(); ++i) k[i] = static_cast<long>(std::floor(p[i] / cell_));
    return k;
  }
  void insert(const Vec& p, std::size_t id) { map_[key(p)].push_back(id); }
  // ids in the 3^m block of cells around p
  template <class F>
  void neighbors(const Vec& p, F&& f) const {
    std::vector<long> k = key(p), q = k;
    const std::size_t m = k.size();
    std::vector<int> off(m, -1);
    for (;;) {
      for (std::size_t i = 0; i < m; ++i) q[i] = k[i] + off[i];
      auto it = map_.find(q);
      if (it != map_.end())
        for (std::size_t id : it->second) f(id);
      std::size_t i = m;
      while (i > 0) {
        --i;
        if (++off[i] <= 1) break;
        off[i] = -1;
        if (i == 0) return;
      }
      if (m == 0) return;
    }
  }

 private:
  double cell_;
  std::unordered_map<std::vector<long>, std::vector<std::size_t>, KeyHash> map_;
};

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

bool is_power_of_two(double x) {
  int e;
  double mant = std::frexp(x, &e);
  return mant == 0.5;
}

}  // namespace

void CoveringConfig::validate() const {
  if (k < 0) throw ConfigError("covering order k must be >= 0");
  if (!(eps > 0.0)) throw ConfigError("epsilon must be positive");
  if (!(rho > 0.0 && rho <= 0.01)) throw ConfigError("rho = " + fmt(rho) + " violates 0 < rho <= 1/100");
  if (!is_power_of_two(rho)) throw ConfigError("rho must be a negative power of 2");
  if (!(R > 0.0 && R <= 1.0)) throw ConfigError("initial scale R must lie in (0, 1]");
  if (!(r > 0.0 && r < R)) throw ConfigError("final scale r must satisfy 0 < r < R");
  if (delta < 0.0) throw ConfigError("delta must be positive (0 selects the default)");
  if (max_rounds < 1) throw ConfigError("max_rounds must be >= 1");
  if (!(pinch_factor > 0.0) || !(containment_factor > 0.0)) throw ConfigError("pinch/containment factors must be positive");
  if (!(C_V > 0.0) || !(C_F > 0.0) || !(c_m > 0.0)) throw ConfigError("content constants must be positive");
  if (F < 0.0 || !(gamma > 0.0)) throw ConfigError("condition (f) constants need F >= 0 and gamma > 0");
  if (minkowski_cell < 0.0) throw ConfigError("minkowski_cell must be >= 0");
}

std::vector<std::size_t> vitali_subcover(const std::vector<Ball>& balls) {
  std::vector<std::size_t> order(balls.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return balls[a].radius > balls[b].radius; });
  std::vector<std::size_t> kept;
  if (balls.empty()) return kept;
  double rmax = balls[order[0]].radius;
  Buckets grid(std::max(0.4 * rmax, 1e-300));
  for (std::size_t i : order) {
    const Ball& b = balls[i];
    bool clash = false;
    grid.neighbors(b.center, [&](std::size_t j) {
      if (clash) return;
      double lim = 0.2 * (b.radius + balls[j].radius);
      if ((b.center - balls[j].center).squaredNorm() < lim * lim) clash = true;
    });
    if (!clash) {
      kept.push_back(i);
      grid.insert(b.center, i);
    }
  }
  return kept;
}

ScaleReduction initial_scale_reduction(int m, int k, double F, double gamma, double delta) {
  if (!(gamma > 0.0)) throw ArgumentError("gamma must be positive");
  if (!(delta > 0.0)) throw ArgumentError("delta must be positive");
  if (F < 0.0) throw ArgumentError("F must be nonnegative");
  ScaleReduction s;
  s.r0 = F == 0.0 ? 1.0 : std::min(1.0, std::pow(delta / F, 1.0 / gamma));
  s.reduction_needed = s.r0 < 1.0;
  if (!s.reduction_needed) {
    s.seeds.push_back({Vec::Zero(m), 0.5, BallLabel::good});
  } else {
    double a = s.r0 / std::sqrt(static_cast<double>(m));
    long n = static_cast<long>(std::ceil((1.0 + 0.5 * s.r0) / a));
    std::vector<long> idx(m, -n);
    for (;;) {
      Vec z(m);
      for (int i = 0; i < m; ++i) z[i] = a * idx[i];
      if (z.norm() < 1.0 + 0.5 * s.r0) s.seeds.push_back({z, 0.5 * s.r0, BallLabel::good});
      int i = m - 1;
      while (i >= 0 && ++idx[i] > n) {
        idx[i] = -n;
        --i;
      }
      if (i < 0) break;
    }
    // quarter-radius shrinks are disjoint iff the lattice spacing is >= r0/2
    s.disjoint = a >= 0.5 * s.r0 * (1.0 - 1e-12);
  }
  double cnt = static_cast<double>(s.seeds.size());
  s.content = cnt * std::pow(s.r0, k);
  s.bound = cnt * std::pow(s.r0, m);
  return s;
}

std::size_t count_uncovered(const std::vector<Vec>& points, const std::vector<Ball>& balls) {
  if (balls.empty()) return points.size();
  double rmax = 0.0;
  for (const auto& b : balls) rmax = std::max(rmax, b.radius);
  // bucket by largest radius so any covering ball is in the neighboring cells
  Buckets grid(rmax * (1.0 + 1e-9));
  for (std::size_t i = 0; i < balls.size(); ++i) grid.insert(balls[i].center, i);
  std::size_t miss = 0;
  for (const auto& p : points) {
    bool in = false;
    grid.neighbors(p, [&](std::size_t j) {
      if (in) return;
      double rr = balls[j].radius * (1.0 + 1e-12);
      if ((p - balls[j].center).squaredNorm() <= rr * rr) in = true;
    });
    if (!in) ++miss;
  }
  return miss;
}

namespace {

class Engine {
 public:
  struct Node {
    Ball ball;
    std::vector<std::size_t> pts;
  };
  struct BadNode {
    Ball ball;
    std::vector<std::size_t> pts;
    std::vector<std::size_t> F;
    double drop_scale = 0.0;
  };
  struct LemmaOneOut {
    std::vector<Node> r_balls;
    std::vector<BadNode> bad;
    std::vector<Node> partial;
  };
  struct LemmaTwoOut {
    std::vector<Node> done;
    std::vector<Node> finals;
    std::vector<Node> partial;
  };

  Engine(const SampledMap& map, const std::vector<Vec>& S, const CoveringConfig& cfg, CoveringReport& rep)
      : map_(map), S_(S), cfg_(cfg), rep_(rep), m_(map.m()) {
    double cell = 2.0 * cfg.R / 16.0;
    grid_cell_ = cell;
    for (std::size_t i = 0; i < S.size(); ++i) point_cells_[cell_key(S[i])].push_back(i);
  }

  double content_of(double radius) const { return std::pow(radius, cfg_.k); }

  // Points of S within distance rad of x, in index order.
  std::vector<std::size_t> within(const Vec& x, double rad) const {
    std::vector<std::size_t> out;
    long reach = static_cast<long>(std::ceil(rad / grid_cell_));
    std::vector<long> k = cell_key(x), q(m_);
    std::vector<long> off(m_, -reach);
    for (;;) {
      for (int i = 0; i < m_; ++i) q[i] = k[i] + off[i];
      auto it = point_cells_.find(q);
      if (it != point_cells_.end())
        for (std::size_t id : it->second)
          if ((S_[id] - x).squaredNorm() <= rad * rad) out.push_back(id);
      int i = m_ - 1;
      while (i >= 0 && ++off[i] > reach) {
        off[i] = -reach;
        --i;
      }
      if (i < 0) break;
    }
    std::sort(out.begin(), out.end());
    return out;
  }

  double theta_hat_at(std::size_t i, double s) {
    auto key = std::make_pair(i, s);
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;
    double v = theta_hat(map_, S_[i], s);
    cache_.emplace(key, v);
    return v;
  }

  void prefetch(const std::vector<std::size_t>& ids, double s) {
    std::vector<std::size_t> missing;
    for (std::size_t i : ids)
      if (!cache_.count({i, s})) missing.push_back(i);
    if (missing.empty()) return;
    std::vector<double> vals(missing.size());
    SampledMap inner = map_;
    QuadratureOptions q = map_.quadrature();
    int workers = q.workers;
    q.workers = 1;
    inner.set_quadrature(q);
    parallel_for(missing.size(), workers, [&](std::size_t j) { vals[j] = theta_hat(inner, S_[missing[j]], s); });
    for (std::size_t j = 0; j < missing.size(); ++j) cache_.emplace(std::make_pair(missing[j], s), vals[j]);
  }

  // Vitali selection among candidate centers (one per point) of equal radius; every point is
  // attached to the nearest kept center.
  std::vector<Node> make_children(const std::vector<std::size_t>& pts, const std::vector<Vec>& cand,
                                  double radius, BallLabel label) {
    std::vector<Ball> balls;
    balls.reserve(cand.size());
    for (const auto& c : cand) balls.push_back({c, radius, label});
    std::vector<std::size_t> kept = vitali_subcover(balls);
    std::vector<Node> out;
    Buckets grid(0.4 * radius);
    for (std::size_t j = 0; j < kept.size(); ++j) {
      out.push_back({balls[kept[j]], {}});
      grid.insert(balls[kept[j]].center, j);
    }
    for (std::size_t i = 0; i < pts.size(); ++i) {
      double best = std::numeric_limits<double>::infinity();
      std::size_t arg = 0;
      grid.neighbors(cand[i], [&](std::size_t j) {
        double d = (cand[i] - out[j].ball.center).squaredNorm();
        if (d < best || (d == best && j < arg)) {
          best = d;
          arg = j;
        }
      });
      if (!std::isfinite(best)) {
        // cannot happen for a maximal family; fall back to a full scan
        for (std::size_t j = 0; j < out.size(); ++j) {
          double d = (cand[i] - out[j].ball.center).squaredNorm();
          if (d < best) {
            best = d;
            arg = j;
          }
        }
      }
      out[arg].pts.push_back(pts[i]);
    }
    return out;
  }

  bool shrinks_disjoint(const std::vector<Ball>& balls) {
    BallCovering c;
    c.m = m_;
    c.k = cfg_.k;
    c.balls = balls;
    if (balls.size() < 2) return true;
    // bucketed pair check
    double rmax = 0.0;
    for (const auto& b : balls) rmax = std::max(rmax, b.radius);
    Buckets grid(0.4 * rmax);
    for (std::size_t i = 0; i < balls.size(); ++i) {
      bool clash = false;
      grid.neighbors(balls[i].center, [&](std::size_t j) {
        double lim = 0.2 * (balls[i].radius + balls[j].radius);
        if ((balls[i].center - balls[j].center).squaredNorm() < lim * lim * (1.0 - 1e-12)) clash = true;
      });
      if (clash) return false;
      grid.insert(balls[i].center, i);
    }
    return true;
  }

  LemmaOneOut lemma_one(const Node& root, double E, double delta, int level, int round) {
    LemmaOneOut out;
    std::vector<Node> current{root};
    std::vector<Ball> bad_balls;
    for (int gen = 0;; ++gen) {
      if (current.empty()) break;
      double rad = current[0].ball.radius;
      RoundRecord rec;
      rec.phase = "lemma1";
      rec.level = level;
      rec.round = round;
      rec.generation = gen;
      rec.radius = rad;
      if (rad <= cfg_.r * (1.0 + 1e-9)) {
        for (auto& n : current) {
          n.ball.label = BallLabel::r_ball;
          rec.content += content_of(n.ball.radius);
          out.r_balls.push_back(std::move(n));
        }
        rec.r_count = current.size();
        rep_.rounds.push_back(rec);
        break;
      }
      if (gen >= cfg_.max_rounds) {
        rep_.partial = true;
        rep_.warnings.push_back("Lemma I generation limit reached");
        for (auto& n : current) out.partial.push_back(std::move(n));
        break;
      }
      double scale = cfg_.rho * rad * cfg_.pinch_factor;
      double tube = cfg_.rho * rad * cfg_.containment_factor;
      struct Good {
        std::size_t node;
        Vec base;
        Mat basis;
      };
      std::vector<Good> goods;
      for (std::size_t ni = 0; ni < current.size(); ++ni) {
        Node& node = current[ni];
        std::vector<std::size_t> cands = within(node.ball.center, 2.0 * rad);
        prefetch(cands, scale);
        std::vector<std::size_t> F;
        for (std::size_t c : cands)
          if (theta_hat_at(c, scale) >= E - delta) F.push_back(c);
        bool good = false;
        EffectiveSpan sp;
        if (!F.empty()) {
          std::vector<Vec> fp;
          for (std::size_t c : F) fp.push_back(S_[c]);
          sp = effective_span(fp, scale);
          good = sp.k >= cfg_.k;
        }
        if (good) {
          goods.push_back({ni, sp.base, sp.basis.leftCols(cfg_.k)});
        } else {
          BadNode b;
          b.ball = node.ball;
          b.ball.label = BallLabel::bad;
          b.pts = node.pts;
          b.F = F;
          b.drop_scale = scale;
          bad_balls.push_back(b.ball);
          rec.bad_content += content_of(rad);
          out.bad.push_back(std::move(b));
          ++rec.bad;
        }
      }
      rec.good = goods.size();
      std::vector<std::size_t> pass;
      std::vector<Vec> cand;
      for (const Good& g : goods) {
        for (std::size_t p : current[g.node].pts) {
          bool covered = false;
          for (const auto& b : bad_balls)
            if ((S_[p] - b.center).squaredNorm() <= b.radius * b.radius) {
              covered = true;
              break;
            }
          if (covered) continue;
          Vec d = S_[p] - g.base;
          Vec proj = g.base + g.basis * (g.basis.transpose() * d);
          if ((S_[p] - proj).norm() <= tube) {
            cand.push_back(proj);
          } else {
            ++rep_.containment_violations;
            cand.push_back(S_[p]);
          }
          pass.push_back(p);
        }
      }
      double child = std::max(cfg_.rho * rad, cfg_.r);
      std::vector<Node> next = make_children(pass, cand, child, BallLabel::good);
      std::vector<Ball> gen_balls = bad_balls;
      for (const auto& n : next) gen_balls.push_back(n.ball);
      rec.disjoint = shrinks_disjoint(gen_balls);
      if (!rec.disjoint) rep_.disjoint_ok = false;
      for (const auto& b : gen_balls) rec.content += content_of(b.radius);
      rep_.rounds.push_back(rec);
      current = std::move(next);
    }
    double content = 0.0;
    for (const auto& n : out.r_balls) content += content_of(n.ball.radius);
    for (const auto& b : out.bad) content += content_of(b.ball.radius);
    if (content > cfg_.C_V * content_of(root.ball.radius) * (1.0 + 1e-12)) {
      rep_.content_ok = false;
      rep_.warnings.push_back("Lemma I content " + fmt(content) + " exceeds C_V R^k");
    }
    return out;
  }

  LemmaTwoOut lemma_two(const Node& root, double E, double delta, int level) {
    LemmaTwoOut out;
    std::vector<Node> pending{root};
    double R0k = content_of(root.ball.radius);
    for (int round = 0; !pending.empty(); ++round) {
      if (round > cfg_.max_rounds) {
        rep_.partial = true;
        rep_.warnings.push_back("Lemma II round limit reached");
        for (auto& n : pending) out.partial.push_back(std::move(n));
        break;
      }
      ++rep_.lemma_rounds;
      std::vector<Node> next;
      RoundRecord rec;
      rec.phase = "lemma2";
      rec.level = level;
      rec.round = round + 1;
      for (const Node& node : pending) {
        LemmaOneOut l1 = lemma_one(node, E, delta, level, round);
        for (auto& n : l1.r_balls) out.done.push_back(std::move(n));
        for (auto& n : l1.partial) out.partial.push_back(std::move(n));
        for (BadNode& b : l1.bad) {
          double child = std::max(cfg_.rho * b.ball.radius, cfg_.r);
          rec.radius = std::max(rec.radius, child);
          std::vector<std::size_t> near, far;
          std::vector<Vec> near_c, far_c;
          for (std::size_t p : b.pts) {
            bool is_near = false;
            for (std::size_t f : b.F)
              if ((S_[p] - S_[f]).norm() <= 2.0 * child) {
                is_near = true;
                break;
              }
            if (is_near) {
              near.push_back(p);
              near_c.push_back(S_[p]);
            } else {
              far.push_back(p);
              far_c.push_back(S_[p]);
            }
          }
          std::vector<Node> finals = make_children(far, far_c, child, BallLabel::final_ball);
          for (const Node& f : finals) check_drop(f.ball, b.drop_scale, E - delta);
          rec.final_count += finals.size();
          for (auto& f : finals) out.finals.push_back(std::move(f));
          std::vector<Node> bads = make_children(near, near_c, child, BallLabel::bad);
          for (auto& c : bads) {
            if (child <= cfg_.r * (1.0 + 1e-9)) {
              c.ball.label = BallLabel::r_ball;
              ++rec.r_count;
              out.done.push_back(std::move(c));
            } else {
              rec.bad_content += content_of(child);
              ++rec.bad;
              next.push_back(std::move(c));
            }
          }
        }
      }
      rec.bad_bound = std::ldexp(1.0, -(round + 1)) * R0k;
      rep_.rounds.push_back(rec);
      if (rec.bad_content > rec.bad_bound * (1.0 + 1e-9)) {
        rep_.decay_ok = false;
        std::string msg = "bad content " + fmt(rec.bad_content) + " exceeds 2^-" + std::to_string(round + 1) +
                          " R^k at generation " + std::to_string(round + 1);
        rep_.warnings.push_back(msg);
        if (cfg_.enforce_decay) throw DecayViolationError(msg, round + 1);
      }
      pending = std::move(next);
    }
    return out;
  }

  void check_drop(const Ball& b, double scale, double level) {
    std::vector<std::size_t> ys = within(b.center, 2.0 * b.radius);
    prefetch(ys, scale);
    for (std::size_t y : ys) {
      ++rep_.energy_drop_checked;
      if (theta_hat_at(y, scale) > level + cfg_.tau_q) rep_.energy_drop_ok = false;
    }
  }

  double sup_energy(const std::vector<std::size_t>& ids) {
    prefetch(ids, 1.0);
    double E = 0.0;
    for (std::size_t i : ids) E = std::max(E, theta_hat_at(i, 1.0));
    return E;
  }

  const std::vector<Vec>& S() const { return S_; }

 private:
  std::vector<long> cell_key(const Vec& p) const {
    std::vector<long> k(m_);
    for (int i = 0; i < m_; ++i) k[i] = static_cast<long>(std::floor(p[i] / grid_cell_));
    return k;
  }

  const SampledMap& map_;
  const std::vector<Vec>& S_;
  const CoveringConfig& cfg_;
  CoveringReport& rep_;
  int m_;
  double grid_cell_ = 1.0;
  std::unordered_map<std::vector<long>, std::vector<std::size_t>, KeyHash> point_cells_;
  std::map<std::pair<std::size_t, double>, double> cache_;
};

Vec root_center(const CoveringConfig& cfg, int m) {
  return cfg.center.size() == m ? cfg.center : Vec::Zero(m);
}

// Resolve E and delta; returns the indices of S inside the root ball.
std::vector<std::size_t> setup(Engine& eng, const CoveringConfig& cfg, int m, CoveringReport& rep) {
  cfg.validate();
  Vec c = root_center(cfg, m);
  std::vector<std::size_t> inside = eng.within(c, cfg.R);
  rep.points = inside.size();
  if (std::isnan(cfg.E)) {
    std::vector<std::size_t> wide = eng.within(c, 2.0 * cfg.R);
    rep.E = wide.empty() ? 0.0 : eng.sup_energy(wide);
  } else {
    rep.E = cfg.E;
  }
  rep.delta = cfg.delta > 0.0 ? cfg.delta : 0.05 * rep.E;
  if (!(rep.delta > 0.0)) rep.delta = 1e-12;
  return inside;
}

void finish(CoveringReport& rep, const std::vector<Vec>& S, const std::vector<std::size_t>& inside,
            const CoveringConfig& cfg, int m) {
  rep.covering.m = m;
  rep.covering.k = cfg.k;
  rep.covering.canonicalize();
  std::vector<Vec> pts;
  for (std::size_t i : inside) pts.push_back(S[i]);
  rep.uncovered = count_uncovered(pts, rep.covering.balls);
  rep.coverage_ok = rep.uncovered == 0;
  rep.content = packing_sum(rep.covering);
}

}  // namespace

CoveringReport cover_strata_I(const SampledMap& map, const std::vector<Vec>& S, const CoveringConfig& cfg) {
  CoveringReport rep;
  Engine eng(map, S, cfg, rep);
  std::vector<std::size_t> inside = setup(eng, cfg, map.m(), rep);
  if (!inside.empty()) {
    Engine::Node root{{root_center(cfg, map.m()), cfg.R, BallLabel::good}, inside};
    auto out = eng.lemma_one(root, rep.E, rep.delta, 0, 0);
    for (auto& n : out.r_balls) rep.covering.balls.push_back(n.ball);
    for (auto& b : out.bad) rep.covering.balls.push_back(b.ball);
    for (auto& n : out.partial) rep.covering.balls.push_back(n.ball);
  }
  finish(rep, S, inside, cfg, map.m());
  rep.content_bound = cfg.C_V * std::pow(cfg.R, cfg.k);
  if (rep.content > rep.content_bound) rep.content_ok = false;
  return rep;
}

CoveringReport cover_strata_II(const SampledMap& map, const std::vector<Vec>& S, const CoveringConfig& cfg) {
  CoveringReport rep;
  Engine eng(map, S, cfg, rep);
  std::vector<std::size_t> inside = setup(eng, cfg, map.m(), rep);
  if (!inside.empty()) {
    Engine::Node root{{root_center(cfg, map.m()), cfg.R, BallLabel::good}, inside};
    auto out = eng.lemma_two(root, rep.E, rep.delta, 0);
    for (auto& n : out.done) rep.covering.balls.push_back(n.ball);
    for (auto& n : out.finals) rep.covering.balls.push_back(n.ball);
    for (auto& n : out.partial) rep.covering.balls.push_back(n.ball);
  }
  finish(rep, S, inside, cfg, map.m());
  rep.content_bound = cfg.C_F * std::pow(cfg.R, cfg.k);
  if (rep.content > rep.content_bound) rep.content_ok = false;
  rep.disjoint_ok = rep.disjoint_ok && rep.covering.find_overlap().first < 0;
  return rep;
}

StrataReport energy_induction(const SampledMap& map, const std::vector<Vec>& S, const CoveringConfig& cfg) {
  const int m = map.m();
  StrataReport out;
  out.set = S;
  CoveringReport& rep = out.covering;
  Engine eng(map, S, cfg, rep);
  std::vector<std::size_t> inside = setup(eng, cfg, m, rep);
  const double r = cfg.r;

  std::vector<Engine::Node> current;
  out.reduction = initial_scale_reduction(m, cfg.k, cfg.F, cfg.gamma, rep.delta);
  Vec c0 = root_center(cfg, m);
  if (!inside.empty()) {
    if (out.reduction.reduction_needed) {
      std::vector<Engine::Node> seeds;
      for (const auto& s : out.reduction.seeds) {
        Ball b = s;
        b.center = c0 + cfg.R * s.center;
        b.radius = cfg.R * s.radius;
        seeds.push_back({b, {}});
      }
      for (std::size_t p : inside) {
        std::size_t best = 0;
        double bd = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < seeds.size(); ++j) {
          double d = (S[p] - seeds[j].ball.center).squaredNorm();
          if (d < bd) {
            bd = d;
            best = j;
          }
        }
        seeds[best].pts.push_back(p);
      }
      for (auto& s : seeds)
        if (!s.pts.empty()) current.push_back(std::move(s));
    } else {
      current.push_back({{c0, cfg.R, BallLabel::good}, inside});
    }
  }

  std::vector<Engine::Node> done;
  int max_level = rep.E > 0.0 ? static_cast<int>(std::floor(rep.E / rep.delta)) + 1 : 0;
  int level = 0;
  for (; !current.empty() && level <= max_level; ++level) {
    double Ei = rep.E - level * rep.delta;
    std::vector<Engine::Node> next;
    for (Engine::Node& node : current) {
      if (node.ball.radius <= r * (1.0 + 1e-9)) {
        done.push_back(std::move(node));
        continue;
      }
      auto l2 = eng.lemma_two(node, Ei, rep.delta, level);
      for (auto& n : l2.done) done.push_back(std::move(n));
      for (auto& n : l2.partial) done.push_back(std::move(n));
      for (auto& f : l2.finals) {
        if (f.ball.radius <= r * (1.0 + 1e-9)) {
          done.push_back(std::move(f));
          continue;
        }
        double child = std::max(cfg.rho * f.ball.radius, r);
        std::vector<Vec> pos;
        for (std::size_t p : f.pts) pos.push_back(S[p]);
        for (auto& c : eng.make_children(f.pts, pos, child, BallLabel::final_ball)) {
          if (child <= r * (1.0 + 1e-9))
            done.push_back(std::move(c));
          else
            next.push_back(std::move(c));
        }
      }
    }
    RoundRecord rec;
    rec.phase = "level";
    rec.level = level;
    for (const auto& n : next) rec.content += std::pow(n.ball.radius, cfg.k);
    for (const auto& n : done) rec.content += std::pow(n.ball.radius, cfg.k);
    rec.bad_bound = std::pow(cfg.c_m * cfg.C_F, level + 1);
    rec.final_count = next.size();
    rec.r_count = done.size();
    if (rec.content > rec.bad_bound) rep.content_ok = false;
    rep.rounds.push_back(rec);
    current = std::move(next);
  }
  rep.levels = level;
  if (!current.empty()) {
    rep.partial = true;
    rep.warnings.push_back("energy induction ended with balls above the final scale");
  }

  // Snap every covered point to the global lattice of r-balls; the lattice spacing keeps the
  // fifth-radius shrinks disjoint and the r-balls covering.
  double a = std::min(1.0, 2.0 / std::sqrt(static_cast<double>(m))) * r;
  std::map<std::vector<long>, bool> nodes;
  auto snap = [&](const Vec& p) {
    std::vector<long> key(m);
    for (int i = 0; i < m; ++i) key[i] = std::lround(p[i] / a);
    nodes[key] = true;
  };
  for (const auto& n : done) {
    if (n.ball.radius <= r * (1.0 + 1e-9)) {
      for (std::size_t p : n.pts) snap(S[p]);
    }
  }
  for (const auto& kv : nodes) {
    Vec c(m);
    for (int i = 0; i < m; ++i) c[i] = a * kv.first[i];
    rep.covering.balls.push_back({c, r, BallLabel::r_ball});
  }
  for (const auto& n : done)
    if (n.ball.radius > r * (1.0 + 1e-9)) rep.covering.balls.push_back(n.ball);
  for (const auto& n : current) rep.covering.balls.push_back(n.ball);
  finish(rep, S, inside, cfg, m);
  rep.content_bound = std::pow(cfg.c_m * cfg.C_F, max_level + 1);
  if (rep.content > rep.content_bound) rep.content_ok = false;
  rep.disjoint_ok = rep.disjoint_ok && rep.covering.find_overlap().first < 0;

  out.minkowski_cell = cfg.minkowski_cell > 0.0 ? cfg.minkowski_cell : r / 8.0;
  std::vector<Vec> centers, pts;
  for (const auto& b : rep.covering.balls) centers.push_back(b.center);
  for (std::size_t i : inside) pts.push_back(S[i]);
  Vec zero = Vec::Zero(m);
  out.minkowski_covering = minkowski_content(centers, 2.0 * r, zero, 1.0, out.minkowski_cell);
  out.minkowski_points = minkowski_content(pts, r, zero, 1.0, out.minkowski_cell);
  return out;
}

StrataReport energy_induction(const SampledMap& map, int k, double eps, double r, const CoveringConfig& cfg,
                              const std::vector<Vec>& candidates) {
  CoveringConfig c = cfg;
  c.k = k;
  c.eps = eps;
  c.r = r;
  c.validate();
  std::vector<StrataMembership> rows = classify_strata(map, candidates, k, eps, r);
  std::vector<Vec> S;
  for (const auto& row : rows)
    if (row.member) S.push_back(row.x);
  StrataReport rep = energy_induction(map, S, c);
  rep.rows = std::move(rows);
  return rep;
}

}  // namespace qstrat
