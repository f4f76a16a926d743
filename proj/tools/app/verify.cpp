#include "commands.hpp"

#include "qstrat/covering.hpp"
#include "qstrat/energy.hpp"
#include "qstrat/errors.hpp"
#include "qstrat/jones_beta.hpp"
#include "qstrat/map_io.hpp"
#include "qstrat/reifenberg.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <random>

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace qstrat::app {

namespace {

struct Check {
  std::string suite, name, status;
  double value = 0.0, threshold = 0.0;
};

class Suite {
 public:
  Suite(std::vector<Check>& out, std::string name) : out_(out), name_(std::move(name)) {}
  // passes when value <= threshold
  void at_most(const std::string& check, double value, double threshold) {
    out_.push_back({name_, check, value <= threshold ? "pass" : "fail", value, threshold});
  }
  void truth(const std::string& check, bool ok, double value = 0.0) {
    out_.push_back({name_, check, ok ? "pass" : "fail", value, 0.0});
  }
  void skipped(const std::string& check) { out_.push_back({name_, check, "skipped", 0.0, 0.0}); }

 private:
  std::vector<Check>& out_;
  std::string name_;
};

Vec random_in_ball(std::mt19937_64& g, int m, double rad) {
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  Vec x(m);
  do {
    for (int i = 0; i < m; ++i) x[i] = U(g);
  } while (x.norm() > 1.0);
  return rad * x;
}

DiscreteMeasure random_measure(std::mt19937_64& g, int m, int atoms) {
  std::uniform_real_distribution<double> W(0.05, 1.0);
  DiscreteMeasure mu(m);
  for (int i = 0; i < atoms; ++i) mu.add(random_in_ball(g, m, 1.0), W(g));
  return mu;
}

void energy_suite(const RunConfig& cfg, std::vector<Check>& out) {
  Suite s(out, "energy");
  for (int m : {3, 4}) {
    GridDomain d;
    d.m = m;
    d.R = cfg.num("R");
    d.h = cfg.num("h");
    SampledMap map = sample_map(catalog_entry("radial", m, {}), d);
    double exact = m == 3 ? 8.0 * M_PI : 3.0 * M_PI * M_PI;
    for (double r : {1.0, 0.5, 0.25}) {
      double t = theta(map, Vec::Zero(m), r);
      s.at_most("theta_radial_m" + std::to_string(m) + "_r" + format_number(r), std::fabs(t / exact - 1.0), 0.01);
    }
  }
}

void monotonicity_suite(const RunConfig& cfg, std::vector<Check>& out) {
  Suite s(out, "monotonicity");
  std::mt19937_64 g(static_cast<std::uint64_t>(cfg.integer("seed")));
  const std::vector<double> scales = {1.0, 0.5, 0.25, 0.125};
  const int centers = cfg.integer("verify_centers");
  struct Case {
    const char* name;
    int m;
  };
  for (Case c : {Case{"constant", 3}, Case{"radial", 3}, Case{"perturbed", 3}, Case{"extension", 4}}) {
    GridDomain d;
    d.m = c.m;
    d.R = cfg.num("R");
    d.h = cfg.num("h");
    SampledMap map = sample_map(catalog_entry(c.name, c.m, {}), d);
    QuadratureOptions q = map.quadrature();
    q.workers = cfg.integer("workers");
    map.set_quadrature(q);
    double tau = cfg.tau_q(map, energy_bound(map));
    bool stationary = map.tension_is_zero();
    double defect = 0.0, order = 0.0, identity = 0.0;
    for (int i = 0; i < centers; ++i) {
      Vec x = random_in_ball(g, c.m, 0.5);
      std::vector<BallEnergy> e;
      for (double r : scales) e.push_back(ball_energy(map, x, r));
      // consecutive pairs plus the widest pair
      std::vector<std::pair<std::size_t, std::size_t>> pairs;
      for (std::size_t j = 1; j < scales.size(); ++j) pairs.push_back({j, j - 1});
      pairs.push_back({scales.size() - 1, 0});
      for (auto [js, jr] : pairs) {
        double W = radial_energy(map, x, scales[js], scales[jr]);
        defect = std::max(defect, W - (e[jr].theta_hat - e[js].theta_hat));
        order = std::max(order, e[js].theta_hat - e[jr].theta_hat);
        if (stationary) identity = std::max(identity, std::fabs(e[jr].theta - e[js].theta - 2.0 * W));
      }
    }
    std::string tag = std::string(c.name) + "_m" + std::to_string(c.m);
    s.at_most(tag + "_annulus_defect", std::max(0.0, defect), tau);
    s.at_most(tag + "_theta_hat_order", std::max(0.0, order), tau);
    if (stationary) s.at_most(tag + "_stationary_identity", identity, tau);
  }
}

void beta_oracle_suite(const RunConfig& cfg, std::vector<Check>& out) {
  Suite s(out, "beta_oracle");
  int restarts = cfg.integer("restarts");
  if (restarts == 0) {
    s.skipped("beta2_vs_bruteforce");
    return;
  }
  std::mt19937_64 g(static_cast<std::uint64_t>(cfg.integer("seed")) + 1);
  std::uniform_int_distribution<int> A(1, 20), K(0, 2);
  std::uniform_real_distribution<double> Rr(0.5, 1.0);
  double worst = 0.0;
  for (int t = 0; t < cfg.integer("oracle_trials"); ++t) {
    DiscreteMeasure mu = random_measure(g, 3, A(g));
    int k = K(g);
    Vec x = random_in_ball(g, 3, 0.3);
    double r = Rr(g);
    double a = beta2(mu, x, r, k).beta2;
    double b = beta2_bruteforce(mu, x, r, k, restarts, static_cast<std::uint64_t>(cfg.integer("seed")) + t);
    double rel = std::fabs(a - b) / std::max({a, b, 1e-300});
    if (std::max(a, b) < 1e-13) rel = 0.0;
    worst = std::max(worst, rel);
  }
  s.at_most("beta2_vs_bruteforce", worst, 1e-4);
}

void beta_properties_suite(const RunConfig& cfg, std::vector<Check>& out) {
  Suite s(out, "beta_properties");
  DiscreteMeasure two(3);
  Vec e = Vec::Zero(3);
  e[0] = 0.5;
  two.add(e, 0.5);
  two.add(-e, 0.5);
  s.at_most("two_atom_closed_form", std::fabs(beta2(two, Vec::Zero(3), 1.0, 0).beta2 - 0.25), 1e-10);

  std::mt19937_64 g(static_cast<std::uint64_t>(cfg.integer("seed")) + 2);
  std::uniform_int_distribution<int> A(1, 20), K(0, 2);
  std::uniform_real_distribution<double> Rr(0.3, 1.0);
  const int trials = cfg.integer("oracle_trials");
  int mono = 0, off = 0;
  for (int t = 0; t < trials; ++t) {
    int k = K(g);
    DiscreteMeasure mu = random_measure(g, 3, A(g));
    DiscreteMeasure more = mu;
    for (int i = 0; i < 3; ++i) more.add(random_in_ball(g, 3, 1.0), 0.5);
    Vec x = random_in_ball(g, 3, 0.3);
    double r = Rr(g);
    double b0 = beta2(mu, x, r, k).beta2, b1 = beta2(more, x, r, k).beta2;
    if (b1 < b0 * (1.0 - 1e-12) - 1e-15) ++mono;
    Vec y = x + random_in_ball(g, 3, r);
    double bx = beta2(mu, x, r, k).beta2, by = beta2(mu, y, 2.0 * r, k).beta2;
    if (bx > std::ldexp(by, k + 2) * (1.0 + 1e-12) + 1e-15) ++off;
  }
  s.truth("monotone_in_measure", mono == 0, mono);
  s.truth("off_center_comparison", off == 0, off);
}

BallCovering line_covering(int count, double r) {
  BallCovering c;
  c.m = 3;
  c.k = 1;
  for (int i = 0; i < count; ++i) {
    Vec x = Vec::Zero(3);
    x[0] = -0.5 + r * i;
    c.balls.push_back({x, r, BallLabel::final_ball});
  }
  return c;
}

void reifenberg_suite(const RunConfig& cfg, std::vector<Check>& out) {
  Suite s(out, "reifenberg");
  const double delta_R = cfg.num("delta_R");
  const double r = 1.0 / 32.0;
  BallCovering line = line_covering(32, r);
  auto tb = default_test_balls(covering_measure(line), cfg.num("test_top"), cfg.integer("test_levels"));
  ReifenbergReport a = discrete_reifenberg_check(line, delta_R, tb);
  s.at_most("collinear_dini_ratio", a.max_dini_ratio, 1e-10);
  s.at_most("collinear_packing_vs_length", std::fabs(a.packing_sum / (31.0 * r) - 1.0), 0.1);
  BallCovering plane;
  plane.m = 3;
  plane.k = 1;
  for (int i = 0; i < 16; ++i)
    for (int j = 0; j < 16; ++j) {
      Vec x = Vec::Zero(3);
      x[0] = -0.5 + i / 16.0;
      x[1] = -0.5 + j / 16.0;
      plane.balls.push_back({x, 1.0 / 16.0, BallLabel::final_ball});
    }
  auto tp = default_test_balls(covering_measure(plane), cfg.num("test_top"), cfg.integer("test_levels"));
  ReifenbergReport b = discrete_reifenberg_check(plane, delta_R, tp);
  s.truth("planar_grid_fails_k1", !b.pass, b.max_dini_ratio);
}

void covering_suite(const RunConfig& cfg, std::vector<Check>& out) {
  Suite s(out, "covering");
  std::mt19937_64 g(static_cast<std::uint64_t>(cfg.integer("seed")) + 3);
  std::uniform_real_distribution<double> Rr(0.01, 0.2);
  std::vector<Ball> balls;
  for (int i = 0; i < 100; ++i) balls.push_back({random_in_ball(g, 3, 1.0), Rr(g), BallLabel::good});
  auto kept = vitali_subcover(balls);
  bool disjoint = true, near = true;
  for (std::size_t a = 0; a < kept.size(); ++a)
    for (std::size_t b = a + 1; b < kept.size(); ++b) {
      const Ball &p = balls[kept[a]], &q = balls[kept[b]];
      if ((p.center - q.center).norm() < 0.2 * (p.radius + q.radius)) disjoint = false;
    }
  for (const Ball& b : balls) {
    bool any = false;
    for (std::size_t i : kept)
      if ((b.center - balls[i].center).norm() <= 2.0 * balls[i].radius) any = true;
    near = near && any;
  }
  s.truth("vitali_disjoint", disjoint);
  s.truth("vitali_centers_within_twice_radius", near);

  ScaleReduction red = initial_scale_reduction(3, 0, 1.0, 1.0, 0.1);
  s.at_most("scale_reduction_r0", std::fabs(red.r0 - 0.1), 1e-12);
  s.truth("scale_reduction_disjoint", red.disjoint);

  GridDomain d;
  d.m = 3;
  d.R = cfg.num("R");
  d.h = cfg.num("h");
  SampledMap map = sample_map(catalog_entry("radial", 3, {}), d);
  std::vector<Vec> S;
  for_each_lattice_node(d, Vec::Zero(3), 0.1, [&](const std::vector<long>&, const Vec& p) { S.push_back(p); });
  CoveringConfig cc;
  cc.k = 0;
  cc.r = 1.0 / 64.0;
  cc.enforce_decay = false;
  CoveringReport rep = cover_strata_II(map, S, cc);
  s.truth("lemma2_coverage", rep.coverage_ok, static_cast<double>(rep.uncovered));
  s.truth("lemma2_disjointness", rep.disjoint_ok);
  s.truth("lemma2_bad_content_decay", rep.decay_ok);
}

}  // namespace

int run_verify(const RunConfig& cfg, std::ostream& log) {
  std::vector<std::string> wanted = cfg.words("suites");
  auto on = [&](const char* name) {
    for (const auto& w : wanted)
      if (w == "all" || w == name) return true;
    return false;
  };
  std::vector<Check> checks;
  if (on("energy")) energy_suite(cfg, checks);
  if (on("monotonicity")) monotonicity_suite(cfg, checks);
  if (on("beta_oracle")) beta_oracle_suite(cfg, checks);
  if (on("beta_properties")) beta_properties_suite(cfg, checks);
  if (on("reifenberg")) reifenberg_suite(cfg, checks);
  if (on("covering")) covering_suite(cfg, checks);

  bool ok = true;
  json arr = json::array();
  for (const auto& c : checks) {
    ok = ok && c.status != "fail";
    arr.push_back({{"suite", c.suite},
                   {"check", c.name},
                   {"status", c.status},
                   {"value", std::isfinite(c.value) ? json(c.value) : json(nullptr)},
                   {"threshold", c.threshold}});
    log << c.status << ' ' << c.suite << '.' << c.name << " value=" << c.value << '\n';
  }
  fs::path dir(cfg.get("out"));
  fs::create_directories(dir);
  json j = {{"command", "verify"}, {"config", cfg.echo()}, {"checks", arr}, {"pass", ok}};
  std::ofstream f(dir / "verify.json");
  if (!f) throw InputError("cannot write verify.json");
  f << j.dump(2) << '\n';
  return ok ? 0 : 1;
}

}  // namespace qstrat::app
