#include "commands.hpp"

#include "qstrat/covering.hpp"
#include "qstrat/energy.hpp"
#include "qstrat/errors.hpp"
#include "qstrat/jones_beta.hpp"
#include "qstrat/map_io.hpp"
#include "qstrat/reifenberg.hpp"
#include "qstrat/symmetry.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <ostream>

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace qstrat::app {

namespace {

bool wants(const RunConfig& cfg, const char* format) {
  for (const auto& f : cfg.words("formats"))
    if (f == format) return true;
  return false;
}

fs::path out_dir(const RunConfig& cfg) {
  fs::path p(cfg.get("out"));
  fs::create_directories(p);
  return p;
}

std::ofstream open(const fs::path& p) {
  std::ofstream f(p);
  if (!f) throw InputError("cannot write '" + p.string() + "'");
  return f;
}

void write_json(const fs::path& p, const json& j) {
  auto f = open(p);
  f << j.dump(2) << '\n';
}

json vec_json(const Vec& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

// Finite doubles only; JSON has no inf/nan.
json num(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

std::vector<Vec> candidates(const RunConfig& cfg, const SampledMap& map) {
  std::vector<Vec> out;
  int stride = cfg.integer("candidate_stride");
  double rad = cfg.num("candidate_radius");
  for_each_lattice_node(map.domain(), Vec::Zero(map.m()), rad, [&](const std::vector<long>& id, const Vec& p) {
    for (long v : id)
      if (v % stride != 0) return;
    out.push_back(p);
  });
  return out;
}

json rounds_json(const CoveringReport& rep) {
  json a = json::array();
  for (const auto& r : rep.rounds)
    a.push_back({{"phase", r.phase},
                 {"level", r.level},
                 {"round", r.round},
                 {"generation", r.generation},
                 {"radius", r.radius},
                 {"good", r.good},
                 {"bad", r.bad},
                 {"final", r.final_count},
                 {"r_balls", r.r_count},
                 {"bad_content", r.bad_content},
                 {"bad_bound", r.bad_bound},
                 {"content", r.content},
                 {"disjoint", r.disjoint}});
  return a;
}

json assertions_json(const CoveringReport& rep) {
  return {{"coverage", rep.coverage_ok},
          {"uncovered", rep.uncovered},
          {"disjointness", rep.disjoint_ok},
          {"bad_content_decay", rep.decay_ok},
          {"content_bound", rep.content_ok},
          {"energy_drop", rep.energy_drop_ok},
          {"energy_drop_checked", rep.energy_drop_checked},
          {"containment_violations", rep.containment_violations},
          {"partial", rep.partial}};
}

bool structural_ok(const CoveringReport& rep) { return rep.coverage_ok && rep.disjoint_ok && rep.decay_ok; }

}  // namespace

double loglog_slope(const std::vector<double>& scales, const std::vector<double>& values) {
  double n = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < scales.size(); ++i) {
    if (!(values[i] > 0.0)) continue;
    double x = std::log(scales[i]), y = std::log(values[i]);
    n += 1;
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  double den = n * sxx - sx * sx;
  if (n < 2 || den == 0.0) return std::numeric_limits<double>::quiet_NaN();
  return (n * sxy - sx * sy) / den;
}

int run_analyze(const RunConfig& cfg, std::ostream& log) {
  SampledMap map = cfg.load_map();
  fs::path dir = out_dir(cfg);
  std::vector<Vec> cand = candidates(cfg, map);
  const int k = cfg.integer("k");
  const double eps = cfg.num("eps");
  std::vector<double> rs = cfg.list("r");
  std::vector<StrataMembership> all_rows;
  std::vector<double> content;
  json per_r = json::array();
  bool ok = true;
  for (std::size_t i = 0; i < rs.size(); ++i) {
    CoveringConfig cc = cfg.covering(rs[i]);
    StrataReport rep = energy_induction(map, k, eps, rs[i], cc, cand);
    log << "r = " << rs[i] << ": " << rep.set.size() << " of " << cand.size() << " candidates in the stratum, "
        << rep.covering.covering.balls.size() << " balls\n";
    all_rows.insert(all_rows.end(), rep.rows.begin(), rep.rows.end());
    content.push_back(rep.minkowski_covering);
    write_covering(dir / ("covering_" + std::to_string(i) + ".txt"), rep.covering.covering);
    ok = ok && structural_ok(rep.covering);
    per_r.push_back({{"r", rs[i]},
                     {"candidates", cand.size()},
                     {"members", rep.set.size()},
                     {"balls", rep.covering.covering.balls.size()},
                     {"packing_sum", rep.covering.content},
                     {"minkowski_covering", rep.minkowski_covering},
                     {"minkowski_points", rep.minkowski_points},
                     {"minkowski_cell", rep.minkowski_cell},
                     {"E", rep.covering.E},
                     {"delta", rep.covering.delta},
                     {"levels", rep.covering.levels},
                     {"assertions", assertions_json(rep.covering)},
                     {"rounds", rounds_json(rep.covering)}});
  }
  double slope = loglog_slope(rs, content);
  if (wants(cfg, "csv")) {
    auto f = open(dir / "strata.csv");
    write_strata_csv(f, all_rows);
    auto g = open(dir / "minkowski.csv");
    g << "r,members,balls,minkowski_covering,minkowski_points\n";
    for (std::size_t i = 0; i < rs.size(); ++i)
      g << format_number(rs[i]) << ',' << per_r[i]["members"].get<std::size_t>() << ','
        << per_r[i]["balls"].get<std::size_t>() << ',' << format_number(content[i]) << ','
        << format_number(per_r[i]["minkowski_points"].get<double>()) << '\n';
  }
  if (wants(cfg, "json")) {
    json j = {{"command", "analyze"},
              {"config", cfg.echo()},
              {"map", {{"name", map.name()}, {"m", map.m()}, {"R", map.domain().R}, {"h", map.domain().h}}},
              {"scales", per_r},
              {"minkowski_exponent_fit", num(slope)},
              {"predicted_exponent", map.m() - k},
              {"pass", ok}};
    write_json(dir / "summary.json", j);
  }
  log << "Minkowski exponent fit " << slope << " (predicted " << map.m() - k << ")\n";
  return ok ? 0 : 1;
}

int run_cover(const RunConfig& cfg, std::ostream& log) {
  SampledMap map = cfg.load_map();
  fs::path dir = out_dir(cfg);
  std::vector<Vec> cand = candidates(cfg, map);
  const int k = cfg.integer("k");
  double r = cfg.list("r").front();
  CoveringConfig cc = cfg.covering(r);
  std::vector<StrataMembership> rows = classify_strata(map, cand, k, cfg.num("eps"), r);
  std::vector<Vec> S;
  for (const auto& row : rows)
    if (row.member) S.push_back(row.x);
  const std::string mode = cfg.get("cover_mode");
  CoveringReport rep;
  json extra = json::object();
  if (mode == "lemma1") {
    rep = cover_strata_I(map, S, cc);
  } else if (mode == "lemma2") {
    rep = cover_strata_II(map, S, cc);
  } else {
    StrataReport sr = energy_induction(map, S, cc);
    rep = sr.covering;
    extra = {{"minkowski_covering", sr.minkowski_covering}, {"minkowski_points", sr.minkowski_points}};
  }
  write_covering(dir / "covering.txt", rep.covering);
  if (wants(cfg, "json")) {
    json j = {{"command", "cover"},
              {"config", cfg.echo()},
              {"mode", mode},
              {"members", S.size()},
              {"balls", rep.covering.balls.size()},
              {"packing_sum", rep.content},
              {"content_bound", rep.content_bound},
              {"E", rep.E},
              {"delta", rep.delta},
              {"levels", rep.levels},
              {"lemma_rounds", rep.lemma_rounds},
              {"rounds", rounds_json(rep)},
              {"assertions", assertions_json(rep)},
              {"warnings", rep.warnings},
              {"estimates", extra},
              {"pass", structural_ok(rep)}};
    write_json(dir / "cover.json", j);
  }
  log << S.size() << " points covered by " << rep.covering.balls.size() << " balls\n";
  return structural_ok(rep) ? 0 : 1;
}

int run_beta(const RunConfig& cfg, std::ostream& log) {
  DiscreteMeasure mu = read_measure(cfg.get("measure"));
  fs::path dir = out_dir(cfg);
  const int k = cfg.integer("k");
  if (k >= mu.dim()) throw ConfigError("k must be smaller than the measure dimension");
  const double top = cfg.num("beta_top");
  const int levels = cfg.integer("beta_levels");
  std::vector<BetaRow> rows;
  double max_beta = 0.0, total = 0.0;
  for (const Atom& a : mu.atoms()) {
    double partial = 0.0;
    for (int j = 0; j < levels; ++j) {
      double s = top * std::ldexp(1.0, -j);
      double b = beta2(mu, a.x, s, k).beta2;
      partial += b * std::log(2.0);
      rows.push_back({a.x, s, k, b, partial});
      max_beta = std::max(max_beta, b);
    }
    total += a.w * partial;
  }
  if (wants(cfg, "csv")) {
    auto f = open(dir / "beta.csv");
    write_beta_csv(f, rows);
  }
  if (wants(cfg, "json")) {
    json j = {{"command", "beta"},
              {"config", cfg.echo()},
              {"atoms", mu.size()},
              {"total_mass", mu.total_mass()},
              {"max_beta2", max_beta},
              {"weighted_dini", total}};
    write_json(dir / "beta.json", j);
  }
  log << rows.size() << " beta values, max " << max_beta << '\n';
  return 0;
}

int run_reifenberg(const RunConfig& cfg, std::ostream& log) {
  BallCovering c = read_covering(cfg.get("covering"));
  if (cfg.explicitly_set("k")) c.k = cfg.integer("k");
  if (c.k >= c.m) throw ConfigError("k must be smaller than the covering dimension");
  fs::path dir = out_dir(cfg);
  DiscreteMeasure mu = covering_measure(c);
  std::vector<TestBall> tbs = default_test_balls(mu, cfg.num("test_top"), cfg.integer("test_levels"));
  ReifenbergReport rep = discrete_reifenberg_check(c, cfg.num("delta_R"), tbs, cfg.integer("dini_depth"));
  if (wants(cfg, "json")) {
    json worst = json::array();
    for (const auto& o : rep.worst) worst.push_back({{"center", vec_json(o.center)}, {"r", o.r}, {"ratio", o.ratio}});
    json j = {{"command", "reifenberg"},
              {"config", cfg.echo()},
              {"k", c.k},
              {"balls", c.balls.size()},
              {"max_dini_ratio", rep.max_dini_ratio},
              {"packing_sum", rep.packing_sum},
              {"threshold", rep.threshold},
              {"pass", rep.pass},
              {"tested_balls", rep.tested_balls},
              {"dini_depth", rep.dini_depth},
              {"worst", worst}};
    write_json(dir / "reifenberg.json", j);
  }
  log << "max Dini ratio " << rep.max_dini_ratio << " vs " << rep.threshold << ": " << (rep.pass ? "pass" : "fail")
      << '\n';
  return rep.pass ? 0 : 1;
}

int dispatch(const std::string& command, const RunConfig& cfg, std::ostream& log, std::ostream& err) {
  auto fail = [&](const std::string& kind, const std::string& what, long line, int status) {
    err << "qstrat " << command << ": " << what << '\n';
    try {
      fs::path dir(cfg.get("out"));
      fs::create_directories(dir);
      json j = {{"command", command}, {"status", status}, {"error", kind}, {"message", what}};
      if (line > 0) j["line"] = line;
      j["config"] = cfg.echo();
      write_json(dir / "error.json", j);
    } catch (...) {
    }
    return status;
  };
  try {
    cfg.validate(command);
    if (command == "analyze") return run_analyze(cfg, log);
    if (command == "cover") return run_cover(cfg, log);
    if (command == "beta") return run_beta(cfg, log);
    if (command == "reifenberg") return run_reifenberg(cfg, log);
    if (command == "verify") return run_verify(cfg, log);
    throw ConfigError("unknown command '" + command + "'");
  } catch (const InputError& e) {
    return fail("input", e.what(), e.line(), 2);
  } catch (const DecayViolationError& e) {
    return fail("decay_violation", e.what(), 0, 1);
  } catch (const ConfigError& e) {
    return fail("config", e.what(), 0, 2);
  } catch (const Error& e) {
    return fail("module", e.what(), 0, 2);
  } catch (const fs::filesystem_error& e) {
    return fail("io", e.what(), 0, 2);
  }
}

}  // namespace qstrat::app
