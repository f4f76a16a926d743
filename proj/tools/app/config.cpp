#include "config.hpp"

#include "qstrat/catalog.hpp"
#include "qstrat/energy.hpp"
#include "qstrat/errors.hpp"
#include "qstrat/map_io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace qstrat::app {

namespace {

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& key, const std::string& v) {
  std::size_t pos = 0;
  double x = 0.0;
  try {
    x = std::stod(v, &pos);
  } catch (const std::exception&) {
    throw ConfigError(key + ": '" + v + "' is not a number");
  }
  if (pos != v.size() || !std::isfinite(x)) throw ConfigError(key + ": '" + v + "' is not a finite number");
  return x;
}

const std::set<std::string> kNumeric = {
    "m", "R", "h", "n", "extra_dims", "amplitude", "k", "eps", "candidate_radius", "candidate_stride",
    "rho", "delta", "cover_R", "max_rounds", "pinch_factor", "containment_factor", "C_V", "C_F", "c_m",
    "tau_factor", "F", "gamma", "minkowski_cell", "delta_R", "dini_depth", "test_top", "test_levels",
    "beta_top", "beta_levels", "workers", "seed", "restarts", "oracle_trials", "verify_centers"};
const std::set<std::string> kIntegers = {"m", "n", "extra_dims", "k", "candidate_stride", "max_rounds",
                                         "dini_depth", "test_levels", "beta_levels", "workers", "seed",
                                         "restarts", "oracle_trials", "verify_centers"};

}  // namespace

const std::vector<KeySpec>& RunConfig::keys() {
  static const std::vector<KeySpec> k = {
      {"map", "radial", "catalog name (constant, radial, extension, perturbed) or map file path"},
      {"m", "3", "domain dimension of catalog maps"},
      {"R", "3", "radius of the sampled ball"},
      {"h", "0.046875", "lattice spacing"},
      {"n", "3", "target dimension of the constant map"},
      {"extra_dims", "1", "translation-invariant directions of the extension map"},
      {"amplitude", "0.1", "perturbation amplitude of the perturbed map"},
      {"k", "0", "stratum / plane dimension"},
      {"eps", "0.3", "symmetry threshold"},
      {"r", "0.0625,0.03125,0.015625", "final scales (comma separated)"},
      {"candidate_radius", "0.25", "candidates are lattice nodes in this ball about the origin"},
      {"candidate_stride", "1", "keep nodes whose indices are multiples of the stride"},
      {"rho", "0.0078125", "covering ratio (power of 2, at most 1/100)"},
      {"delta", "0", "energy pinch (0: 0.05 E)"},
      {"cover_R", "1", "root radius of the covering"},
      {"max_rounds", "64", "round cap per lemma"},
      {"pinch_factor", "0.1", "pinched-set scale factor"},
      {"containment_factor", "0.2", "tube radius factor"},
      {"C_V", "100", "Lemma I content constant"},
      {"C_F", "200", "Lemma II content constant"},
      {"c_m", "1", "induction content constant"},
      {"tau_q", "auto", "quadrature tolerance, or auto"},
      {"tau_factor", "0.05", "factor of the automatic tolerance"},
      {"enforce_decay", "true", "abort when bad content fails to halve"},
      {"F", "0", "condition (f) constant"},
      {"gamma", "1", "condition (f) exponent"},
      {"minkowski_cell", "0", "cell of the Minkowski estimate (0: r/8)"},
      {"cover_mode", "induction", "induction, lemma1 or lemma2"},
      {"measure", "", "measure file (beta)"},
      {"covering", "", "covering file (reifenberg)"},
      {"delta_R", "0.1", "Reifenberg threshold"},
      {"dini_depth", "0", "Dini depth (0: automatic)"},
      {"test_top", "1", "largest test ball radius"},
      {"test_levels", "4", "dyadic test radii"},
      {"beta_top", "1", "largest beta scale"},
      {"beta_levels", "6", "dyadic beta scales"},
      {"out", "out", "output directory"},
      {"formats", "csv,json", "outputs to write"},
      {"workers", "1", "worker threads"},
      {"seed", "12345", "random seed"},
      {"suites", "all", "verify suites: energy, monotonicity, beta_oracle, beta_properties, reifenberg, covering"},
      {"restarts", "50", "random restarts of the brute-force beta oracle (0 skips it)"},
      {"oracle_trials", "20", "random measures per beta suite"},
      {"verify_centers", "8", "random centers per map in the monotonicity suite"},
  };
  return k;
}

RunConfig::RunConfig() {
  for (const auto& k : keys()) values_[k.key] = k.value;
}

void RunConfig::set(const std::string& key, const std::string& value) {
  auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError("unknown configuration key '" + key + "'");
  it->second = value;
  explicit_.insert(key);
}

void RunConfig::set_assignment(const std::string& a) {
  auto eq = a.find('=');
  if (eq == std::string::npos) throw ConfigError("expected key=value, got '" + a + "'");
  set(trim(a.substr(0, eq)), trim(a.substr(eq + 1)));
}

void RunConfig::load(std::istream& in) {
  std::string line;
  long no = 0;
  while (std::getline(in, line)) {
    ++no;
    auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    try {
      set_assignment(line);
    } catch (const ConfigError& e) {
      throw InputError(e.what(), no);
    }
  }
}

void RunConfig::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open config '" + path + "'");
  load(in);
}

const std::string& RunConfig::get(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError("unknown configuration key '" + key + "'");
  return it->second;
}

double RunConfig::num(const std::string& key) const { return parse_double(key, get(key)); }

int RunConfig::integer(const std::string& key) const {
  double v = num(key);
  if (v != std::floor(v) || std::fabs(v) > 2e9) throw ConfigError(key + " must be an integer");
  return static_cast<int>(v);
}

bool RunConfig::flag(const std::string& key) const {
  const std::string& v = get(key);
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError(key + ": '" + v + "' is not a boolean");
}

std::vector<std::string> RunConfig::words(const std::string& key) const {
  std::vector<std::string> out;
  std::stringstream ss(get(key));
  std::string t;
  while (std::getline(ss, t, ',')) {
    t = trim(t);
    if (!t.empty()) out.push_back(t);
  }
  return out;
}

std::vector<double> RunConfig::list(const std::string& key) const {
  std::vector<double> out;
  for (const auto& w : words(key)) out.push_back(parse_double(key, w));
  return out;
}

bool RunConfig::catalog_map() const {
  auto names = catalog_names();
  return std::find(names.begin(), names.end(), get("map")) != names.end();
}

GridDomain RunConfig::domain() const {
  GridDomain d;
  d.m = integer("m");
  d.R = num("R");
  d.h = num("h");
  return d;
}

SampledMap RunConfig::load_map() const {
  SampledMap map;
  if (catalog_map()) {
    std::map<std::string, double> p{{"n", num("n")}, {"extra_dims", num("extra_dims")},
                                    {"amplitude", num("amplitude")}};
    map = sample_map(catalog_entry(get("map"), integer("m"), p), domain());
  } else {
    map = read_map(get("map"));
  }
  QuadratureOptions q = map.quadrature();
  q.workers = integer("workers");
  map.set_quadrature(q);
  return map;
}

CoveringConfig RunConfig::covering(double r) const {
  CoveringConfig c;
  c.k = integer("k");
  c.eps = num("eps");
  c.rho = num("rho");
  c.delta = num("delta");
  c.r = r;
  c.R = num("cover_R");
  c.max_rounds = integer("max_rounds");
  c.pinch_factor = num("pinch_factor");
  c.containment_factor = num("containment_factor");
  c.C_V = num("C_V");
  c.C_F = num("C_F");
  c.c_m = num("c_m");
  c.enforce_decay = flag("enforce_decay");
  c.F = num("F");
  c.gamma = num("gamma");
  c.minkowski_cell = num("minkowski_cell");
  return c;
}

double RunConfig::tau_q(const SampledMap& map, double Lambda) const {
  if (get("tau_q") == "auto") return quadrature_tolerance(map, Lambda, num("tau_factor"));
  return num("tau_q");
}

void RunConfig::validate(const std::string& command) const {
  for (const auto& k : kNumeric) {
    if (kIntegers.count(k))
      integer(k);
    else
      num(k);
  }
  flag("enforce_decay");
  if (get("tau_q") != "auto" && num("tau_q") < 0.0) throw ConfigError("tau_q must be >= 0 or auto");
  if (num("tau_factor") < 0.0) throw ConfigError("tau_factor must be >= 0");
  if (integer("workers") < 1) throw ConfigError("workers must be >= 1");
  if (integer("k") < 0) throw ConfigError("k must be >= 0");
  for (const auto& f : words("formats"))
    if (f != "csv" && f != "json") throw ConfigError("unknown output format '" + f + "'");
  if (get("out").empty()) throw ConfigError("out must name a directory");

  bool needs_map = command == "analyze" || command == "cover";
  if (needs_map && catalog_map()) {
    domain().validate();
    if (integer("k") >= integer("m")) throw ConfigError("k must be smaller than m");
  }
  if (needs_map) {
    if (!(num("eps") > 0.0)) throw ConfigError("eps must be positive");
    auto rs = list("r");
    if (rs.empty()) throw ConfigError("r needs at least one value");
    for (double r : rs) covering(r).validate();
    if (!(num("candidate_radius") > 0.0)) throw ConfigError("candidate_radius must be positive");
    if (integer("candidate_stride") < 1) throw ConfigError("candidate_stride must be >= 1");
    const std::string& mode = get("cover_mode");
    if (mode != "induction" && mode != "lemma1" && mode != "lemma2")
      throw ConfigError("cover_mode must be induction, lemma1 or lemma2");
  }
  if (command == "beta") {
    if (get("measure").empty()) throw ConfigError("beta needs a measure file");
    if (!(num("beta_top") > 0.0) || integer("beta_levels") < 1) throw ConfigError("beta scales must be positive");
  }
  if (command == "reifenberg") {
    if (get("covering").empty()) throw ConfigError("reifenberg needs a covering file");
    if (!(num("delta_R") > 0.0)) throw ConfigError("delta_R must be positive");
    if (!(num("test_top") > 0.0) || integer("test_levels") < 1) throw ConfigError("test scales must be positive");
    if (integer("dini_depth") < 0) throw ConfigError("dini_depth must be >= 0");
  }
  if (command == "verify") {
    if (integer("restarts") < 0) throw ConfigError("restarts must be >= 0");
    if (integer("oracle_trials") < 1 || integer("verify_centers") < 1)
      throw ConfigError("oracle_trials and verify_centers must be >= 1");
    static const std::set<std::string> suites = {"all", "energy", "monotonicity", "beta_oracle",
                                                 "beta_properties", "reifenberg", "covering"};
    for (const auto& s : words("suites"))
      if (!suites.count(s)) throw ConfigError("unknown suite '" + s + "'");
  }
}

nlohmann::ordered_json RunConfig::echo() const {
  nlohmann::ordered_json j = nlohmann::ordered_json::object();
  for (const auto& k : keys()) j[k.key] = values_.at(k.key);
  return j;
}

}  // namespace qstrat::app
