#pragma once

#include "qstrat/covering.hpp"
#include "qstrat/sampled_map.hpp"

#include <json.hpp>

#include <map>
#include <set>
#include <string>
#include <vector>

namespace qstrat::app {

struct KeySpec {
  std::string key;
  std::string value;  // default
  std::string help;
};

// Flat key = value configuration. Later assignments win, so a config file followed by
// command-line overrides gives the overrides precedence.
class RunConfig {
 public:
  RunConfig();

  static const std::vector<KeySpec>& keys();

  // '#' starts a comment; blank lines are skipped. Throws InputError with the line number.
  void load_file(const std::string& path);
  void load(std::istream& in);
  // Throws ConfigError for an unknown key.
  void set(const std::string& key, const std::string& value);
  // "key=value"
  void set_assignment(const std::string& assignment);

  const std::string& get(const std::string& key) const;
  double num(const std::string& key) const;
  int integer(const std::string& key) const;
  bool flag(const std::string& key) const;
  std::vector<double> list(const std::string& key) const;
  std::vector<std::string> words(const std::string& key) const;
  bool explicitly_set(const std::string& key) const { return explicit_.count(key) > 0; }

  // Checks every numeric key and the module preconditions. Throws ConfigError.
  void validate(const std::string& command) const;

  // Effective configuration in registry order.
  nlohmann::ordered_json echo() const;

  bool catalog_map() const;
  GridDomain domain() const;
  SampledMap load_map() const;
  CoveringConfig covering(double r) const;
  // tau_q from the key, or the quadrature tolerance when it is "auto".
  double tau_q(const SampledMap& map, double Lambda) const;

 private:
  std::map<std::string, std::string> values_;
  std::set<std::string> explicit_;
};

}  // namespace qstrat::app
