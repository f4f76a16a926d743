#pragma once

#include "qstrat/energy.hpp"
#include "qstrat/jones_beta.hpp"
#include "qstrat/reifenberg.hpp"
#include "qstrat/sampled_map.hpp"
#include "qstrat/symmetry.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace qstrat {

// Map file: header `m n R h count`, then per node m coordinates, n values and optionally
// n residual components. Parse errors throw InputError carrying the 1-based line.
struct MapFileData {
  GridDomain domain;
  int n = 0;
  std::vector<Vec> coords;
  std::vector<Vec> values;
  std::vector<Vec> residuals;  // empty when the file has none
};
MapFileData parse_map(std::istream& in);
MapFileData read_map_data(const std::string& path);
SampledMap read_map(const std::string& path);
SampledMap map_from_data(const MapFileData& data);
// Writes every lattice node of the ball B_{R}(0) (values, and residuals when requested).
void write_map(std::ostream& out, const SampledMap& map, bool residuals);
void write_map(const std::string& path, const SampledMap& map, bool residuals);

// Measure file: header `m count`, then per atom m coordinates and a weight.
DiscreteMeasure parse_measure(std::istream& in);
DiscreteMeasure read_measure(const std::string& path);
void write_measure(std::ostream& out, const DiscreteMeasure& mu);

// Covering file: header `m k count`, then per ball center, radius and label token.
BallCovering parse_covering(std::istream& in);
BallCovering read_covering(const std::string& path);
void write_covering(std::ostream& out, const BallCovering& c);
void write_covering(const std::string& path, const BallCovering& c);

struct BetaRow {
  Vec center;
  double scale = 0.0;
  int k = 0;
  double beta2 = 0.0;
  double dini_partial = 0.0;
};

// CSV exports; numbers use %.17g.
void write_profile_csv(std::ostream& out, const std::vector<EnergyProfile>& profiles);
void write_strata_csv(std::ostream& out, const std::vector<StrataMembership>& rows);
void write_beta_csv(std::ostream& out, const std::vector<BetaRow>& rows);

std::string format_number(double v);

}  // namespace qstrat
