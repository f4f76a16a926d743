#pragma once

#include <limits>
#include <map>
#include <memory>
#include <string>
#include <vector>

namespace qstrat {

enum class Exactness { harmonic, approximate, constant };

const char* to_string(Exactness e);

// A closed-form sphere-valued map on R^m. Buffers are caller owned:
// value writes n numbers, jacobian writes m*n numbers with du[i*n + a] = d_i u^a.
class MapFunction {
 public:
  virtual ~MapFunction() = default;
  virtual int domain_dim() const = 0;
  virtual int target_dim() const = 0;
  virtual void value(const double* x, double* u) const = 0;
  virtual void jacobian(const double* x, double* du) const = 0;
  // Tension f = Lap u + |grad u|^2 u. Default: identically zero.
  virtual void tension(const double* x, double* f) const;
  virtual bool zero_tension() const { return true; }
  // Distance to the singular set; infinity for smooth maps.
  virtual double singular_distance(const double* /*x*/) const {
    return std::numeric_limits<double>::infinity();
  }
};

struct MapCatalogEntry {
  std::string name;
  std::shared_ptr<const MapFunction> function;
  Exactness exactness = Exactness::harmonic;
  std::string description;
};

// u = e_1 in S^{n-1}.
MapCatalogEntry constant_map(int m, int n);
// u(x) = x/|x|, m >= 3, n = m.
MapCatalogEntry radial_map(int m);
// g(x, y) = x/|x| with x in R^base_dim and y in R^extra_dims (invariant directions).
MapCatalogEntry symmetric_extension(int base_dim, int extra_dims);
// u = Phi/|Phi| with Phi_i(x) = x_i + a x_{i+1}^2 (indices cyclic). Singular only at 0,
// nonzero tension of size ~ a/|x|.
MapCatalogEntry perturbed_radial_map(int m, double a = 0.1);

// Lookup by name: constant | radial | extension | perturbed.
// params: "extra_dims" (extension, default 1), "amplitude" (perturbed, default 0.1),
// "n" (constant, default m).
MapCatalogEntry catalog_entry(const std::string& name, int m,
                              const std::map<std::string, double>& params = {});
std::vector<std::string> catalog_names();

}  // namespace qstrat
