#include "qstrat/catalog.hpp"

#include "qstrat/errors.hpp"

#include <cmath>
#include <vector>

namespace qstrat {

const char* to_string(Exactness e) {
  switch (e) {
    case Exactness::harmonic: return "harmonic";
    case Exactness::approximate: return "approximate";
    case Exactness::constant: return "constant";
  }
  return "?";
}

void MapFunction::tension(const double*, double* f) const {
  for (int a = 0; a < target_dim(); ++a) f[a] = 0.0;
}

namespace {

class ConstantFn final : public MapFunction {
 public:
  ConstantFn(int m, int n) : m_(m), n_(n) {}
  int domain_dim() const override { return m_; }
  int target_dim() const override { return n_; }
  void value(const double*, double* u) const override {
    for (int a = 0; a < n_; ++a) u[a] = a == 0 ? 1.0 : 0.0;
  }
  void jacobian(const double*, double* du) const override {
    for (int i = 0; i < m_ * n_; ++i) du[i] = 0.0;
  }

 private:
  int m_, n_;
};

// x/|x| on the first d coordinates of R^m (d = m for the plain radial map).
class RadialFn final : public MapFunction {
 public:
  RadialFn(int m, int d) : m_(m), d_(d) {}
  int domain_dim() const override { return m_; }
  int target_dim() const override { return d_; }
  void value(const double* x, double* u) const override {
    double r = base_norm(x);
    if (r == 0.0) {
      for (int a = 0; a < d_; ++a) u[a] = a == 0 ? 1.0 : 0.0;
      return;
    }
    for (int a = 0; a < d_; ++a) u[a] = x[a] / r;
  }
  void jacobian(const double* x, double* du) const override {
    for (int i = 0; i < m_ * d_; ++i) du[i] = 0.0;
    double r = base_norm(x);
    if (r == 0.0) return;
    double inv = 1.0 / r;
    for (int i = 0; i < d_; ++i)
      for (int a = 0; a < d_; ++a)
        du[i * d_ + a] = ((i == a ? 1.0 : 0.0) - x[i] * x[a] * inv * inv) * inv;
  }
  double singular_distance(const double* x) const override { return base_norm(x); }

 private:
  double base_norm(const double* x) const {
    double s = 0.0;
    for (int a = 0; a < d_; ++a) s += x[a] * x[a];
    return std::sqrt(s);
  }
  int m_, d_;
};

class PerturbedFn final : public MapFunction {
 public:
  PerturbedFn(int m, double a) : m_(m), a_(a) {}
  int domain_dim() const override { return m_; }
  int target_dim() const override { return m_; }
  bool zero_tension() const override { return false; }
  double singular_distance(const double* x) const override {
    double s = 0.0;
    for (int i = 0; i < m_; ++i) s += x[i] * x[i];
    return std::sqrt(s);
  }
  void value(const double* x, double* u) const override {
    double p[16];
    double np = phi(x, p);
    if (np == 0.0) {
      for (int a = 0; a < m_; ++a) u[a] = a == 0 ? 1.0 : 0.0;
      return;
    }
    for (int a = 0; a < m_; ++a) u[a] = p[a] / np;
  }
  void jacobian(const double* x, double* du) const override {
    double p[16];
    double np = phi(x, p);
    if (np == 0.0) {
      for (int i = 0; i < m_ * m_; ++i) du[i] = 0.0;
      return;
    }
    double u[16];
    for (int a = 0; a < m_; ++a) u[a] = p[a] / np;
    for (int i = 0; i < m_; ++i) {
      // d_i Phi_b = delta_ib + 2 a x_i [i == b+1 mod m]
      double dphi[16];
      for (int b = 0; b < m_; ++b) dphi[b] = (i == b ? 1.0 : 0.0);
      int b = (i + m_ - 1) % m_;
      dphi[b] += 2.0 * a_ * x[i];
      double dot = 0.0;
      for (int c = 0; c < m_; ++c) dot += u[c] * dphi[c];
      for (int c = 0; c < m_; ++c) du[i * m_ + c] = (dphi[c] - u[c] * dot) / np;
    }
  }
  // f = Lap u + |grad u|^2 u with u = Phi/rho, rho = |Phi|, Lap Phi_b = 2a.
  void tension(const double* x, double* f) const override {
    double p[16];
    double rho = phi(x, p);
    if (rho == 0.0) {
      for (int a = 0; a < m_; ++a) f[a] = 0.0;
      return;
    }
    double J[256];  // J[i*m + b] = d_i Phi_b
    for (int i = 0; i < m_; ++i) {
      for (int b = 0; b < m_; ++b) J[i * m_ + b] = i == b ? 1.0 : 0.0;
      J[i * m_ + (i + m_ - 1) % m_] += 2.0 * a_ * x[i];
    }
    double g[16], g2 = 0.0, J2 = 0.0, pL = 0.0;
    for (int i = 0; i < m_; ++i) {
      double d = 0.0;
      for (int b = 0; b < m_; ++b) {
        d += p[b] * J[i * m_ + b];
        J2 += J[i * m_ + b] * J[i * m_ + b];
      }
      g[i] = d / rho;
      g2 += g[i] * g[i];
    }
    for (int b = 0; b < m_; ++b) pL += 2.0 * a_ * p[b];
    double lap_rho = (J2 + pL) / rho - g2 / rho;
    double lap_inv = -lap_rho / (rho * rho) + 2.0 * g2 / (rho * rho * rho);
    double du[256];
    jacobian(x, du);
    double grad2 = 0.0;
    for (int i = 0; i < m_ * m_; ++i) grad2 += du[i] * du[i];
    for (int c = 0; c < m_; ++c) {
      double cross = 0.0;
      for (int i = 0; i < m_; ++i) cross += J[i * m_ + c] * g[i];
      double lap_u = 2.0 * a_ / rho - 2.0 * cross / (rho * rho) + p[c] * lap_inv;
      f[c] = lap_u + grad2 * p[c] / rho;
    }
  }

 private:
  double phi(const double* x, double* p) const {
    double s = 0.0;
    for (int i = 0; i < m_; ++i) {
      double q = x[(i + 1) % m_];
      p[i] = x[i] + a_ * q * q;
      s += p[i] * p[i];
    }
    return std::sqrt(s);
  }
  int m_;
  double a_;
};

}  // namespace

MapCatalogEntry constant_map(int m, int n) {
  if (m < 2 || n < 1) throw ConfigError("constant map needs m >= 2 and n >= 1");
  return {"constant", std::make_shared<ConstantFn>(m, n), Exactness::constant,
          "u = e_1"};
}

MapCatalogEntry radial_map(int m) {
  if (m < 3 || m > 16) throw ConfigError("radial map x/|x| needs 3 <= m <= 16");
  return {"radial", std::make_shared<RadialFn>(m, m), Exactness::harmonic, "u = x/|x|"};
}

MapCatalogEntry symmetric_extension(int base_dim, int extra_dims) {
  if (base_dim < 3 || extra_dims < 1 || base_dim + extra_dims > 16)
    throw ConfigError("symmetric extension needs base dimension >= 3 and >= 1 extra direction");
  return {"extension", std::make_shared<RadialFn>(base_dim + extra_dims, base_dim),
          Exactness::harmonic, "g(x, y) = x/|x|, invariant in y"};
}

MapCatalogEntry perturbed_radial_map(int m, double a) {
  if (m < 3 || m > 16) throw ConfigError("perturbed map needs 3 <= m <= 16");
  if (!(a > 0.0) || a > 0.25) throw ConfigError("perturbation amplitude must lie in (0, 0.25]");
  return {"perturbed", std::make_shared<PerturbedFn>(m, a), Exactness::approximate,
          "u = Phi/|Phi|, Phi_i = x_i + a x_{i+1}^2"};
}

MapCatalogEntry catalog_entry(const std::string& name, int m,
                              const std::map<std::string, double>& params) {
  auto get = [&](const char* key, double def) {
    auto it = params.find(key);
    return it == params.end() ? def : it->second;
  };
  if (name == "constant") return constant_map(m, static_cast<int>(get("n", m)));
  if (name == "radial") return radial_map(m);
  if (name == "extension") {
    int extra = static_cast<int>(get("extra_dims", 1));
    return symmetric_extension(m - extra, extra);
  }
  if (name == "perturbed") return perturbed_radial_map(m, get("amplitude", 0.1));
  throw ConfigError("unknown catalog map '" + name + "'");
}

std::vector<std::string> catalog_names() { return {"constant", "radial", "extension", "perturbed"}; }

}  // namespace qstrat
