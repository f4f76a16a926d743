#include "qstrat/sampled_map.hpp"

#include "qstrat/errors.hpp"

#include <cmath>
#include <sstream>

namespace qstrat {

namespace {

std::string fmt_num(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

struct Box {
  std::vector<long> lo, extent;
};

Box domain_box(const GridDomain& d) {
  Box b;
  Vec o = d.offset();
  for (int i = 0; i < d.m; ++i) {
    long lo = static_cast<long>(std::ceil((-d.R - o[i]) / d.h - 1e-9));
    long hi = static_cast<long>(std::floor((d.R - o[i]) / d.h + 1e-9));
    b.lo.push_back(lo);
    b.extent.push_back(hi - lo + 1);
  }
  return b;
}

bool in_domain(const GridDomain& d, const Vec& p) {
  return p.squaredNorm() <= d.R * d.R * (1.0 + 1e-12);
}

// Fill boundary flags and finite-difference gradients from node values.
void finish_dense(DenseField& F, const GridDomain& d, int n, bool compute_grad) {
  int m = d.m;
  long N = F.size();
  std::vector<long> stride(m, 1);
  for (int i = m - 2; i >= 0; --i) stride[i] = stride[i + 1] * F.extent[i + 1];
  std::vector<long> idx(m);
  for (long lin = 0; lin < N; ++lin) {
    if (!(F.flags[lin] & DenseField::present)) continue;
    long rem = lin;
    for (int i = 0; i < m; ++i) {
      idx[i] = rem / stride[i];
      rem %= stride[i];
    }
    bool full = true;
    for (int i = 0; i < m; ++i) {
      bool has_p = idx[i] + 1 < F.extent[i] && (F.flags[lin + stride[i]] & DenseField::present);
      bool has_m = idx[i] > 0 && (F.flags[lin - stride[i]] & DenseField::present);
      if (!(has_p && has_m)) full = false;
      if (!compute_grad) continue;
      for (int a = 0; a < n; ++a) {
        double g = 0.0;
        if (has_p && has_m)
          g = (F.u[(lin + stride[i]) * n + a] - F.u[(lin - stride[i]) * n + a]) / (2.0 * d.h);
        else if (has_p)
          g = (F.u[(lin + stride[i]) * n + a] - F.u[lin * n + a]) / d.h;
        else if (has_m)
          g = (F.u[lin * n + a] - F.u[(lin - stride[i]) * n + a]) / d.h;
        F.du[(lin * m + i) * n + a] = g;
      }
    }
    if (!full) F.flags[lin] |= DenseField::boundary;
    if (compute_grad) F.flags[lin] |= DenseField::fd_gradient;
  }
}

}  // namespace

const char* to_string(Provenance p) {
  switch (p) {
    case Provenance::analytic: return "analytic";
    case Provenance::file: return "file";
    case Provenance::perturbed: return "perturbed";
  }
  return "?";
}

void GridDomain::validate() const {
  if (m < 2) throw ConfigError("domain dimension m must be >= 2");
  if (!(R > 0.0)) throw ConfigError("domain radius R must be positive");
  if (!(h > 0.0) || h > R / 8.0 * (1.0 + 1e-12))
    throw ConfigError("resolution h = " + fmt_num(h) + " violates 0 < h <= R/8 (R = " +
                      fmt_num(R) + ")");
  if (origin.size() != 0 && origin.size() != m) throw ConfigError("origin offset has wrong dimension");
}

long DenseField::size() const {
  long s = 1;
  for (long e : extent) s *= e;
  return s;
}

SampledMap SampledMap::from_entry(const MapCatalogEntry& entry, const GridDomain& domain) {
  domain.validate();
  if (!entry.function) throw ArgumentError("catalog entry has no function");
  if (entry.function->domain_dim() != domain.m)
    throw ConfigError("catalog map dimension does not match the domain");
  SampledMap s;
  s.domain_ = domain;
  s.n_ = entry.function->target_dim();
  s.exactness_ = entry.exactness;
  s.provenance_ = entry.exactness == Exactness::approximate ? Provenance::perturbed : Provenance::analytic;
  s.name_ = entry.name;
  s.fn_ = entry.function;
  s.view_center_ = Vec::Zero(domain.m);
  s.view_scale_ = 1.0;
  return s;
}

SampledMap sample_map(const MapCatalogEntry& entry, const GridDomain& domain) {
  return SampledMap::from_entry(entry, domain);
}

SampledMap SampledMap::from_nodes(const GridDomain& domain, int n, const std::vector<Vec>& coords,
                                  const std::vector<Vec>& values, const std::vector<Vec>* residuals,
                                  Provenance provenance) {
  domain.validate();
  if (n < 1) throw ArgumentError("target dimension must be >= 1");
  if (coords.size() != values.size() || (residuals && residuals->size() != coords.size()))
    throw ArgumentError("node arrays have different lengths");
  int m = domain.m;
  Box box = domain_box(domain);
  auto F = std::make_shared<DenseField>();
  F->lo = box.lo;
  F->extent = box.extent;
  long N = F->size();
  F->u.assign(N * n, 0.0);
  F->du.assign(N * m * n, 0.0);
  F->f.assign(N * n, 0.0);
  F->flags.assign(N, 0);

  SampledMap s;
  s.domain_ = domain;
  s.n_ = n;
  s.provenance_ = provenance;
  s.exactness_ = Exactness::approximate;
  s.name_ = "file";
  Vec o = domain.offset();
  std::vector<long> idx(m);
  for (std::size_t k = 0; k < coords.size(); ++k) {
    for (int i = 0; i < m; ++i) idx[i] = std::lround((coords[k][i] - o[i]) / domain.h);
    long lin = -1;
    {
      long l = 0;
      bool ok = true;
      for (int i = 0; i < m; ++i) {
        long j = idx[i] - F->lo[i];
        if (j < 0 || j >= F->extent[i]) ok = false;
        l = l * F->extent[i] + j;
      }
      if (ok) lin = l;
    }
    if (lin < 0) throw ArgumentError("node " + std::to_string(k) + " lies outside the domain");
    if (F->flags[lin] & DenseField::present)
      throw ArgumentError("node " + std::to_string(k) + " duplicates an earlier node");
    F->flags[lin] = DenseField::present;
    Vec v = values[k];
    double nv = v.norm();
    if (nv == 0.0) throw ArgumentError("node " + std::to_string(k) + " has a zero value vector");
    v /= nv;
    for (int a = 0; a < n; ++a) F->u[lin * n + a] = v[a];
    if (residuals) {
      for (int a = 0; a < n; ++a) F->f[lin * n + a] = (*residuals)[k][a];
      F->flags[lin] |= DenseField::has_tension;
    }
  }
  // every lattice node of the closed ball must be supplied
  for_each_lattice_node(domain, Vec::Zero(m), domain.R * (1.0 + 1e-12) + 1e-300,
                        [&](const std::vector<long>& id, const Vec& p) {
                          if (!in_domain(domain, p)) return;
                          long l = 0;
                          for (int i = 0; i < m; ++i) l = l * F->extent[i] + (id[i] - F->lo[i]);
                          if (!(F->flags[l] & DenseField::present))
                            throw ArgumentError("lattice node missing from input");
                        });
  finish_dense(*F, domain, n, true);
  s.dense_ = F;
  if (!residuals) {
    TensionField t = compute_tension(s);
    for (std::size_t k = 0; k < t.positions.size(); ++k) {
      std::vector<long> id(m);
      for (int i = 0; i < m; ++i) id[i] = std::lround((t.positions[k][i] - o[i]) / domain.h);
      long l = s.dense_index(id);
      for (int a = 0; a < n; ++a) F->f[l * n + a] = t.f[k][a];
      F->flags[l] |= DenseField::has_tension;
    }
  }
  return s;
}

bool SampledMap::tension_is_zero() const {
  if (analytic()) return fn_->zero_tension();
  return false;
}

bool SampledMap::ball_valid(const Vec& x, double r) const {
  return r > 0.0 && x.size() == m() && x.norm() + r <= domain_.valid_radius() * (1.0 + 1e-12);
}

void SampledMap::check_ball(const Vec& x, double r) const {
  if (x.size() != m()) throw ArgumentError("center has wrong dimension");
  if (!(r > 0.0)) throw ArgumentError("radius must be positive");
  if (!ball_valid(x, r))
    throw DomainError("ball of radius " + fmt_num(r) + " at distance " + fmt_num(x.norm()) +
                      " leaves the valid region |x| + r <= " + fmt_num(domain_.valid_radius()));
}

void SampledMap::eval(const double* y, double* u, double* du, double* f) const {
  int m = domain_.m, n = n_;
  double z[16];
  for (int i = 0; i < m; ++i) z[i] = view_center_[i] + view_scale_ * y[i];
  if (u) fn_->value(z, u);
  if (du) {
    fn_->jacobian(z, du);
    if (view_scale_ != 1.0)
      for (int i = 0; i < m * n; ++i) du[i] *= view_scale_;
  }
  if (f) {
    if (fn_->zero_tension()) {
      for (int a = 0; a < n; ++a) f[a] = 0.0;
    } else {
      fn_->tension(z, f);
      double s2 = view_scale_ * view_scale_;
      if (s2 != 1.0)
        for (int a = 0; a < n; ++a) f[a] *= s2;
    }
  }
}

double SampledMap::singular_distance(const double* y) const {
  if (!analytic()) return std::numeric_limits<double>::infinity();
  double z[16];
  for (int i = 0; i < m(); ++i) z[i] = view_center_[i] + view_scale_ * y[i];
  return fn_->singular_distance(z) / view_scale_;
}

void SampledMap::value_at(const double* y, double* u) const {
  int m = domain_.m, n = n_;
  if (analytic()) {
    if (singular_distance(y) == 0.0) {
      double z[16];
      for (int i = 0; i < m; ++i) z[i] = y[i];
      z[0] += domain_.h / 100.0;
      eval(z, u, nullptr, nullptr);
    } else {
      eval(y, u, nullptr, nullptr);
    }
    return;
  }
  const DenseField& F = *dense_;
  Vec o = domain_.offset();
  long base[16];
  double t[16];
  for (int i = 0; i < m; ++i) {
    double c = (y[i] - o[i]) / domain_.h;
    double fl = std::floor(c);
    base[i] = static_cast<long>(fl);
    t[i] = c - fl;
    if (t[i] < 1e-12) t[i] = 0.0;
  }
  for (int a = 0; a < n; ++a) u[a] = 0.0;
  std::vector<long> idx(m);
  for (int corner = 0; corner < (1 << m); ++corner) {
    double w = 1.0;
    for (int i = 0; i < m; ++i) {
      bool up = (corner >> i) & 1;
      idx[i] = base[i] + (up ? 1 : 0);
      w *= up ? t[i] : 1.0 - t[i];
    }
    if (w == 0.0) continue;
    long l = dense_index(idx);
    if (l < 0 || !(F.flags[l] & DenseField::present))
      throw DomainError("interpolation point outside the sampled lattice");
    for (int a = 0; a < n; ++a) u[a] += w * F.u[l * n + a];
  }
  double s = 0.0;
  for (int a = 0; a < n; ++a) s += u[a] * u[a];
  s = std::sqrt(s);
  if (s > 0.0)
    for (int a = 0; a < n; ++a) u[a] /= s;
}

Vec SampledMap::node_position(const std::vector<long>& idx) const {
  Vec p = domain_.offset();
  for (int i = 0; i < m(); ++i) p[i] += domain_.h * static_cast<double>(idx[i]);
  return p;
}

long SampledMap::dense_index(const std::vector<long>& idx) const {
  const DenseField& F = *dense_;
  long l = 0;
  for (int i = 0; i < m(); ++i) {
    long j = idx[i] - F.lo[i];
    if (j < 0 || j >= F.extent[i]) return -1;
    l = l * F.extent[i] + j;
  }
  return l;
}

SampledMap SampledMap::materialize() const {
  if (!analytic()) return *this;
  int m = domain_.m, n = n_;
  Box box = domain_box(domain_);
  auto F = std::make_shared<DenseField>();
  F->lo = box.lo;
  F->extent = box.extent;
  long N = F->size();
  F->u.assign(N * n, 0.0);
  F->du.assign(N * m * n, 0.0);
  F->f.assign(N * n, 0.0);
  F->flags.assign(N, 0);
  for_each_lattice_node(domain_, Vec::Zero(m), domain_.R * (1.0 + 1e-12),
                        [&](const std::vector<long>& id, const Vec& p) {
                          if (!in_domain(domain_, p)) return;
                          long l = 0;
                          for (int i = 0; i < m; ++i) l = l * F->extent[i] + (id[i] - F->lo[i]);
                          Vec q = p;
                          if (singular_distance(q.data()) == 0.0) q[0] += domain_.h / 100.0;
                          eval(q.data(), &F->u[l * n], &F->du[l * m * n], &F->f[l * n]);
                          F->flags[l] = DenseField::present | DenseField::has_tension;
                        });
  finish_dense(*F, domain_, n, false);
  SampledMap s = *this;
  s.fn_.reset();
  s.dense_ = F;
  return s;
}

TensionField compute_tension(const SampledMap& map) {
  int m = map.m(), n = map.n();
  double h = map.domain().h;
  const GridDomain& d = map.domain();
  TensionField out;
  std::vector<double> u0(n), up(n), um(n), lap(n);
  for_each_lattice_node(d, Vec::Zero(m), d.R * (1.0 + 1e-12), [&](const std::vector<long>&, const Vec& p) {
    if (!in_domain(d, p)) return;
    bool interior = true;
    for (int i = 0; i < m && interior; ++i)
      for (int s : {-1, 1}) {
        Vec q = p;
        q[i] += s * h;
        if (!in_domain(d, q)) interior = false;
      }
    Vec f = Vec::Zero(n);
    if (interior) {
      map.value_at(p.data(), u0.data());
      std::fill(lap.begin(), lap.end(), 0.0);
      double g2 = 0.0;
      for (int i = 0; i < m; ++i) {
        Vec q = p;
        q[i] += h;
        map.value_at(q.data(), up.data());
        q[i] -= 2.0 * h;
        map.value_at(q.data(), um.data());
        for (int a = 0; a < n; ++a) {
          lap[a] += (up[a] - 2.0 * u0[a] + um[a]) / (h * h);
          double g = (up[a] - um[a]) / (2.0 * h);
          g2 += g * g;
        }
      }
      for (int a = 0; a < n; ++a) f[a] = lap[a] + g2 * u0[a];
    }
    out.positions.push_back(p);
    out.f.push_back(f);
    out.interior.push_back(interior);
  });
  return out;
}



SampledMap MapAccess::blow_up(const SampledMap& map, const Vec& x, double r, double th, bool aligned) {
  int m = map.m(), n = map.n();
  const GridDomain& d = map.domain();
  if (x.size() != m) throw ArgumentError("blow-up center has wrong dimension");
  if (!(r > 0.0)) throw ArgumentError("blow-up scale must be positive");
  GridDomain t;
  t.m = m;
  t.h = th;
  t.R = 1.0 + 2.0 * th;
  if (aligned) {
    Vec o = (d.offset() - x) / r;
    for (int i = 0; i < m; ++i) o[i] -= th * std::round(o[i] / th);
    t.origin = o;
  } else {
    t.origin = Vec::Zero(m);
  }
  if (x.norm() + r * t.R > d.R * (1.0 + 1e-12))
    throw DomainError("blow-up ball B_r(x) is not contained in the domain ball");
  t.validate();

  SampledMap s = map;
  s.domain_ = t;
  if (map.analytic()) {
    s.view_center_ = map.view_center_ + map.view_scale_ * x;
    s.view_scale_ = map.view_scale_ * r;
    return s;
  }
  Box box = domain_box(t);
  auto F = std::make_shared<DenseField>();
  F->lo = box.lo;
  F->extent = box.extent;
  long N = F->size();
  F->u.assign(N * n, 0.0);
  F->du.assign(N * m * n, 0.0);
  F->f.assign(N * n, 0.0);
  F->flags.assign(N, 0);
  const DenseField& S = map.dense();
  Vec o = d.offset();
  for_each_lattice_node(t, Vec::Zero(m), t.R * (1.0 + 1e-12), [&](const std::vector<long>& id, const Vec& y) {
    if (!in_domain(t, y)) return;
    long l = 0;
    for (int i = 0; i < m; ++i) l = l * F->extent[i] + (id[i] - F->lo[i]);
    Vec z = x + r * y;
    if (aligned) {
      std::vector<long> sid(m);
      for (int i = 0; i < m; ++i) sid[i] = std::lround((z[i] - o[i]) / d.h);
      long sl = map.dense_index(sid);
      if (sl < 0 || !(S.flags[sl] & DenseField::present))
        throw DomainError("blow-up node has no source node");
      for (int a = 0; a < n; ++a) {
        F->u[l * n + a] = S.u[sl * n + a];
        F->f[l * n + a] = r * r * S.f[sl * n + a];
      }
      for (int k = 0; k < m * n; ++k) F->du[l * m * n + k] = r * S.du[sl * m * n + k];
      F->flags[l] = DenseField::present | (S.flags[sl] & DenseField::has_tension);
      return;
    }
    // multilinear interpolation of value, gradient and tension
    double base_t[16];
    long base[16];
    for (int i = 0; i < m; ++i) {
      double c = (z[i] - o[i]) / d.h;
      double fl = std::floor(c);
      base[i] = static_cast<long>(fl);
      base_t[i] = c - fl;
    }
    std::vector<long> cid(m);
    for (int corner = 0; corner < (1 << m); ++corner) {
      double w = 1.0;
      for (int i = 0; i < m; ++i) {
        bool up = (corner >> i) & 1;
        cid[i] = base[i] + (up ? 1 : 0);
        w *= up ? base_t[i] : 1.0 - base_t[i];
      }
      if (w == 0.0) continue;
      long sl = map.dense_index(cid);
      if (sl < 0 || !(S.flags[sl] & DenseField::present))
        throw DomainError("blow-up interpolation leaves the sampled lattice");
      for (int a = 0; a < n; ++a) {
        F->u[l * n + a] += w * S.u[sl * n + a];
        F->f[l * n + a] += w * r * r * S.f[sl * n + a];
      }
      for (int k = 0; k < m * n; ++k) F->du[l * m * n + k] += w * r * S.du[sl * m * n + k];
    }
    double nu = 0.0;
    for (int a = 0; a < n; ++a) nu += F->u[l * n + a] * F->u[l * n + a];
    nu = std::sqrt(nu);
    for (int a = 0; a < n; ++a) F->u[l * n + a] /= nu;
    F->flags[l] = DenseField::present | DenseField::has_tension;
  });
  finish_dense(*F, t, n, false);
  s.dense_ = F;
  return s;
}



SampledMap blow_up(const SampledMap& map, const Vec& x, double r) {
  double th = map.domain().h / r;
  double R1 = 1.0 + 2.0 * th;
  if (th > R1 / 8.0) {
    if (!map.analytic())
      throw ResolutionError("blow-up scale is below six lattice spacings of the sampled map");
    return MapAccess::blow_up(map, x, r, 1.0 / 6.0, false);
  }
  return MapAccess::blow_up(map, x, r, th, true);
}

SampledMap blow_up_resampled(const SampledMap& map, const Vec& x, double r, double target_h) {
  return MapAccess::blow_up(map, x, r, target_h, false);
}

void for_each_lattice_node(const GridDomain& d, const Vec& x, double r,
                           const std::function<void(const std::vector<long>&, const Vec&)>& fn) {
  int m = d.m;
  Vec o = d.offset();
  std::vector<long> lo(m), hi(m), idx(m);
  for (int i = 0; i < m; ++i) {
    lo[i] = static_cast<long>(std::ceil((x[i] - r - o[i]) / d.h));
    hi[i] = static_cast<long>(std::floor((x[i] + r - o[i]) / d.h));
    if (hi[i] < lo[i]) return;
  }
  idx = lo;
  Vec p(m);
  double r2 = r * r;
  for (;;) {
    double dist2 = 0.0;
    for (int i = 0; i < m; ++i) {
      p[i] = o[i] + d.h * static_cast<double>(idx[i]);
      double dd = p[i] - x[i];
      dist2 += dd * dd;
    }
    if (dist2 < r2) fn(idx, p);
    int i = m - 1;
    while (i >= 0 && ++idx[i] > hi[i]) {
      idx[i] = lo[i];
      --i;
    }
    if (i < 0) break;
  }
}

}  // namespace qstrat
