#include "qstrat/symmetry.hpp"

#include "qstrat/energy.hpp"
#include "qstrat/errors.hpp"
#include "qstrat/quadrature.hpp"

#include <cmath>
#include <limits>

namespace qstrat {

Vec SymmetricApproximant::value(const Vec& y) const {
  Vec h(n);
  evaluate(y.data(), h.data());
  return h;
}

namespace {

using Approx = std::shared_ptr<SymmetricApproximant>;

struct BallNodes {
  int m = 0, n = 0;
  std::vector<double> y, u;
  double w = 0.0;
  std::size_t count() const { return m ? y.size() / m : 0; }
};

BallNodes collect_nodes(const SampledMap& map, const Vec& x, double r) {
  BallNodes b;
  b.m = map.m();
  b.n = map.n();
  visit_ball_nodes(map, x, r, map.quadrature().symmetry_cells_per_radius, [&](const NodeSample& s) {
    b.y.insert(b.y.end(), s.y, s.y + b.m);
    b.u.insert(b.u.end(), s.u, s.u + b.n);
    b.w = s.w;
  });
  return b;
}

void normalize_or_e1(double* v, int n) {
  double s = 0.0;
  for (int a = 0; a < n; ++a) s += v[a] * v[a];
  s = std::sqrt(s);
  if (s > 1e-300) {
    for (int a = 0; a < n; ++a) v[a] /= s;
  } else {
    for (int a = 0; a < n; ++a) v[a] = a == 0 ? 1.0 : 0.0;
  }
}

struct Fit {
  double eps = std::numeric_limits<double>::infinity();
  Approx approx;
};

// Sphere-renormalized weighted mean of u over the half j-plane {t dir + V c} in B_r,
// weight t^{d-1}: the L^2-optimal value of an invariant homogeneous map on that ray.
void halfspace_mean(const SampledMap& map, const Vec& x, double r, const double* dir, const Mat& V,
                    int nt, int d, double* out) {
  const int m = map.m(), n = map.n(), j = static_cast<int>(V.cols());
  const int nv = 2 * nt;
  std::vector<double> u(n), z(m);
  for (int a = 0; a < n; ++a) out[a] = 0.0;
  std::vector<int> c(j, 0);
  for (int i = 0; i < nt; ++i) {
    double t = (i + 0.5) * r / nt;
    double wt = std::pow(t, d - 1);
    std::fill(c.begin(), c.end(), 0);
    for (;;) {
      double cc2 = 0.0;
      for (int i2 = 0; i2 < m; ++i2) z[i2] = t * dir[i2];
      for (int l = 0; l < j; ++l) {
        double cl = (c[l] + 0.5 - nt) * r / nt;
        cc2 += cl * cl;
        for (int i2 = 0; i2 < m; ++i2) z[i2] += cl * V(i2, l);
      }
      if (t * t + cc2 < r * r) {
        for (int i2 = 0; i2 < m; ++i2) z[i2] += x[i2];
        map.value_at(z.data(), u.data());
        for (int a = 0; a < n; ++a) out[a] += wt * u[a];
      }
      int l = j - 1;
      while (l >= 0 && ++c[l] >= nv) {
        c[l] = 0;
        --l;
      }
      if (l < 0) break;
    }
  }
  normalize_or_e1(out, n);
}

double ball_norm(int m, double r) { return unit_ball_volume(m) * std::pow(r, m); }

Fit fit_constant(const BallNodes& b, const Vec& x, double r) {
  const int n = b.n;
  auto h = std::make_shared<std::vector<double>>(n, 0.0);
  for (std::size_t k = 0; k < b.count(); ++k)
    for (int a = 0; a < n; ++a) (*h)[a] += b.u[k * n + a];
  normalize_or_e1(h->data(), n);
  double acc = 0.0;
  for (std::size_t k = 0; k < b.count(); ++k)
    for (int a = 0; a < n; ++a) {
      double d = b.u[k * n + a] - (*h)[a];
      acc += d * d;
    }
  Fit f;
  f.eps = acc * b.w / ball_norm(b.m, r);
  auto ap = std::make_shared<SymmetricApproximant>();
  ap->center = x;
  ap->n = n;
  ap->r = r;
  ap->order = b.m;
  ap->basis = Mat::Identity(b.m, b.m);
  ap->evaluate = [h, n](const double*, double* out) {
    for (int a = 0; a < n; ++a) out[a] = (*h)[a];
  };
  f.approx = ap;
  return f;
}

Fit fit_halves(const BallNodes& b, const Vec& x, double r, const Mat& V, const Vec& p) {
  const int n = b.n, m = b.m;
  auto hp = std::make_shared<std::vector<double>>(2 * n, 0.0);
  auto side = [&](std::size_t k) {
    double s = 0.0;
    for (int i = 0; i < m; ++i) s += (b.y[k * m + i] - x[i]) * p[i];
    return s >= 0.0 ? 0 : 1;
  };
  for (std::size_t k = 0; k < b.count(); ++k) {
    int sd = side(k);
    for (int a = 0; a < n; ++a) (*hp)[sd * n + a] += b.u[k * n + a];
  }
  normalize_or_e1(hp->data(), n);
  normalize_or_e1(hp->data() + n, n);
  double acc = 0.0;
  for (std::size_t k = 0; k < b.count(); ++k) {
    int sd = side(k);
    for (int a = 0; a < n; ++a) {
      double d = b.u[k * n + a] - (*hp)[sd * n + a];
      acc += d * d;
    }
  }
  Fit f;
  f.eps = acc * b.w / ball_norm(m, r);
  auto ap = std::make_shared<SymmetricApproximant>();
  ap->center = x;
  ap->n = n;
  ap->r = r;
  ap->order = m - 1;
  ap->basis = V;
  Vec xc = x, pc = p;
  ap->evaluate = [hp, n, m, xc, pc](const double* y, double* out) {
    double s = 0.0;
    for (int i = 0; i < m; ++i) s += (y[i] - xc[i]) * pc[i];
    int sd = s >= 0.0 ? 0 : 1;
    for (int a = 0; a < n; ++a) out[a] = (*hp)[sd * n + a];
  };
  f.approx = ap;
  return f;
}

// Values of h on a cubed-sphere grid of S^{d-1} in the transverse space, interpolated
// multilinearly on each face and renormalized.
struct DirectionTable {
  int d = 0, b = 0, n = 0;
  std::vector<double> vals;
  long per_face() const {
    long c = 1;
    for (int l = 0; l < d - 1; ++l) c *= (b + 1);
    return c;
  }
  void direction(long idx, std::vector<double>& w) const {
    long pf = per_face();
    int face = static_cast<int>(idx / pf);
    long g = idx % pf;
    int axis = face / 2;
    double sgn = (face % 2) ? -1.0 : 1.0;
    w.assign(d, 0.0);
    std::vector<long> gi(d - 1);
    for (int l = d - 2; l >= 0; --l) {
      gi[l] = g % (b + 1);
      g /= (b + 1);
    }
    int l = 0;
    for (int i = 0; i < d; ++i) {
      if (i == axis) {
        w[i] = sgn;
      } else {
        w[i] = -1.0 + 2.0 * static_cast<double>(gi[l]) / b;
        ++l;
      }
    }
    double s = 0.0;
    for (double v : w) s += v * v;
    s = std::sqrt(s);
    for (double& v : w) v /= s;
  }
  void interp(const double* w, double* out) const {
    int axis = 0;
    for (int i = 1; i < d; ++i)
      if (std::abs(w[i]) > std::abs(w[axis])) axis = i;
    int face = 2 * axis + (w[axis] < 0.0 ? 1 : 0);
    double inv = 1.0 / std::abs(w[axis]);
    std::vector<long> base(d - 1);
    std::vector<double> t(d - 1);
    int l = 0;
    for (int i = 0; i < d; ++i) {
      if (i == axis) continue;
      double xi = std::clamp(w[i] * inv, -1.0, 1.0);
      double c = 0.5 * (xi + 1.0) * b;
      long bi = std::min<long>(static_cast<long>(std::floor(c)), b - 1);
      base[l] = bi;
      t[l] = c - bi;
      ++l;
    }
    for (int a = 0; a < n; ++a) out[a] = 0.0;
    long pf = per_face();
    for (int corner = 0; corner < (1 << (d - 1)); ++corner) {
      double wt = 1.0;
      long g = 0;
      for (int q = 0; q < d - 1; ++q) {
        bool up = (corner >> q) & 1;
        wt *= up ? t[q] : 1.0 - t[q];
        g = g * (b + 1) + base[q] + (up ? 1 : 0);
      }
      if (wt == 0.0) continue;
      const double* v = &vals[(face * pf + g) * n];
      for (int a = 0; a < n; ++a) out[a] += wt * v[a];
    }
    normalize_or_e1(out, n);
  }
};

int table_resolution(int d) { return d == 2 ? 16 : (d == 3 ? 8 : 4); }

Fit fit_table(const SampledMap& map, const BallNodes& b, const Vec& x, double r, const Mat& V,
              const Mat& P) {
  const int m = b.m, n = b.n, d = static_cast<int>(P.cols());
  auto tab = std::make_shared<DirectionTable>();
  tab->d = d;
  tab->b = table_resolution(d);
  tab->n = n;
  long total = 2L * d * tab->per_face();
  tab->vals.assign(total * n, 0.0);
  const int nt = map.quadrature().ray_samples;
  parallel_for(static_cast<std::size_t>(total), map.quadrature().workers, [&](std::size_t idx) {
    std::vector<double> w;
    tab->direction(static_cast<long>(idx), w);
    Vec dir = P * Eigen::Map<const Vec>(w.data(), d);
    halfspace_mean(map, x, r, dir.data(), V, nt, d, &tab->vals[idx * n]);
  });
  std::vector<double> wv(d), h(n);
  double acc = 0.0;
  for (std::size_t k = 0; k < b.count(); ++k) {
    for (int q = 0; q < d; ++q) {
      double s = 0.0;
      for (int i = 0; i < m; ++i) s += P(i, q) * (b.y[k * m + i] - x[i]);
      wv[q] = s;
    }
    double nw = 0.0;
    for (double v : wv) nw += v * v;
    if (nw == 0.0) wv[0] = 1.0;
    tab->interp(wv.data(), h.data());
    for (int a = 0; a < n; ++a) {
      double dd = b.u[k * n + a] - h[a];
      acc += dd * dd;
    }
  }
  Fit f;
  f.eps = acc * b.w / ball_norm(m, r);
  auto ap = std::make_shared<SymmetricApproximant>();
  ap->center = x;
  ap->n = n;
  ap->r = r;
  ap->order = m - d;
  ap->basis = V;
  Vec xc = x;
  Mat Pc = P;
  ap->evaluate = [tab, xc, Pc, m, n, d](const double* y, double* out) {
    std::vector<double> w(d);
    double nw = 0.0;
    for (int q = 0; q < d; ++q) {
      double s = 0.0;
      for (int i = 0; i < m; ++i) s += Pc(i, q) * (y[i] - xc[i]);
      w[q] = s;
      nw += s * s;
    }
    if (nw == 0.0) w[0] = 1.0;
    tab->interp(w.data(), out);
  };
  f.approx = ap;
  return f;
}

Fit fit_rays(const SampledMap& map, const BallNodes& b, const Vec& x, double r) {
  const int m = b.m, n = b.n;
  const int nt = map.quadrature().ray_samples;
  Mat none(m, 0);
  std::vector<double> acc_k(b.count(), 0.0);
  parallel_for(b.count(), map.quadrature().workers, [&](std::size_t k) {
    std::vector<double> dir(m), h(n);
    double s = 0.0;
    for (int i = 0; i < m; ++i) {
      dir[i] = b.y[k * m + i] - x[i];
      s += dir[i] * dir[i];
    }
    s = std::sqrt(s);
    if (s == 0.0) {
      std::fill(dir.begin(), dir.end(), 0.0);
      dir[0] = 1.0;
    } else {
      for (double& v : dir) v /= s;
    }
    halfspace_mean(map, x, r, dir.data(), none, nt, m, h.data());
    double a2 = 0.0;
    for (int a = 0; a < n; ++a) {
      double dd = b.u[k * n + a] - h[a];
      a2 += dd * dd;
    }
    acc_k[k] = a2;
  });
  double acc = 0.0;
  for (double v : acc_k) acc += v;
  Fit f;
  f.eps = acc * b.w / ball_norm(m, r);
  auto ap = std::make_shared<SymmetricApproximant>();
  ap->center = x;
  ap->n = n;
  ap->r = r;
  ap->order = 0;
  ap->basis = Mat(m, 0);
  SampledMap mc = map;
  Vec xc = x;
  ap->evaluate = [mc, xc, r, m, n, nt](const double* y, double* out) {
    std::vector<double> dir(m);
    double s = 0.0;
    for (int i = 0; i < m; ++i) {
      dir[i] = y[i] - xc[i];
      s += dir[i] * dir[i];
    }
    s = std::sqrt(s);
    if (s == 0.0) {
      std::fill(dir.begin(), dir.end(), 0.0);
      dir[0] = 1.0;
    } else {
      for (double& v : dir) v /= s;
    }
    halfspace_mean(mc, xc, r, dir.data(), Mat(m, 0), nt, m, out);
  };
  f.approx = ap;
  return f;
}

// Lazily computed ingredients shared between orders at one (x, r).
struct OrderContext {
  const SampledMap& map;
  Vec x;
  double r;
  BallNodes nodes;
  bool have_eigen = false;
  Vec evals;
  Mat evecs;  // ascending energy

  OrderContext(const SampledMap& mp, const Vec& xx, double rr) : map(mp), x(xx), r(rr) {
    nodes = collect_nodes(map, x, r);
  }
  void eigen() {
    if (have_eigen) return;
    canonical_eigen(invariant_energy_matrix(map, x, r), false, evals, evecs);
    have_eigen = true;
  }
  Fit fit(int j) {
    const int m = map.m();
    if (j == m) return fit_constant(nodes, x, r);
    if (j == 0) return fit_rays(map, nodes, x, r);
    eigen();
    Mat V = evecs.leftCols(j);
    Mat P = evecs.rightCols(m - j);
    if (j == m - 1) return fit_halves(nodes, x, r, V, P.col(0));
    return fit_table(map, nodes, x, r, V, P);
  }
};

}  // namespace

Mat invariant_energy_matrix(const SampledMap& map, const Vec& x, double r) {
  const int m = map.m(), n = map.n();
  Mat E = Mat::Zero(m, m);
  integrate_ball(map, x, r, {false, true, false}, [&](const BallSample& s) {
    for (int i = 0; i < m; ++i)
      for (int j = i; j < m; ++j) {
        double d = 0.0;
        for (int a = 0; a < n; ++a) d += s.du[i * n + a] * s.du[j * n + a];
        E(i, j) += s.w * d;
      }
  });
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < i; ++j) E(i, j) = E(j, i);
  return E;
}

HomogeneousFit best_homogeneous(const SampledMap& map, const Vec& x, double r) {
  map.check_ball(x, r);
  BallNodes b = collect_nodes(map, x, r);
  Fit f = fit_rays(map, b, x, r);
  return {f.approx, f.eps};
}

SymmetryVerdict ksym_distance(const SampledMap& map, const Vec& x, double r, int k) {
  const int m = map.m();
  if (k < 0 || k > m) throw ArgumentError("symmetry order k must satisfy 0 <= k <= m");
  map.check_ball(x, r);
  OrderContext ctx(map, x, r);
  SymmetryVerdict v;
  v.x = x;
  v.r = r;
  v.k = k;
  v.raw.assign(m - k + 1, 0.0);
  double best = std::numeric_limits<double>::infinity();
  for (int j = m; j >= k; --j) {
    Fit f = ctx.fit(j);
    v.raw[j - k] = f.eps;
    if (f.eps < best) {
      best = f.eps;
      v.approximant = f.approx;
      v.approximant_order = j;
    }
  }
  v.eps_hat = best;
  if (k == 0) {
    v.basis = Mat(m, 0);
  } else {
    ctx.eigen();
    v.basis = ctx.evecs.leftCols(k);
  }
  return v;
}

std::optional<double> find_symmetry(const SampledMap& map, const Vec& x, double r, int k, double eps) {
  const int m = map.m();
  if (k < 0) throw ArgumentError("symmetry order must be >= 0");
  if (k > m) return std::nullopt;
  map.check_ball(x, r);
  OrderContext ctx(map, x, r);
  for (int j = m; j >= k; --j) {
    Fit f = ctx.fit(j);
    if (f.eps <= eps) return f.eps;
  }
  return std::nullopt;
}

StrataMembership strata_membership(const SampledMap& map, const Vec& x, int k, double eps, double r) {
  if (!(r > 0.0 && r < 1.0)) throw ArgumentError("strata scale r must lie in (0, 1)");
  if (k < 0) throw ArgumentError("strata order must be >= 0");
  StrataMembership s;
  s.x = x;
  s.k = k;
  s.eps = eps;
  s.r = r;
  s.member = true;
  for (int j = 1;; ++j) {
    double sc = std::ldexp(1.0, -j);
    if (sc < r * (1.0 - 1e-12)) break;
    auto found = find_symmetry(map, x, sc, k + 1, eps);
    if (found) {
      s.member = false;
      s.witness_scale = sc;
      s.witness_eps = *found;
      break;
    }
  }
  return s;
}

std::vector<StrataMembership> classify_strata(const SampledMap& map, const std::vector<Vec>& points,
                                              int k, double eps, double r) {
  std::vector<StrataMembership> out(points.size());
  SampledMap inner = map;
  QuadratureOptions q = map.quadrature();
  int workers = q.workers;
  q.workers = 1;
  inner.set_quadrature(q);
  parallel_for(points.size(), workers,
               [&](std::size_t i) { out[i] = strata_membership(inner, points[i], k, eps, r); });
  return out;
}

PinchedSet pinched_set(const SampledMap& map, const Vec& center, double radius, double E, double delta,
                       double rho, const std::vector<Vec>& candidates, double pinch_factor) {
  if (!(delta > 0.0)) throw ArgumentError("pinch delta must be positive");
  PinchedSet p;
  p.center = center;
  p.radius = radius;
  p.E = E;
  p.delta = delta;
  p.scale = rho * radius * pinch_factor;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    double v = theta_hat(map, candidates[i], p.scale);
    if (v >= E - delta) {
      p.points.push_back(candidates[i]);
      p.indices.push_back(i);
      p.values.push_back(v);
    }
  }
  return p;
}

EffectiveSpan effective_span(const std::vector<Vec>& points, double rho) {
  if (points.empty()) throw ArgumentError("effective span of an empty point list");
  if (!(rho > 0.0)) throw ArgumentError("effective span needs rho > 0");
  const Eigen::Index m = points[0].size();
  EffectiveSpan s;
  s.base = points[0];
  s.basis = Mat(m, 0);
  s.certificate.push_back(points[0]);
  s.certificate_indices.push_back(0);
  for (;;) {
    double far = -1.0;
    std::size_t arg = 0;
    for (std::size_t i = 0; i < points.size(); ++i) {
      double d = distance_to_affine(points[i], s.base, s.basis);
      if (d > far) {
        far = d;
        arg = i;
      }
    }
    if (!(far > 2.0 * rho) || s.basis.cols() == m) {
      s.max_residual = std::max(0.0, far);
      break;
    }
    if (!gram_schmidt_append(s.basis, points[arg] - s.base)) {
      s.max_residual = far;
      break;
    }
    s.certificate.push_back(points[arg]);
    s.certificate_indices.push_back(arg);
  }
  s.k = static_cast<int>(s.basis.cols());
  return s;
}

bool verify_span_certificate(const std::vector<Vec>& certificate, double rho) {
  if (certificate.empty()) return false;
  const Eigen::Index m = certificate[0].size();
  Mat basis(m, 0);
  for (std::size_t i = 1; i < certificate.size(); ++i) {
    if (!(distance_to_affine(certificate[i], certificate[0], basis) > 2.0 * rho)) return false;
    if (!gram_schmidt_append(basis, certificate[i] - certificate[0])) return false;
  }
  return true;
}

}  // namespace qstrat
