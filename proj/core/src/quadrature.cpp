#include "qstrat/quadrature.hpp"

#include "qstrat/errors.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <vector>

namespace qstrat {

namespace {

// Integer offsets i with |i| < bound, lexicographic. Cached per (m, bound).
const std::vector<int>& local_offsets(int m, double bound) {
  thread_local std::map<std::pair<int, double>, std::vector<int>> cache;
  auto it = cache.find({m, bound});
  if (it != cache.end()) return it->second;
  std::vector<int> out;
  int q = static_cast<int>(std::ceil(bound));
  std::vector<int> idx(m, -q);
  for (;;) {
    long s = 0;
    for (int v : idx) s += static_cast<long>(v) * v;
    if (s < bound * bound) out.insert(out.end(), idx.begin(), idx.end());
    int i = m - 1;
    while (i >= 0 && ++idx[i] > q) {
      idx[i] = -q;
      --i;
    }
    if (i < 0) break;
  }
  return cache.emplace(std::make_pair(m, bound), std::move(out)).first->second;
}

// Cells per radius of the ball-local lattice used for closed-form maps.
int local_cells(const SampledMap& map, double r) {
  const QuadratureOptions& qo = map.quadrature();
  double cells = std::ceil(r / map.domain().h - 1e-9);
  return static_cast<int>(std::clamp(cells, double(qo.min_cells_per_radius), double(qo.max_cells(map.m()))));
}

// Volume fraction of a cube of side a on the inner side of a plane at signed distance t
// from its center with unit normal n: the CDF of a sum of centered uniforms of widths a|n_i|.
double cube_fraction(const double* n, int m, double a, double t) {
  double w[16];
  int p = 0;
  double W = 0.0;
  for (int i = 0; i < m; ++i) {
    double wi = a * std::fabs(n[i]);
    if (wi > 1e-3 * a) {
      w[p++] = wi;
      W += wi;
    }
  }
  if (t >= 0.5 * W) return 1.0;
  if (t <= -0.5 * W) return 0.0;
  double prod = 1.0, fact = 1.0;
  for (int i = 0; i < p; ++i) {
    prod *= w[i];
    fact *= i + 1;
  }
  double sum = 0.0;
  for (unsigned mask = 0; mask < (1u << p); ++mask) {
    double shift = t + 0.5 * W;
    int bits = 0;
    for (int i = 0; i < p; ++i)
      if (mask & (1u << i)) {
        shift -= w[i];
        ++bits;
      }
    if (shift > 0.0) sum += (bits % 2 ? -1.0 : 1.0) * std::pow(shift, p);
  }
  return std::clamp(sum / (fact * prod), 0.0, 1.0);
}

}  // namespace

double quadrature_spacing(const SampledMap& map, double r) {
  return map.analytic() ? r / local_cells(map, r) : map.domain().h;
}

void integrate_ball(const SampledMap& map, const Vec& x, double r, SampleNeeds needs,
                    const std::function<void(const BallSample&)>& fn) {
  map.check_ball(x, r);
  const int m = map.m(), n = map.n();
  const QuadratureOptions& qo = map.quadrature();
  std::vector<double> u(n), du(m * n), f(n);
  BallSample s{nullptr, needs.u ? u.data() : nullptr, needs.du ? du.data() : nullptr,
               needs.f ? f.data() : nullptr, 0.0};

  if (!map.analytic()) {
    const DenseField& F = map.dense();
    double w = std::pow(map.domain().h, m);
    for_each_lattice_node(map.domain(), x, r, [&](const std::vector<long>& id, const Vec& p) {
      long l = map.dense_index(id);
      s.y = p.data();
      s.u = &F.u[l * n];
      s.du = &F.du[l * m * n];
      s.f = &F.f[l * n];
      s.w = w;
      fn(s);
    });
    return;
  }

  double* pu = needs.u ? u.data() : nullptr;
  double* pdu = needs.du ? du.data() : nullptr;
  double* pf = needs.f ? f.data() : nullptr;
  const int sub = qo.subcells(m);
  const double layer = qo.singular_layer;
  const int q = local_cells(map, r);
  const double a = r / q;
  const double half = 0.5 * std::sqrt(static_cast<double>(m));
  std::vector<double> y(m), ys(m), nrm(m);
  const std::vector<int>& off = local_offsets(m, q + half);
  for (std::size_t k = 0; k < off.size(); k += m) {
    double d2 = 0.0;
    for (int i = 0; i < m; ++i) {
      y[i] = x[i] + a * off[k + i];
      d2 += static_cast<double>(off[k + i]) * off[k + i];
    }
    double d = a * std::sqrt(d2);
    // refinement graded with the distance to the singular set (in cells)
    double t = map.singular_distance(y.data()) / a;
    int sc = t < layer ? sub : static_cast<int>(std::ceil(sub * layer / t - 1e-9));
    if (sc > 1) {
      // subcells count when their centers lie in the ball
      double wsub = std::pow(a / sc, m);
      std::vector<int> j(m, 0);
      for (;;) {
        double e2 = 0.0;
        for (int i = 0; i < m; ++i) {
          ys[i] = y[i] + a * ((j[i] + 0.5) / sc - 0.5);
          e2 += (ys[i] - x[i]) * (ys[i] - x[i]);
        }
        if (e2 < r * r) {
          map.eval(ys.data(), pu, pdu, pf);
          s.y = ys.data();
          s.w = wsub;
          fn(s);
        }
        int i = m - 1;
        while (i >= 0 && ++j[i] >= sc) {
          j[i] = 0;
          --i;
        }
        if (i < 0) break;
      }
      continue;
    }
    double frac = 1.0;
    if (d > r - half * a) {
      for (int i = 0; i < m; ++i) nrm[i] = off[k + i] * a / d;
      frac = cube_fraction(nrm.data(), m, a, r - d);
      if (frac <= 0.0) continue;
    }
    map.eval(y.data(), pu, pdu, pf);
    s.y = y.data();
    s.w = frac * std::pow(a, m);
    fn(s);
  }
}

void visit_ball_nodes(const SampledMap& map, const Vec& x, double r, int cells_per_radius,
                      const std::function<void(const NodeSample&)>& fn) {
  map.check_ball(x, r);
  const int m = map.m(), n = map.n();
  std::vector<double> u(n);
  NodeSample s{nullptr, u.data(), 0.0};
  if (!map.analytic()) {
    const DenseField& F = map.dense();
    double w = std::pow(map.domain().h, m);
    for_each_lattice_node(map.domain(), x, r, [&](const std::vector<long>& id, const Vec& p) {
      long l = map.dense_index(id);
      s.y = p.data();
      s.u = &F.u[l * n];
      s.w = w;
      fn(s);
    });
    return;
  }
  int q = cells_per_radius;
  double a = r / q;
  double w = std::pow(a, m);
  const std::vector<int>& off = local_offsets(m, static_cast<double>(q));
  std::vector<double> y(m);
  for (std::size_t k = 0; k < off.size(); k += m) {
    for (int i = 0; i < m; ++i) y[i] = x[i] + a * off[k + i];
    map.value_at(y.data(), u.data());
    s.y = y.data();
    s.w = w;
    fn(s);
  }
}

}  // namespace qstrat
