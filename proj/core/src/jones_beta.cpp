#include "qstrat/jones_beta.hpp"

#include "qstrat/energy.hpp"
#include "qstrat/errors.hpp"

#include <cmath>
#include <limits>
#include <random>

namespace qstrat {

DiscreteMeasure::DiscreteMeasure(int m, std::vector<Atom> atoms) : m_(m) {
  for (auto& a : atoms) add(a.x, a.w);
}

void DiscreteMeasure::add(const Vec& x, double w) {
  if (x.size() != m_) throw ArgumentError("atom has wrong dimension");
  if (!(w >= 0.0) || !std::isfinite(w)) throw ArgumentError("atom weight must be finite and >= 0");
  atoms_.push_back({x, w});
  mass_ += w;
}

DiscreteMeasure DiscreteMeasure::restrict_to(const Vec& x, double r) const {
  DiscreteMeasure out(m_);
  double r2 = r * r;
  for (const auto& a : atoms_)
    if ((a.x - x).squaredNorm() <= r2) out.add(a.x, a.w);
  return out;
}

MomentAnalysis moment_analysis(const DiscreteMeasure& mu) {
  int m = mu.dim();
  double mass = mu.total_mass();
  if (!(mass > 0.0)) throw EmptyMeasureError("moment analysis of a measure with zero mass");
  Vec cm = Vec::Zero(m);
  for (const auto& a : mu.atoms()) cm += a.w * a.x;
  cm /= mass;
  Mat Q = Mat::Zero(m, m);
  for (const auto& a : mu.atoms()) {
    Vec d = a.x - cm;
    Q.noalias() += a.w * d * d.transpose();
  }
  MomentAnalysis out;
  out.center_of_mass = cm;
  out.Q = Q;
  out.mass = mass;
  canonical_eigen(Q, true, out.eigenvalues, out.eigenvectors);
  return out;
}

MomentAnalysis moment_analysis(const DiscreteMeasure& mu, const Vec& x, double r) {
  return moment_analysis(mu.restrict_to(x, r));
}

BetaResult beta2(const DiscreteMeasure& mu, const Vec& x, double r, int k) {
  int m = mu.dim();
  if (k < 0 || k >= m) throw ArgumentError("beta2 order k must satisfy 0 <= k < m");
  if (!(r > 0.0)) throw ArgumentError("beta2 scale must be positive");
  BetaResult res;
  DiscreteMeasure sub = mu.restrict_to(x, r);
  if (!(sub.total_mass() > 0.0)) {
    res.empty = true;
    return res;
  }
  MomentAnalysis ma = moment_analysis(sub);
  double tail = 0.0;
  for (int i = k; i < m; ++i) tail += std::max(0.0, ma.eigenvalues[i]);
  res.beta2 = tail * std::pow(r, -k - 2);
  res.plane_base = ma.center_of_mass;
  res.plane_basis = ma.eigenvectors.leftCols(k);
  return res;
}

double beta2_bruteforce(const DiscreteMeasure& mu, const Vec& x, double r, int k, int restarts,
                        std::uint64_t seed) {
  int m = mu.dim();
  if (k < 0 || k >= m) throw ArgumentError("beta2 order k must satisfy 0 <= k < m");
  if (restarts < 1) throw ArgumentError("brute-force oracle needs at least one restart");
  DiscreteMeasure sub = mu.restrict_to(x, r);
  if (!(sub.total_mass() > 0.0)) return 0.0;
  const auto& atoms = sub.atoms();
  double mass = sub.total_mass();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> pick(0, atoms.size() - 1);

  auto objective = [&](const Mat& O, const Vec& c) {
    double J = 0.0;
    for (const auto& a : atoms) {
      Vec d = a.x - c;
      for (int b = k; b < m; ++b) {
        double t = O.col(b).dot(d);
        J += a.w * t * t;
      }
    }
    return J;
  };

  double best = std::numeric_limits<double>::infinity();
  for (int rs = 0; rs < restarts; ++rs) {
    Mat G(m, m);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) G(i, j) = gauss(rng);
    Eigen::HouseholderQR<Mat> qr(G);
    Mat O = qr.householderQ() * Mat::Identity(m, m);
    Vec c = atoms[pick(rng)].x;
    double J = objective(O, c);
    for (int sweep = 0; sweep < 5000; ++sweep) {
      double before = J;
      // offset: exact line minimization along each coordinate
      Mat T = O.rightCols(m - k);
      for (int i = 0; i < m; ++i) {
        Vec pe = T.transpose().col(i);  // transverse components of e_i
        double den = mass * pe.squaredNorm();
        if (den <= 1e-300) continue;
        double num = 0.0;
        for (const auto& a : atoms) num += a.w * (T.transpose() * (a.x - c)).dot(pe);
        c[i] += num / den;
      }
      // frame: exact Givens rotation between each in-plane and transverse direction
      for (int ai = 0; ai < k; ++ai)
        for (int bi = k; bi < m; ++bi) {
          double A = 0.0, B = 0.0, C = 0.0;
          for (const auto& at : atoms) {
            Vec d = at.x - c;
            double al = O.col(ai).dot(d), be = O.col(bi).dot(d);
            A += at.w * al * al;
            B += at.w * be * be;
            C += at.w * al * be;
          }
          double phi = 0.5 * std::atan2(C, 0.5 * (A - B));
          double cs = std::cos(phi), sn = std::sin(phi);
          Vec oa = O.col(ai), ob = O.col(bi);
          O.col(ai) = cs * oa + sn * ob;
          O.col(bi) = -sn * oa + cs * ob;
        }
      J = objective(O, c);
      if (before - J <= 1e-15 * (before + 1e-300)) break;
    }
    best = std::min(best, J);
  }
  return std::max(0.0, best) * std::pow(r, -k - 2);
}

DiniResult dini_integral(const DiscreteMeasure& mu, const Vec& x, double r, int k, int depth) {
  if (depth < 3) throw ArgumentError("Dini depth J must be >= 3");
  DiniResult res;
  res.depth = depth;
  DiscreteMeasure inside = mu.restrict_to(x, r);
  const double log2 = std::log(2.0);
  for (const auto& a : inside.atoms()) {
    double acc = 0.0;
    for (int j = 0; j <= depth; ++j) {
      double s = r * std::ldexp(1.0, -j);
      acc += beta2(mu, a.x, s, k).beta2 * log2;
    }
    res.value += a.w * acc;
    double s_min = r * std::ldexp(1.0, -depth);
    if (mu.restrict_to(a.x, s_min).size() > 1) ++res.unresolved_atoms;
  }
  return res;
}

double w_functional(const SampledMap& map, const Vec& y, double r) {
  return radial_energy(map, y, r, 8.0 * r);
}

WBoundResult w_bound_check(const SampledMap& map, const DiscreteMeasure& mu, const Vec& x, double r,
                           int k, double C1) {
  if (!(C1 > 0.0)) throw ArgumentError("C1 must be positive");
  WBoundResult res;
  res.lhs = beta2(mu, x, r, k).beta2;
  DiscreteMeasure inside = mu.restrict_to(x, r);
  for (const auto& a : inside.atoms())
    if (a.w > 0.0) res.integral += a.w * w_functional(map, a.x, r);
  res.rhs = C1 * std::pow(r, -k) * res.integral;
  res.pass = res.lhs <= res.rhs;
  return res;
}

}  // namespace qstrat
