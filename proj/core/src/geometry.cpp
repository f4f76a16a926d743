#include "qstrat/geometry.hpp"

#include <Eigen/Eigenvalues>

#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

namespace qstrat {

double unit_ball_volume(int k) {
  return std::pow(M_PI, 0.5 * k) / std::tgamma(0.5 * k + 1.0);
}

double unit_sphere_area(int k) { return k * unit_ball_volume(k); }

bool lex_less(const Vec& a, const Vec& b) {
  for (Eigen::Index i = 0; i < a.size() && i < b.size(); ++i) {
    if (a[i] < b[i]) return true;
    if (a[i] > b[i]) return false;
  }
  return a.size() < b.size();
}

double distance_to_affine(const Vec& p, const Vec& base, const Mat& basis) {
  Vec d = p - base;
  if (basis.cols() > 0) d -= basis * (basis.transpose() * d);
  return d.norm();
}

bool gram_schmidt_append(Mat& basis, const Vec& v, double tol) {
  Vec w = v;
  double scale = v.norm();
  if (scale == 0.0) return false;
  // two passes keep orthogonality at machine precision
  for (int pass = 0; pass < 2; ++pass)
    if (basis.cols() > 0) w -= basis * (basis.transpose() * w);
  double nw = w.norm();
  if (nw <= tol * scale) return false;
  basis.conservativeResize(v.size(), basis.cols() + 1);
  basis.col(basis.cols() - 1) = w / nw;
  return true;
}

void canonical_eigen(const Mat& A, bool descending, Vec& values, Mat& vectors) {
  const Eigen::Index m = A.rows();
  Eigen::SelfAdjointEigenSolver<Mat> es(A);
  values.resize(m);
  vectors.resize(m, m);
  for (Eigen::Index i = 0; i < m; ++i) {
    Eigen::Index src = descending ? m - 1 - i : i;
    values[i] = es.eigenvalues()[src];
    vectors.col(i) = es.eigenvectors().col(src);
  }
  double scale = m > 0 ? std::max(std::abs(values[0]), std::abs(values[m - 1])) : 0.0;
  double tol = 1e-10 * scale + 1e-300;
  Eigen::Index start = 0;
  while (start < m) {
    Eigen::Index end = start + 1;
    while (end < m && std::abs(values[end] - values[start]) <= tol) ++end;
    Eigen::Index d = end - start;
    if (d > 1) {
      Mat B = vectors.middleCols(start, d);
      Mat P = B * B.transpose();
      Mat basis(m, 0);
      for (Eigen::Index i = 0; i < m && basis.cols() < d; ++i) gram_schmidt_append(basis, P.col(i), 1e-6);
      if (basis.cols() == d) vectors.middleCols(start, d) = basis;
    }
    start = end;
  }
  for (Eigen::Index c = 0; c < m; ++c) {
    for (Eigen::Index i = 0; i < m; ++i) {
      if (std::abs(vectors(i, c)) > 1e-12) {
        if (vectors(i, c) < 0) vectors.col(c) = -vectors.col(c);
        break;
      }
    }
  }
}

void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& body) {
  if (workers <= 1 || n < 2) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::size_t nt = std::min<std::size_t>(static_cast<std::size_t>(workers), n);
  std::atomic<std::size_t> next{0};
  std::exception_ptr err;
  std::mutex err_mu;
  std::vector<std::thread> pool;
  pool.reserve(nt);
  for (std::size_t t = 0; t < nt; ++t) {
    pool.emplace_back([&] {
      for (;;) {
        std::size_t i = next.fetch_add(1);
        if (i >= n) break;
        try {
          body(i);
        } catch (...) {
          std::lock_guard<std::mutex> lk(err_mu);
          if (!err) err = std::current_exception();
          next = n;
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (err) std::rethrow_exception(err);
}

}  // namespace qstrat
