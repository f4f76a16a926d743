#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <functional>
#include <vector>

namespace qstrat {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Volume of the unit ball in R^k (omega_k), k >= 0.
double unit_ball_volume(int k);
// Area of the unit sphere S^{k-1} in R^k (sigma_{k-1}).
double unit_sphere_area(int k);

// Lexicographic order on equal-length vectors.
bool lex_less(const Vec& a, const Vec& b);

// Distance from p to the affine span base + span(cols of basis); basis orthonormal.
double distance_to_affine(const Vec& p, const Vec& base, const Mat& basis);

// Extend an orthonormal set of columns by Gram-Schmidt against candidate v.
// Returns false when v is (numerically) in the span.
bool gram_schmidt_append(Mat& basis, const Vec& v, double tol = 1e-12);

// Eigendecomposition of a symmetric matrix with a canonical basis: inside clusters of
// equal eigenvalues the basis is the Gram-Schmidt image of the projected coordinate
// axes, and each vector's first nonzero coordinate is positive.
void canonical_eigen(const Mat& A, bool descending, Vec& values, Mat& vectors);

// Deterministic parallel loop over [0, n). Each index is processed exactly once;
// callers write results into per-index slots so the outcome does not depend on
// scheduling. workers <= 1 runs inline.
void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& body);

}  // namespace qstrat
