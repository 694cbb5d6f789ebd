#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <string>

#include "tamekit/errors.hpp"

namespace tamekit {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using Complex = std::complex<double>;

constexpr double kInfinity = std::numeric_limits<double>::infinity();

namespace linalg {

inline std::string shape(const Matrix& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

inline void require_square(const Matrix& m, const char* what) {
  if (m.rows() != m.cols()) {
    throw DimensionError(std::string(what) + " must be square, got " + shape(m));
  }
}

inline Matrix sym(const Matrix& m) { return 0.5 * (m + m.transpose()); }

inline Matrix skew_part(const Matrix& m) { return 0.5 * (m - m.transpose()); }

inline double scale(double norm) { return std::max(1.0, norm); }

// Smallest eigenvalue of a symmetric matrix; +inf for an empty matrix.
inline double min_eigenvalue(const Matrix& s) {
  if (s.rows() == 0) return kInfinity;
  Eigen::SelfAdjointEigenSolver<Matrix> es(s, Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

// Standard symplectic matrix on R^m: block-diagonal [[0, 1], [-1, 0]] in
// coordinates (x1, y1, x2, y2, ...).
inline Matrix standard_form(Eigen::Index m) {
  Matrix omega = Matrix::Zero(m, m);
  for (Eigen::Index k = 0; k + 1 < m; k += 2) {
    omega(k, k + 1) = 1.0;
    omega(k + 1, k) = -1.0;
  }
  return omega;
}

// Standard complex structure (multiplication by i) in the same coordinates.
inline Matrix standard_structure(Eigen::Index m) { return -standard_form(m); }

// Numerical rank from singular values, relative to the largest one.
inline Eigen::Index numerical_rank(const Matrix& m, double rel_tol = 1e-10) {
  if (m.size() == 0) return 0;
  Eigen::JacobiSVD<Matrix> svd(m);
  const auto& s = svd.singularValues();
  if (s.size() == 0 || s(0) == 0.0) return 0;
  Eigen::Index r = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s(i) > rel_tol * s(0)) ++r;
  }
  return r;
}

// Orthonormal basis (columns) of the null space of m.
inline Matrix kernel_basis(const Matrix& m, double rel_tol = 1e-10) {
  const Eigen::Index n = m.cols();
  if (m.rows() == 0) return Matrix::Identity(n, n);
  Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeFullV);
  const Eigen::Index r = numerical_rank(m, rel_tol);
  return svd.matrixV().rightCols(n - r);
}

// Orthonormal basis (columns) of the column space of m.
inline Matrix range_basis(const Matrix& m, double rel_tol = 1e-10) {
  if (m.size() == 0) return Matrix(m.rows(), 0);
  Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeFullU);
  const Eigen::Index r = numerical_rank(m, rel_tol);
  return svd.matrixU().leftCols(r);
}

// Orthonormal completion: columns spanning the orthogonal complement of span(basis).
inline Matrix complement_basis(const Matrix& basis) {
  return kernel_basis(basis.transpose());
}

// Sine of the largest principal angle between two subspaces given by
// orthonormal bases. Returns 1 when the dimensions differ.
inline double subspace_gap(const Matrix& u1, const Matrix& u2) {
  if (u1.cols() != u2.cols()) return 1.0;
  if (u1.cols() == 0) return 0.0;
  const Matrix residual = u2 - u1 * (u1.transpose() * u2);
  Eigen::JacobiSVD<Matrix> svd(residual);
  return svd.singularValues()(0);
}

inline double op_norm(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  Eigen::JacobiSVD<Matrix> svd(m);
  return svd.singularValues()(0);
}

}  // namespace linalg
}  // namespace tamekit
