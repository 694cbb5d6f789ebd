#pragma once

// The retraction j(B) = B (-B^2)^{-1/2} from operators without real
// eigenvalues onto complex structures.

#include <cmath>
#include <string>

#include "tamekit/forms.hpp"
#include "tamekit/matrix_power.hpp"

namespace tamekit {

// Real square matrix of even dimension whose eigenvalues all satisfy
// |Im lambda| > tol_real_eig.
class NoRealEigMatrix {
 public:
  explicit NoRealEigMatrix(const Matrix& b, const Tolerance& tol = default_tolerance())
      : NoRealEigMatrix(b, tol.tol_real_eig) {}

  NoRealEigMatrix(const Matrix& b, double margin_floor) : b_(b) {
    linalg::require_square(b, "operator");
    if (b.rows() == 0 || b.rows() % 2 != 0) {
      throw DimensionError("operator without real eigenvalues needs even positive dimension, got " +
                           std::to_string(b.rows()));
    }
    margin_ = spectral_margin(b);
    if (!(margin_ > margin_floor)) {
      throw DomainError("no_real_eigenvalues", "operator has a (near-)real eigenvalue: min |Im lambda| = " +
                                                   std::to_string(margin_));
    }
  }

  const Matrix& matrix() const { return b_; }
  double margin() const { return margin_; }

 private:
  Matrix b_;
  double margin_ = 0.0;
};

inline ComplexStructure retraction_j(const NoRealEigMatrix& b,
                                     const Tolerance& tol = default_tolerance()) {
  const Matrix& m = b.matrix();
  // -B^2 has no eigenvalue on (-inf, 0] because B has no real eigenvalue.
  const Matrix inv_sqrt = principal_power(Matrix(-(m * m)), -0.5, tol);
  return ComplexStructure(m * inv_sqrt, tol);
}

inline ComplexStructure retraction_j(const Matrix& b, const Tolerance& tol = default_tolerance()) {
  return retraction_j(NoRealEigMatrix(b, tol), tol);
}

// Independent route to j(B): since i j(B) = sign(iB), the scaled Newton
// iteration X <- (mu X - (mu X)^{-1}) / 2 converges to j(B) whenever B has no
// real eigenvalue. Works for any real scalar type Eigen can factor, which is
// what the extended-precision verifier relies on.
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> retraction_newton(
    const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& b, const Scalar& rel_tol,
    int max_iter = 100) {
  using std::abs;
  using std::pow;
  using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  const Eigen::Index n = b.rows();
  Mat x = b;
  bool scaling = true;
  for (int it = 0; it < max_iter; ++it) {
    Eigen::PartialPivLU<Mat> lu(x);
    Scalar mu(1);
    if (scaling) {
      const Scalar det = abs(lu.determinant());
      if (det == Scalar(0)) break;
      mu = pow(det, Scalar(-1) / Scalar(static_cast<double>(n)));
    }
    const Mat next = (mu * x - lu.inverse() / mu) / Scalar(2);
    const Scalar change = (next - x).norm();
    const Scalar size = next.norm();
    x = next;
    if (change <= Scalar(1e-2) * size) scaling = false;
    if (change <= rel_tol * size) {
      // One unscaled polishing step.
      Eigen::PartialPivLU<Mat> polish(x);
      return (x - polish.inverse()) / Scalar(2);
    }
  }
  throw ConvergenceError("newton_convergence",
                         "Newton iteration for j(B) did not converge; B may have a real eigenvalue");
}

}  // namespace tamekit
