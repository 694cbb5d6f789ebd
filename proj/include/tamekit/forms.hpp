#pragma once

// Skew forms, linear complex structures and the taming / compatibility
// predicates relating them, including the relative versions along a linear
// map T: V -> W.

#include <cmath>
#include <string>
#include <utility>

#include "tamekit/linalg.hpp"
#include "tamekit/tolerance.hpp"

namespace tamekit {

// Nondegenerate skew bilinear form on R^m, omega(v, w) = v^T Omega w.
class SkewForm {
 public:
  explicit SkewForm(const Matrix& omega, const Tolerance& tol = default_tolerance()) {
    linalg::require_square(omega, "skew form");
    if (omega.rows() == 0 || omega.rows() % 2 != 0) {
      throw DimensionError("skew form dimension must be even and positive, got " +
                           std::to_string(omega.rows()));
    }
    const double asym = (omega + omega.transpose()).norm();
    if (asym > tol.tol_skew * linalg::scale(omega.norm())) {
      throw DomainError("skew_symmetric", "||Omega + Omega^T|| = " + std::to_string(asym));
    }
    omega_ = linalg::skew_part(omega);
    Eigen::JacobiSVD<Matrix> svd(omega_);
    const auto& s = svd.singularValues();
    if (s(0) == 0.0 || s(s.size() - 1) <= tol.tol_degenerate * s(0)) {
      throw DomainError("nondegenerate_form",
                        "skew form is degenerate (sigma_min = " +
                            std::to_string(s(s.size() - 1)) + ")");
    }
  }

  Eigen::Index dim() const { return omega_.rows(); }
  const Matrix& matrix() const { return omega_; }

 private:
  Matrix omega_;
};

// Linear complex structure J on R^m, J^2 = -I.
class ComplexStructure {
 public:
  explicit ComplexStructure(const Matrix& j, const Tolerance& tol = default_tolerance()) {
    linalg::require_square(j, "complex structure");
    if (j.rows() == 0 || j.rows() % 2 != 0) {
      throw DimensionError("complex structure dimension must be even and positive, got " +
                           std::to_string(j.rows()));
    }
    const double res = (j * j + Matrix::Identity(j.rows(), j.cols())).norm();
    const double jn = j.norm();
    if (res > tol.tol_structure * linalg::scale(jn * jn)) {
      throw DomainError("square_is_minus_identity", "||J^2 + I|| = " + std::to_string(res));
    }
    j_ = j;
  }

  Eigen::Index dim() const { return j_.rows(); }
  const Matrix& matrix() const { return j_; }

 private:
  Matrix j_;
};

// A linear map T: R^m -> R^k together with a nondegenerate form on R^k.
class LinearSlice {
 public:
  LinearSlice(Matrix t, SkewForm target) : t_(std::move(t)), target_(std::move(target)) {
    if (t_.rows() != target_.dim()) {
      throw DimensionError("slice has " + std::to_string(t_.rows()) +
                           " rows but target form has dimension " +
                           std::to_string(target_.dim()));
    }
    if (t_.cols() % 2 != 0 || t_.cols() < t_.rows()) {
      throw DimensionError("slice source dimension must be even and >= target, got " +
                           linalg::shape(t_));
    }
  }

  const Matrix& map() const { return t_; }
  const SkewForm& target() const { return target_; }
  Eigen::Index source_dim() const { return t_.cols(); }
  Eigen::Index target_dim() const { return t_.rows(); }

 private:
  Matrix t_;
  SkewForm target_;
};

// T^T Omega_W T. Returned raw, since the pullback may be degenerate.
inline Matrix pullback_form(const Matrix& t, const Matrix& omega_w) {
  linalg::require_square(omega_w, "target form");
  if (t.rows() != omega_w.rows()) {
    throw DimensionError("cannot pull back a form of dimension " +
                         std::to_string(omega_w.rows()) + " through a " + linalg::shape(t) +
                         " map");
  }
  return t.transpose() * omega_w * t;
}

inline Matrix pullback_form(const Matrix& t, const SkewForm& omega_w) {
  return pullback_form(t, omega_w.matrix());
}

// lambda_min of the symmetric part of Omega J, i.e. the minimum of
// omega(v, Jv) over unit vectors.
inline double taming_margin(const Matrix& omega, const Matrix& j) {
  if (omega.rows() != j.rows() || omega.cols() != j.cols()) {
    throw DimensionError("form is " + linalg::shape(omega) + " but structure is " +
                         linalg::shape(j));
  }
  return linalg::min_eigenvalue(linalg::sym(omega * j));
}

inline double taming_margin(const SkewForm& omega, const ComplexStructure& j) {
  return taming_margin(omega.matrix(), j.matrix());
}

// ||J^T Omega J - Omega||.
inline double invariance_residual(const Matrix& omega, const Matrix& j) {
  return (j.transpose() * omega * j - omega).norm();
}

inline bool is_tame(const SkewForm& omega, const ComplexStructure& j,
                    const Tolerance& tol = default_tolerance()) {
  return taming_margin(omega, j) > tol.tol_psd;
}

inline bool is_compatible(const SkewForm& omega, const ComplexStructure& j,
                          const Tolerance& tol = default_tolerance()) {
  if (!is_tame(omega, j, tol)) return false;
  const double jn = j.matrix().norm();
  return invariance_residual(omega.matrix(), j.matrix()) <=
         tol.tol_skew * linalg::scale(omega.matrix().norm()) * linalg::scale(jn * jn);
}

// Diagnostics of the relative taming condition for a pulled-back form G = T^* omega.
struct SliceTameness {
  bool psd = false;               // sym(G J) is positive semidefinite
  bool null_matches_kernel = false;
  bool kernel_invariant = false;  // ker T is J-invariant
  double min_eigenvalue = 0.0;    // of sym(G J)
  double kernel_gap = 0.0;        // sine of largest principal angle null(sym(GJ)) vs ker T
  double invariance_defect = 0.0; // ||(I - P) J P||, P the projector onto ker T
  Matrix kernel;                  // orthonormal basis of ker T

  bool tame() const { return psd && null_matches_kernel && kernel_invariant; }
};

inline SliceTameness analyze_pullback(const Matrix& t, const Matrix& pulled, const Matrix& j,
                                      const Tolerance& tol = default_tolerance()) {
  const Eigen::Index m = j.rows();
  if (t.cols() != m || pulled.rows() != m || pulled.cols() != m) {
    throw DimensionError("structure of dimension " + std::to_string(m) +
                         " does not match map " + linalg::shape(t) + " / pulled form " +
                         linalg::shape(pulled));
  }
  SliceTameness out;
  const Matrix s = linalg::sym(pulled * j);
  Eigen::SelfAdjointEigenSolver<Matrix> es(s);
  const double zero = tol.tol_rank * linalg::scale(s.norm());
  out.min_eigenvalue = es.eigenvalues()(0);
  out.psd = out.min_eigenvalue >= -zero;

  Eigen::Index nulls = 0;
  while (nulls < m && es.eigenvalues()(nulls) <= zero) ++nulls;
  const Matrix null_space = es.eigenvectors().leftCols(nulls);

  out.kernel = linalg::kernel_basis(t);
  out.kernel_gap = linalg::subspace_gap(out.kernel, null_space);
  out.null_matches_kernel = out.kernel_gap <= tol.tol_angle;

  const Matrix jk = j * out.kernel;
  out.invariance_defect = (jk - out.kernel * (out.kernel.transpose() * jk)).norm();
  out.kernel_invariant = out.invariance_defect <= tol.tol_angle * linalg::scale(j.norm());
  return out;
}

inline SliceTameness analyze_slice(const LinearSlice& slice, const ComplexStructure& j,
                                   const Tolerance& tol = default_tolerance()) {
  if (j.dim() != slice.source_dim()) {
    throw DimensionError("structure of dimension " + std::to_string(j.dim()) +
                         " on a slice with source dimension " +
                         std::to_string(slice.source_dim()));
  }
  return analyze_pullback(slice.map(), pullback_form(slice.map(), slice.target()), j.matrix(),
                          tol);
}

inline bool is_slice_tame(const LinearSlice& slice, const ComplexStructure& j,
                          const Tolerance& tol = default_tolerance()) {
  return analyze_slice(slice, j, tol).tame();
}

inline bool is_slice_compatible(const LinearSlice& slice, const ComplexStructure& j,
                                const Tolerance& tol = default_tolerance()) {
  if (!is_slice_tame(slice, j, tol)) return false;
  const Matrix g = pullback_form(slice.map(), slice.target());
  const double jn = j.matrix().norm();
  return invariance_residual(g, j.matrix()) <=
         tol.tol_skew * linalg::scale(g.norm()) * linalg::scale(jn * jn);
}

// The structure T_*J induced on Im T, written in an orthonormal basis of Im T.
struct Pushforward {
  Matrix basis;      // k x r, orthonormal columns spanning Im T
  Matrix structure;  // r x r, T_*J in that basis
  double residual = 0.0;  // ||T J - (T_*J) T||

  // T_*J as a k x k matrix on the target (zero on the orthogonal complement of Im T).
  Matrix ambient() const { return basis * structure * basis.transpose(); }
  // The target form restricted to Im T, in the same basis.
  Matrix restricted_form(const Matrix& omega_w) const {
    return basis.transpose() * omega_w * basis;
  }
};

inline Pushforward pushforward_structure(const LinearSlice& slice, const ComplexStructure& j,
                                         const Tolerance& tol = default_tolerance()) {
  const SliceTameness check = analyze_slice(slice, j, tol);
  if (!check.kernel_invariant) {
    throw DomainError("kernel_J_invariant",
                      "ker T is not J-invariant (defect " +
                          std::to_string(check.invariance_defect) + ")");
  }
  if (!check.tame()) {
    throw DomainError("slice_tame", "J is not (omega, T)-tame (lambda_min = " +
                                        std::to_string(check.min_eigenvalue) +
                                        ", kernel gap = " + std::to_string(check.kernel_gap) +
                                        ")");
  }
  const Matrix& t = slice.map();
  Pushforward out;
  Eigen::JacobiSVD<Matrix> svd(t, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::Index r = linalg::numerical_rank(t);
  out.basis = svd.matrixU().leftCols(r);
  const Matrix v = svd.matrixV().leftCols(r);
  const Vector sigma = svd.singularValues().head(r);
  // (U^T T) = Sigma V^T has full row rank; T_*J = Sigma V^T J V Sigma^{-1}.
  out.structure = sigma.asDiagonal() * (v.transpose() * j.matrix() * v) *
                  sigma.cwiseInverse().asDiagonal();
  out.residual = (t * j.matrix() - out.ambient() * t).norm();
  if (out.residual > tol.tol_angle * linalg::scale(t.norm()) * linalg::scale(j.matrix().norm())) {
    throw DomainError("kernel_J_invariant",
                      "T J does not factor through T (residual " +
                          std::to_string(out.residual) + ")");
  }
  return out;
}

// Pfaffian of a skew matrix by skew Gaussian elimination with pivoting.
inline double pfaffian(const Matrix& skew) {
  linalg::require_square(skew, "pfaffian argument");
  const Eigen::Index n = skew.rows();
  if (n % 2 != 0) return 0.0;
  Matrix a = linalg::skew_part(skew);
  double pf = 1.0;
  for (Eigen::Index k = 0; k + 1 < n; k += 2) {
    Eigen::Index kp;
    a.col(k).tail(n - k - 1).cwiseAbs().maxCoeff(&kp);
    kp += k + 1;
    if (kp != k + 1) {
      a.row(k + 1).swap(a.row(kp));
      a.col(k + 1).swap(a.col(kp));
      pf = -pf;
    }
    if (a(k + 1, k) == 0.0) return 0.0;
    pf *= a(k, k + 1);
    if (k + 2 < n) {
      const Eigen::Index rest = n - k - 2;
      const Vector tau = a.row(k).tail(rest).transpose() / a(k, k + 1);
      const Vector col = a.col(k + 1).tail(rest);
      a.bottomRightCorner(rest, rest) += tau * col.transpose() - col * tau.transpose();
    }
  }
  return pf;
}

// Orientation induced by a nondegenerate form: sign of its Pfaffian.
inline int orientation_sign(const SkewForm& omega) {
  return pfaffian(omega.matrix()) > 0.0 ? 1 : -1;
}

// Orientation induced by J: sign of det(v1, Jv1, ..., vn, Jvn) where the v's are
// taken greedily from the standard basis, skipping any already in the complex
// span of earlier picks.
inline int orientation_sign(const ComplexStructure& j) {
  const Eigen::Index m = j.dim();
  Matrix frame(m, 0);
  for (Eigen::Index i = 0; i < m && frame.cols() < m; ++i) {
    Matrix trial(m, frame.cols() + 2);
    trial << frame, Vector::Unit(m, i), j.matrix().col(i);
    if (linalg::numerical_rank(trial, 1e-8) == trial.cols()) frame = std::move(trial);
  }
  if (frame.cols() != m) {
    throw DomainError("complex_basis", "could not build a complex basis from the standard basis");
  }
  return frame.determinant() > 0.0 ? 1 : -1;
}

}  // namespace tamekit
