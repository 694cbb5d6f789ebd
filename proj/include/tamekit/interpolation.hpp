#pragma once

// Canonical interpolation of complex structures over a simplex, the taming
// probe for tame (not necessarily compatible) vertices, and the finite
// complex-line certificate that two structures agree.

#include <cmath>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "tamekit/forms.hpp"
#include "tamekit/retraction.hpp"

namespace tamekit {

// Barycentric coordinates t_1..t_k, t_i >= 0, sum t_i = 1.
class SimplexPoint {
 public:
  explicit SimplexPoint(std::vector<double> t, double tol = 1e-9) : t_(std::move(t)) {
    if (t_.empty()) throw DimensionError("simplex point needs at least one coordinate");
    double sum = 0.0;
    for (std::size_t i = 0; i < t_.size(); ++i) {
      if (!(t_[i] >= 0.0)) {
        throw DomainError("simplex_nonnegative",
                          "coordinate " + std::to_string(i) + " is " + std::to_string(t_[i]));
      }
      sum += t_[i];
    }
    if (std::abs(sum - 1.0) > tol) {
      throw DomainError("simplex_sum_one", "coordinates sum to " + std::to_string(sum));
    }
  }

  static SimplexPoint vertex(std::size_t k, std::size_t i) {
    std::vector<double> t(k, 0.0);
    t.at(i) = 1.0;
    return SimplexPoint(std::move(t));
  }

  static SimplexPoint barycenter(std::size_t k) {
    return SimplexPoint(std::vector<double>(k, 1.0 / static_cast<double>(k)));
  }

  std::size_t size() const { return t_.size(); }
  double operator[](std::size_t i) const { return t_[i]; }
  const std::vector<double>& coords() const { return t_; }

 private:
  std::vector<double> t_;
};

// B_t = sum t_i J_i.
inline Matrix combine(std::span<const ComplexStructure> structures, const SimplexPoint& t) {
  if (structures.empty() || structures.size() != t.size()) {
    throw DimensionError(std::to_string(structures.size()) + " structures but " +
                         std::to_string(t.size()) + " simplex coordinates");
  }
  const Eigen::Index m = structures.front().dim();
  Matrix b = Matrix::Zero(m, m);
  for (std::size_t i = 0; i < structures.size(); ++i) {
    if (structures[i].dim() != m) {
      throw DimensionError("structure " + std::to_string(i) + " has dimension " +
                           std::to_string(structures[i].dim()) + ", expected " +
                           std::to_string(m));
    }
    b += t[i] * structures[i].matrix();
  }
  return b;
}

inline void require_tame_vertices(std::span<const ComplexStructure> structures,
                                  const SkewForm& omega, const Tolerance& tol) {
  for (std::size_t i = 0; i < structures.size(); ++i) {
    if (structures[i].dim() != omega.dim()) {
      throw DimensionError("structure " + std::to_string(i) + " has dimension " +
                           std::to_string(structures[i].dim()) + " but the form has dimension " +
                           std::to_string(omega.dim()));
    }
    const double margin = taming_margin(omega, structures[i]);
    if (!(margin > tol.tol_psd)) {
      throw DomainError("vertex_tame", "vertex " + std::to_string(i) +
                                           " is not omega-tame (margin " +
                                           std::to_string(margin) + ")");
    }
  }
}

// j(B_t) for B_t = sum t_i J_i. With a form given, every vertex must be tame
// for it, which rules out real eigenvalues of B_t.
inline ComplexStructure interpolate_simplex(std::span<const ComplexStructure> structures,
                                            const SimplexPoint& t,
                                            const std::optional<SkewForm>& omega = std::nullopt,
                                            const Tolerance& tol = default_tolerance()) {
  const Matrix b = combine(structures, t);
  if (omega) require_tame_vertices(structures, *omega, tol);
  return retraction_j(NoRealEigMatrix(b, tol), tol);
}

// lambda_min(sym(Omega j(B_t))): positive iff the interpolated structure is
// omega-tame. Vertices must be omega-tame.
inline double taming_probe(std::span<const ComplexStructure> structures, const SimplexPoint& t,
                           const SkewForm& omega, const Tolerance& tol = default_tolerance()) {
  return taming_margin(omega, interpolate_simplex(structures, t, omega, tol));
}

// Checks that every J1-complex line from a finite family is J2-invariant with
// the same orientation. The family: for each ordered pair of distinct
// standard basis vectors (v, w), the J1-lines through w, v + w and v + J1 w.
// For dim >= 4 these lines determine J1, so a true answer implies J1 = J2;
// that implication is asserted on the way out.
inline bool shared_lines_certificate(const ComplexStructure& j1, const ComplexStructure& j2,
                                     double plane_tol = 1e-10, double agreement_tol = 1e-6) {
  const Eigen::Index m = j1.dim();
  if (j2.dim() != m) {
    throw DimensionError("structures of dimension " + std::to_string(m) + " and " +
                         std::to_string(j2.dim()));
  }
  if (m < 4) {
    throw DomainError("complex_dimension_at_least_2",
                      "complex lines determine a structure only in complex dimension >= 2");
  }
  const Matrix& a1 = j1.matrix();
  const Matrix& a2 = j2.matrix();
  const double tol = plane_tol * linalg::scale(a2.norm());

  auto line_agrees = [&](const Vector& a) {
    Matrix plane(m, 2);
    plane << a, a1 * a;
    Eigen::HouseholderQR<Matrix> qr(plane);
    const Matrix q = qr.householderQ() * Matrix::Identity(m, 2);
    const Matrix image = a2 * q;
    if ((image - q * (q.transpose() * image)).norm() > tol) return false;
    const Matrix rest = linalg::complement_basis(q);
    Matrix f1(m, m), f2(m, m);
    f1 << a, a1 * a, rest;
    f2 << a, a2 * a, rest;
    return (f1.determinant() > 0.0) == (f2.determinant() > 0.0);
  };

  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index k = 0; k < m; ++k) {
      if (i == k) continue;
      const Vector v = Vector::Unit(m, i);
      const Vector w = Vector::Unit(m, k);
      if (!line_agrees(w) || !line_agrees(v + w) || !line_agrees(v + a1 * w)) return false;
    }
  }
  const double gap = (a1 - a2).norm();
  if (gap > agreement_tol) {
    throw std::logic_error("shared_lines_certificate accepted structures differing by " +
                           std::to_string(gap));
  }
  return true;
}

}  // namespace tamekit
