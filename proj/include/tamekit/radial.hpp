#pragma once

// The radial model on C^n - {0}: Fubini-Study pullback, the connection form
// beta, the form eta = r^2 f^*omega_FS + (1/2pi) d(r^2) ^ beta, the family
// omega_t and the radial change of variables relating them.
//
// Real coordinates are ordered (x1, y1, ..., xn, yn); a 2-form is stored as
// the skew matrix M with omega(v, w) = v^T M w. The Fubini-Study form is
// normalized to have area 1 on a projective line, which makes eta equal to
// the standard form divided by pi.

#include <cmath>
#include <functional>
#include <numbers>
#include <vector>
#include <algorithm>
#include <string>

#include "tamekit/errors.hpp"
#include "tamekit/linalg.hpp"

namespace tamekit {

constexpr double kRadialPointTol = 1e-12;

inline Vector to_real(const CVector& z) {
  Vector x(2 * z.size());
  for (Eigen::Index k = 0; k < z.size(); ++k) {
    x(2 * k) = z(k).real();
    x(2 * k + 1) = z(k).imag();
  }
  return x;
}

inline CVector to_complex(const Vector& x) {
  if (x.size() % 2 != 0) throw DimensionError("odd real dimension " + std::to_string(x.size()));
  CVector z(x.size() / 2);
  for (Eigen::Index k = 0; k < z.size(); ++k) z(k) = Complex(x(2 * k), x(2 * k + 1));
  return z;
}

// a ^ b as a skew matrix: (a ^ b)(v, w) = a(v) b(w) - b(v) a(w).
inline Matrix wedge(const Vector& a, const Vector& b) {
  return a * b.transpose() - b * a.transpose();
}

namespace detail {

inline double checked_norm2(const CVector& z) {
  if (z.size() == 0) throw DimensionError("empty point");
  const double rho = z.squaredNorm();
  if (!(std::sqrt(rho) > kRadialPointTol)) {
    throw DomainError("nonzero_point", "|z| = " + std::to_string(std::sqrt(rho)) +
                                           " is too close to the origin");
  }
  return rho;
}

// Coefficient vectors of v -> Re<z, v> and v -> Im<z, v>, <a, b> = sum conj(a_k) b_k.
inline Vector re_pairing(const CVector& z) { return to_real(z); }

inline Vector im_pairing(const CVector& z) {
  Vector b(2 * z.size());
  for (Eigen::Index k = 0; k < z.size(); ++k) {
    b(2 * k) = -z(k).imag();
    b(2 * k + 1) = z(k).real();
  }
  return b;
}

}  // namespace detail

// f^*omega_FS at z for f: C^n - {0} -> CP^{n-1}.
inline Matrix fubini_study_pullback(const CVector& z) {
  const double rho = detail::checked_norm2(z);
  const Eigen::Index m = 2 * z.size();
  const Matrix w = wedge(detail::re_pairing(z), detail::im_pairing(z));
  return (linalg::standard_form(m) / rho - w / (rho * rho)) / std::numbers::pi;
}

// beta_z(v) = Im<z, v> / |z|^2.
inline Vector connection_form(const CVector& z) {
  const double rho = detail::checked_norm2(z);
  return detail::im_pairing(z) / rho;
}

// d(r^2)(v) = 2 Re<z, v>.
inline Vector radius_squared_differential(const CVector& z) {
  return 2.0 * detail::re_pairing(z);
}

inline Matrix radial_eta(const CVector& z) {
  const double rho = detail::checked_norm2(z);
  return rho * fubini_study_pullback(z) +
         wedge(radius_squared_differential(z), connection_form(z)) / (2.0 * std::numbers::pi);
}

// omega_t = (1 + t r^2) f^*omega_FS + (t / 2pi) d(r^2) ^ beta.
inline Matrix omega_t_radial(double t, const CVector& z) {
  const double rho = detail::checked_norm2(z);
  return (1.0 + t * rho) * fubini_study_pullback(z) +
         (t / (2.0 * std::numbers::pi)) * wedge(radius_squared_differential(z), connection_form(z));
}

// phi_t(z) = (R / r) z with R^2 = (1 + t r^2) / (1 + t).
inline CVector radial_map(double t, const CVector& z) {
  const double r = std::sqrt(detail::checked_norm2(z));
  const double big_r = std::sqrt((1.0 + t * r * r) / (1.0 + t));
  return (big_r / r) * z;
}

inline Matrix radial_map_jacobian(double t, const CVector& z) {
  const double r = std::sqrt(detail::checked_norm2(z));
  const double big_r = std::sqrt((1.0 + t * r * r) / (1.0 + t));
  const double g = big_r / r;
  const double dbig_r = t * r / ((1.0 + t) * big_r);
  const double dg = (dbig_r * r - big_r) / (r * r);
  const Vector x = to_real(z);
  const Eigen::Index m = x.size();
  return g * Matrix::Identity(m, m) + (dg / r) * x * x.transpose();
}

// phi_t^* eta at z.
inline Matrix radial_pullback_eta(double t, const CVector& z) {
  const Matrix d = radial_map_jacobian(t, z);
  return d.transpose() * radial_eta(radial_map(t, z)) * d;
}

// ||phi_t^* eta - omega_t / (1 + t)|| at z.
inline double radial_change_check(double t, const CVector& z) {
  if (!(t > 0.0) || !std::isfinite(t)) {
    throw DomainError("positive_t", "t = " + std::to_string(t));
  }
  return (radial_pullback_eta(t, z) - omega_t_radial(t, z) / (1.0 + t)).norm();
}

using FormField = std::function<Matrix(const Vector&)>;

// Largest |d omega (e_a, e_b, e_c)| over coordinate triples, with partial
// derivatives taken by central differences of step h.
inline double discrete_closedness(const FormField& field, const Vector& point, double h) {
  if (!(h > 0.0)) throw DomainError("positive_step", "h = " + std::to_string(h));
  const Eigen::Index m = point.size();
  std::vector<Matrix> partial(m);
  for (Eigen::Index a = 0; a < m; ++a) {
    Vector up = point, down = point;
    up(a) += h;
    down(a) -= h;
    const Matrix fu = field(up);
    const Matrix fd = field(down);
    if (fu.rows() != m || fu.cols() != m || fd.rows() != m || fd.cols() != m) {
      throw DimensionError("form field returned " + linalg::shape(fu) + " at a point of dimension " +
                           std::to_string(m));
    }
    if (!fu.allFinite() || !fd.allFinite()) {
      throw DomainError("field_evaluable", "non-finite form value near the point");
    }
    partial[a] = (fu - fd) / (2.0 * h);
  }
  double worst = 0.0;
  for (Eigen::Index a = 0; a < m; ++a) {
    for (Eigen::Index b = a + 1; b < m; ++b) {
      for (Eigen::Index c = b + 1; c < m; ++c) {
        const double d = partial[a](b, c) + partial[b](c, a) + partial[c](a, b);
        worst = std::max(worst, std::abs(d));
      }
    }
  }
  return worst;
}

}  // namespace tamekit
