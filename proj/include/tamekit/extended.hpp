#pragma once

// Quad-precision (113-bit mantissa) scalar for Eigen, used to re-verify
// candidate records at more than twice the working precision.

#include <boost/multiprecision/cpp_bin_float.hpp>

#include <Eigen/Dense>

#include <limits>

namespace tamekit {
using ExtendedReal = boost::multiprecision::cpp_bin_float_quad;
}  // namespace tamekit

namespace Eigen {

template <>
struct NumTraits<tamekit::ExtendedReal> : GenericNumTraits<tamekit::ExtendedReal> {
  using Real = tamekit::ExtendedReal;
  using NonInteger = tamekit::ExtendedReal;
  using Nested = tamekit::ExtendedReal;
  using Literal = tamekit::ExtendedReal;
  enum {
    IsComplex = 0,
    IsInteger = 0,
    IsSigned = 1,
    RequireInitialization = 1,
    ReadCost = 4,
    AddCost = 16,
    MulCost = 32
  };
  static Real epsilon() { return std::numeric_limits<Real>::epsilon(); }
  static Real dummy_precision() { return Real(1e-28); }
  static Real highest() { return (std::numeric_limits<Real>::max)(); }
  static Real lowest() { return std::numeric_limits<Real>::lowest(); }
  static Real infinity() { return std::numeric_limits<Real>::infinity(); }
  static Real quiet_NaN() { return std::numeric_limits<Real>::quiet_NaN(); }
  static int digits10() { return std::numeric_limits<Real>::digits10; }
};

}  // namespace Eigen

namespace tamekit {

using ExtendedMatrix = Eigen::Matrix<ExtendedReal, Eigen::Dynamic, Eigen::Dynamic>;

inline ExtendedMatrix to_extended(const Eigen::MatrixXd& m) { return m.cast<ExtendedReal>(); }

inline ExtendedReal extended_min_eigenvalue(const ExtendedMatrix& s) {
  Eigen::SelfAdjointEigenSolver<ExtendedMatrix> es(s, Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

// lambda_min(sym(Omega J)) at extended precision.
inline ExtendedReal extended_taming_margin(const ExtendedMatrix& omega, const ExtendedMatrix& j) {
  const ExtendedMatrix p = omega * j;
  const ExtendedMatrix s = (p + p.transpose()) / ExtendedReal(2);
  return extended_min_eigenvalue(s);
}

}  // namespace tamekit
