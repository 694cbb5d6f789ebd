#pragma once

namespace tamekit {

// All default thresholds in one place. Every predicate takes one of these by
// const reference, so a caller can override any subset per call.
//
// Thresholds compared against norms are relative: the library multiplies them
// by max(1, norm of the input) before comparing.
struct Tolerance {
  double tol_skew = 1e-9;        // skew-symmetry and J-invariance residuals
  double tol_structure = 1e-8;   // ||J^2 + I||
  double tol_degenerate = 1e-12; // sigma_min / sigma_max of a skew form
  double tol_psd = 1e-12;        // strict positivity of lambda_min
  double tol_angle = 1e-8;       // principal angles between subspaces
  double tol_rank = 1e-9;        // numerical zero eigenvalue of a PSD matrix
  double tol_real_eig = 1e-10;   // |Im lambda| below this counts as real
  double tol_slit = 1e-12;       // distance of an eigenvalue from (-inf, 0]
};

inline const Tolerance& default_tolerance() {
  static const Tolerance tol{};
  return tol;
}

}  // namespace tamekit
