#pragma once

// Sampled fibrations f: X -> Y and the taming of omega_t = t eta + f^*omega_Y.
// Each sample carries the local data at one point x: the differential df,
// the structure J, the form eta, the pulled-back base form G and ker df.

#include <cmath>
#include <map>
#include <numbers>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "tamekit/forms.hpp"
#include "tamekit/interpolation.hpp"
#include "tamekit/parallel.hpp"
#include "tamekit/radial.hpp"

namespace tamekit {

struct PointSample {
  std::string id;
  Vector base;          // coordinates of the point (model units)
  Matrix df;            // k x m
  Matrix j;             // m x m complex structure
  Matrix eta;           // m x m skew
  Matrix base_pullback; // m x m skew, df^T omega_Y df
  Matrix kernel;        // m x (m - rank df), orthonormal basis of ker df
  bool regular = true;  // rank df = k
};

struct SampledFibration {
  std::vector<PointSample> samples;
  Matrix omega_y;  // k x k
  std::string generator;
  std::map<std::string, double> parameters;
  std::string mesh;
};

struct KernelCloud {
  Matrix kernel;               // orthonormal basis of ker T_x
  std::vector<Matrix> planes;  // m x 2 bases of limiting regular kernels
};

namespace detail {

constexpr double kSampleTol = 1e-8;

inline std::string sample_prefix(const PointSample& s) { return "sample '" + s.id + "': "; }

// Rethrows a library error with the sample id prepended, keeping the precondition.
template <typename Fn>
auto with_sample_id(const PointSample& s, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const DimensionError& e) {
    const std::string what = e.what();
    const std::string tail = what.substr(std::min(what.size(), e.precondition().size() + 2));
    throw DimensionError(sample_prefix(s) + tail);
  } catch (const Error& e) {
    const std::string what = e.what();
    const std::string tail = what.substr(std::min(what.size(), e.precondition().size() + 2));
    throw DomainError(e.precondition(), sample_prefix(s) + tail);
  }
}

// lambda_min(sym(K^T eta K  K^T J K)), eta restricted to ker df against J on it.
inline double kernel_margin(const PointSample& s, const Matrix& eta) {
  if (s.kernel.cols() == 0) return kInfinity;
  const Matrix& k = s.kernel;
  return linalg::min_eigenvalue(linalg::sym((k.transpose() * eta * k) * (k.transpose() * s.j * k)));
}

}  // namespace detail

// Checks the sample invariants; throws DomainError naming the violated one.
inline void validate_sample(const PointSample& s, const Matrix& omega_y,
                            const Tolerance& tol = default_tolerance()) {
  detail::with_sample_id(s, [&] {
    const Eigen::Index m = s.j.rows();
    if (s.df.cols() != m || s.df.rows() != omega_y.rows() || s.eta.rows() != m ||
        s.eta.cols() != m || s.base_pullback.rows() != m || s.base_pullback.cols() != m ||
        s.kernel.rows() != m) {
      throw DimensionError("inconsistent sample shapes: df " + linalg::shape(s.df) + ", J " +
                           linalg::shape(s.j) + ", eta " + linalg::shape(s.eta) +
                           ", base pullback " + linalg::shape(s.base_pullback) + ", kernel " +
                           linalg::shape(s.kernel));
    }
    const ComplexStructure j(s.j, tol);
    const double sc = linalg::scale(s.eta.norm());
    if ((s.eta + s.eta.transpose()).norm() > tol.tol_skew * sc) {
      throw DomainError("eta_skew", "eta is not skew-symmetric");
    }
    if ((s.base_pullback + s.base_pullback.transpose()).norm() >
        tol.tol_skew * linalg::scale(s.base_pullback.norm())) {
      throw DomainError("base_pullback_skew", "base pullback is not skew-symmetric");
    }
    const Matrix pulled = pullback_form(s.df, omega_y);
    if ((pulled - s.base_pullback).norm() > detail::kSampleTol * linalg::scale(pulled.norm())) {
      throw DomainError("base_pullback_consistent", "base pullback differs from df^T omega_Y df");
    }
    const Eigen::Index kdim = s.kernel.cols();
    if ((s.kernel.transpose() * s.kernel - Matrix::Identity(kdim, kdim)).norm() > detail::kSampleTol) {
      throw DomainError("kernel_orthonormal", "kernel basis is not orthonormal");
    }
    if (linalg::subspace_gap(s.kernel, linalg::kernel_basis(s.df)) > tol.tol_angle) {
      throw DomainError("kernel_matches_df", "kernel basis does not span ker df");
    }
    if (s.regular && linalg::numerical_rank(s.df) != s.df.rows()) {
      throw DomainError("regular_rank", "sample flagged regular but df is not surjective");
    }
    const SliceTameness st = analyze_pullback(s.df, s.base_pullback, s.j, tol);
    if (!st.tame()) {
      throw DomainError("slice_tame", "J is not (omega_Y, df)-tame (lambda_min " +
                                          std::to_string(st.min_eigenvalue) + ", kernel gap " +
                                          std::to_string(st.kernel_gap) + ")");
    }
    const double km = detail::kernel_margin(s, s.eta);
    if (!(km > tol.tol_psd)) {
      throw DomainError("eta_tames_kernel",
                        "eta does not tame J on ker df (margin " + std::to_string(km) + ")");
    }
    (void)j;
  });
}

inline void validate_fibration(const SampledFibration& fib, const Tolerance& tol = default_tolerance()) {
  if (fib.samples.empty()) throw DomainError("nonempty_fibration", "fibration has no samples");
  SkewForm(fib.omega_y, tol);
  parallel_for(fib.samples.size(), [&](std::size_t i) { validate_sample(fib.samples[i], fib.omega_y, tol); });
}

inline double kernel_taming_margin(const PointSample& s) { return detail::kernel_margin(s, s.eta); }

// lambda_min(sym((t eta + G) J)).
inline double omega_t_margin(const PointSample& s, double t) {
  return taming_margin(Matrix(t * s.eta + s.base_pullback), s.j);
}

// sup { t in (0, t_max] : omega_t tames J }, or infinity when taming persists
// for all t beyond t_max. lambda(t) is concave in t, so the taming set is an
// interval; it is located by halving from t_max and then bisected.
inline double taming_interval(const PointSample& s, double t_max,
                              const Tolerance& tol = default_tolerance()) {
  return detail::with_sample_id(s, [&]() -> double {
    if (!(t_max > 0.0) || !std::isfinite(t_max)) {
      throw DomainError("positive_t_max", "t_max = " + std::to_string(t_max));
    }
    const double km = detail::kernel_margin(s, s.eta);
    if (!(km > tol.tol_psd)) {
      throw DomainError("eta_tames_kernel",
                        "eta does not tame J on ker df (margin " + std::to_string(km) +
                            "); no taming window is guaranteed");
    }
    const Matrix s_eta = linalg::sym(s.eta * s.j);
    const Matrix s_g = linalg::sym(s.base_pullback * s.j);
    const double zero = tol.tol_psd;
    auto lambda = [&](double t) { return linalg::min_eigenvalue(t * s_eta + s_g); };

    if (lambda(t_max) > zero) {
      const double slope = linalg::min_eigenvalue(s_eta);
      // With sym(eta J) PSD, lambda(t) is non-decreasing.
      if (slope >= -tol.tol_rank * linalg::scale(s_eta.norm())) return kInfinity;
      return t_max;
    }
    double hi = t_max;
    double lo = t_max;
    int halvings = 0;
    while (!(lambda(lo) > zero)) {
      hi = lo;
      lo *= 0.5;
      if (++halvings > 1000 || lo == 0.0) {
        throw DomainError("taming_window", "no t in (0, t_max] tames J");
      }
    }
    if (!(lambda(0.5 * lo) > zero)) {
      throw DomainError("taming_window_connected",
                        "taming set in t is not an interval starting at 0 (lost below t = " +
                            std::to_string(lo) + ")");
    }
    while (hi - lo > 1e-6 * hi) {
      const double mid = 0.5 * (lo + hi);
      (lambda(mid) > zero ? lo : hi) = mid;
    }
    return lo;
  });
}

struct ThresholdRow {
  std::string id;
  double t0 = 0.0;
  double margin_at_half = 0.0;  // lambda_min at t0/2 (t_max/2 when t0 is infinite)
};

struct ThresholdReport {
  double threshold = kInfinity;
  std::vector<ThresholdRow> rows;
};

inline ThresholdReport taming_thresholds(const SampledFibration& fib, double t_max,
                                         const Tolerance& tol = default_tolerance()) {
  if (fib.samples.empty()) throw DomainError("nonempty_fibration", "fibration has no samples");
  ThresholdReport out;
  out.rows.resize(fib.samples.size());
  parallel_for(fib.samples.size(), [&](std::size_t i) {
    const PointSample& s = fib.samples[i];
    const double t0 = taming_interval(s, t_max, tol);
    const double half = std::isfinite(t0) ? 0.5 * t0 : 0.5 * t_max;
    out.rows[i] = ThresholdRow{s.id, t0, omega_t_margin(s, half)};
  });
  for (const auto& r : out.rows) out.threshold = std::min(out.threshold, r.t0);
  return out;
}

inline double global_taming_threshold(const SampledFibration& fib, double t_max,
                                      const Tolerance& tol = default_tolerance()) {
  return taming_thresholds(fib, t_max, tol).threshold;
}

struct AssembledForm {
  std::string id;
  Matrix omega_t;
  double margin = 0.0;
  double pfaffian = 0.0;
};

// Omega_t = t eta + G at every sample, for 0 < t < (1 - safety) * threshold.
inline std::vector<AssembledForm> assemble_omega_t(const SampledFibration& fib, double t,
                                                   double threshold, double safety = 0.05,
                                                   const Tolerance& tol = default_tolerance()) {
  if (!(t > 0.0) || !(t < (1.0 - safety) * threshold)) {
    throw DomainError("t_in_taming_range", "t = " + std::to_string(t) + " is outside (0, " +
                                               std::to_string((1.0 - safety) * threshold) + ")");
  }
  std::vector<AssembledForm> out(fib.samples.size());
  parallel_for(fib.samples.size(), [&](std::size_t i) {
    const PointSample& s = fib.samples[i];
    AssembledForm a;
    a.id = s.id;
    a.omega_t = linalg::skew_part(t * s.eta + s.base_pullback);
    a.margin = taming_margin(a.omega_t, s.j);
    if (!(a.margin > tol.tol_psd)) {
      throw std::logic_error(detail::sample_prefix(s) + "omega_t does not tame J below the threshold");
    }
    detail::with_sample_id(s, [&] { SkewForm(a.omega_t, tol); });
    a.pfaffian = pfaffian(a.omega_t);
    out[i] = std::move(a);
  });
  return out;
}

inline std::vector<AssembledForm> assemble_omega_t(const SampledFibration& fib, double t,
                                                   const Tolerance& tol = default_tolerance(),
                                                   double t_max = 1e6) {
  return assemble_omega_t(fib, t, global_taming_threshold(fib, t_max, tol), 0.05, tol);
}

// Whether the weighted sum of kernel-taming forms still tames J on ker df.
inline bool kernel_convexity_check(const PointSample& s, const std::vector<Matrix>& etas,
                                   const SimplexPoint& weights,
                                   const Tolerance& tol = default_tolerance()) {
  if (etas.size() != weights.size() || etas.empty()) {
    throw DimensionError(std::to_string(etas.size()) + " forms but " +
                         std::to_string(weights.size()) + " weights");
  }
  const Eigen::Index m = s.j.rows();
  Matrix sum = Matrix::Zero(m, m);
  for (std::size_t i = 0; i < etas.size(); ++i) {
    if (etas[i].rows() != m || etas[i].cols() != m) {
      throw DimensionError("form " + std::to_string(i) + " has shape " + linalg::shape(etas[i]));
    }
    const double km = detail::kernel_margin(s, etas[i]);
    if (!(km > tol.tol_psd)) {
      throw DomainError("eta_tames_kernel", detail::sample_prefix(s) + "form " + std::to_string(i) +
                                                " does not tame J on ker df");
    }
    sum += weights[i] * etas[i];
  }
  return detail::kernel_margin(s, sum) > 0.0;
}

// True iff the span of the limiting planes has codimension at most 2 in the kernel.
inline bool wrapped_check(const KernelCloud& cloud, double tol = 1e-8) {
  const Matrix& k = cloud.kernel;
  const Eigen::Index m = k.rows();
  const Eigen::Index d = k.cols();
  if ((k.transpose() * k - Matrix::Identity(d, d)).norm() > tol) {
    throw DomainError("kernel_orthonormal", "kernel basis is not orthonormal");
  }
  Matrix coords(d, 2 * static_cast<Eigen::Index>(cloud.planes.size()));
  for (std::size_t i = 0; i < cloud.planes.size(); ++i) {
    const Matrix& p = cloud.planes[i];
    if (p.rows() != m || p.cols() != 2) {
      throw DimensionError("plane " + std::to_string(i) + " has shape " + linalg::shape(p));
    }
    if (linalg::numerical_rank(p, 1e-8) != 2) {
      throw DomainError("plane_rank_2", "plane " + std::to_string(i) + " is not 2-dimensional");
    }
    const Matrix inside = k * (k.transpose() * p);
    if ((p - inside).norm() > tol * linalg::scale(p.norm())) {
      throw DomainError("planes_in_kernel", "plane " + std::to_string(i) + " leaves the kernel");
    }
    coords.middleCols(2 * i, 2) = k.transpose() * p;
  }
  const Eigen::Index span = coords.cols() == 0 ? 0 : linalg::numerical_rank(coords, 1e-8);
  return d - span <= 2;
}

// Generators ---------------------------------------------------------------

struct ProductBundleParams {
  int fiber_mesh = 8;  // points per fiber-torus circle
  int base_mesh = 8;   // points per base-torus circle
  double shear = 0.5;  // amplitude of the position-dependent shear of each block
};

namespace detail {

// Shear-conjugate of the standard structure on R^2; always tames dx ^ dy.
inline Eigen::Matrix2d sheared_block(double s) {
  Eigen::Matrix2d p;
  p << 1.0, s, 0.0, 1.0;
  Eigen::Matrix2d j0;
  j0 << 0.0, -1.0, 1.0, 0.0;
  return p * j0 * p.inverse();
}

}  // namespace detail

// Projection T^2 x T^2 -> T^2 onto the second factor, coordinates
// (fiber x, fiber y, base x, base y) in [0, 1)^4.
inline SampledFibration generate_product_bundle(const ProductBundleParams& params = {}) {
  if (params.fiber_mesh < 1 || params.base_mesh < 1) {
    throw DomainError("valid_mesh", "mesh sizes must be positive");
  }
  SampledFibration fib;
  fib.generator = "product";
  fib.parameters = {{"fiber_mesh", params.fiber_mesh}, {"base_mesh", params.base_mesh},
                    {"shear", params.shear}};
  fib.mesh = std::to_string(params.fiber_mesh) + "x" + std::to_string(params.fiber_mesh) + "x" +
             std::to_string(params.base_mesh) + "x" + std::to_string(params.base_mesh);
  fib.omega_y = linalg::standard_form(2);
  Matrix df = Matrix::Zero(2, 4);
  df(0, 2) = df(1, 3) = 1.0;
  Matrix eta = Matrix::Zero(4, 4);
  eta.topLeftCorner(2, 2) = linalg::standard_form(2);
  const Matrix g = pullback_form(df, fib.omega_y);
  Matrix kernel = Matrix::Zero(4, 2);
  kernel(0, 0) = kernel(1, 1) = 1.0;

  const int nf = params.fiber_mesh, nb = params.base_mesh;
  const double two_pi = 2.0 * std::numbers::pi;
  for (int a = 0; a < nf; ++a) {
    for (int b = 0; b < nf; ++b) {
      for (int c = 0; c < nb; ++c) {
        for (int d = 0; d < nb; ++d) {
          PointSample s;
          s.id = "p" + std::to_string(a) + "_" + std::to_string(b) + "_" + std::to_string(c) + "_" +
                 std::to_string(d);
          s.base = Vector(4);
          s.base << double(a) / nf, double(b) / nf, double(c) / nb, double(d) / nb;
          s.df = df;
          s.j = Matrix::Zero(4, 4);
          s.j.topLeftCorner(2, 2) =
              detail::sheared_block(params.shear * std::sin(two_pi * (s.base(0) + s.base(2))));
          s.j.bottomRightCorner(2, 2) =
              detail::sheared_block(params.shear * std::cos(two_pi * (s.base(1) - s.base(3))));
          s.eta = eta;
          s.base_pullback = g;
          s.kernel = kernel;
          fib.samples.push_back(std::move(s));
        }
      }
    }
  }
  validate_fibration(fib);
  return fib;
}

struct ProjectivizationParams {
  int n = 2;              // complex dimension of the total space
  int sphere_points = 32;
  int radii = 8;
  double r_in = 0.5;
  double r_out = 2.0;
  std::uint64_t seed = 7;  // placement of the sphere points
};

// Data of f: C^n - {0} -> CP^{n-1} at z, with the base written in unitary
// coordinates centered at [z]: df(v) = (<e_j, v> / |z|)_j for an orthonormal
// basis e_j of z^perp, so that f^*omega_FS = df^T (Omega_std / pi) df.
inline PointSample projectivization_sample(const CVector& z, std::string id) {
  const Eigen::Index n = z.size();
  const double r = z.norm();
  if (!(r > kRadialPointTol)) {
    throw DomainError("base_locus_excluded", "point at the origin");
  }
  // Orthonormal basis of C^n with first vector z / r.
  CMatrix frame = CMatrix::Identity(n, n);
  frame.col(0) = z / r;
  {
    CMatrix seed(n, n);
    seed.col(0) = z / r;
    Eigen::Index filled = 1;
    for (Eigen::Index i = 0; i < n && filled < n; ++i) {
      CVector e = CVector::Unit(n, i);
      for (Eigen::Index k = 0; k < filled; ++k) e -= seed.col(k) * seed.col(k).dot(e);
      if (e.norm() > 1e-6) seed.col(filled++) = e.normalized();
    }
    for (int pass = 0; pass < 2; ++pass) {
      for (Eigen::Index c = 1; c < n; ++c) {
        for (Eigen::Index k = 0; k < c; ++k) seed.col(c) -= seed.col(k) * seed.col(k).dot(seed.col(c));
        seed.col(c).normalize();
      }
    }
    frame = seed;
  }
  const Eigen::Index m = 2 * n;
  const Eigen::Index k = 2 * (n - 1);
  PointSample s;
  s.id = std::move(id);
  s.base = to_real(z);
  s.df = Matrix::Zero(k, m);
  for (Eigen::Index j = 1; j < n; ++j) {
    // <e_j, v> = sum conj(e_jl) v_l, real and imaginary parts as rows.
    for (Eigen::Index l = 0; l < n; ++l) {
      const Complex c = std::conj(frame(l, j)) / r;
      s.df(2 * (j - 1), 2 * l) = c.real();
      s.df(2 * (j - 1), 2 * l + 1) = -c.imag();
      s.df(2 * (j - 1) + 1, 2 * l) = c.imag();
      s.df(2 * (j - 1) + 1, 2 * l + 1) = c.real();
    }
  }
  s.j = linalg::standard_structure(m);
  s.eta = radial_eta(z);
  s.base_pullback = n > 1 ? pullback_form(s.df, Matrix(linalg::standard_form(k) / std::numbers::pi))
                          : Matrix::Zero(m, m);
  const Vector u = to_real(z / r);
  const Vector iu = to_real(Complex(0.0, 1.0) * z / r);
  s.kernel = Matrix(m, 2);
  s.kernel << u, iu;
  return s;
}

inline SampledFibration generate_projectivization(const ProjectivizationParams& params = {}) {
  if (params.n < 2) {
    throw DomainError("valid_mesh", "projectivization needs n >= 2, got " + std::to_string(params.n));
  }
  if (!(params.r_in > 0.0)) {
    throw DomainError("base_locus_excluded",
                      "inner radius must be positive; the origin is excluded (r_in = " +
                          std::to_string(params.r_in) + ")");
  }
  if (!(params.r_out >= params.r_in) || params.sphere_points < 1 || params.radii < 1) {
    throw DomainError("valid_mesh", "need r_out >= r_in and positive point counts");
  }
  const Eigen::Index n = params.n;
  SampledFibration fib;
  fib.generator = "projectivization";
  fib.parameters = {{"n", params.n},
                    {"sphere_points", params.sphere_points},
                    {"radii", params.radii},
                    {"r_in", params.r_in},
                    {"r_out", params.r_out},
                    {"seed", static_cast<double>(params.seed)},
                    {"eta_scale", 1.0 / std::numbers::pi}};
  fib.mesh = std::to_string(params.sphere_points) + "x" + std::to_string(params.radii);
  fib.omega_y = linalg::standard_form(2 * (n - 1)) / std::numbers::pi;

  std::mt19937_64 rng(params.seed);
  std::normal_distribution<double> normal;
  std::vector<CVector> directions;
  for (int p = 0; p < params.sphere_points; ++p) {
    CVector u(n);
    for (Eigen::Index l = 0; l < n; ++l) {
      const double re = normal(rng);
      const double im = normal(rng);
      u(l) = Complex(re, im);
    }
    directions.push_back(u.normalized());
  }
  for (int ri = 0; ri < params.radii; ++ri) {
    const double r = params.radii == 1 ? params.r_in
                                       : params.r_in + (params.r_out - params.r_in) * ri /
                                                           static_cast<double>(params.radii - 1);
    for (int p = 0; p < params.sphere_points; ++p) {
      fib.samples.push_back(projectivization_sample(
          r * directions[p], "s" + std::to_string(p) + "_r" + std::to_string(ri)));
    }
  }
  validate_fibration(fib);
  return fib;
}

}  // namespace tamekit
