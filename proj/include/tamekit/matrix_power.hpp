#pragma once

// Principal matrix powers A^r for matrices with no eigenvalues on (-inf, 0].
//
// Route: complex Schur form A = U T U^*, eigenvalues grouped into clusters
// (chains of relative gap <= kClusterGap, never across the negative axis), Schur form reordered so clusters are
// contiguous, then
//   * a single eigenvalue maps to lambda^r on the principal branch,
//   * a cluster sigma (I + N) maps to sigma^r p(N), p the binomial series of
//     (1 + z)^r, summed until the terms vanish (exact after |cluster| terms
//     when N is nilpotent),
//   * off-diagonal blocks follow from the block Parlett recurrence F T = T F.

#include <cmath>
#include <complex>
#include <numeric>
#include <string>
#include <vector>

#include "tamekit/linalg.hpp"
#include "tamekit/tolerance.hpp"

namespace tamekit {

namespace detail {

constexpr double kClusterGap = 0.1;
constexpr double kRealnessTol = 1e-8;
constexpr int kSeriesMaxTerms = 500;

inline std::string format_complex(Complex z) {
  return "(" + std::to_string(z.real()) + (z.imag() < 0 ? " - " : " + ") +
         std::to_string(std::abs(z.imag())) + "i)";
}

// Swap diagonal entries k and k+1 of the upper-triangular t by a unitary
// rotation, updating the Schur vectors u.
inline void swap_schur_pair(CMatrix& t, CMatrix& u, Eigen::Index k) {
  const Complex a = t(k, k);
  const Complex b = t(k + 1, k + 1);
  Complex c = t(k, k + 1);
  Complex s = b - a;
  const double len = std::hypot(std::abs(c), std::abs(s));
  if (len == 0.0) return;
  c /= len;
  s /= len;
  Eigen::Matrix2cd g;
  g << c, -std::conj(s), s, std::conj(c);
  t.middleRows(k, 2) = g.adjoint() * t.middleRows(k, 2);
  t.middleCols(k, 2) = t.middleCols(k, 2) * g;
  u.middleCols(k, 2) = u.middleCols(k, 2) * g;
  t(k + 1, k) = 0.0;
}

inline Complex principal_scalar_power(Complex z, double r) {
  return std::exp(r * std::log(z));
}

}  // namespace detail

// A square matrix verified to lie in the slit domain: no eigenvalue on
// (-inf, 0]. Caches its reordered Schur decomposition.
class SlitMatrix {
 public:
  explicit SlitMatrix(const CMatrix& a, const Tolerance& tol = default_tolerance())
      : a_(a), real_(false) {
    init(tol);
  }

  explicit SlitMatrix(const Matrix& a, const Tolerance& tol = default_tolerance())
      : a_(a.cast<Complex>()), real_(true) {
    init(tol);
  }

  Eigen::Index dim() const { return a_.rows(); }
  bool is_real() const { return real_; }
  const CMatrix& matrix() const { return a_; }
  // Eigenvalues in the (reordered) Schur diagonal order.
  CVector eigenvalues() const { return t_.diagonal(); }
  std::size_t cluster_count() const { return blocks_.size() - 1; }

  CMatrix power(double r) const {
    const Eigen::Index n = dim();
    const std::size_t nb = blocks_.size() - 1;
    CMatrix f = CMatrix::Zero(n, n);

    for (std::size_t b = 0; b < nb; ++b) {
      const Eigen::Index lo = blocks_[b];
      const Eigen::Index sz = blocks_[b + 1] - lo;
      f.block(lo, lo, sz, sz) = diagonal_block_power(t_.block(lo, lo, sz, sz), r);
    }

    for (std::size_t d = 1; d < nb; ++d) {
      for (std::size_t i = 0; i + d < nb; ++i) {
        const std::size_t j = i + d;
        const Eigen::Index ri = blocks_[i], ni = blocks_[i + 1] - ri;
        const Eigen::Index rj = blocks_[j], nj = blocks_[j + 1] - rj;
        CMatrix rhs = f.block(ri, ri, ni, ni) * t_.block(ri, rj, ni, nj) -
                      t_.block(ri, rj, ni, nj) * f.block(rj, rj, nj, nj);
        for (std::size_t k = i + 1; k < j; ++k) {
          const Eigen::Index rk = blocks_[k], nk = blocks_[k + 1] - rk;
          rhs += f.block(ri, rk, ni, nk) * t_.block(rk, rj, nk, nj) -
                 t_.block(ri, rk, ni, nk) * f.block(rk, rj, nk, nj);
        }
        f.block(ri, rj, ni, nj) =
            solve_triangular_sylvester(t_.block(ri, ri, ni, ni), t_.block(rj, rj, nj, nj), rhs);
      }
    }
    return u_ * f * u_.adjoint();
  }

  // Real power of a real matrix. The imaginary part left by the complex
  // computation is checked and then dropped; its relative size is reported
  // through imaginary_residual when requested.
  Matrix real_power(double r, double* imaginary_residual = nullptr) const {
    if (!real_) {
      throw DomainError("real_input", "real_power requires a real matrix");
    }
    const CMatrix f = power(r);
    const Matrix re = f.real();
    const double imag = f.imag().norm() / linalg::scale(re.norm());
    if (imaginary_residual != nullptr) *imaginary_residual = imag;
    if (!(imag <= detail::kRealnessTol)) {
      throw DomainError("realness", "power of a real matrix has imaginary residual " +
                                        std::to_string(imag));
    }
    return re;
  }

 private:
  void init(const Tolerance& tol) {
    if (a_.rows() == 0 || a_.rows() != a_.cols()) {
      throw DimensionError("matrix power needs a nonempty square matrix, got " +
                           std::to_string(a_.rows()) + "x" + std::to_string(a_.cols()));
    }
    if (!a_.allFinite()) {
      throw DomainError("finite_entries", "matrix has non-finite entries");
    }
    Eigen::ComplexSchur<CMatrix> schur(a_);
    if (schur.info() != Eigen::Success) {
      throw ConvergenceError("schur_convergence", "complex Schur decomposition failed");
    }
    t_ = schur.matrixT().triangularView<Eigen::Upper>();
    u_ = schur.matrixU();

    const double slit = tol.tol_slit * linalg::scale(a_.norm());
    for (Eigen::Index i = 0; i < t_.rows(); ++i) {
      const Complex lambda = t_(i, i);
      if (std::abs(lambda.imag()) <= slit && lambda.real() <= slit) {
        throw DomainError("eigenvalue_in_slit", "eigenvalue " + detail::format_complex(lambda) +
                                                    " lies on the slit (-inf, 0]");
      }
    }
    cluster_and_reorder();
  }

  void cluster_and_reorder() {
    const Eigen::Index n = t_.rows();
    std::vector<Eigen::Index> parent(n);
    std::iota(parent.begin(), parent.end(), Eigen::Index{0});
    auto find = [&](Eigen::Index x) {
      while (parent[x] != x) x = parent[x] = parent[parent[x]];
      return x;
    };
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = i + 1; j < n; ++j) {
        const Complex li = t_(i, i), lj = t_(j, j);
        // never merge across the branch cut
        const bool across_cut = (li.real() < 0.0 || lj.real() < 0.0) &&
                                (li.imag() >= 0.0) != (lj.imag() >= 0.0);
        if (!across_cut &&
            std::abs(li - lj) <= detail::kClusterGap * std::max(std::abs(li), std::abs(lj))) {
          parent[find(i)] = find(j);
        }
      }
    }
    // Cluster ids in order of first appearance along the diagonal.
    std::vector<Eigen::Index> id(n, -1), root_id(n, -1);
    Eigen::Index next = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const Eigen::Index r = find(i);
      if (root_id[r] < 0) root_id[r] = next++;
      id[i] = root_id[r];
    }
    bool swapped = true;
    while (swapped) {
      swapped = false;
      for (Eigen::Index k = 0; k + 1 < n; ++k) {
        if (id[k] > id[k + 1]) {
          detail::swap_schur_pair(t_, u_, k);
          std::swap(id[k], id[k + 1]);
          swapped = true;
        }
      }
    }
    blocks_.clear();
    blocks_.push_back(0);
    for (Eigen::Index k = 1; k < n; ++k) {
      if (id[k] != id[k - 1]) blocks_.push_back(k);
    }
    blocks_.push_back(n);
  }

  static CMatrix diagonal_block_power(const CMatrix& tb, double r) {
    const Eigen::Index s = tb.rows();
    if (s == 1) {
      return CMatrix::Constant(1, 1, detail::principal_scalar_power(tb(0, 0), r));
    }
    const Complex sigma = tb.diagonal().mean();
    for (Eigen::Index i = 0; i < s; ++i) {
      const Complex q = tb(i, i) / sigma;
      if (!(std::abs(q - 1.0) < 1.0) ||
          std::abs(std::arg(sigma) + std::arg(q) - std::arg(tb(i, i))) > 1e-9) {
        throw ConvergenceError("cluster_series_convergence",
                               "eigenvalue " + detail::format_complex(tb(i, i)) +
                                   " is too far from its cluster centre " + detail::format_complex(sigma));
      }
    }
    const CMatrix nil = tb / sigma - CMatrix::Identity(s, s);
    CMatrix sum = CMatrix::Identity(s, s);
    CMatrix term = CMatrix::Identity(s, s);
    int quiet = 0;
    for (int k = 1; k <= detail::kSeriesMaxTerms; ++k) {
      term = (term * nil) * ((r - (k - 1)) / k);
      sum += term;
      const double tn = term.norm();
      if (k >= s && tn <= std::numeric_limits<double>::epsilon() * sum.norm()) {
        if (tn == 0.0 || ++quiet >= 2) {
          return detail::principal_scalar_power(sigma, r) * sum;
        }
      } else {
        quiet = 0;
      }
    }
    throw ConvergenceError("cluster_series_convergence",
                           "power series on an eigenvalue cluster of size " + std::to_string(s) +
                               " near " + detail::format_complex(sigma) + " did not converge");
  }

  // Solves A X - X B = C with A, B upper triangular and disjoint spectra.
  static CMatrix solve_triangular_sylvester(const CMatrix& a, const CMatrix& b,
                                            const CMatrix& c) {
    CMatrix x(c.rows(), c.cols());
    for (Eigen::Index col = 0; col < c.cols(); ++col) {
      CVector rhs = c.col(col);
      for (Eigen::Index l = 0; l < col; ++l) rhs += x.col(l) * b(l, col);
      CMatrix shifted = a;
      shifted.diagonal().array() -= b(col, col);
      x.col(col) = shifted.triangularView<Eigen::Upper>().solve(rhs);
    }
    return x;
  }

  CMatrix a_;
  bool real_;
  CMatrix t_;
  CMatrix u_;
  std::vector<Eigen::Index> blocks_;  // block boundaries in the reordered Schur form
};

inline CMatrix principal_power(const SlitMatrix& a, double r) { return a.power(r); }

inline CMatrix principal_power(const CMatrix& a, double r,
                               const Tolerance& tol = default_tolerance()) {
  return SlitMatrix(a, tol).power(r);
}

inline Matrix principal_power(const Matrix& a, double r,
                              const Tolerance& tol = default_tolerance()) {
  return SlitMatrix(a, tol).real_power(r);
}

// min |Im lambda| over the eigenvalues of b.
inline double spectral_margin(const Matrix& b) {
  linalg::require_square(b, "spectral_margin argument");
  if (b.rows() == 0) return kInfinity;
  Eigen::EigenSolver<Matrix> es(b, false);
  if (es.info() != Eigen::Success) {
    throw ConvergenceError("eigen_convergence", "eigenvalue computation failed");
  }
  return es.eigenvalues().imag().cwiseAbs().minCoeff();
}

}  // namespace tamekit
