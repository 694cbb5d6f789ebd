#pragma once

// Seeded random instance generators: Gaussian matrices, symplectic
// conjugators, simplex points, and tame structures obtained by conjugating a
// reference compatible structure.

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "tamekit/forms.hpp"
#include "tamekit/retraction.hpp"

namespace tamekit {

using Rng = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Per-trial seed derived from the campaign seed and the trial index.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
  return splitmix64(splitmix64(seed) ^ splitmix64(index + 0x632be59bd9b4e019ULL));
}

inline Matrix gaussian_matrix(Eigen::Index rows, Eigen::Index cols, Rng& rng, double sigma = 1.0) {
  std::normal_distribution<double> normal(0.0, sigma);
  Matrix m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = normal(rng);
  }
  return m;
}

// Uniform point on the simplex (Dirichlet(1, ..., 1)).
inline std::vector<double> random_simplex(std::size_t k, Rng& rng) {
  std::exponential_distribution<double> expo(1.0);
  std::vector<double> t(k);
  double sum = 0.0;
  for (auto& x : t) sum += (x = expo(rng));
  for (auto& x : t) x /= sum;
  return t;
}

// Cayley transform (I - X/2)^{-1} (I + X/2); symplectic when X is Hamiltonian.
inline Matrix cayley(const Matrix& x) {
  const Matrix id = Matrix::Identity(x.rows(), x.cols());
  return (id - 0.5 * x).partialPivLu().solve(id + 0.5 * x);
}

// Random Q with Q^T Omega Q = Omega: Cayley transform of X = Omega^{-1} S, S
// symmetric. X is capped at operator norm 1 so Q stays well conditioned.
inline Matrix random_symplectic(const Matrix& omega, double scale, Rng& rng) {
  const Eigen::Index m = omega.rows();
  const Matrix g = gaussian_matrix(m, m, rng, scale / std::sqrt(static_cast<double>(m)));
  Matrix x = omega.partialPivLu().solve(linalg::sym(g));
  const double norm = linalg::op_norm(x);
  if (norm > 1.0) x /= norm;
  return cayley(x);
}

// The omega-compatible structure j(Omega^{-1}); for the standard form this is
// the standard structure.
inline ComplexStructure reference_compatible_structure(const SkewForm& omega,
                                                       const Tolerance& tol = default_tolerance()) {
  const Matrix inv = omega.matrix().inverse();
  return retraction_j(linalg::skew_part(inv), tol);
}

inline Matrix conjugate(const Matrix& q, const Matrix& j) {
  return q * j * q.partialPivLu().inverse();
}

struct SamplerOptions {
  double margin_floor = 1e-3;    // minimum accepted taming margin
  double conjugator_scale = 0.6; // size of the random part of the conjugator
  int budget = 1000;             // rejection budget
  bool compatible_only = false;  // draw symplectic conjugators
};

struct SampledStructure {
  Matrix structure;
  Matrix conjugator;
  double margin = 0.0;
  int attempts = 0;
};

// Draws conjugators Q and returns J = Q J0 Q^{-1}, J0 the reference compatible
// structure, once its taming margin clears the floor.
inline SampledStructure sample_tame_structure(const SkewForm& omega, Rng& rng,
                                              const SamplerOptions& opts = {},
                                              const Tolerance& tol = default_tolerance()) {
  const Eigen::Index m = omega.dim();
  const Matrix j0 = reference_compatible_structure(omega, tol).matrix();
  const Matrix id = Matrix::Identity(m, m);
  for (int attempt = 1; attempt <= opts.budget; ++attempt) {
    const Matrix q =
        opts.compatible_only
            ? random_symplectic(omega.matrix(), opts.conjugator_scale, rng)
            : Matrix(id + gaussian_matrix(m, m, rng,
                                          opts.conjugator_scale / std::sqrt(static_cast<double>(m))));
    Eigen::PartialPivLU<Matrix> lu(q);
    if (!(std::abs(lu.determinant()) > 1e-8)) continue;
    Matrix j = q * j0 * lu.inverse();
    const double margin = taming_margin(omega.matrix(), j);
    if (margin >= opts.margin_floor) {
      return SampledStructure{std::move(j), q, margin, attempt};
    }
  }
  throw DomainError("rejection_budget",
                    "no tame structure with margin >= " + std::to_string(opts.margin_floor) +
                        " after " + std::to_string(opts.budget) + " attempts");
}

}  // namespace tamekit
