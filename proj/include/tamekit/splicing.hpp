#pragma once

// Partition-of-unity splicing of local complex structures: at each point,
// A = sum rho_a J_a is retracted to j(A).

#include <cmath>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "tamekit/forms.hpp"
#include "tamekit/parallel.hpp"
#include "tamekit/retraction.hpp"

namespace tamekit {

struct PatchPoint {
  std::string id;
  std::map<std::string, double> weights;      // rho_a at this point
  std::map<std::string, Matrix> structures;   // J_a, for the patches defined here
  Matrix t;                                   // the slice T at this point
  Matrix omega_f;                             // form on the target of T
  bool certified_regular = false;             // caller vouches the point is regular
};

struct LocalPatchSet {
  std::vector<PatchPoint> points;
};

struct SplicedPoint {
  std::string id;
  ComplexStructure structure;     // j(A)
  Matrix pushforward;             // j(B) on Im T, B = sum rho_a T_*J_a
  Matrix image_basis;             // orthonormal basis of Im T used for pushforward
  double naturality_residual;     // ||T j(A) - j(B) T||
  double margin;                  // min |Im lambda(A)|
  bool pushforwards_agree;        // the T_*J_a coincide (wrapped-point route)
};

namespace detail {

constexpr double kWeightTol = 1e-9;
constexpr double kSpliceMarginFloor = 1e-8;

inline std::string at_point(const PatchPoint& p) { return "point '" + p.id + "': "; }

inline SplicedPoint splice_point(const PatchPoint& p, const Tolerance& tol) {
  double sum = 0.0;
  for (const auto& [alpha, rho] : p.weights) {
    if (!(rho >= 0.0) || !std::isfinite(rho)) {
      throw DomainError("weights_partition_of_unity",
                        at_point(p) + "weight of '" + alpha + "' is " + std::to_string(rho));
    }
    sum += rho;
  }
  if (std::abs(sum - 1.0) > kWeightTol) {
    throw DomainError("weights_partition_of_unity",
                      at_point(p) + "weights sum to " + std::to_string(sum));
  }

  const LinearSlice slice(p.t, SkewForm(p.omega_f, tol));
  const Eigen::Index m = slice.source_dim();

  Matrix a = Matrix::Zero(m, m);
  Matrix b;
  Matrix basis;
  std::vector<Matrix> pushed;
  for (const auto& [alpha, rho] : p.weights) {
    if (rho == 0.0) continue;
    const auto it = p.structures.find(alpha);
    if (it == p.structures.end()) {
      throw DomainError("structure_defined",
                        at_point(p) + "patch '" + alpha + "' has positive weight but no structure");
    }
    const ComplexStructure j(it->second, tol);
    if (j.dim() != m) {
      throw DimensionError(at_point(p) + "patch '" + alpha + "' structure has dimension " +
                           std::to_string(j.dim()));
    }
    if (!is_slice_compatible(slice, j, tol)) {
      throw DomainError("slice_compatible",
                        at_point(p) + "patch '" + alpha + "' is not (omega_F, T)-compatible");
    }
    const Pushforward pf = pushforward_structure(slice, j, tol);
    if (b.size() == 0) {
      b = Matrix::Zero(pf.structure.rows(), pf.structure.cols());
      basis = pf.basis;
    }
    a += rho * j.matrix();
    b += rho * pf.structure;
    pushed.push_back(pf.structure);
  }

  bool agree = true;
  for (std::size_t i = 1; i < pushed.size(); ++i) {
    const double d = (pushed[i] - pushed[0]).norm();
    if (d > tol.tol_angle * linalg::scale(pushed[0].norm())) agree = false;
  }
  if (!agree && !p.certified_regular) {
    throw DomainError("pushforward_agreement_or_regular",
                      at_point(p) + "pushforwards T_*J disagree and the point is not certified regular");
  }

  const double margin = spectral_margin(a);
  if (!(margin >= kSpliceMarginFloor)) {
    throw DomainError("no_real_eigenvalues",
                      at_point(p) + "A = sum rho J has a (near-)real eigenvalue (margin " +
                          std::to_string(margin) + "); unwrapped critical point");
  }
  ComplexStructure spliced = retraction_j(NoRealEigMatrix(a, kSpliceMarginFloor), tol);

  Matrix jb = b;
  if (b.rows() > 0) jb = retraction_j(NoRealEigMatrix(b, kSpliceMarginFloor), tol).matrix();
  const Matrix image_t = basis.transpose() * p.t;
  const double residual = (image_t * spliced.matrix() - jb * image_t).norm();

  if (!is_slice_compatible(slice, spliced, tol)) {
    throw std::logic_error(at_point(p) + "spliced structure is not (omega_F, T)-compatible");
  }
  return SplicedPoint{p.id, std::move(spliced), std::move(jb), std::move(basis), residual,
                      margin, agree};
}

}  // namespace detail

// Per-point j(sum rho_a J_a). Points are processed in parallel; the output
// order matches the input order.
inline std::vector<SplicedPoint> splice_partition(const LocalPatchSet& patches,
                                                  const Tolerance& tol = default_tolerance()) {
  std::vector<std::optional<SplicedPoint>> slots(patches.points.size());
  parallel_for(patches.points.size(), [&](std::size_t i) {
    slots[i].emplace(detail::splice_point(patches.points[i], tol));
  });
  std::vector<SplicedPoint> out;
  out.reserve(slots.size());
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

}  // namespace tamekit
