#include <gtest/gtest.h>

#include "support/generators.hpp"
#include "support/oracles.hpp"

using namespace tamekit;
using namespace tamekit::testing;

namespace {

Matrix m2(double a, double b, double c, double d) {
  Matrix m(2, 2);
  m << a, b, c, d;
  return m;
}

Matrix split_projection() {
  Matrix t = Matrix::Zero(2, 4);
  t(0, 0) = t(1, 1) = 1.0;
  return t;
}

Matrix block_diag(const Matrix& a, const Matrix& b) {
  Matrix out = Matrix::Zero(a.rows() + b.rows(), a.cols() + b.cols());
  out.topLeftCorner(a.rows(), a.cols()) = a;
  out.bottomRightCorner(b.rows(), b.cols()) = b;
  return out;
}

}  // namespace

TEST(SkewForm, StandardPairIsTame) {
  const SkewForm omega(m2(0, 1, -1, 0));
  EXPECT_TRUE(is_tame(omega, ComplexStructure(m2(0, -1, 1, 0))));
  EXPECT_FALSE(is_tame(omega, ComplexStructure(m2(0, 1, -1, 0))));
  EXPECT_TRUE(is_compatible(omega, ComplexStructure(m2(0, -1, 1, 0))));
}

TEST(SkewForm, RejectsDegenerateAndNonSkew) {
  try {
    SkewForm(Matrix::Zero(2, 2));
    FAIL();
  } catch (const DomainError& e) {
    EXPECT_EQ(e.precondition(), "nondegenerate_form");
  }
  EXPECT_THROW(SkewForm(m2(0, 1, 1, 0)), DomainError);
  EXPECT_THROW(SkewForm(Matrix::Identity(3, 3)), DimensionError);
}

TEST(ComplexStructure, RejectsNonStructures) {
  EXPECT_THROW(ComplexStructure(Matrix::Identity(2, 2)), DomainError);
  EXPECT_THROW(ComplexStructure(Matrix::Zero(3, 3)), DimensionError);
}

TEST(Taming, DimensionMismatch) {
  const SkewForm omega(linalg::standard_form(4));
  const ComplexStructure j(linalg::standard_structure(2));
  EXPECT_THROW(is_tame(omega, j), DimensionError);
  EXPECT_THROW(is_compatible(omega, j), DimensionError);
}

TEST(Taming, TameButNotCompatible) {
  Rng rng = make_rng(11);
  const Matrix omega = linalg::standard_form(4);
  int checked = 0;
  for (int i = 0; i < 50; ++i) {
    const Matrix j = random_tame(omega, rng, 1e-2);
    const double residual = (j.transpose() * omega * j - omega).norm();
    if (residual < 1e-3) continue;
    EXPECT_TRUE(is_tame(SkewForm(omega), ComplexStructure(j)));
    EXPECT_FALSE(is_compatible(SkewForm(omega), ComplexStructure(j)));
    ++checked;
  }
  EXPECT_GT(checked, 10);
}

TEST(Taming, CompatibleImpliesTame) {
  Rng rng = make_rng(12);
  for (int i = 0; i < 300; ++i) {
    const Eigen::Index m = 2 * uniform_int(rng, 1, 4);
    const Matrix omega = random_form(m, rng);
    const Matrix j = random_structure(m, rng, 0.8);
    const SkewForm w(omega);
    const ComplexStructure s(j);
    if (is_compatible(w, s)) EXPECT_TRUE(is_tame(w, s));
    const Matrix jc = random_compatible(omega, rng);
    EXPECT_TRUE(is_compatible(w, ComplexStructure(jc)));
    EXPECT_TRUE(is_tame(w, ComplexStructure(jc)));
  }
}

TEST(Taming, CongruenceInvariance) {
  Rng rng = make_rng(13);
  for (int i = 0; i < 300; ++i) {
    const Eigen::Index m = 2 * uniform_int(rng, 1, 4);
    const Matrix omega = random_form(m, rng);
    const Matrix j = random_structure(m, rng, 0.8);
    const Matrix q = random_invertible(m, rng, 0.8);
    const bool before = is_tame(SkewForm(omega), ComplexStructure(j));
    const Matrix omega2 = q.transpose() * omega * q;
    const Matrix j2 = q.inverse() * j * q;
    const double margin = taming_margin(omega, j);
    if (std::abs(margin) < 1e-6) continue;
    EXPECT_EQ(before, is_tame(SkewForm(omega2), ComplexStructure(j2))) << "trial " << i;
  }
}

TEST(Taming, OpenCondition) {
  Rng rng = make_rng(14);
  for (int i = 0; i < 300; ++i) {
    const Eigen::Index m = 2 * uniform_int(rng, 1, 4);
    const Matrix omega = linalg::standard_form(m);
    const Matrix j = random_tame(omega, rng, 1e-2);
    const double delta = taming_margin(omega, j);
    // Perturbations of operator norm < delta / 4 in both the form and J.
    Matrix e = linalg::skew_part(gaussian_matrix(m, m, rng));
    e *= 0.24 * delta / (linalg::op_norm(e) * linalg::scale(linalg::op_norm(j)));
    Matrix f = gaussian_matrix(m, m, rng);
    f *= 0.24 * delta / (linalg::op_norm(f) * linalg::scale(linalg::op_norm(omega + e)));
    // Keep J^2 = -I by moving J along a conjugation close to the identity.
    const Matrix q = Matrix::Identity(m, m) + f / 8.0;
    const Matrix j2 = q * j * q.inverse();
    if (linalg::op_norm(j2 - j) >= 0.25 * delta / linalg::scale(linalg::op_norm(omega + e))) continue;
    EXPECT_TRUE(taming_margin(Matrix(omega + e), j2) > 0.0) << "trial " << i;
  }
}

TEST(Taming, ConvexityOfTamingForms) {
  Rng rng = make_rng(15);
  for (int i = 0; i < 200; ++i) {
    const Eigen::Index m = 2 * uniform_int(rng, 1, 4);
    const Matrix j = random_structure(m, rng, 0.6);
    // omega(v, w) = h(Jv, w) with h a J-invariant inner product tames J.
    auto taming_form = [&](Rng& r) {
      const Matrix g = random_spd(m, r);
      const Matrix h = g + j.transpose() * g * j;
      return Matrix(j.transpose() * h);
    };
    const Matrix o1 = taming_form(rng);
    const Matrix o2 = taming_form(rng);
    ASSERT_GT(taming_margin(o1, j), 0.0);
    ASSERT_GT(taming_margin(o2, j), 0.0);
    const double t = uniform(rng, 0.0, 1.0);
    EXPECT_GT(taming_margin(Matrix((1 - t) * o1 + t * o2), j), 0.0);
  }
}

TEST(Orientation, Examples) {
  EXPECT_EQ(orientation_sign(SkewForm(linalg::standard_form(2))), 1);
  EXPECT_EQ(orientation_sign(SkewForm(linalg::standard_form(4))), 1);
  Matrix flipped = linalg::standard_form(4);
  flipped.bottomRightCorner(2, 2) *= -1.0;
  EXPECT_EQ(orientation_sign(SkewForm(flipped)), -1);
  EXPECT_EQ(orientation_sign(ComplexStructure(linalg::standard_structure(4))), 1);
}

TEST(Orientation, TameStructuresAgreeWithForm) {
  Rng rng = make_rng(16);
  for (int i = 0; i < 500; ++i) {
    const Eigen::Index m = 2 * uniform_int(rng, 1, 4);
    Matrix omega = random_form(m, rng);
    if (uniform(rng, 0, 1) < 0.5) {
      // opposite orientation
      Matrix p = Matrix::Identity(m, m);
      p(0, 0) = -1.0;
      omega = p.transpose() * omega * p;
    }
    const Matrix j = reference_compatible_structure(SkewForm(omega)).matrix();
    const Matrix jt = random_tame(omega, rng);
    ASSERT_TRUE(is_tame(SkewForm(omega), ComplexStructure(jt)));
    EXPECT_EQ(orientation_sign(SkewForm(omega)), orientation_sign(ComplexStructure(jt))) << i;
    EXPECT_EQ(orientation_sign(SkewForm(omega)), orientation_sign(ComplexStructure(j))) << i;
  }
}

TEST(Pfaffian, MatchesExpansionOracle) {
  Rng rng = make_rng(17);
  for (int i = 0; i < 200; ++i) {
    const Eigen::Index m = 2 * uniform_int(rng, 1, 5);
    const Matrix a = linalg::skew_part(gaussian_matrix(m, m, rng));
    const double pf = pfaffian(a);
    const double oracle = pfaffian_expansion(a);
    EXPECT_NEAR(pf, oracle, 1e-10 * linalg::scale(std::abs(oracle)));
    EXPECT_NEAR(pf * pf, a.determinant(), 1e-9 * linalg::scale(std::abs(a.determinant())));
  }
}

TEST(Pullback, Examples) {
  const Matrix w = linalg::standard_form(2);
  EXPECT_TRUE(pullback_form(Matrix::Identity(2, 2), SkewForm(w)).isApprox(w));
  EXPECT_TRUE(pullback_form(Matrix::Zero(2, 4), SkewForm(w)).isZero());
  Matrix expected = Matrix::Zero(4, 4);
  expected.topLeftCorner(2, 2) = w;
  EXPECT_TRUE(pullback_form(split_projection(), SkewForm(w)).isApprox(expected));
  EXPECT_THROW(pullback_form(Matrix::Zero(3, 4), SkewForm(w)), DimensionError);
}

TEST(Slice, SplitProjection) {
  const LinearSlice slice(split_projection(), SkewForm(linalg::standard_form(2)));
  const Matrix js = linalg::standard_structure(2);
  const ComplexStructure j(block_diag(js, js));
  EXPECT_TRUE(is_slice_tame(slice, j));
  EXPECT_TRUE(is_slice_compatible(slice, j));
  const Pushforward pf = pushforward_structure(slice, j);
  EXPECT_LT((pf.ambient() - js).norm(), 1e-12);
  EXPECT_LT(pf.residual, 1e-12);

  // Swap the two coordinate planes: J e3 leaves span(e3, e4).
  Matrix swap = Matrix::Zero(4, 4);
  swap.topRightCorner(2, 2) = -Matrix::Identity(2, 2);
  swap.bottomLeftCorner(2, 2) = Matrix::Identity(2, 2);
  const ComplexStructure js2(swap);
  EXPECT_FALSE(is_slice_tame(slice, js2));
  EXPECT_FALSE(analyze_slice(slice, js2).kernel_invariant);
  EXPECT_THROW(pushforward_structure(slice, js2), DomainError);
}

TEST(Slice, IdentityReducesToTaming) {
  Rng rng = make_rng(18);
  for (int i = 0; i < 100; ++i) {
    const Eigen::Index m = 2 * uniform_int(rng, 1, 4);
    const Matrix omega = random_form(m, rng);
    const Matrix j = random_compatible(omega, rng);
    const LinearSlice slice(Matrix::Identity(m, m), SkewForm(omega));
    EXPECT_TRUE(is_slice_tame(slice, ComplexStructure(j)));
    EXPECT_TRUE(is_slice_compatible(slice, ComplexStructure(j)));
    const Pushforward pf = pushforward_structure(slice, ComplexStructure(j));
    EXPECT_LT((pf.ambient() - j).norm(), 1e-9);
  }
}

TEST(Slice, TameButNotCompatibleConjugateBlock) {
  // T: R^6 -> R^4 projection; the image block is conjugated off the
  // compatible locus while staying tame. (On a 2-dimensional image every
  // tame structure is compatible, so the image has to be 4-dimensional.)
  Matrix t = Matrix::Zero(4, 6);
  t.leftCols(4) = Matrix::Identity(4, 4);
  const Matrix omega = linalg::standard_form(4);
  const LinearSlice slice(t, SkewForm(omega));
  Rng rng = make_rng(21);
  Matrix base;
  do {
    base = random_tame(omega, rng, 1e-2);
  } while (invariance_residual(omega, base) < 1e-3);
  const ComplexStructure j(block_diag(base, linalg::standard_structure(2)));
  EXPECT_TRUE(is_slice_tame(slice, j));
  EXPECT_FALSE(is_slice_compatible(slice, j));
}

TEST(Slice, RandomCompatiblePushforwardIsCompatible) {
  Rng rng = make_rng(19);
  for (int i = 0; i < 200; ++i) {
    const Eigen::Index k = 2 * uniform_int(rng, 1, 2);
    const Eigen::Index m = k + 2 * uniform_int(rng, 0, 2);
    const SliceInstance s = random_slice(k, m, rng);
    Rng fiber = make_rng(1000 + i), base = make_rng(2000 + i);
    const Matrix j = random_slice_compatible(s, fiber, base);
    const LinearSlice slice(s.t, SkewForm(s.omega_f));
    ASSERT_TRUE(is_slice_compatible(slice, ComplexStructure(j))) << i;
    const Pushforward pf = pushforward_structure(slice, ComplexStructure(j));
    EXPECT_LE(pf.residual, 1e-8 * linalg::scale(s.t.norm()) * linalg::scale(j.norm()));
    const SkewForm restricted(pf.restricted_form(s.omega_f));
    EXPECT_TRUE(is_compatible(restricted, ComplexStructure(pf.structure))) << i;
  }
}
