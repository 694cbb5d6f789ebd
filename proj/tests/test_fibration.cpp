#include <gtest/gtest.h>

#include <numbers>

#include "support/generators.hpp"
#include "support/oracles.hpp"

using namespace tamekit;
using namespace tamekit::testing;

namespace {

// Sample on R^4 -> R^2, (x1, y1, x2, y2) -> (x2, y2), with eta coupling fiber
// and base by c. J is standard; lambda(t) = min eig(t sym(eta J) + sym(G J)).
PointSample coupled_sample(double c, std::string id = "coupled") {
  PointSample s;
  s.id = std::move(id);
  s.base = Vector::Zero(4);
  s.df = Matrix::Zero(2, 4);
  s.df(0, 2) = s.df(1, 3) = 1.0;
  s.j = linalg::standard_structure(4);
  s.eta = Matrix::Zero(4, 4);
  s.eta.topLeftCorner(2, 2) = linalg::standard_form(2);
  s.eta(0, 2) = c;
  s.eta(2, 0) = -c;
  s.base_pullback = pullback_form(s.df, linalg::standard_form(2));
  s.kernel = Matrix::Zero(4, 2);
  s.kernel(0, 0) = s.kernel(1, 1) = 1.0;
  return s;
}

SampledFibration single(PointSample s) {
  SampledFibration fib;
  fib.omega_y = linalg::standard_form(2);
  fib.generator = "file";
  fib.samples.push_back(std::move(s));
  return fib;
}

}  // namespace

TEST(ProductBundle, ValidatesAndThresholdIsInfinite) {
  const SampledFibration fib = generate_product_bundle();
  EXPECT_EQ(fib.samples.size(), 8u * 8 * 8 * 8);
  EXPECT_NO_THROW(validate_fibration(fib));
  const ThresholdReport rep = taming_thresholds(fib, 1e6);
  EXPECT_TRUE(std::isinf(rep.threshold));
  for (const auto& r : rep.rows) {
    EXPECT_TRUE(std::isinf(r.t0));
    EXPECT_GT(r.margin_at_half, 0.0);
  }
}

TEST(ProductBundle, StructureVariesAcrossSamples) {
  const SampledFibration fib = generate_product_bundle();
  double spread = 0.0;
  for (const auto& s : fib.samples) spread = std::max(spread, (s.j - fib.samples[0].j).norm());
  EXPECT_GT(spread, 0.1);
}

TEST(ProductBundle, AssembledFormIsBlockSum) {
  const SampledFibration fib = generate_product_bundle({2, 2, 0.5});
  const auto forms = assemble_omega_t(fib, 1.0);
  for (const auto& f : forms) {
    EXPECT_LT((f.omega_t - linalg::standard_form(4)).norm(), 1e-14);
    EXPECT_GT(f.pfaffian, 0.0);
  }
}

TEST(Threshold, PureFiberSampleIsInfinite) {
  // df = 0: the whole space is the kernel and eta tames J everywhere.
  PointSample s;
  s.id = "fiber";
  s.base = Vector::Zero(2);
  s.df = Matrix::Zero(2, 2);
  s.j = linalg::standard_structure(2);
  s.eta = linalg::standard_form(2);
  s.base_pullback = Matrix::Zero(2, 2);
  s.kernel = Matrix::Identity(2, 2);
  s.regular = false;
  const SampledFibration fib = single(s);
  EXPECT_NO_THROW(validate_fibration(fib));
  EXPECT_TRUE(std::isinf(taming_interval(s, 1e6)));
}

TEST(Threshold, CoupledSampleMatchesGridScan) {
  for (double c : {0.5, 1.0, 2.0}) {
    const PointSample s = coupled_sample(c);
    EXPECT_NO_THROW(validate_sample(s, linalg::standard_form(2)));
    const double t0 = taming_interval(s, 1e6);
    ASSERT_TRUE(std::isfinite(t0)) << c;
    const double scan = grid_scan_threshold(s, 2.0 * t0, 200000);
    EXPECT_NEAR(scan, t0, 1e-4 * t0) << c;
    EXPECT_GT(omega_t_margin(s, 0.5 * t0), 0.0);
    EXPECT_LE(omega_t_margin(s, 1.01 * t0), 0.0);
  }
}

TEST(Threshold, GlobalIsMinimumOverSamples) {
  SampledFibration fib = single(coupled_sample(1.0, "a"));
  fib.samples.push_back(coupled_sample(2.0, "b"));
  const ThresholdReport rep = taming_thresholds(fib, 1e6);
  ASSERT_EQ(rep.rows.size(), 2u);
  EXPECT_EQ(rep.threshold, std::min(rep.rows[0].t0, rep.rows[1].t0));
  EXPECT_LT(rep.rows[1].t0, rep.rows[0].t0);
}

TEST(Threshold, MixedProductAndCoupled) {
  SampledFibration fib = generate_product_bundle({2, 2, 0.3});
  const PointSample extra = coupled_sample(1.0);
  fib.samples.push_back(extra);
  EXPECT_NEAR(global_taming_threshold(fib, 1e6), taming_interval(extra, 1e6), 1e-12);
}

TEST(Threshold, AssembleBelowThreshold) {
  const PointSample s = coupled_sample(1.0);
  const SampledFibration fib = single(s);
  const double t0 = global_taming_threshold(fib, 1e6);
  const auto forms = assemble_omega_t(fib, 0.5 * t0, t0);
  ASSERT_EQ(forms.size(), 1u);
  EXPECT_GT(forms[0].margin, 0.0);
  EXPECT_GT(forms[0].pfaffian, 0.0);
  try {
    assemble_omega_t(fib, t0, t0);
    FAIL();
  } catch (const DomainError& e) {
    EXPECT_EQ(e.precondition(), "t_in_taming_range");
  }
  EXPECT_THROW(assemble_omega_t(fib, 0.0, t0), DomainError);
}

TEST(Threshold, SmallTDegeneratesOnKernel) {
  const PointSample s = coupled_sample(1.0);
  double previous = kInfinity;
  for (double t : {1e-1, 1e-2, 1e-3, 1e-4}) {
    const double m = omega_t_margin(s, t);
    EXPECT_GT(m, 0.0);
    EXPECT_LT(m, previous);
    previous = m;
  }
  EXPECT_LT(previous, 1e-3);
}

TEST(Threshold, NonTamingEtaRejected) {
  PointSample s = coupled_sample(0.0);
  s.eta = -s.eta;
  try {
    taming_interval(s, 1e6);
    FAIL();
  } catch (const DomainError& e) {
    EXPECT_EQ(e.precondition(), "eta_tames_kernel");
    EXPECT_NE(std::string(e.what()).find("coupled"), std::string::npos);
  }
  try {
    validate_sample(s, linalg::standard_form(2));
    FAIL();
  } catch (const DomainError& e) {
    EXPECT_EQ(e.precondition(), "eta_tames_kernel");
  }
}

TEST(Validation, BrokenSamples) {
  const Matrix oy = linalg::standard_form(2);
  PointSample s = coupled_sample(0.5);
  s.base_pullback = Matrix::Zero(4, 4);
  try {
    validate_sample(s, oy);
    FAIL();
  } catch (const DomainError& e) {
    EXPECT_EQ(e.precondition(), "base_pullback_consistent");
  }
  s = coupled_sample(0.5);
  s.kernel(0, 0) = 2.0;
  try {
    validate_sample(s, oy);
    FAIL();
  } catch (const DomainError& e) {
    EXPECT_EQ(e.precondition(), "kernel_orthonormal");
  }
  s = coupled_sample(0.5);
  s.kernel = Matrix::Zero(4, 2);
  s.kernel(2, 0) = s.kernel(3, 1) = 1.0;
  try {
    validate_sample(s, oy);
    FAIL();
  } catch (const DomainError& e) {
    EXPECT_EQ(e.precondition(), "kernel_matches_df");
  }
  s = coupled_sample(0.5);
  s.eta = Matrix::Identity(4, 4);
  EXPECT_THROW(validate_sample(s, oy), DomainError);
  s = coupled_sample(0.5);
  s.df = Matrix::Zero(3, 4);
  EXPECT_THROW(validate_sample(s, oy), DimensionError);
  EXPECT_THROW(validate_fibration(SampledFibration{}), DomainError);
}

TEST(Projectivization, ValidatesWithInfiniteThreshold) {
  const SampledFibration fib = generate_projectivization();
  EXPECT_EQ(fib.samples.size(), 32u * 8);
  EXPECT_NO_THROW(validate_fibration(fib));
  const double coarse = global_taming_threshold(fib, 1e6);
  ProjectivizationParams fine;
  fine.sphere_points = 64;
  fine.radii = 16;
  const double refined = global_taming_threshold(generate_projectivization(fine), 1e6);
  if (std::isinf(coarse) || std::isinf(refined)) {
    EXPECT_EQ(coarse, refined);
  } else {
    EXPECT_LE(std::abs(coarse - refined), 0.01 * refined);
  }
}

TEST(Projectivization, HigherDimension) {
  ProjectivizationParams p;
  p.n = 3;
  p.sphere_points = 6;
  p.radii = 3;
  const SampledFibration fib = generate_projectivization(p);
  EXPECT_NO_THROW(validate_fibration(fib));
  for (const auto& s : fib.samples) {
    EXPECT_EQ(s.df.rows(), 4);
    EXPECT_EQ(linalg::numerical_rank(s.df), 4);
  }
  const auto forms = assemble_omega_t(fib, 1.0);
  for (const auto& f : forms) EXPECT_GT(f.pfaffian, 0.0);
}

TEST(Projectivization, BaseLocusExcluded) {
  ProjectivizationParams p;
  p.r_in = 0.0;
  try {
    generate_projectivization(p);
    FAIL();
  } catch (const DomainError& e) {
    EXPECT_EQ(e.precondition(), "base_locus_excluded");
  }
  EXPECT_THROW(projectivization_sample(CVector::Zero(2), "origin"), DomainError);
}

TEST(Projectivization, Deterministic) {
  const SampledFibration a = generate_projectivization();
  const SampledFibration b = generate_projectivization();
  ASSERT_EQ(a.samples.size(), b.samples.size());
  for (std::size_t i = 0; i < a.samples.size(); ++i) {
    EXPECT_EQ(a.samples[i].id, b.samples[i].id);
    EXPECT_EQ(a.samples[i].base, b.samples[i].base);
  }
}

TEST(KernelConvexity, ConvexCombinationsStillTame) {
  Rng rng = make_rng(81);
  for (int i = 0; i < 500; ++i) {
    const SliceInstance sl = random_slice(2, 2 * uniform_int(rng, 2, 4), rng);
    const Eigen::Index m = sl.t.cols();
    Rng f = make_rng(1000 + i), b = make_rng(2000 + i);
    PointSample s;
    s.id = "k" + std::to_string(i);
    s.df = sl.t;
    s.j = random_slice_compatible(sl, f, b);
    s.kernel = linalg::kernel_basis(s.df);
    s.base_pullback = Matrix::Zero(m, m);
    s.eta = Matrix::Zero(m, m);
    const int k = uniform_int(rng, 2, 4);
    // Forms which tame J on the kernel: random omega-compatible pieces of the
    // J-invariant kernel restriction, extended to the whole space by zero.
    std::vector<Matrix> etas;
    const Matrix& kb = s.kernel;
    const Matrix jk = kb.transpose() * s.j * kb;
    const Eigen::Index d = kb.cols();
    while (static_cast<int>(etas.size()) < k) {
      const Matrix h = random_spd(d, rng);
      const Matrix hinv = linalg::sym(h + jk.transpose() * h * jk);
      const Matrix eta_k = linalg::skew_part(hinv * jk);
      Matrix eta = kb * eta_k * kb.transpose();
      if (detail::kernel_margin(s, eta) > 1e-6) etas.push_back(eta);
      else etas.push_back(Matrix(-eta));
    }
    const SimplexPoint w(random_weights(k, rng));
    EXPECT_TRUE(kernel_convexity_check(s, etas, w)) << i;
  }
}

TEST(Wrapped, Examples) {
  // One-dimensional complex kernel: always wrapped.
  KernelCloud c2{Matrix::Identity(2, 2), {}};
  EXPECT_TRUE(wrapped_check(c2));
  // Six-dimensional kernel and a single plane: codimension 4.
  Matrix plane6 = Matrix::Zero(6, 2);
  plane6(0, 0) = plane6(1, 1) = 1.0;
  EXPECT_FALSE(wrapped_check(KernelCloud{Matrix::Identity(6, 6), {plane6}}));
  // Two transverse planes span a four-dimensional kernel.
  Matrix p1 = Matrix::Zero(4, 2), p2 = Matrix::Zero(4, 2);
  p1(0, 0) = p1(1, 1) = 1.0;
  p2(2, 0) = p2(3, 1) = 1.0;
  EXPECT_TRUE(wrapped_check(KernelCloud{Matrix::Identity(4, 4), {p1, p2}}));
  // A plane outside the kernel.
  Matrix k = Matrix::Zero(6, 4);
  k.topLeftCorner(4, 4) = Matrix::Identity(4, 4);
  Matrix out = Matrix::Zero(6, 2);
  out(4, 0) = out(5, 1) = 1.0;
  try {
    wrapped_check(KernelCloud{k, {out}});
    FAIL();
  } catch (const DomainError& e) {
    EXPECT_EQ(e.precondition(), "planes_in_kernel");
  }
  Matrix flat = Matrix::Zero(4, 2);
  flat(0, 0) = flat(0, 1) = 1.0;
  EXPECT_THROW(wrapped_check(KernelCloud{Matrix::Identity(4, 4), {flat}}), DomainError);
}
