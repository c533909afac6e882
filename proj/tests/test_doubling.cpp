#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "subell/doubling.hpp"
#include "subell/error.hpp"

using namespace subell;

namespace {

Point random_point(int n, double half, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-half, half);
  std::vector<double> x(n);
  for (double& v : x) v = u(rng);
  return Point(std::move(x));
}

// Central differences of phi in the stacked variables z = (x, y), in long
// double so roundoff stays far below the comparison tolerance.
Matrix fd_hessian(const Point& x, const Point& y, double L, double alpha, double step) {
  const int n = x.dim();
  std::vector<long double> z(x.coords.begin(), x.coords.end());
  z.insert(z.end(), y.coords.begin(), y.coords.end());
  auto phi = [&](const std::vector<long double>& w) {
    long double s = 0;
    for (int i = 0; i < n; ++i) s += (w[i] - w[n + i]) * (w[i] - w[n + i]);
    return L * std::pow(std::sqrt(s), static_cast<long double>(alpha));
  };
  const long double hs = step;
  Matrix h(2 * n, 2 * n);
  for (int i = 0; i < 2 * n; ++i)
    for (int j = 0; j < 2 * n; ++j) {
      auto at = [&](int si, int sj) {
        std::vector<long double> w = z;
        w[i] += si * hs;
        w[j] += sj * hs;
        return phi(w);
      };
      h(i, j) = static_cast<double>((at(1, 1) - at(1, -1) - at(-1, 1) + at(-1, -1)) / (4 * hs * hs));
    }
  return h;
}

SymMatrix abs_matrix(const SymMatrix& m) {
  const Spectrum s = eigh(m);
  SymMatrix out(m.dim());
  for (int i = 0; i < m.dim(); ++i)
    for (int j = i; j < m.dim(); ++j) {
      double v = 0.0;
      for (int k = 0; k < m.dim(); ++k)
        v += std::abs(s.eigenvalues[k]) * s.eigenvectors(i, k) * s.eigenvectors(j, k);
      out.set(i, j, v);
    }
  return out;
}

SymMatrix random_psd(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Matrix a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = g(rng);
  return gram_of_columns(a);
}

ConstantBundle sample_bundle() {
  ConstantBundle k;
  k.c0 = 1.0;
  k.cbar = 1.0;
  k.Lambda = 1.0;
  k.C = 1.0;
  k.L_f = 1.0;
  k.beta_f = 1.0;
  k.L_c = 0.0;
  k.beta_c = 1.0;
  k.u_inf = 1.0;
  return k;
}

}  // namespace

TEST(PhiHessian, ScalarAndPlanarExamples) {
  const PhiHessian h1 = phi_hessian_block(Point{1.0}, Point{0.0}, 1.0, 0.5);
  EXPECT_DOUBLE_EQ(h1.m(0, 0), -0.25);
  EXPECT_DOUBLE_EQ(h1.block(0, 1), 0.25);
  EXPECT_DOUBLE_EQ(h1.block(1, 1), -0.25);

  const PhiHessian h2 = phi_hessian_block(Point{1.0, 0.0}, Point{0.0, 0.0}, 1.0, 0.5);
  EXPECT_DOUBLE_EQ(h2.m(0, 0), -0.25);
  EXPECT_DOUBLE_EQ(h2.m(1, 1), 0.5);
  EXPECT_EQ(h2.m(0, 1), 0.0);

  const Matrix fd = fd_hessian(Point{1.0, 0.0}, Point{0.0, 0.0}, 1.0, 0.5, 1e-5);
  EXPECT_LE((fd - h2.block.dense()).max_abs(), 1e-5);
}

TEST(PhiHessian, AlphaTwoIsScaledIdentity) {
  const PhiHessian h = phi_hessian_block(Point{0.3, -1, 2}, Point{1, 1, 1}, 1.5, 2.0);
  EXPECT_LE((h.m.dense() - 3.0 * Matrix::identity(3)).max_abs(), 1e-14);
}

TEST(PhiHessian, SingularPointRejected) {
  try {
    phi_hessian_block(Point{1, 2}, Point{1, 2}, 1, 0.5);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::singular_point);
  }
  EXPECT_THROW(phi_hessian_square(Point{0.0}, Point{0.0}, 1, 0.5), Error);
}

TEST(PhiHessian, MatchesFiniteDifferences) {
  std::mt19937_64 rng(101);
  std::uniform_real_distribution<double> adist(0.05, 1.0);
  for (int n = 1; n <= 3; ++n) {
    int done = 0;
    while (done < 100) {
      const Point x = random_point(n, 1.0, rng);
      const Point y = random_point(n, 1.0, rng);
      if (euclidean_distance(x, y) < 0.2) continue;
      const double alpha = adist(rng);
      const Matrix exact = phi_hessian_block(x, y, 1.3, alpha).block.dense();
      const Matrix fd = fd_hessian(x, y, 1.3, alpha, 1e-5);
      ASSERT_LE((fd - exact).max_abs(), 1e-5 * exact.max_abs()) << "n=" << n;
      ++done;
    }
  }
}

TEST(PhiHessianSquare, ScalarExampleAndProductOracle) {
  EXPECT_DOUBLE_EQ(phi_hessian_square(Point{1.0}, Point{0.0}, 1.0, 0.5)(0, 0), 1.0 / 16.0);
  for (int k = 1; k <= 10; ++k) {
    const double a = 0.1 * k;
    EXPECT_NEAR((a - 2) * (a - 2) + 2 * (a - 2), a * (a - 2), 1e-15);
  }
  std::mt19937_64 rng(103);
  std::uniform_real_distribution<double> adist(0.05, 1.0);
  for (int t = 0; t < 300; ++t) {
    const int n = 1 + t % 3;
    const Point x = random_point(n, 1.0, rng);
    const Point y = random_point(n, 1.0, rng);
    const double alpha = adist(rng);
    const Matrix m = phi_hessian_block(x, y, 0.7, alpha).m.dense();
    const Matrix sq = phi_hessian_square(x, y, 0.7, alpha).dense();
    const Matrix prod = m * m;
    ASSERT_LE((sq - prod).max_abs(), 1e-12 * std::max(1.0, prod.max_abs()));
  }
}

TEST(PhiHessian, EigenvaluesAlongAndAcrossTheDirection) {
  std::mt19937_64 rng(107);
  std::uniform_real_distribution<double> adist(0.05, 1.0);
  for (int t = 0; t < 300; ++t) {
    const int n = 1 + t % 3;
    const Point x = random_point(n, 1.0, rng);
    const Point y = random_point(n, 1.0, rng);
    const double alpha = adist(rng), L = 1.7;
    const double r = euclidean_distance(x, y);
    const auto e = eigenvalues(phi_hessian_block(x, y, L, alpha).m);
    const double along = L * alpha * (alpha - 1) * std::pow(r, alpha - 2);
    const double across = L * alpha * std::pow(r, alpha - 2);
    const double tol = 1e-9 * std::max(1.0, across);
    ASSERT_NEAR(e[0], along, tol);
    for (int i = 1; i < n; ++i) ASSERT_NEAR(e[i], across, tol);
    if (alpha < 1) ASSERT_LT(e[0], 0.0);
  }
}

TEST(SumsTraceBound, TrivialAndEuclideanCases) {
  std::mt19937_64 rng(109);
  const Matrix s{{1, 0, 0.4}, {0, 1, -0.2}};
  const SymMatrix a = random_psd(3, rng);
  const TraceBound t0 = sums_trace_bound(s, s, a, a, 1.0, 0.5, 0.3, 1.1);
  EXPECT_NEAR(t0.lhs, 0.0, 1e-12);
  EXPECT_EQ(t0.rhs, 0.0);

  const Matrix id = Matrix::identity(3);
  for (int t = 0; t < 1000; ++t) {
    const SymMatrix lo = random_psd(3, rng) * -1.0;
    const SymMatrix hi = lo + random_psd(3, rng);  // lo <= hi
    const TraceBound tb = sums_trace_bound(id, id, lo, hi, 1.0, 0.5, 0.7, 1.1);
    ASSERT_EQ(tb.rhs, 0.0);
    ASSERT_LE(tb.lhs, 1e-12);
  }
}

TEST(SumsTraceBound, BlockBoundedPairsOnHeisenberg) {
  // A = eta M - (eta|M| + W1), B = (eta|M| + W2) - eta M satisfy
  // diag(A, -B) <= eta [[M, -M], [-M, M]] for any PSD W1, W2.
  const CarnotStructure h = make_structure("heisenberg1");
  std::mt19937_64 rng(113);
  std::uniform_real_distribution<double> adist(0.1, 1.0);
  const double eta = 1.1, L = 0.8;
  for (int t = 0; t < 1000; ++t) {
    const Point x = random_point(3, 1.0, rng);
    const Point y = random_point(3, 1.0, rng);
    const double alpha = adist(rng);
    const double r = euclidean_distance(x, y);
    const SymMatrix m = phi_hessian_block(x, y, L, alpha).m;
    const SymMatrix am = abs_matrix(m);
    const SymMatrix a = eta * m - (eta * am + random_psd(3, rng));
    const SymMatrix b = (eta * am + random_psd(3, rng)) - eta * m;
    const TraceBound tb = sums_trace_bound(sigma_at(h, x), sigma_at(h, y), a, b, L, alpha, r, eta);
    ASSERT_LE(tb.lhs, tb.rhs + 1e-9 * std::max(1.0, std::abs(tb.rhs)));
  }
}

TEST(SumsTraceBound, ShapeMismatchRejected) {
  EXPECT_THROW(sums_trace_bound(Matrix::identity(2), Matrix::identity(3), SymMatrix(2),
                                SymMatrix(2), 1, 0.5, 1, 1.1),
               Error);
}

TEST(HolderConstantBound, Examples) {
  ConstantBundle k = sample_bundle();
  EXPECT_NEAR(holder_constant_bound(k, 0.5), std::pow(2.0, 2.0 / 3.0), 1e-12);

  ConstantBundle zero = k;
  zero.L_f = 0.0;
  EXPECT_EQ(holder_constant_bound(zero, 0.5), 0.0);

  // L_f = 0, beta_c = 1: doubling u_inf doubles the bound.
  ConstantBundle c = k;
  c.L_f = 0.0;
  c.L_c = 0.6;
  const double b1 = holder_constant_bound(c, 0.5);
  c.u_inf = 2.0;
  EXPECT_NEAR(holder_constant_bound(c, 0.5), 2.0 * b1, 1e-12);
}

TEST(HolderConstantBound, InadmissibleExponent) {
  ConstantBundle k = sample_bundle();
  k.c0 = 0.5;
  k.cbar = 0.5;
  EXPECT_DOUBLE_EQ(admissible_alpha_limit(k), 0.5);
  try {
    holder_constant_bound(k, 0.5);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::inadmissible);
  }
  k.C = 0.0;
  EXPECT_TRUE(std::isinf(admissible_alpha_limit(k)));
}

TEST(HolderConstantBound, MonotoneInData) {
  std::mt19937_64 rng(127);
  std::uniform_real_distribution<double> u(0.1, 2.0), b(0.2, 1.0), a(0.05, 0.9);
  for (int t = 0; t < 2000; ++t) {
    ConstantBundle k;
    k.C = u(rng);
    k.Lambda = u(rng);
    k.L_f = u(rng);
    k.L_c = u(rng);
    k.beta_f = b(rng);
    k.beta_c = b(rng);
    k.u_inf = u(rng);
    // Monotonicity in u_inf needs alpha <= beta_f: the f-term carries
    // u_inf^(beta_f - alpha).
    const double alpha = a(rng) * k.beta_f;
    k.c0 = k.C * k.Lambda * alpha * (1.0 + u(rng));
    k.cbar = k.c0;
    const double base = holder_constant_bound(k, alpha);
    const double bump = 1.0 + u(rng);
    auto bigger = [&](double ConstantBundle::*field) {
      ConstantBundle m = k;
      m.*field *= bump;
      return holder_constant_bound(m, alpha);
    };
    const double tol = 1e-12 * base;
    ASSERT_GE(bigger(&ConstantBundle::L_f), base - tol);
    ASSERT_GE(bigger(&ConstantBundle::L_c), base - tol);
    ASSERT_GE(bigger(&ConstantBundle::u_inf), base - tol);
    ConstantBundle m = k;
    m.c0 *= bump;
    m.cbar = m.c0;
    ASSERT_LE(holder_constant_bound(m, alpha), base + tol);
  }
}

TEST(TraceInequalityConstant, SquaresTheLipschitzBound) {
  EXPECT_DOUBLE_EQ(trace_inequality_constant(2.0, 1.1), 4.4);
  EXPECT_THROW(trace_inequality_constant(2.0, 1.0), Error);
}

TEST(GrowthCondition, EuclideanMargins) {
  const std::vector<double> radii{1, 2, 4, 8};
  const GrowthMargin g = growth_condition_margin(make_structure("euclidean:3"), 2.0, 1.0, radii);
  for (std::size_t i = 0; i < radii.size(); ++i)
    EXPECT_NEAR(g.margins[i], 3.0 / (radii[i] * radii[i]) - 1.0, 1e-12);
  EXPECT_NEAR(g.tail_estimate, -1.0, 1e-12);
  EXPECT_TRUE(g.satisfied);
}

TEST(GrowthCondition, HeisenbergSatisfiedAndViolated) {
  const CarnotStructure h = make_structure("heisenberg1");
  const std::vector<double> radii{1, 2, 4, 8, 16, 32};
  const GrowthMargin ok = growth_condition_margin(h, 16.0, 2.0, radii);
  for (std::size_t i = 0; i < radii.size(); ++i)
    EXPECT_LE(ok.margins[i], 2.0 / (radii[i] * radii[i]) + 1e-12);
  EXPECT_TRUE(ok.satisfied);
  ASSERT_TRUE(ok.analytic_limit.has_value());
  EXPECT_NEAR(*ok.analytic_limit, 0.0, 1e-12);

  const GrowthMargin bad = growth_condition_margin(h, 1.0, 1.0, radii);
  EXPECT_FALSE(bad.satisfied);
  EXPECT_NEAR(bad.tail_estimate, 3.5, 1e-9);
  EXPECT_NEAR(*bad.analytic_limit, 3.5, 1e-12);
}

TEST(GrowthCondition, RejectsUnorderedRadii) {
  EXPECT_THROW(growth_condition_margin(make_structure("heisenberg1"), 1, 1, {2, 1}), Error);
  EXPECT_THROW(growth_condition_margin(make_structure("heisenberg1"), 1, 1, {}), Error);
}

TEST(LowerRegularity, HalfHolderSigmaLosesExponent) {
  const HolderSigmaWitness w = lower_regularity_witness(0.5, 0.5);
  EXPECT_NEAR(w.predicted_exponent, -0.5, 1e-15);
  EXPECT_NEAR(w.fitted_exponent, w.predicted_exponent, 1e-9);
  EXPECT_LT(w.fitted_exponent, w.alpha);
  const HolderSigmaWitness lip = lower_regularity_witness(1.0, 0.5);
  EXPECT_NEAR(lip.fitted_exponent, 0.5, 1e-9);
}
