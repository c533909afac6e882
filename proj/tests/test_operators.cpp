#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "subell/error.hpp"
#include "subell/operators.hpp"

using namespace subell;

namespace {

std::shared_ptr<const CarnotStructure> preset(const char* name) {
  return std::make_shared<const CarnotStructure>(make_structure(name));
}

SymMatrix random_sym(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  SymMatrix a(n);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) a.set(i, j, g(rng));
  return a;
}

// Brute-force max of Tr(A N) over A = Q diag(a) Q^T with a_i in {lambda, Lambda}
// and Q the eigenvectors of N; the extremal A is attained at such vertices.
double brute_pucci_plus(const SymMatrix& n, double lo, double hi) {
  const auto e = eigenvalues(n);
  double best = -1e300;
  for (unsigned mask = 0; mask < (1u << e.size()); ++mask) {
    double v = 0.0;
    for (std::size_t i = 0; i < e.size(); ++i) v += ((mask >> i) & 1u ? hi : lo) * e[i];
    best = std::max(best, v);
  }
  return best;
}

}  // namespace

TEST(GEval, Examples) {
  const auto e2 = preset("euclidean:2");
  const double d[] = {1, -1};
  const SymMatrix n = SymMatrix::diagonal(d);
  EXPECT_EQ(g_eval(OperatorSpec::make(GKind::trace, {1, 1}, e2), n), 0.0);
  EXPECT_DOUBLE_EQ(g_eval(OperatorSpec::make(GKind::pucci_plus, {1, 2}, e2), n), 1.0);
  EXPECT_DOUBLE_EQ(g_eval(OperatorSpec::make(GKind::pucci_minus, {1, 2}, e2), n), -1.0);
}

TEST(GEval, PucciWithEqualBoundsIsTrace) {
  std::mt19937_64 rng(3);
  const auto spec = OperatorSpec::make(GKind::pucci_plus, {1, 1}, preset("euclidean:3"));
  for (int t = 0; t < 100; ++t) {
    const SymMatrix n = random_sym(3, rng);
    EXPECT_NEAR(g_eval(spec, n), n.trace(), 1e-12);
  }
}

TEST(GEval, PucciMatchesBruteForceMaximisation) {
  std::mt19937_64 rng(5);
  for (int t = 0; t < 500; ++t) {
    const SymMatrix n = random_sym(1 + t % 4, rng);
    EXPECT_NEAR(pucci_plus(n, {0.5, 3.0}), brute_pucci_plus(n, 0.5, 3.0), 1e-10);
    // P-(N) = -P+(-N).
    SymMatrix neg = n;
    neg *= -1.0;
    EXPECT_NEAR(pucci_minus(n, {0.5, 3.0}), -brute_pucci_plus(neg, 0.5, 3.0), 1e-10);
  }
}

TEST(GEval, OrderingAndHomogeneity) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> tdist(0.0, 5.0);
  const EllipticityBounds b(0.7, 2.5);
  for (int t = 0; t < 10000; ++t) {
    const SymMatrix n = random_sym(3, rng);
    const double lo = pucci_minus(n, b), hi = pucci_plus(n, b);
    const double scale = 1e-10 * std::max(1.0, n.max_abs());
    // Any G with these bounds sits between the Pucci pair; the scaled trace
    // operators are the simplest such G.
    for (double a : {b.lambda, b.Lambda}) {
      ASSERT_LE(lo, a * n.trace() + scale);
      ASSERT_GE(hi, a * n.trace() - scale);
    }
    const double s = tdist(rng);
    SymMatrix sn = n;
    sn *= s;
    ASSERT_NEAR(pucci_plus(sn, b), s * hi, scale * (1 + s) * 10);
    ASSERT_NEAR(pucci_minus(sn, b), s * lo, scale * (1 + s) * 10);
  }
}

TEST(FEval, HeisenbergExamples) {
  const auto h = preset("heisenberg1");
  const auto spec = OperatorSpec::make(GKind::trace, {1, 1}, h);
  const double d[] = {2, 0, 0};
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-3, 3);
  for (int t = 0; t < 50; ++t) {
    const Point x{u(rng), u(rng), u(rng)};
    EXPECT_NEAR(f_eval(spec, SymMatrix::diagonal(d), x), 2.0, 1e-12);
    EXPECT_EQ(f_eval(spec, SymMatrix(3), x), 0.0);
  }
  const double e[] = {1, -1};
  EXPECT_DOUBLE_EQ(
      f_eval(OperatorSpec::make(GKind::pucci_plus, {1, 2}, preset("euclidean:2")),
             SymMatrix::diagonal(e), Point{4, 4}),
      1.0);
}

TEST(FEval, TraceEqualsTraceOfPTimesHessian) {
  const auto h = preset("heisenberg1");
  const auto spec = OperatorSpec::make(GKind::trace, {1, 1}, h);
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> u(-2, 2);
  for (int t = 0; t < 1000; ++t) {
    const Point x{u(rng), u(rng), u(rng)};
    const SymMatrix m = random_sym(3, rng);
    const Matrix pm = p_matrix_at(*h, x).dense() * m.dense();
    const double ref = pm.trace();
    ASSERT_NEAR(f_eval(spec, m, x), ref, 1e-10 * std::max(1.0, std::abs(ref)));
  }
}

TEST(Sandwich, TraceIsTight) {
  const auto spec = OperatorSpec::make(GKind::trace, {1, 1}, preset("heisenberg1"));
  const PropertyReport r = sandwich_check(spec, 2000);
  EXPECT_TRUE(r.passed());
  EXPECT_GE(r.worst_slack, -1e-9);
  EXPECT_LE(r.worst_slack, 1e-9);  // lambda = Lambda = 1: both sides equal
}

TEST(Sandwich, PucciPairHasNoViolations) {
  const auto e3 = preset("euclidean:3");
  for (GKind k : {GKind::pucci_plus, GKind::pucci_minus}) {
    const PropertyReport r = sandwich_check(OperatorSpec::make(k, {0.5, 2.0}, e3), 10000);
    EXPECT_EQ(r.violations, 0) << to_string(k);
  }
}

TEST(Sandwich, DetectsABadCustomG) {
  // 3 Tr(N) exceeds the upper bound Lambda = 2.
  const auto spec = OperatorSpec::make_custom([](const SymMatrix& n) { return 3 * n.trace(); },
                                              {1, 2}, preset("euclidean:2"));
  const PropertyReport r = sandwich_check(spec, 200);
  EXPECT_GT(r.violations, 0);
  ASSERT_TRUE(r.witness.has_value());
  try {
    certify(spec, 200);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::precondition);
  }
}

TEST(Sandwich, CertifiesAnAdmissibleCustomG) {
  const EllipticityBounds b(1, 2);
  auto spec = OperatorSpec::make_custom(
      [b](const SymMatrix& n) { return 0.5 * (pucci_plus(n, b) + pucci_minus(n, b)); }, b,
      preset("euclidean:2"));
  EXPECT_TRUE(certify(spec, 2000).certified);
}

TEST(DegenerateEllipticity, AllKindsOnPresets) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(-2, 2);
  for (const char* name : {"heisenberg1", "euclidean:2", "engel1"}) {
    const auto s = preset(name);
    for (GKind k : {GKind::trace, GKind::pucci_plus, GKind::pucci_minus}) {
      std::vector<double> xc(s->n);
      for (double& v : xc) v = u(rng);
      const PropertyReport r =
          degenerate_ellipticity_check(OperatorSpec::make(k, {0.5, 2.0}, s), Point(xc), 10000);
      EXPECT_EQ(r.violations, 0) << name << ' ' << to_string(k);
    }
  }
}

TEST(OperatorSpec, RejectsBadBoundsAndUnknownKinds) {
  EXPECT_THROW(EllipticityBounds(0.0, 1.0), Error);
  EXPECT_THROW(EllipticityBounds(2.0, 1.0), Error);
  EXPECT_THROW(parse_g_kind("laplace"), Error);
  EXPECT_EQ(parse_g_kind("pucci_minus"), GKind::pucci_minus);
}
