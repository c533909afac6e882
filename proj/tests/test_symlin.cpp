#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <random>

#include "subell/error.hpp"
#include "subell/symlin.hpp"

using namespace subell;

namespace {

SymMatrix random_sym(int n, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> g(0.0, scale);
  SymMatrix a(n);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) a.set(i, j, g(rng));
  return a;
}

Eigen::MatrixXd to_eigen(const SymMatrix& a) {
  Eigen::MatrixXd m(a.dim(), a.dim());
  for (int i = 0; i < a.dim(); ++i)
    for (int j = 0; j < a.dim(); ++j) m(i, j) = a(i, j);
  return m;
}

Eigen::MatrixXd to_eigen(const Matrix& a) {
  Eigen::MatrixXd m(a.rows(), a.cols());
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j) m(i, j) = a(i, j);
  return m;
}

Matrix random_matrix(int r, int c, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Matrix a(r, c);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < c; ++j) a(i, j) = g(rng);
  return a;
}

}  // namespace

TEST(SymMatrix, StoresEachOffDiagonalPairOnce) {
  SymMatrix a(3);
  a.set(0, 2, 7.0);
  EXPECT_EQ(a(2, 0), 7.0);
  a.set(2, 0, -1.0);
  EXPECT_EQ(a(0, 2), -1.0);
}

TEST(SymMatrix, FromDenseRejectsAsymmetry) {
  Matrix m{{1, 2}, {3, 4}};
  EXPECT_THROW(SymMatrix::from_dense(m), Error);
}

TEST(Eigh, DiagonalSorted) {
  const double d[] = {3, 1, 2};
  const Spectrum s = eigh(SymMatrix::diagonal(d));
  EXPECT_EQ(s.eigenvalues, (std::vector<double>{1, 2, 3}));
}

TEST(Eigh, HeisenbergPAtUnitX1) {
  const SymMatrix p{{1, 0, 0}, {0, 1, -2}, {0, -2, 4}};
  const auto e = eigenvalues(p);
  EXPECT_NEAR(e[0], 0.0, 1e-12);
  EXPECT_NEAR(e[1], 1.0, 1e-12);
  EXPECT_NEAR(e[2], 5.0, 1e-12);
}

TEST(Eigh, TwoByTwoAnalytic) {
  const auto e = eigenvalues(SymMatrix{{1, 3}, {3, 1}});
  EXPECT_NEAR(e[0], -2.0, 1e-12);
  EXPECT_NEAR(e[1], 4.0, 1e-12);
}

TEST(Eigh, ReconstructionAndOrthonormalityOnRandomMatrices) {
  std::mt19937_64 rng(101);
  std::uniform_int_distribution<int> dim(1, 12);
  std::uniform_real_distribution<double> mag(-3, 3);
  for (int t = 0; t < 10000; ++t) {
    const SymMatrix a = random_sym(dim(rng), rng, std::pow(10.0, mag(rng)));
    const Spectrum s = eigh(a);
    const Matrix q = s.eigenvectors;
    const Matrix qtq = q.transpose() * q;
    ASSERT_LE((qtq - Matrix::identity(a.dim())).max_abs(), 1e-10);
    ASSERT_LE((s.reconstruct() - a.dense()).max_abs(), 1e-9 * std::max(1.0, a.max_abs()));
    ASSERT_TRUE(std::is_sorted(s.eigenvalues.begin(), s.eigenvalues.end()));
  }
}

TEST(Eigh, AgreesWithIndependentSolver) {
  std::mt19937_64 rng(7);
  for (int t = 0; t < 500; ++t) {
    const int n = 1 + t % 12;
    const SymMatrix a = random_sym(n, rng);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(to_eigen(a));
    const auto mine = eigenvalues(a);
    for (int i = 0; i < n; ++i) ASSERT_NEAR(mine[i], es.eigenvalues()(i), 1e-10);
  }
}

TEST(Eigh, RejectsOversizedMatrices) { EXPECT_THROW(eigh(SymMatrix(65)), Error); }

TEST(SqrtPsd, IdentityAndDiagonal) {
  const SymMatrix i3 = SymMatrix::identity(3);
  EXPECT_LE((sqrt_psd(i3).dense() - i3.dense()).max_abs(), 1e-14);
  const double d[] = {4, 0, 9};
  const SymMatrix s = sqrt_psd(SymMatrix::diagonal(d));
  EXPECT_NEAR(s(0, 0), 2.0, 1e-14);
  EXPECT_NEAR(s(1, 1), 0.0, 1e-14);
  EXPECT_NEAR(s(2, 2), 3.0, 1e-14);
}

TEST(SqrtPsd, HeisenbergRootAtUnitX1) {
  const SymMatrix p{{1, 0, 0}, {0, 1, -2}, {0, -2, 4}};
  const SymMatrix s = sqrt_psd(p);
  const double r5 = std::sqrt(5.0);
  const Matrix expected{{1, 0, 0}, {0, 1 / r5, -2 / r5}, {0, -2 / r5, 4 / r5}};
  EXPECT_LE((s.dense() - expected).max_abs(), 1e-12);
}

TEST(SqrtPsd, SquaresBackOnRandomPsd) {
  std::mt19937_64 rng(5);
  for (int t = 0; t < 1000; ++t) {
    const int n = 1 + t % 8;
    const Matrix c = random_matrix(n, n, rng);
    const SymMatrix a = gram_of_columns(c);
    const Matrix s = sqrt_psd(a).dense();
    ASSERT_LE((s * s - a.dense()).max_abs(), 1e-8 * std::max(1.0, a.max_abs()));
  }
}

TEST(SqrtPsd, ProjectionsAreFixedPoints) {
  std::mt19937_64 rng(9);
  for (int t = 0; t < 200; ++t) {
    const int n = 2 + t % 6;
    const int k = 1 + t % (n - 1);
    // Orthonormal basis of a random k-dimensional subspace.
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(to_eigen(random_matrix(n, k, rng)));
    const Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(n, k);
    const Eigen::MatrixXd pe = q * q.transpose();
    Matrix p(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) p(i, j) = pe(i, j);
    const SymMatrix ps = SymMatrix::from_dense(p, 1e-12);
    ASSERT_LE((sqrt_psd(ps).dense() - ps.dense()).max_abs(), 1e-10);
  }
}

TEST(SqrtPsd, RoundoffNegativesAreClampedMaterialOnesRejected) {
  const double tiny[] = {1.0, -1e-12};
  EXPECT_NO_THROW(sqrt_psd(SymMatrix::diagonal(tiny)));
  const double neg[] = {1.0, -1e-3};
  try {
    sqrt_psd(SymMatrix::diagonal(neg));
    FAIL() << "expected not_psd";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::not_psd);
  }
}

TEST(SpectraMatch, HeisenbergSigmaAtUnitX1) {
  const Matrix s{{1, 0, 0}, {0, 1, -2}};
  const SpectraMatchReport r = spectra_match_lemma(s);
  ASSERT_EQ(r.row_gram_eigenvalues.size(), 2u);
  EXPECT_NEAR(r.row_gram_eigenvalues[0], 1.0, 1e-12);
  EXPECT_NEAR(r.row_gram_eigenvalues[1], 5.0, 1e-12);
  ASSERT_EQ(r.column_gram_eigenvalues.size(), 3u);
  EXPECT_NEAR(r.column_gram_eigenvalues[0], 0.0, 1e-12);
  EXPECT_NEAR(r.column_gram_eigenvalues[1], 1.0, 1e-12);
  EXPECT_NEAR(r.column_gram_eigenvalues[2], 5.0, 1e-12);
  EXPECT_TRUE(r.agree);
  EXPECT_TRUE(r.row_gram_positive);
}

TEST(SpectraMatch, IdentityHasAllOnes) {
  const SpectraMatchReport r = spectra_match_lemma(Matrix::identity(4));
  for (double e : r.row_gram_eigenvalues) EXPECT_NEAR(e, 1.0, 1e-14);
  for (double e : r.column_gram_eigenvalues) EXPECT_NEAR(e, 1.0, 1e-14);
}

TEST(SpectraMatch, RandomFullRankRectangular) {
  std::mt19937_64 rng(2024);
  for (int t = 0; t < 1000; ++t) {
    const Matrix s = random_matrix(2, 4, rng);
    const SpectraMatchReport r = spectra_match_lemma(s);
    ASSERT_TRUE(r.agree) << r.max_nonzero_discrepancy;
    // Independent oracle: singular values squared are the nonzero spectrum.
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(to_eigen(s));
    for (int k = 0; k < 2; ++k)
      ASSERT_NEAR(r.row_gram_eigenvalues[1 - k], std::pow(svd.singularValues()(k), 2), 1e-9);
  }
  std::uniform_int_distribution<int> dim(1, 8);
  for (int t = 0; t < 1000; ++t) {
    const int n = dim(rng);
    const int m = std::uniform_int_distribution<int>(1, n)(rng);
    ASSERT_TRUE(spectra_match_lemma(random_matrix(m, n, rng)).agree);
  }
}

TEST(SpectraMatch, RankDeficientIsAPreconditionError) {
  const Matrix s{{1, 0, 2}, {2, 0, 4}};
  try {
    spectra_match_lemma(s);
    FAIL() << "expected precondition";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::precondition);
  }
}

TEST(TraceIdentity, VanishesForEqualData) {
  const SymMatrix a{{1, 2}, {2, -1}};
  EXPECT_EQ(trace_identity_check(Matrix::identity(2), Matrix::identity(2), a, a), 0.0);
}

TEST(TraceIdentity, RandomAndHeisenbergSigmas) {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> u(-2, 2);
  for (int t = 0; t < 2000; ++t) {
    Matrix s1, s2;
    if (t % 2 == 0) {
      s1 = random_matrix(2, 3, rng);
      s2 = random_matrix(2, 3, rng);
    } else {
      const double a1 = u(rng), a2 = u(rng), b1 = u(rng), b2 = u(rng);
      s1 = Matrix{{1, 0, 2 * a2}, {0, 1, -2 * a1}};
      s2 = Matrix{{1, 0, 2 * b2}, {0, 1, -2 * b1}};
    }
    const SymMatrix a = random_sym(3, rng);
    const SymMatrix b = random_sym(3, rng);
    const double scale = 1.0 + s1.frobenius() * s1.frobenius() * a.max_abs() +
                         s2.frobenius() * s2.frobenius() * b.max_abs();
    ASSERT_LE(trace_identity_check(s1, s2, a, b), 1e-10 * scale);
  }
}

TEST(TraceIdentity, DimensionMismatchThrows) {
  EXPECT_THROW(trace_identity_check(Matrix(2, 3), Matrix(2, 2), SymMatrix(3), SymMatrix(3)),
               Error);
}

TEST(DiagonalLemma, FalsifierIsACounterexample) {
  const DiagonalLemmaWitness w = diagonal_lemma_falsifier();
  EXPECT_TRUE(w.positive_diagonal);
  EXPECT_TRUE(w.is_counterexample);
  EXPECT_NEAR(w.spectrum.eigenvalues.front(), -2.0, 1e-12);
}

TEST(DiagonalLemma, IdentityIsNotACounterexample) {
  EXPECT_FALSE(examine_positive_diagonal(SymMatrix::identity(2)).is_counterexample);
}

TEST(DiagonalLemma, SecondWitness) {
  const DiagonalLemmaWitness w = examine_positive_diagonal(SymMatrix{{2, -3}, {-3, 2}});
  EXPECT_TRUE(w.is_counterexample);
  EXPECT_NEAR(w.spectrum.eigenvalues.front(), -1.0, 1e-12);
}
