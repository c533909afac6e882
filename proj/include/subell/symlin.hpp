#pragma once

#include <initializer_list>
#include <span>
#include <utility>
#include <vector>

namespace subell {

/// Dense row-major real matrix of arbitrary shape.
class Matrix {
 public:
  Matrix() = default;
  Matrix(int rows, int cols, double fill = 0.0);
  Matrix(std::initializer_list<std::initializer_list<double>> rows);

  static Matrix identity(int n);

  int rows() const noexcept { return rows_; }
  int cols() const noexcept { return cols_; }

  double& operator()(int i, int j) { return data_[static_cast<std::size_t>(i) * cols_ + j]; }
  double operator()(int i, int j) const { return data_[static_cast<std::size_t>(i) * cols_ + j]; }

  std::span<const double> row(int i) const {
    return {data_.data() + static_cast<std::size_t>(i) * cols_, static_cast<std::size_t>(cols_)};
  }
  std::span<const double> data() const noexcept { return data_; }

  Matrix transpose() const;
  double trace() const;
  double max_abs() const;
  double frobenius() const;

  Matrix& operator+=(const Matrix& o);
  Matrix& operator-=(const Matrix& o);
  Matrix& operator*=(double s);

  friend Matrix operator+(Matrix a, const Matrix& b) { return a += b; }
  friend Matrix operator-(Matrix a, const Matrix& b) { return a -= b; }
  friend Matrix operator*(Matrix a, double s) { return a *= s; }
  friend Matrix operator*(double s, Matrix a) { return a *= s; }
  friend Matrix operator*(const Matrix& a, const Matrix& b);

  bool operator==(const Matrix&) const = default;

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<double> data_;
};

/// Symmetric matrix; each off-diagonal pair is stored once (packed upper
/// triangle), so entries(i,j) == entries(j,i) holds exactly.
class SymMatrix {
 public:
  SymMatrix() = default;
  explicit SymMatrix(int dim, double fill = 0.0);
  SymMatrix(std::initializer_list<std::initializer_list<double>> rows);

  static SymMatrix identity(int n);
  static SymMatrix diagonal(std::span<const double> d);
  /// Symmetrizes (A + A^T)/2 after checking |A - A^T| <= tol * max(1, |A|).
  static SymMatrix from_dense(const Matrix& a, double tol = 1e-12);

  int dim() const noexcept { return dim_; }

  double operator()(int i, int j) const { return data_[index(i, j)]; }
  void set(int i, int j, double v) { data_[index(i, j)] = v; }
  void add(int i, int j, double v) { data_[index(i, j)] += v; }

  Matrix dense() const;
  double trace() const;
  double max_abs() const;

  SymMatrix& operator+=(const SymMatrix& o);
  SymMatrix& operator-=(const SymMatrix& o);
  SymMatrix& operator*=(double s);

  friend SymMatrix operator+(SymMatrix a, const SymMatrix& b) { return a += b; }
  friend SymMatrix operator-(SymMatrix a, const SymMatrix& b) { return a -= b; }
  friend SymMatrix operator*(SymMatrix a, double s) { return a *= s; }
  friend SymMatrix operator*(double s, SymMatrix a) { return a *= s; }

 private:
  std::size_t index(int i, int j) const {
    if (i > j) std::swap(i, j);
    return static_cast<std::size_t>(i) * dim_ - static_cast<std::size_t>(i) * (i - 1) / 2 + (j - i);
  }

  int dim_ = 0;
  std::vector<double> data_;
};

/// S A S^T for S of shape k x n and A of dim n.
SymMatrix congruence(const Matrix& s, const SymMatrix& a);
/// S^T S, the Gram matrix of the rows of S.
SymMatrix gram_of_columns(const Matrix& s);
/// S S^T.
SymMatrix gram_of_rows(const Matrix& s);

struct Spectrum {
  std::vector<double> eigenvalues;  // ascending
  Matrix eigenvectors;              // column k pairs with eigenvalues[k]

  Matrix reconstruct() const;
};

/// Cyclic Jacobi eigensolver for small dense symmetric matrices (dim <= 64).
Spectrum eigh(const SymMatrix& a);

std::vector<double> eigenvalues(const SymMatrix& a);

/// Principal square root of a positive semidefinite matrix. Eigenvalues in
/// [-1e-6, 0) are treated as roundoff and clamped; anything lower is an error.
SymMatrix sqrt_psd(const SymMatrix& a);

/// Singular values in descending order (one-sided Jacobi).
std::vector<double> singular_values(const Matrix& a);

/// Numerical rank with threshold on the singular values.
int numerical_rank(const Matrix& a, double threshold = 1e-10);

struct SpectraMatchReport {
  int m = 0;
  int n = 0;
  std::vector<double> row_gram_eigenvalues;     // of sigma sigma^T, ascending
  std::vector<double> column_gram_eigenvalues;  // of sigma^T sigma, ascending
  double max_nonzero_discrepancy = 0.0;
  double max_zero_residual = 0.0;  // largest |eigenvalue| among the n - m expected zeros
  bool row_gram_positive = false;
  bool agree = false;
};

/// Compares the spectra of sigma sigma^T and sigma^T sigma for a full-rank
/// m x n sigma (m <= n). Throws precondition if the rank is below m.
SpectraMatchReport spectra_match_lemma(const Matrix& sigma, double tol = 1e-8);

/// |Tr(s1^T s1 A - s2^T s2 B) - Tr(s1 A s1^T - s2 B s2^T)|.
double trace_identity_check(const Matrix& s1, const Matrix& s2, const SymMatrix& a,
                            const SymMatrix& b);

struct DiagonalLemmaWitness {
  SymMatrix matrix;
  Spectrum spectrum;
  bool positive_diagonal = false;
  bool is_counterexample = false;  // positive diagonal yet some eigenvalue < 0
};

/// Evaluates whether a matrix with positive diagonal fails to be positive
/// definite.
DiagonalLemmaWitness examine_positive_diagonal(const SymMatrix& a);

/// A fixed matrix with strictly positive diagonal and a negative eigenvalue.
DiagonalLemmaWitness diagonal_lemma_falsifier();

}  // namespace subell
