#include "subell/symlin.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "subell/error.hpp"

namespace subell {

Matrix::Matrix(int rows, int cols, double fill)
    : rows_(rows), cols_(cols), data_(static_cast<std::size_t>(rows) * cols, fill) {
  require(rows >= 0 && cols >= 0, ErrorKind::input, "negative matrix shape");
}

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows) {
  rows_ = static_cast<int>(rows.size());
  cols_ = rows_ ? static_cast<int>(rows.begin()->size()) : 0;
  data_.reserve(static_cast<std::size_t>(rows_) * cols_);
  for (const auto& r : rows) {
    require(static_cast<int>(r.size()) == cols_, ErrorKind::input, "ragged matrix literal");
    data_.insert(data_.end(), r.begin(), r.end());
  }
}

Matrix Matrix::identity(int n) {
  Matrix m(n, n);
  for (int i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::transpose() const {
  Matrix t(cols_, rows_);
  for (int i = 0; i < rows_; ++i)
    for (int j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
  return t;
}

double Matrix::trace() const {
  require(rows_ == cols_, ErrorKind::input, "trace of non-square matrix");
  double s = 0.0;
  for (int i = 0; i < rows_; ++i) s += (*this)(i, i);
  return s;
}

double Matrix::max_abs() const {
  double m = 0.0;
  for (double v : data_) m = std::max(m, std::abs(v));
  return m;
}

double Matrix::frobenius() const {
  double s = 0.0;
  for (double v : data_) s += v * v;
  return std::sqrt(s);
}

Matrix& Matrix::operator+=(const Matrix& o) {
  require(rows_ == o.rows_ && cols_ == o.cols_, ErrorKind::input, "matrix shape mismatch");
  for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += o.data_[k];
  return *this;
}

Matrix& Matrix::operator-=(const Matrix& o) {
  require(rows_ == o.rows_ && cols_ == o.cols_, ErrorKind::input, "matrix shape mismatch");
  for (std::size_t k = 0; k < data_.size(); ++k) data_[k] -= o.data_[k];
  return *this;
}

Matrix& Matrix::operator*=(double s) {
  for (double& v : data_) v *= s;
  return *this;
}

Matrix operator*(const Matrix& a, const Matrix& b) {
  require(a.cols_ == b.rows_, ErrorKind::input, "matrix product shape mismatch");
  Matrix c(a.rows_, b.cols_);
  for (int i = 0; i < a.rows_; ++i)
    for (int k = 0; k < a.cols_; ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      for (int j = 0; j < b.cols_; ++j) c(i, j) += aik * b(k, j);
    }
  return c;
}

SymMatrix::SymMatrix(int dim, double fill)
    : dim_(dim), data_(static_cast<std::size_t>(dim) * (dim + 1) / 2, fill) {
  require(dim >= 0, ErrorKind::input, "negative matrix dimension");
}

SymMatrix::SymMatrix(std::initializer_list<std::initializer_list<double>> rows)
    : SymMatrix(from_dense(Matrix(rows), 0.0)) {}

SymMatrix SymMatrix::identity(int n) {
  SymMatrix m(n);
  for (int i = 0; i < n; ++i) m.set(i, i, 1.0);
  return m;
}

SymMatrix SymMatrix::diagonal(std::span<const double> d) {
  SymMatrix m(static_cast<int>(d.size()));
  for (int i = 0; i < m.dim(); ++i) m.set(i, i, d[i]);
  return m;
}

SymMatrix SymMatrix::from_dense(const Matrix& a, double tol) {
  require(a.rows() == a.cols(), ErrorKind::input, "symmetric matrix must be square");
  const double scale = std::max(1.0, a.max_abs());
  SymMatrix s(a.rows());
  for (int i = 0; i < a.rows(); ++i)
    for (int j = i; j < a.cols(); ++j) {
      require(std::abs(a(i, j) - a(j, i)) <= tol * scale, ErrorKind::input,
              "matrix is not symmetric");
      s.set(i, j, 0.5 * (a(i, j) + a(j, i)));
    }
  return s;
}

Matrix SymMatrix::dense() const {
  Matrix m(dim_, dim_);
  for (int i = 0; i < dim_; ++i)
    for (int j = 0; j < dim_; ++j) m(i, j) = (*this)(i, j);
  return m;
}

double SymMatrix::trace() const {
  double s = 0.0;
  for (int i = 0; i < dim_; ++i) s += (*this)(i, i);
  return s;
}

double SymMatrix::max_abs() const {
  double m = 0.0;
  for (double v : data_) m = std::max(m, std::abs(v));
  return m;
}

SymMatrix& SymMatrix::operator+=(const SymMatrix& o) {
  require(dim_ == o.dim_, ErrorKind::input, "matrix dimension mismatch");
  for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += o.data_[k];
  return *this;
}

SymMatrix& SymMatrix::operator-=(const SymMatrix& o) {
  require(dim_ == o.dim_, ErrorKind::input, "matrix dimension mismatch");
  for (std::size_t k = 0; k < data_.size(); ++k) data_[k] -= o.data_[k];
  return *this;
}

SymMatrix& SymMatrix::operator*=(double s) {
  for (double& v : data_) v *= s;
  return *this;
}

SymMatrix congruence(const Matrix& s, const SymMatrix& a) {
  require(s.cols() == a.dim(), ErrorKind::input, "congruence shape mismatch");
  const int k = s.rows();
  const int n = s.cols();
  Matrix sa(k, n);  // S A
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < n; ++j) {
      double v = 0.0;
      for (int l = 0; l < n; ++l) v += s(i, l) * a(l, j);
      sa(i, j) = v;
    }
  SymMatrix out(k);
  for (int i = 0; i < k; ++i)
    for (int j = i; j < k; ++j) {
      double v = 0.0;
      for (int l = 0; l < n; ++l) v += sa(i, l) * s(j, l);
      out.set(i, j, v);
    }
  return out;
}

SymMatrix gram_of_columns(const Matrix& s) {
  SymMatrix out(s.cols());
  for (int i = 0; i < s.cols(); ++i)
    for (int j = i; j < s.cols(); ++j) {
      double v = 0.0;
      for (int r = 0; r < s.rows(); ++r) v += s(r, i) * s(r, j);
      out.set(i, j, v);
    }
  return out;
}

SymMatrix gram_of_rows(const Matrix& s) {
  SymMatrix out(s.rows());
  for (int i = 0; i < s.rows(); ++i)
    for (int j = i; j < s.rows(); ++j) {
      double v = 0.0;
      for (int c = 0; c < s.cols(); ++c) v += s(i, c) * s(j, c);
      out.set(i, j, v);
    }
  return out;
}

Matrix Spectrum::reconstruct() const {
  const int n = static_cast<int>(eigenvalues.size());
  Matrix out(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double v = 0.0;
      for (int k = 0; k < n; ++k) v += eigenvectors(i, k) * eigenvalues[k] * eigenvectors(j, k);
      out(i, j) = v;
    }
  return out;
}

namespace {

constexpr int kMaxSweeps = 100;

}  // namespace

Spectrum eigh(const SymMatrix& sym) {
  const int n = sym.dim();
  require(n <= 64, ErrorKind::input, "eigh is limited to dimension 64");
  Matrix a = sym.dense();
  Matrix v = Matrix::identity(n);

  double total = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) total += a(i, j) * a(i, j);

  auto off_norm2 = [&] {
    double s = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) s += a(i, j) * a(i, j);
    return s;
  };

  const double eps = std::numeric_limits<double>::epsilon();
  bool converged = n <= 1;
  for (int sweep = 0; sweep < kMaxSweeps && !converged; ++sweep) {
    const double off = off_norm2();
    if (off <= eps * eps * total * 1e-2 || off == 0.0) {
      converged = true;
      break;
    }
    // Threshold sweep: skip small rotations during the first sweeps.
    const double threshold = sweep < 3 ? 0.2 * std::sqrt(off) / (n * n) : 0.0;
    for (int p = 0; p < n - 1; ++p) {
      for (int q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        const double g = 100.0 * std::abs(apq);
        if (sweep > 3 && std::abs(a(p, p)) + g == std::abs(a(p, p)) &&
            std::abs(a(q, q)) + g == std::abs(a(q, q))) {
          a(p, q) = 0.0;
          a(q, p) = 0.0;
          continue;
        }
        if (std::abs(apq) <= threshold || apq == 0.0) continue;

        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        double t = 1.0 / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        if (theta < 0.0) t = -t;
        if (!std::isfinite(theta)) t = 0.5 * apq / (a(q, q) - a(p, p));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;

        for (int k = 0; k < n; ++k) {
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (int k = 0; k < n; ++k) {
          const double apk = a(p, k);
          const double aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        for (int k = 0; k < n; ++k) {
          const double vkp = v(k, p);
          const double vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }
  if (!converged) {
    const double off = off_norm2();
    require(off <= 1e-20 * std::max(1.0, total), ErrorKind::numerical,
            "Jacobi eigensolver did not converge within the sweep cap");
  }

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int i, int j) { return a(i, i) < a(j, j); });

  Spectrum out;
  out.eigenvalues.resize(n);
  out.eigenvectors = Matrix(n, n);
  for (int k = 0; k < n; ++k) {
    out.eigenvalues[k] = a(order[k], order[k]);
    for (int i = 0; i < n; ++i) out.eigenvectors(i, k) = v(i, order[k]);
  }
  return out;
}

std::vector<double> eigenvalues(const SymMatrix& a) { return eigh(a).eigenvalues; }

SymMatrix sqrt_psd(const SymMatrix& a) {
  const Spectrum sp = eigh(a);
  const int n = a.dim();
  double scale = 1.0;
  for (double e : sp.eigenvalues) scale = std::max(scale, std::abs(e));
  // Eigenvalues at roundoff level are zeros; their square roots would not be.
  const double noise = 16.0 * n * std::numeric_limits<double>::epsilon() * scale;
  std::vector<double> roots(n);
  for (int k = 0; k < n; ++k) {
    const double e = sp.eigenvalues[k];
    require(e >= -1e-6, ErrorKind::not_psd, "matrix has a materially negative eigenvalue");
    roots[k] = e <= noise ? 0.0 : std::sqrt(e);
  }
  SymMatrix s(n);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      double v = 0.0;
      for (int k = 0; k < n; ++k) v += sp.eigenvectors(i, k) * roots[k] * sp.eigenvectors(j, k);
      s.set(i, j, v);
    }
  return s;
}

std::vector<double> singular_values(const Matrix& input) {
  // One-sided Jacobi on the orientation with fewer columns.
  Matrix a = input.cols() <= input.rows() ? input : input.transpose();
  const int rows = a.rows();
  const int cols = a.cols();
  const double eps = std::numeric_limits<double>::epsilon();
  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    bool rotated = false;
    for (int p = 0; p < cols - 1; ++p)
      for (int q = p + 1; q < cols; ++q) {
        double alpha = 0.0, beta = 0.0, gamma = 0.0;
        for (int i = 0; i < rows; ++i) {
          alpha += a(i, p) * a(i, p);
          beta += a(i, q) * a(i, q);
          gamma += a(i, p) * a(i, q);
        }
        if (std::abs(gamma) <= eps * std::sqrt(alpha * beta) || gamma == 0.0) continue;
        rotated = true;
        const double zeta = (beta - alpha) / (2.0 * gamma);
        const double t = std::copysign(1.0, zeta) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        for (int i = 0; i < rows; ++i) {
          const double aip = a(i, p);
          const double aiq = a(i, q);
          a(i, p) = c * aip - s * aiq;
          a(i, q) = s * aip + c * aiq;
        }
      }
    if (!rotated) break;
  }
  std::vector<double> sv(cols);
  for (int j = 0; j < cols; ++j) {
    double s = 0.0;
    for (int i = 0; i < rows; ++i) s += a(i, j) * a(i, j);
    sv[j] = std::sqrt(s);
  }
  std::sort(sv.begin(), sv.end(), std::greater<>());
  return sv;
}

int numerical_rank(const Matrix& a, double threshold) {
  int r = 0;
  for (double s : singular_values(a))
    if (s > threshold) ++r;
  return r;
}

SpectraMatchReport spectra_match_lemma(const Matrix& sigma, double tol) {
  const int m = sigma.rows();
  const int n = sigma.cols();
  require(m >= 1 && m <= n, ErrorKind::input, "sigma must be m x n with 1 <= m <= n");
  require(numerical_rank(sigma) == m, ErrorKind::precondition,
          "sigma is rank deficient; its row Gram matrix is singular");

  SpectraMatchReport r;
  r.m = m;
  r.n = n;
  r.row_gram_eigenvalues = eigenvalues(gram_of_rows(sigma));
  r.column_gram_eigenvalues = eigenvalues(gram_of_columns(sigma));
  r.row_gram_positive = r.row_gram_eigenvalues.front() > 0.0;

  const double scale = std::max(1.0, r.row_gram_eigenvalues.back());
  // Largest m eigenvalues of sigma^T sigma pair with those of sigma sigma^T.
  for (int k = 0; k < m; ++k) {
    const double big = r.column_gram_eigenvalues[n - 1 - k];
    const double ref = r.row_gram_eigenvalues[m - 1 - k];
    r.max_nonzero_discrepancy = std::max(r.max_nonzero_discrepancy, std::abs(big - ref));
  }
  for (int k = 0; k < n - m; ++k)
    r.max_zero_residual = std::max(r.max_zero_residual, std::abs(r.column_gram_eigenvalues[k]));
  r.agree = r.row_gram_positive && r.max_nonzero_discrepancy <= tol * scale &&
            r.max_zero_residual <= tol * scale;
  return r;
}

double trace_identity_check(const Matrix& s1, const Matrix& s2, const SymMatrix& a,
                            const SymMatrix& b) {
  require(s1.rows() == s2.rows() && s1.cols() == s2.cols(), ErrorKind::input,
          "sigma shapes differ");
  require(a.dim() == s1.cols() && b.dim() == s1.cols(), ErrorKind::input,
          "matrix dimension does not match sigma columns");
  const Matrix lhs = gram_of_columns(s1).dense() * a.dense() - gram_of_columns(s2).dense() * b.dense();
  const double rhs = congruence(s1, a).trace() - congruence(s2, b).trace();
  return std::abs(lhs.trace() - rhs);
}

DiagonalLemmaWitness examine_positive_diagonal(const SymMatrix& a) {
  DiagonalLemmaWitness w;
  w.matrix = a;
  w.spectrum = eigh(a);
  w.positive_diagonal = true;
  for (int i = 0; i < a.dim(); ++i) w.positive_diagonal = w.positive_diagonal && a(i, i) > 0.0;
  w.is_counterexample = w.positive_diagonal && !w.spectrum.eigenvalues.empty() &&
                        w.spectrum.eigenvalues.front() < 0.0;
  return w;
}

DiagonalLemmaWitness diagonal_lemma_falsifier() {
  return examine_positive_diagonal(SymMatrix{{1.0, 3.0}, {3.0, 1.0}});
}

}  // namespace subell
