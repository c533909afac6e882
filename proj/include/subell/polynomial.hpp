#pragma once

#include <span>
#include <vector>

namespace subell {

/// One monomial c * x_1^{e_1} ... x_n^{e_n}.
struct Monomial {
  double coeff = 0.0;
  std::vector<int> exponents;
};

/// Sparse multivariate polynomial in a fixed number of variables. Used for
/// polynomial vector fields, coefficient tables and manufactured solutions,
/// where exact derivatives are needed.
class Polynomial {
 public:
  Polynomial() = default;
  explicit Polynomial(int num_vars) : num_vars_(num_vars) {}

  static Polynomial constant(int num_vars, double value);
  /// The coordinate function x_{index}.
  static Polynomial variable(int num_vars, int index);

  int num_vars() const noexcept { return num_vars_; }
  const std::vector<Monomial>& terms() const noexcept { return terms_; }
  bool is_zero() const noexcept { return terms_.empty(); }

  /// Adds c * x^e, merging like terms. Exponents must be non-negative.
  void add_term(double coeff, std::vector<int> exponents);

  double operator()(std::span<const double> x) const;

  Polynomial derivative(int var) const;
  std::vector<double> gradient(std::span<const double> x) const;
  /// Row-major n*n Hessian.
  std::vector<double> hessian(std::span<const double> x) const;

  int degree() const noexcept;

  Polynomial& operator+=(const Polynomial& other);
  Polynomial& operator-=(const Polynomial& other);
  Polynomial& operator*=(double s);

  friend Polynomial operator+(Polynomial a, const Polynomial& b) { return a += b; }
  friend Polynomial operator-(Polynomial a, const Polynomial& b) { return a -= b; }
  friend Polynomial operator*(Polynomial a, double s) { return a *= s; }
  friend Polynomial operator*(double s, Polynomial a) { return a *= s; }
  friend Polynomial operator*(const Polynomial& a, const Polynomial& b);

 private:
  void prune();

  int num_vars_ = 0;
  std::vector<Monomial> terms_;
};

/// Quotient of two polynomials; the denominator must not vanish where it is
/// evaluated.
struct RationalFunction {
  Polynomial num;
  Polynomial den;

  double operator()(std::span<const double> x) const;
};

}  // namespace subell
