#include "subell/polynomial.hpp"

#include <algorithm>
#include <cmath>

#include "subell/error.hpp"

namespace subell {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::input: return "input";
    case ErrorKind::unsupported: return "unsupported";
    case ErrorKind::no_path: return "no_path";
    case ErrorKind::numerical: return "numerical";
    case ErrorKind::not_psd: return "not_psd";
    case ErrorKind::precondition: return "precondition";
    case ErrorKind::singular_point: return "singular_point";
    case ErrorKind::inadmissible: return "inadmissible";
    case ErrorKind::boundary_stencil: return "boundary_stencil";
    case ErrorKind::config: return "config";
  }
  return "unknown";
}

Polynomial Polynomial::constant(int num_vars, double value) {
  Polynomial p(num_vars);
  p.add_term(value, std::vector<int>(num_vars, 0));
  return p;
}

Polynomial Polynomial::variable(int num_vars, int index) {
  require(index >= 0 && index < num_vars, ErrorKind::input, "variable index out of range");
  Polynomial p(num_vars);
  std::vector<int> e(num_vars, 0);
  e[index] = 1;
  p.add_term(1.0, std::move(e));
  return p;
}

void Polynomial::add_term(double coeff, std::vector<int> exponents) {
  require(static_cast<int>(exponents.size()) == num_vars_, ErrorKind::input,
          "monomial exponent count does not match polynomial arity");
  for (int e : exponents) require(e >= 0, ErrorKind::input, "negative exponent");
  if (coeff == 0.0) return;
  for (auto& t : terms_) {
    if (t.exponents == exponents) {
      t.coeff += coeff;
      prune();
      return;
    }
  }
  terms_.push_back({coeff, std::move(exponents)});
}

void Polynomial::prune() {
  std::erase_if(terms_, [](const Monomial& t) { return t.coeff == 0.0; });
}

double Polynomial::operator()(std::span<const double> x) const {
  require(static_cast<int>(x.size()) == num_vars_, ErrorKind::input,
          "polynomial evaluated at point of wrong dimension");
  double sum = 0.0;
  for (const auto& t : terms_) {
    double v = t.coeff;
    for (int k = 0; k < num_vars_; ++k) {
      for (int p = 0; p < t.exponents[k]; ++p) v *= x[k];
    }
    sum += v;
  }
  return sum;
}

Polynomial Polynomial::derivative(int var) const {
  require(var >= 0 && var < num_vars_, ErrorKind::input, "derivative index out of range");
  Polynomial d(num_vars_);
  for (const auto& t : terms_) {
    const int e = t.exponents[var];
    if (e == 0) continue;
    auto ex = t.exponents;
    ex[var] = e - 1;
    d.add_term(t.coeff * e, std::move(ex));
  }
  return d;
}

std::vector<double> Polynomial::gradient(std::span<const double> x) const {
  std::vector<double> g(num_vars_);
  for (int i = 0; i < num_vars_; ++i) g[i] = derivative(i)(x);
  return g;
}

std::vector<double> Polynomial::hessian(std::span<const double> x) const {
  const int n = num_vars_;
  std::vector<double> h(static_cast<std::size_t>(n) * n);
  for (int i = 0; i < n; ++i) {
    const Polynomial di = derivative(i);
    for (int j = i; j < n; ++j) {
      const double v = di.derivative(j)(x);
      h[i * n + j] = v;
      h[j * n + i] = v;
    }
  }
  return h;
}

int Polynomial::degree() const noexcept {
  int deg = 0;
  for (const auto& t : terms_) {
    int d = 0;
    for (int e : t.exponents) d += e;
    deg = std::max(deg, d);
  }
  return deg;
}

Polynomial& Polynomial::operator+=(const Polynomial& other) {
  if (num_vars_ == 0 && terms_.empty()) num_vars_ = other.num_vars_;
  require(num_vars_ == other.num_vars_ || other.terms_.empty(), ErrorKind::input,
          "polynomial arity mismatch");
  for (const auto& t : other.terms_) add_term(t.coeff, t.exponents);
  return *this;
}

Polynomial& Polynomial::operator-=(const Polynomial& other) {
  if (num_vars_ == 0 && terms_.empty()) num_vars_ = other.num_vars_;
  require(num_vars_ == other.num_vars_ || other.terms_.empty(), ErrorKind::input,
          "polynomial arity mismatch");
  for (const auto& t : other.terms_) add_term(-t.coeff, t.exponents);
  return *this;
}

Polynomial& Polynomial::operator*=(double s) {
  for (auto& t : terms_) t.coeff *= s;
  prune();
  return *this;
}

Polynomial operator*(const Polynomial& a, const Polynomial& b) {
  require(a.num_vars_ == b.num_vars_, ErrorKind::input, "polynomial arity mismatch");
  Polynomial out(a.num_vars_);
  for (const auto& s : a.terms_) {
    for (const auto& t : b.terms_) {
      std::vector<int> e(a.num_vars_);
      for (int k = 0; k < a.num_vars_; ++k) e[k] = s.exponents[k] + t.exponents[k];
      out.add_term(s.coeff * t.coeff, std::move(e));
    }
  }
  return out;
}

double RationalFunction::operator()(std::span<const double> x) const {
  const double d = den(x);
  require(d != 0.0 && std::isfinite(d), ErrorKind::numerical, "rational entry has vanishing denominator");
  return num(x) / d;
}

}  // namespace subell
