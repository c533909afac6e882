#include "subell/doubling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "subell/error.hpp"

namespace subell {

void DoublingParams::validate() const {
  require(L > 0.0, ErrorKind::input, "L must be positive");
  require(alpha > 0.0 && alpha <= 1.0, ErrorKind::input, "alpha must lie in (0, 1]");
  require(delta >= 0.0 && epsilon >= 0.0, ErrorKind::input, "delta, epsilon must be >= 0");
  require(mu > 0.0, ErrorKind::input, "mu must be positive");
  require(eta > 1.0, ErrorKind::input, "eta must exceed 1");
}

void ConstantBundle::validate() const {
  require(c0 > 0.0, ErrorKind::input, "c0 must be positive");
  require(cbar > 0.0 && cbar <= c0, ErrorKind::input, "cbar must lie in (0, c0]");
  require(Lambda > 0.0, ErrorKind::input, "Lambda must be positive");
  require(C >= 0.0, ErrorKind::input, "C must be non-negative");
  require(L_c >= 0.0 && L_f >= 0.0 && u_inf >= 0.0, ErrorKind::input,
          "Holder seminorms and sup norm must be non-negative");
  require(beta_c > 0.0 && beta_c <= 1.0 && beta_f > 0.0 && beta_f <= 1.0, ErrorKind::input,
          "Holder exponents must lie in (0, 1]");
}

namespace {

struct Direction {
  double r = 0.0;
  std::vector<double> e;  // unit vector (x - y)/|x - y|
};

Direction direction(const Point& x, const Point& y) {
  require(x.dim() == y.dim() && x.dim() >= 1, ErrorKind::input, "point dimension mismatch");
  Direction d;
  d.e.resize(x.dim());
  for (int i = 0; i < x.dim(); ++i) d.e[i] = x[i] - y[i];
  double s = 0.0;
  for (double v : d.e) s += v * v;
  d.r = std::sqrt(s);
  require(d.r > 0.0, ErrorKind::singular_point, "phi is not twice differentiable at x == y");
  for (double& v : d.e) v /= d.r;
  return d;
}

// scale * (coef * e (x) e + I)
SymMatrix rank_one_plus_identity(const std::vector<double>& e, double coef, double scale) {
  const int n = static_cast<int>(e.size());
  SymMatrix m(n);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) m.set(i, j, scale * (coef * e[i] * e[j] + (i == j ? 1.0 : 0.0)));
  return m;
}

}  // namespace

PhiHessian phi_hessian_block(const Point& x, const Point& y, double L, double alpha) {
  const Direction d = direction(x, y);
  const int n = x.dim();
  PhiHessian out;
  out.m = rank_one_plus_identity(d.e, alpha - 2.0, L * alpha * std::pow(d.r, alpha - 2.0));
  out.block = SymMatrix(2 * n);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      const double v = out.m(i, j);
      out.block.set(i, j, v);
      out.block.set(n + i, n + j, v);
      out.block.set(i, n + j, -v);
      out.block.set(j, n + i, -v);
    }
  return out;
}

SymMatrix phi_hessian_square(const Point& x, const Point& y, double L, double alpha) {
  const Direction d = direction(x, y);
  return rank_one_plus_identity(d.e, alpha * (alpha - 2.0),
                                alpha * alpha * L * L * std::pow(d.r, 2.0 * (alpha - 2.0)));
}

double phi_value(const Point& x, const Point& y, double L, double alpha) {
  return L * std::pow(euclidean_distance(x, y), alpha);
}

TraceBound sums_trace_bound(const Matrix& sx, const Matrix& sy, const SymMatrix& a,
                            const SymMatrix& b, double L, double alpha, double r, double eta) {
  require(sx.rows() == sy.rows() && sx.cols() == sy.cols(), ErrorKind::input,
          "sigma shapes differ");
  require(a.dim() == sx.cols() && b.dim() == sx.cols(), ErrorKind::input,
          "A, B must match sigma columns");
  require(r > 0.0, ErrorKind::singular_point, "trace bound needs |x - y| > 0");
  TraceBound t;
  t.lhs = congruence(sx, a).trace() - congruence(sy, b).trace();
  const Matrix diff = sx - sy;
  const double f = diff.frobenius();
  t.rhs = L * alpha * std::pow(r, alpha - 2.0) * eta * f * f;
  return t;
}

double trace_inequality_constant(double lipschitz_sigma, double eta) {
  require(lipschitz_sigma >= 0.0, ErrorKind::input, "Lipschitz constant must be >= 0");
  require(eta > 1.0, ErrorKind::input, "eta must exceed 1");
  return lipschitz_sigma * lipschitz_sigma * eta;
}

double admissible_alpha_limit(const ConstantBundle& k) {
  if (k.C == 0.0) return std::numeric_limits<double>::infinity();
  return k.c0 / (k.C * k.Lambda);
}

double holder_constant_bound(const ConstantBundle& k, double alpha) {
  k.validate();
  require(alpha > 0.0 && alpha <= 1.0, ErrorKind::input, "alpha must lie in (0, 1]");
  require(alpha < admissible_alpha_limit(k), ErrorKind::inadmissible,
          "alpha must be below c0 / (C Lambda)");
  if (k.u_inf == 0.0) return 0.0;

  const double denom = k.c0 - k.C * k.Lambda * alpha;
  double a1 = k.L_f, e1 = k.beta_f;
  double a2 = k.L_c * k.u_inf, e2 = k.beta_c;
  // The larger exponent sets the outer power.
  if (e1 > e2) {
    std::swap(a1, a2);
    std::swap(e1, e2);
  }
  const double inner =
      (a1 * std::pow(k.u_inf, e1 - alpha) + a2 * std::pow(k.u_inf, e2 - alpha)) / denom;
  return std::pow(inner, 1.0 / (1.0 + e2 - alpha));
}

namespace {

std::vector<std::vector<double>> sphere_directions(int n, std::uint64_t seed, int random_count) {
  std::vector<std::vector<double>> dirs;
  for (int i = 0; i < n; ++i)
    for (double s : {1.0, -1.0}) {
      std::vector<double> d(n, 0.0);
      d[i] = s;
      dirs.push_back(d);
    }
  const double h = 1.0 / std::sqrt(2.0);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      for (double si : {1.0, -1.0})
        for (double sj : {1.0, -1.0}) {
          std::vector<double> d(n, 0.0);
          d[i] = si * h;
          d[j] = sj * h;
          dirs.push_back(d);
        }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  for (int k = 0; k < random_count; ++k) {
    std::vector<double> d(n);
    double s = 0.0;
    for (double& v : d) {
      v = g(rng);
      s += v * v;
    }
    s = std::sqrt(s);
    if (s == 0.0) continue;
    for (double& v : d) v /= s;
    dirs.push_back(d);
  }
  return dirs;
}

}  // namespace

GrowthMargin growth_condition_margin(const CarnotStructure& s, double c0, double Lambda,
                                     const std::vector<double>& radii, double tol) {
  require(!radii.empty(), ErrorKind::input, "growth check needs at least one radius");
  require(Lambda > 0.0, ErrorKind::input, "Lambda must be positive");
  for (std::size_t i = 0; i < radii.size(); ++i) {
    require(radii[i] > 0.0, ErrorKind::input, "radii must be positive");
    require(i == 0 || radii[i] > radii[i - 1], ErrorKind::input, "radii must be increasing");
  }
  const auto dirs = sphere_directions(s.n, 2024, 2000);
  const double target = c0 / (2.0 * Lambda);

  GrowthMargin g;
  g.radii = radii;
  for (double r : radii) {
    double best = -std::numeric_limits<double>::infinity();
    Point x{std::vector<double>(s.n)};
    for (const auto& d : dirs) {
      for (int k = 0; k < s.n; ++k) x[k] = r * d[k];
      best = std::max(best, trace_p(s, x) / (r * r));
    }
    g.margins.push_back(best - target);
  }
  if (radii.size() == 1) {
    g.tail_estimate = g.margins.back();
  } else {
    const double rp = radii[radii.size() - 2];
    const double rl = radii.back();
    const double mp = g.margins[radii.size() - 2];
    const double ml = g.margins.back();
    g.tail_estimate = (rl * rl * ml - rp * rp * mp) / (rl * rl - rp * rp);
  }
  if (s.trace_growth_limit) g.analytic_limit = *s.trace_growth_limit - target;
  g.satisfied = g.tail_estimate <= tol;
  return g;
}

HolderSigmaWitness lower_regularity_witness(double gamma, double alpha, double L, double eta) {
  require(gamma > 0.0 && gamma <= 1.0, ErrorKind::input, "gamma must lie in (0, 1]");
  require(alpha > 0.0 && alpha <= 1.0, ErrorKind::input, "alpha must lie in (0, 1]");
  HolderSigmaWitness w;
  w.alpha = alpha;
  w.predicted_exponent = alpha - 2.0 + 2.0 * gamma;

  // sigma(t) = |t|^gamma on R, compared at 0 and r. A = B = 0 isolates the
  // right-hand side.
  const SymMatrix zero(1);
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  const int count = 13;
  for (int k = 0; k < count; ++k) {
    const double r = std::pow(10.0, -6.0 + 0.5 * k);
    const Matrix s0{{0.0}};
    const Matrix s1{{std::pow(r, gamma)}};
    const TraceBound t = sums_trace_bound(s0, s1, zero, zero, L, alpha, r, eta);
    w.r.push_back(r);
    w.rhs.push_back(t.rhs);
    const double lx = std::log(r);
    const double ly = std::log(t.rhs);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  w.fitted_exponent = (count * sxy - sx * sy) / (count * sxx - sx * sx);
  return w;
}

}  // namespace subell
