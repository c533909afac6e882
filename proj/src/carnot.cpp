#include "subell/carnot.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <deque>
#include <random>
#include <unordered_set>

#include "subell/error.hpp"

namespace subell {

double euclidean_distance(const Point& a, const Point& b) {
  require(a.dim() == b.dim(), ErrorKind::input, "points of different dimension");
  double s = 0.0;
  for (int i = 0; i < a.dim(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

Box Box::cube(int n, double lo, double hi) {
  return Box{std::vector<double>(n, lo), std::vector<double>(n, hi)};
}

bool Box::contains(const Point& x, double slack) const {
  if (x.dim() != dim()) return false;
  for (int i = 0; i < dim(); ++i)
    if (x[i] < lo[i] - slack || x[i] > hi[i] + slack) return false;
  return true;
}

namespace {

Polynomial mono(int n, double c, std::vector<int> e) {
  Polynomial p(n);
  p.add_term(c, std::move(e));
  return p;
}

CarnotStructure euclidean(int n) {
  CarnotStructure s;
  s.name = "euclidean:" + std::to_string(n);
  s.n = n;
  s.m = n;
  s.step = 1;
  s.sigma = [n](std::span<const double>) { return Matrix::identity(n); };
  s.group_law = [n](const Point& x, const Point& y) {
    Point z{std::vector<double>(n)};
    for (int i = 0; i < n; ++i) z[i] = x[i] + y[i];
    return z;
  };
  s.dilation = [n](double t, const Point& x) {
    Point z = x;
    for (int i = 0; i < n; ++i) z[i] *= t;
    return z;
  };
  s.lipschitz_sigma = 0.0;
  s.degrees.assign(n, 1);
  std::vector<Polynomial> polys;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) polys.push_back(Polynomial::constant(n, i == j ? 1.0 : 0.0));
  s.sigma_polynomials = std::move(polys);
  s.trace_growth_limit = 0.0;
  return s;
}

CarnotStructure heisenberg() {
  CarnotStructure s;
  s.name = "heisenberg1";
  s.n = 3;
  s.m = 2;
  s.step = 2;
  s.sigma = [](std::span<const double> x) {
    return Matrix{{1.0, 0.0, 2.0 * x[1]}, {0.0, 1.0, -2.0 * x[0]}};
  };
  s.group_law = [](const Point& x, const Point& y) {
    return Point{x[0] + y[0], x[1] + y[1], x[2] + y[2] + 2.0 * (x[1] * y[0] - x[0] * y[1])};
  };
  s.dilation = [](double t, const Point& x) { return Point{t * x[0], t * x[1], t * t * x[2]}; };
  // |sigma(x) - sigma(y)|_F = 2 |(x1 - y1, x2 - y2)|.
  s.lipschitz_sigma = 2.0;
  s.degrees = {1, 1, 2};
  s.sigma_polynomials = std::vector<Polynomial>{
      Polynomial::constant(3, 1.0), Polynomial(3),                mono(3, 2.0, {0, 1, 0}),
      Polynomial(3),                Polynomial::constant(3, 1.0), mono(3, -2.0, {1, 0, 0})};
  // Tr P = 2 + 4(x1^2 + x2^2).
  s.trace_growth_limit = 4.0;
  return s;
}

CarnotStructure engel() {
  CarnotStructure s;
  s.name = "engel1";
  s.n = 4;
  s.m = 2;
  // Strata dimensions 2, 1, 1.
  s.step = 3;
  s.sigma = [](std::span<const double> x) {
    return Matrix{{1.0, 0.0, -x[1], -x[2]}, {0.0, 1.0, 0.0, 0.0}};
  };
  s.group_law = [](const Point& x, const Point& y) {
    return Point{x[0] + y[0], x[1] + y[1], x[2] + y[2] - y[0] * x[1],
                 x[3] + y[3] + 0.5 * y[0] * y[0] * x[1] - y[0] * x[2]};
  };
  s.dilation = [](double t, const Point& x) {
    return Point{t * x[0], t * x[1], t * t * x[2], t * t * t * x[3]};
  };
  s.lipschitz_sigma = 1.0;
  s.degrees = {1, 1, 2, 3};
  s.sigma_polynomials = std::vector<Polynomial>{
      Polynomial::constant(4, 1.0), Polynomial(4), mono(4, -1.0, {0, 1, 0, 0}),
      mono(4, -1.0, {0, 0, 1, 0}),  Polynomial(4), Polynomial::constant(4, 1.0),
      Polynomial(4),                Polynomial(4)};
  // Tr P = 2 + x2^2 + x3^2.
  s.trace_growth_limit = 1.0;
  return s;
}

CarnotStructure line2d() {
  CarnotStructure s;
  s.name = "line2d";
  s.n = 2;
  s.m = 1;
  s.step = 1;
  s.sigma = [](std::span<const double>) { return Matrix{{1.0, 0.0}}; };
  s.lipschitz_sigma = 0.0;
  s.degrees = {1, 1};
  s.sigma_polynomials = std::vector<Polynomial>{Polynomial::constant(2, 1.0), Polynomial(2)};
  s.trace_growth_limit = 0.0;
  return s;
}

CarnotStructure grushin_like() {
  CarnotStructure s;
  s.name = "grushin-like2d";
  s.n = 2;
  s.m = 1;
  s.step = 1;
  s.sigma = [](std::span<const double> x) {
    return Matrix{{x[0] / (1.0 + x[0] * x[0]), 0.0}};
  };
  // sup |d/dt t/(1+t^2)| = 1, attained at t = 0.
  s.lipschitz_sigma = 1.0;
  s.degrees = {1, 1};
  s.trace_growth_limit = 0.0;
  return s;
}

}  // namespace

CarnotStructure make_structure(std::string_view name) {
  if (name == "heisenberg1") return heisenberg();
  if (name == "engel1") return engel();
  if (name == "line2d") return line2d();
  if (name == "grushin-like2d") return grushin_like();
  constexpr std::string_view prefix = "euclidean:";
  if (name.starts_with(prefix)) {
    const auto digits = name.substr(prefix.size());
    int n = 0;
    const auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), n);
    require(ec == std::errc() && ptr == digits.data() + digits.size() && n >= 1 && n <= 16,
            ErrorKind::input, "bad euclidean dimension in '" + std::string(name) + "'");
    return euclidean(n);
  }
  fail(ErrorKind::input, "unknown structure preset '" + std::string(name) + "'");
}

CarnotStructure make_rational_structure(std::string name, int rows, int cols,
                                        std::vector<RationalFunction> entries) {
  require(rows >= 1 && cols >= 1 && rows <= cols, ErrorKind::input,
          "custom sigma must be m x n with 1 <= m <= n");
  require(static_cast<int>(entries.size()) == rows * cols, ErrorKind::input,
          "custom sigma entry count does not match rows * cols");
  for (const auto& e : entries)
    require(e.num.num_vars() == cols && e.den.num_vars() == cols, ErrorKind::input,
            "custom sigma entries must be functions of n = cols variables");

  CarnotStructure s;
  s.name = std::move(name);
  s.n = cols;
  s.m = rows;
  s.step = 1;
  s.degrees.assign(cols, 1);

  bool polynomial = true;
  std::vector<Polynomial> polys;
  for (const auto& e : entries) {
    if (e.den.degree() != 0 || e.den.is_zero()) {
      polynomial = false;
      break;
    }
    const double d = e.den.terms().front().coeff;
    polys.push_back(e.num * (1.0 / d));
  }
  if (polynomial) s.sigma_polynomials = polys;

  s.sigma = [rows, cols, entries = std::move(entries)](std::span<const double> x) {
    Matrix out(rows, cols);
    for (int i = 0; i < rows; ++i)
      for (int j = 0; j < cols; ++j) out(i, j) = entries[i * cols + j](x);
    return out;
  };
  return s;
}

Matrix sigma_at(const CarnotStructure& s, const Point& x) {
  require(x.dim() == s.n, ErrorKind::input,
          "point has dimension " + std::to_string(x.dim()) + ", structure expects " +
              std::to_string(s.n));
  return s.sigma(x.coords);
}

SymMatrix p_matrix_at(const CarnotStructure& s, const Point& x) {
  return gram_of_columns(sigma_at(s, x));
}

double trace_p(const CarnotStructure& s, const Point& x) {
  // Tr(sigma^T sigma) is the squared Frobenius norm of sigma.
  const Matrix sg = sigma_at(s, x);
  double t = 0.0;
  for (double v : sg.data()) t += v * v;
  return t;
}

Point group_mul(const CarnotStructure& s, const Point& x, const Point& y) {
  require(static_cast<bool>(s.group_law), ErrorKind::unsupported,
          "structure '" + s.name + "' has no group law");
  require(x.dim() == s.n && y.dim() == s.n, ErrorKind::input, "group_mul dimension mismatch");
  return s.group_law(x, y);
}

Point dilate(const CarnotStructure& s, double t, const Point& x) {
  require(static_cast<bool>(s.dilation), ErrorKind::unsupported,
          "structure '" + s.name + "' has no dilations");
  require(x.dim() == s.n, ErrorKind::input, "dilate dimension mismatch");
  return s.dilation(t, x);
}

namespace {

// X_i u as a polynomial: sum_j sigma_ij d_j u.
Polynomial apply_field(const CarnotStructure& s, int i, const Polynomial& u) {
  const auto& polys = *s.sigma_polynomials;
  Polynomial out(s.n);
  for (int j = 0; j < s.n; ++j) {
    const Polynomial& c = polys[i * s.n + j];
    if (c.is_zero()) continue;
    out += c * u.derivative(j);
  }
  return out;
}

}  // namespace

double sum_of_squares(const CarnotStructure& s, const Polynomial& u, const Point& x) {
  require(s.sigma_polynomials.has_value(), ErrorKind::unsupported,
          "structure '" + s.name + "' has no polynomial vector fields");
  require(u.num_vars() == s.n && x.dim() == s.n, ErrorKind::input,
          "sum_of_squares dimension mismatch");
  double total = 0.0;
  for (int i = 0; i < s.m; ++i) total += apply_field(s, i, apply_field(s, i, u))(x.coords);
  return total;
}

EngelTraceValue engel_trace_operator(const CarnotStructure& s, const Polynomial& u,
                                     const Point& x) {
  require(s.name == "engel1", ErrorKind::unsupported,
          "engel_trace_operator requires the engel1 structure, got '" + s.name + "'");
  require(u.num_vars() == 4 && x.dim() == 4, ErrorKind::input, "Engel fields act on R^4");
  const auto hess = u.hessian(x.coords);
  SymMatrix h(4);
  for (int i = 0; i < 4; ++i)
    for (int j = i; j < 4; ++j) h.set(i, j, hess[i * 4 + j]);

  EngelTraceValue v;
  v.trace_form = congruence(sigma_at(s, x), h).trace();
  v.vector_form = sum_of_squares(s, u, x) - x[1] * u.derivative(3)(x.coords);
  return v;
}

Matrix heisenberg_sqrt_p_as_printed(const Point& x) {
  require(x.dim() == 3, ErrorKind::input, "Heisenberg points live in R^3");
  const double x1 = x[0];
  const double x2 = x[1];
  const double r2 = x1 * x1 + x2 * x2;
  require(r2 > 0.0, ErrorKind::singular_point, "printed formula is undefined on the x3 axis");
  const double q = std::sqrt(1.0 + 4.0 * r2);
  const double off = x1 * x2 * (1.0 - 1.0 / q) / r2;
  return Matrix{{(x2 * x2 + x1 * x1 / q) / r2, off, 2.0 * x2 / q},
                {off, (x1 * x1 + x2 * x2 / q) / r2, -2.0 * x1 / q},
                {2.0 * x2 / q, -2.0 * x1 / q, 4.0 * r2 / q}};
}

namespace {

constexpr int kMaxCcDim = 8;

struct CcKey {
  std::array<std::int64_t, kMaxCcDim> q{};
  bool operator==(const CcKey&) const = default;
};

struct CcKeyHash {
  std::size_t operator()(const CcKey& k) const noexcept {
    std::uint64_t h = 0x9e3779b97f4a7c15ULL;
    for (auto v : k.q) {
      std::uint64_t z = static_cast<std::uint64_t>(v) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
      z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
      z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
      h ^= z ^ (z >> 31);
    }
    return static_cast<std::size_t>(h);
  }
};

// Flow of +-X_i for time t, RK4 with a few substeps (exact for the
// polynomial flows of the presets).
void flow(const CarnotStructure& s, int field, double t, std::span<double> x) {
  constexpr int kSub = 4;
  const double dt = t / kSub;
  const int n = s.n;
  std::vector<double> k1(n), k2(n), k3(n), k4(n), tmp(n);
  auto rhs = [&](std::span<const double> at, std::vector<double>& out) {
    const Matrix sg = s.sigma(at);
    for (int j = 0; j < n; ++j) out[j] = sg(field, j);
  };
  for (int sub = 0; sub < kSub; ++sub) {
    rhs(x, k1);
    for (int j = 0; j < n; ++j) tmp[j] = x[j] + 0.5 * dt * k1[j];
    rhs(tmp, k2);
    for (int j = 0; j < n; ++j) tmp[j] = x[j] + 0.5 * dt * k2[j];
    rhs(tmp, k3);
    for (int j = 0; j < n; ++j) tmp[j] = x[j] + dt * k3[j];
    rhs(tmp, k4);
    for (int j = 0; j < n; ++j) x[j] += dt / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
  }
}

}  // namespace

CcEstimate cc_distance_estimate(const CarnotStructure& s, const Point& a, const Point& b,
                                double resolution, const CcOptions& options) {
  require(a.dim() == s.n && b.dim() == s.n, ErrorKind::input, "cc_distance dimension mismatch");
  require(resolution > 0.0 && std::isfinite(resolution), ErrorKind::input,
          "resolution must be positive");
  require(s.n <= kMaxCcDim, ErrorKind::input, "cc_distance supports n <= 8");
  if (a == b) return {0.0, 0, 1};

  const int n = s.n;
  std::vector<int> deg = s.degrees;
  if (static_cast<int>(deg.size()) != n) deg.assign(n, 1);

  Box box;
  if (options.box) {
    box = *options.box;
  } else {
    double radius = 4.0 * resolution;
    for (int k = 0; k < n; ++k)
      radius = std::max(radius, std::pow(std::abs(b[k] - a[k]), 1.0 / deg[k]));
    box.lo.resize(n);
    box.hi.resize(n);
    for (int k = 0; k < n; ++k) {
      const double margin = std::pow(radius, deg[k]);
      box.lo[k] = std::min(a[k], b[k]) - margin;
      box.hi[k] = std::max(a[k], b[k]) + margin;
    }
  }
  require(box.dim() == n && box.contains(a) && box.contains(b), ErrorKind::input,
          "cc_distance endpoints must lie in the search box");

  std::vector<double> quantum(n), tol(n);
  for (int k = 0; k < n; ++k) {
    quantum[k] = std::pow(resolution, deg[k]) / 4.0;
    // A closed square of side `resolution` shifts a degree-2 coordinate by a
    // few resolution^2, so reachable values are spaced that far apart.
    tol[k] = deg[k] == 1 ? 0.5 * resolution : 2.0 * std::pow(resolution, deg[k]);
  }
  auto key_of = [&](std::span<const double> x) {
    CcKey key;
    for (int k = 0; k < n; ++k) key.q[k] = std::llround((x[k] - a[k]) / quantum[k]);
    return key;
  };
  auto is_goal = [&](std::span<const double> x) {
    for (int k = 0; k < n; ++k)
      if (std::abs(x[k] - b[k]) > tol[k] * (1.0 + 1e-9)) return false;
    return true;
  };

  std::vector<double> coords(a.coords);
  std::vector<int> depth{0};
  std::unordered_set<CcKey, CcKeyHash> seen;
  seen.reserve(1 << 16);
  seen.insert(key_of(a.coords));
  std::deque<std::size_t> queue{0};
  std::vector<double> next(n);

  while (!queue.empty()) {
    const std::size_t id = queue.front();
    queue.pop_front();
    for (int field = 0; field < s.m; ++field) {
      for (double sign : {1.0, -1.0}) {
        std::copy_n(coords.begin() + id * n, n, next.begin());
        flow(s, field, sign * resolution, next);
        Point candidate(next);
        if (!box.contains(candidate)) continue;
        if (!seen.insert(key_of(next)).second) continue;
        const int d = depth[id] + 1;
        if (is_goal(next)) return {d * resolution, d, seen.size()};
        require(seen.size() < options.max_nodes, ErrorKind::no_path,
                "cc_distance search exceeded its node budget; resolution too coarse or box too "
                "small");
        coords.insert(coords.end(), next.begin(), next.end());
        depth.push_back(d);
        queue.push_back(depth.size() - 1);
      }
    }
  }
  fail(ErrorKind::no_path, "target not reachable by horizontal moves inside the search box");
}

double lipschitz_sigma_estimate(const CarnotStructure& s, const Box& box, int samples,
                                std::uint64_t seed) {
  require(samples >= 2, ErrorKind::input, "lipschitz estimate needs at least two samples");
  require(box.dim() == s.n, ErrorKind::input, "box dimension mismatch");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  std::vector<Point> pts;
  std::vector<Matrix> sig;
  for (int i = 0; i < samples; ++i) {
    Point p{std::vector<double>(s.n)};
    for (int k = 0; k < s.n; ++k) p[k] = box.lo[k] + (box.hi[k] - box.lo[k]) * unit(rng);
    sig.push_back(s.sigma(p.coords));
    pts.push_back(std::move(p));
  }

  double best = 0.0;
  auto quotient = [&](const Point& x, const Matrix& sx, const Point& y, const Matrix& sy) {
    const double d = euclidean_distance(x, y);
    if (d == 0.0) return;
    best = std::max(best, (sx - sy).frobenius() / d);
  };
  for (int i = 0; i < samples; ++i)
    for (int j = i + 1; j < samples; ++j) quotient(pts[i], sig[i], pts[j], sig[j]);

  // Short coordinate probes catch the local slope that far pairs average out.
  for (int i = 0; i < samples; ++i)
    for (int k = 0; k < s.n; ++k) {
      const double width = box.hi[k] - box.lo[k];
      const double eps = std::ldexp(std::max(width, 1e-300), -10);
      Point q = pts[i];
      q[k] = q[k] + eps <= box.hi[k] ? q[k] + eps : q[k] - eps;
      quotient(pts[i], sig[i], q, s.sigma(q.coords));
    }
  return best;
}

}  // namespace subell
