#include "subell/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <ostream>

#include "subell/error.hpp"

namespace subell {

Grid::Grid(Box box, std::vector<int> shape) : box_(std::move(box)), shape_(std::move(shape)) {
  const int n = static_cast<int>(shape_.size());
  require(n >= 1 && box_.dim() == n, ErrorKind::input, "grid shape must match box dimension");
  for (int k = 0; k < n; ++k) {
    require(shape_[k] >= 3, ErrorKind::input, "grid needs at least 3 nodes per axis");
    require(box_.hi[k] > box_.lo[k], ErrorKind::input, "box must have positive width");
  }
  h_ = (box_.hi[0] - box_.lo[0]) / (shape_[0] - 1);
  for (int k = 1; k < n; ++k) {
    const double hk = (box_.hi[k] - box_.lo[k]) / (shape_[k] - 1);
    require(std::abs(hk - h_) <= 1e-9 * h_, ErrorKind::input,
            "grid spacing must be equal on every axis");
  }
  strides_.assign(n, 1);
  for (int k = n - 2; k >= 0; --k) strides_[k] = strides_[k + 1] * shape_[k + 1];
  size_ = strides_[0] * shape_[0];
}

std::vector<int> Grid::multi_index(std::size_t flat) const {
  std::vector<int> idx(shape_.size());
  for (std::size_t k = 0; k < shape_.size(); ++k) {
    idx[k] = static_cast<int>(flat / strides_[k]);
    flat %= strides_[k];
  }
  return idx;
}

std::size_t Grid::flat_index(std::span<const int> multi) const {
  std::size_t f = 0;
  for (std::size_t k = 0; k < shape_.size(); ++k) f += strides_[k] * multi[k];
  return f;
}

Point Grid::point(std::size_t flat) const {
  const auto idx = multi_index(flat);
  std::vector<double> x(idx.size());
  for (std::size_t k = 0; k < idx.size(); ++k) x[k] = box_.lo[k] + h_ * idx[k];
  return Point(std::move(x));
}

bool Grid::is_boundary(std::size_t flat) const {
  for (std::size_t k = 0; k < shape_.size(); ++k) {
    const int i = static_cast<int>(flat / strides_[k]);
    flat %= strides_[k];
    if (i == 0 || i == shape_[k] - 1) return true;
  }
  return false;
}

namespace {

using Terms = std::vector<std::pair<std::size_t, double>>;

// Appends scale * (multilinear weights of x) to out.
void interpolation_terms(const Grid& g, std::span<const double> x, double scale, Terms& out) {
  const int n = g.dim();
  std::vector<int> base(n);
  std::vector<double> theta(n);
  for (int k = 0; k < n; ++k) {
    const double t = (x[k] - g.box().lo[k]) / g.h();
    const double slack = 1e-9;
    require(t >= -slack && t <= g.shape()[k] - 1 + slack, ErrorKind::boundary_stencil,
            "interpolation point outside the grid box");
    int i0 = static_cast<int>(std::floor(t));
    i0 = std::clamp(i0, 0, g.shape()[k] - 2);
    base[k] = i0;
    theta[k] = std::clamp(t - i0, 0.0, 1.0);
  }
  std::vector<int> idx(n);
  for (unsigned corner = 0; corner < (1u << n); ++corner) {
    double w = scale;
    for (int k = 0; k < n; ++k) {
      const bool up = (corner >> k) & 1u;
      w *= up ? theta[k] : 1.0 - theta[k];
      idx[k] = base[k] + (up ? 1 : 0);
    }
    if (w != 0.0) out.emplace_back(g.flat_index(idx), w);
  }
}

// Largest tau with x + tau * e inside the box.
double reach(const Box& b, std::span<const double> x, std::span<const double> e) {
  double t = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < e.size(); ++k) {
    if (e[k] > 1e-15) t = std::min(t, (b.hi[k] - x[k]) / e[k]);
    else if (e[k] < -1e-15) t = std::min(t, (b.lo[k] - x[k]) / e[k]);
  }
  return std::max(t, 0.0);
}

// Linear form approximating w^T D^2u(x) w: sum terms + constant + self * u(x).
struct Stencil {
  Terms terms;
  double constant = 0.0;
  double self = 0.0;

  double apply(std::span<const double> u, std::size_t node) const {
    double v = constant + self * u[node];
    for (const auto& [i, w] : terms) v += w * u[i];
    return v;
  }
};

// Step along a unit direction: a multiple of h close to scale * sqrt(h), so
// axis-aligned stencils land on nodes.
double stencil_step(double h, double scale) {
  const double k = std::max(1.0, std::round(scale / std::sqrt(h)));
  return k * h;
}

// With a boundary callable, a side that would leave the box is cut at the
// box face and closed with the Dirichlet value there (non-uniform three-point
// formula). Without one, leaving the box is an error.
Stencil build_stencil(const Grid& g, const Point& x, std::span<const double> w, double t,
                      const ScalarFn* boundary) {
  Stencil s;
  const int n = g.dim();
  double norm2 = 0.0;
  for (double v : w) norm2 += v * v;
  if (norm2 < 1e-28) return s;
  const double norm = std::sqrt(norm2);
  std::vector<double> e(n), minus_e(n);
  for (int k = 0; k < n; ++k) {
    e[k] = w[k] / norm;
    minus_e[k] = -e[k];
  }

  double tau[2];
  bool clipped[2];
  const std::vector<double>* dirs[2] = {&e, &minus_e};
  for (int side = 0; side < 2; ++side) {
    const double r = reach(g.box(), x.coords, *dirs[side]);
    clipped[side] = r < t * (1.0 - 1e-12);
    if (clipped[side]) {
      require(boundary != nullptr && static_cast<bool>(*boundary), ErrorKind::boundary_stencil,
              "stencil leaves the box");
      require(r > 0.0, ErrorKind::boundary_stencil, "stencil centred on the boundary");
    }
    tau[side] = clipped[side] ? r : t;
  }
  const double sum = tau[0] + tau[1];
  std::vector<double> q(n);
  for (int side = 0; side < 2; ++side) {
    const double a = norm2 * 2.0 / (tau[side] * sum);
    for (int k = 0; k < n; ++k) q[k] = x[k] + tau[side] * (*dirs[side])[k];
    if (clipped[side]) {
      // Snap onto the face so the callable sees an exact boundary point.
      for (int k = 0; k < n; ++k) q[k] = std::clamp(q[k], g.box().lo[k], g.box().hi[k]);
      s.constant += a * (*boundary)(q);
    } else {
      interpolation_terms(g, q, a, s.terms);
    }
  }
  s.self = -norm2 * 2.0 / (tau[0] * tau[1]);
  return s;
}

// Orthonormal frames of R^m (rows) over which the Pucci extremum is taken.
// For m == 2 these are all rotations by multiples of pi/(2K); for m >= 3 the
// identity plus rotations within each coordinate plane.
// TODO: cover general rotations for m >= 3 (e.g. products of plane rotations).
std::vector<Matrix> frame_set(int m, int K) {
  std::vector<Matrix> frames{Matrix::identity(m)};
  const double pi = std::acos(-1.0);
  for (int i = 0; i < m; ++i)
    for (int j = i + 1; j < m; ++j)
      for (int k = 1; k < K; ++k) {
        const double a = pi * k / (2.0 * K);
        Matrix q = Matrix::identity(m);
        q(i, i) = std::cos(a);
        q(i, j) = std::sin(a);
        q(j, i) = -std::sin(a);
        q(j, j) = std::cos(a);
        frames.push_back(q);
      }
  return frames;
}

// Frame count per plane: the angular gap pi/(4K) is about sqrt(h), so the
// frame error is O(h) like the rest of the scheme.
int frame_resolution(double h) {
  const double pi = std::acos(-1.0);
  return std::max(2, static_cast<int>(std::ceil(pi / (4.0 * std::sqrt(h)))));
}

struct NodeData {
  std::size_t node = 0;
  Point x;
  Matrix sigma;
  std::vector<Stencil> diag;  // along each row of sigma
  std::vector<Stencil> plus;  // along row_i + row_j, i < j
  std::vector<Stencil> minus;  // along row_i - row_j
  std::vector<std::vector<Stencil>> frames;  // Pucci kinds: along q^T sigma per frame row
  double bound = 0.0;  // common Jacobi denominator (without c)
  double c = 0.0;
  double f = 0.0;
};

NodeData build_node(const OperatorSpec& spec, const Grid& g, const SolveConfig& cfg,
                    std::size_t node, bool need_off_diagonal) {
  const CarnotStructure& s = *spec.structure;
  NodeData d;
  d.node = node;
  d.x = g.point(node);
  d.sigma = sigma_at(s, d.x);
  const double t = stencil_step(g.h(), cfg.stencil_scale);
  const ScalarFn* bnd = cfg.boundary ? &cfg.boundary : nullptr;
  for (int i = 0; i < s.m; ++i) d.diag.push_back(build_stencil(g, d.x, d.sigma.row(i), t, bnd));
  if (need_off_diagonal) {
    std::vector<double> w(s.n);
    for (int i = 0; i < s.m; ++i)
      for (int j = i + 1; j < s.m; ++j) {
        for (int k = 0; k < s.n; ++k) w[k] = d.sigma(i, k) + d.sigma(j, k);
        d.plus.push_back(build_stencil(g, d.x, w, t, bnd));
        for (int k = 0; k < s.n; ++k) w[k] = d.sigma(i, k) - d.sigma(j, k);
        d.minus.push_back(build_stencil(g, d.x, w, t, bnd));
      }
  }
  const double lam_max = spec.kind == GKind::trace ? 1.0 : spec.bounds.Lambda;
  for (const Stencil& st : d.diag) d.bound -= lam_max * st.self;
  if (spec.kind == GKind::pucci_plus || spec.kind == GKind::pucci_minus) {
    std::vector<double> w(s.n);
    for (const Matrix& q : frame_set(s.m, frame_resolution(g.h()))) {
      std::vector<Stencil> frame;
      double total = 0.0;
      for (int k = 0; k < s.m; ++k) {
        for (int c = 0; c < s.n; ++c) {
          double acc = 0.0;
          for (int i = 0; i < s.m; ++i) acc += q(k, i) * d.sigma(i, c);
          w[c] = acc;
        }
        frame.push_back(build_stencil(g, d.x, w, t, bnd));
        total -= spec.bounds.Lambda * frame.back().self;
      }
      d.bound = std::max(d.bound, total);
      d.frames.push_back(std::move(frame));
    }
  }
  return d;
}

SymMatrix horizontal_hessian(const NodeData& d, int m, std::span<const double> u) {
  SymMatrix nh(m);
  for (int i = 0; i < m; ++i) nh.set(i, i, d.diag[i].apply(u, d.node));
  std::size_t p = 0;
  for (int i = 0; i < m; ++i)
    for (int j = i + 1; j < m; ++j, ++p)
      nh.set(i, j, 0.25 * (d.plus[p].apply(u, d.node) - d.minus[p].apply(u, d.node)));
  return nh;
}

struct LocalValue {
  double F = 0.0;
  double diag = 0.0;  // coefficient of -u(x) in F
};

// Pucci weight of a directional value: Lambda on the favoured sign.
double pucci_weight(GKind kind, EllipticityBounds b, double v) {
  if (kind == GKind::pucci_plus) return v > 0.0 ? b.Lambda : b.lambda;
  return v > 0.0 ? b.lambda : b.Lambda;
}

LocalValue evaluate(const OperatorSpec& spec, const NodeData& d, std::span<const double> u) {
  LocalValue out;
  out.diag = d.bound;
  if (spec.kind == GKind::trace) {
    for (const Stencil& s : d.diag) out.F += s.apply(u, d.node);
    return out;
  }
  if (spec.kind == GKind::custom) {
    out.F = spec.custom(horizontal_hessian(d, spec.structure->m, u));
    return out;
  }
  // Each frame gives sum_k weight_k * D^2_{w_k} u, a positive combination of
  // monotone differences; P+ is the max over frames and P- the min. The
  // shared denominator keeps the Jacobi map monotone when the extremal frame
  // changes between sweeps.
  const bool plus = spec.kind == GKind::pucci_plus;
  bool first = true;
  for (const auto& frame : d.frames) {
    double v = 0.0;
    for (const Stencil& s : frame) {
      const double dv = s.apply(u, d.node);
      v += pucci_weight(spec.kind, spec.bounds, dv) * dv;
    }
    if (first || (plus ? v > out.F : v < out.F)) out.F = v;
    first = false;
  }
  return out;
}

void check_spec(const OperatorSpec& spec, const Grid& g) {
  require(spec.structure != nullptr, ErrorKind::input, "operator needs a structure");
  require(spec.structure->n == g.dim(), ErrorKind::input,
          "grid dimension does not match the structure");
  require(spec.kind != GKind::custom || spec.certified, ErrorKind::precondition,
          "custom G must pass the ellipticity sandwich before use in the solver");
}

}  // namespace

double GridFunction::interpolate(const Point& x) const {
  require(x.dim() == grid.dim(), ErrorKind::input, "point dimension mismatch");
  Terms t;
  interpolation_terms(grid, x.coords, 1.0, t);
  double v = 0.0;
  for (const auto& [i, w] : t) v += w * values[i];
  return v;
}

GridFunction sample(const Grid& grid, const std::function<double(std::span<const double>)>& fn) {
  GridFunction u(grid);
  for (std::size_t i = 0; i < grid.size(); ++i) u.values[i] = fn(grid.point(i).coords);
  return u;
}

void write_csv(std::ostream& os, const GridFunction& u) {
  const int n = u.grid.dim();
  for (int k = 0; k < n; ++k) os << 'x' << (k + 1) << ',';
  os << "value\n";
  os.precision(17);
  for (std::size_t i = 0; i < u.grid.size(); ++i) {
    const Point p = u.grid.point(i);
    for (int k = 0; k < n; ++k) os << p[k] << ',';
    os << u.values[i] << '\n';
  }
}

double directional_second_difference(const GridFunction& u, std::size_t node,
                                     std::span<const double> v, double h_eff) {
  const Grid& g = u.grid;
  require(node < g.size(), ErrorKind::input, "node out of range");
  require(static_cast<int>(v.size()) == g.dim(), ErrorKind::input, "direction dimension mismatch");
  require(h_eff > 0.0 && h_eff <= 4.0 * g.h() * (1.0 + 1e-12), ErrorKind::input,
          "h_eff must lie in (0, 4h]");
  double norm = 0.0;
  for (double c : v) norm += c * c;
  norm = std::sqrt(norm);
  require(norm > 0.0, ErrorKind::input, "direction must be non-zero");
  std::vector<double> e(v.begin(), v.end());
  for (double& c : e) c /= norm;
  const Stencil s = build_stencil(g, g.point(node), e, h_eff, nullptr);
  return s.apply(u.values, node);
}

SymMatrix discrete_horizontal_hessian(const OperatorSpec& spec, const GridFunction& u,
                                      std::size_t node, const SolveConfig& cfg) {
  check_spec(spec, u.grid);
  require(node < u.grid.size() && !u.grid.is_boundary(node), ErrorKind::input,
          "node must be interior");
  const NodeData d = build_node(spec, u.grid, cfg, node, true);
  return horizontal_hessian(d, spec.structure->m, u.values);
}

double discrete_operator(const OperatorSpec& spec, const Coefficients& coeffs,
                         const GridFunction& u, std::size_t node, const SolveConfig& cfg) {
  check_spec(spec, u.grid);
  require(node < u.grid.size() && !u.grid.is_boundary(node), ErrorKind::input,
          "node must be interior");
  NodeData d = build_node(spec, u.grid, cfg, node, spec.kind == GKind::custom);
  const LocalValue lv = evaluate(spec, d, u.values);
  return lv.F - coeffs.c.value(d.x.coords) * u.values[node] - coeffs.f.value(d.x.coords);
}

struct SchemeIteration::Impl {
  OperatorSpec spec;
  Coefficients coeffs;
  Grid grid;
  SolveConfig cfg;
  std::vector<NodeData> nodes;  // interior only
  std::vector<std::size_t> boundary_nodes;
  std::vector<double> boundary_values;
  double dt_min = 0.0;
  double dt_max = 0.0;
};

SchemeIteration::SchemeIteration(OperatorSpec spec, Coefficients coeffs, Grid grid,
                                 SolveConfig cfg)
    : impl_(std::make_unique<Impl>()) {
  check_spec(spec, grid);
  require(static_cast<bool>(cfg.boundary), ErrorKind::config, "solver needs boundary data");
  require(static_cast<bool>(coeffs.c.value) && static_cast<bool>(coeffs.f.value),
          ErrorKind::config, "coefficients c and f must be set");
  require(cfg.tol > 0.0, ErrorKind::config, "tol must be positive");
  require(cfg.max_iters >= 1, ErrorKind::config, "max_iters must be >= 1");
  require(cfg.relaxation > 0.0 && cfg.relaxation <= 1.0, ErrorKind::config,
          "relaxation must lie in (0, 1]");
  require(cfg.stencil_scale > 0.0, ErrorKind::config, "stencil_scale must be positive");
  if (cfg.initial)
    require(cfg.initial->size() == grid.size(), ErrorKind::config,
            "initial state size does not match the grid");

  Impl& im = *impl_;
  im.spec = std::move(spec);
  im.coeffs = std::move(coeffs);
  im.grid = std::move(grid);
  im.cfg = std::move(cfg);

  const bool off = im.spec.kind == GKind::custom;
  im.dt_min = std::numeric_limits<double>::infinity();
  im.dt_max = 0.0;
  for (std::size_t i = 0; i < im.grid.size(); ++i) {
    if (im.grid.is_boundary(i)) {
      im.boundary_nodes.push_back(i);
      im.boundary_values.push_back(im.cfg.boundary(im.grid.point(i).coords));
      continue;
    }
    NodeData d = build_node(im.spec, im.grid, im.cfg, i, off);
    d.c = im.coeffs.c.value(d.x.coords);
    d.f = im.coeffs.f.value(d.x.coords);
    require(d.c >= 0.0, ErrorKind::input, "c must be non-negative on the grid");
    const double denom = d.bound + d.c;
    if (denom > 0.0) {
      const double dt = im.cfg.relaxation / denom;
      im.dt_min = std::min(im.dt_min, dt);
      im.dt_max = std::max(im.dt_max, dt);
    }
    im.nodes.push_back(std::move(d));
  }
  if (im.nodes.empty()) im.dt_min = 0.0;
}

SchemeIteration::~SchemeIteration() = default;
SchemeIteration::SchemeIteration(SchemeIteration&&) noexcept = default;
SchemeIteration& SchemeIteration::operator=(SchemeIteration&&) noexcept = default;

const Grid& SchemeIteration::grid() const noexcept { return impl_->grid; }

std::vector<double> SchemeIteration::initial_state() const {
  const Impl& im = *impl_;
  std::vector<double> u = im.cfg.initial ? *im.cfg.initial : std::vector<double>(im.grid.size());
  for (std::size_t k = 0; k < im.boundary_nodes.size(); ++k)
    u[im.boundary_nodes[k]] = im.boundary_values[k];
  return u;
}

double SchemeIteration::step(std::span<const double> in, std::span<double> out) const {
  const Impl& im = *impl_;
  require(in.size() == im.grid.size() && out.size() == im.grid.size(), ErrorKind::input,
          "state size does not match the grid");
  double worst = 0.0;
  for (std::size_t k = 0; k < im.boundary_nodes.size(); ++k)
    out[im.boundary_nodes[k]] = in[im.boundary_nodes[k]];
  for (const NodeData& d : im.nodes) {
    const LocalValue lv = evaluate(im.spec, d, in);
    const double r = lv.F - d.c * in[d.node] - d.f;
    if (!std::isfinite(r)) fail(ErrorKind::numerical, "non-finite residual in the scheme");
    worst = std::max(worst, std::abs(r));
    const double denom = lv.diag + d.c;
    out[d.node] = denom > 0.0 ? in[d.node] + im.cfg.relaxation * r / denom : in[d.node];
  }
  return worst;
}

std::vector<double> SchemeIteration::residual(std::span<const double> u) const {
  const Impl& im = *impl_;
  std::vector<double> r(im.grid.size(), 0.0);
  for (const NodeData& d : im.nodes) {
    const LocalValue lv = evaluate(im.spec, d, u);
    r[d.node] = lv.F - d.c * u[d.node] - d.f;
  }
  return r;
}

std::pair<double, double> SchemeIteration::dt_range() const {
  return {impl_->dt_min, impl_->dt_max};
}

Solution solve(const OperatorSpec& spec, const Coefficients& coeffs, const Grid& grid,
               const SolveConfig& cfg) {
  const auto start = std::chrono::steady_clock::now();
  SchemeIteration it(spec, coeffs, grid, cfg);
  std::vector<double> u = it.initial_state();
  std::vector<double> next(u.size());

  Solution sol;
  SolveReport& rep = sol.report;
  std::tie(rep.dt_min, rep.dt_max) = it.dt_range();
  rep.residual = std::numeric_limits<double>::infinity();
  for (int k = 0; k < cfg.max_iters; ++k) {
    const double r = it.step(u, next);
    rep.iterations = k;
    rep.residual = r;
    if (r <= cfg.tol) {
      rep.converged = true;
      break;
    }
    std::swap(u, next);
    rep.iterations = k + 1;
  }
  if (!rep.converged) {
    // The last swap left u as the newest iterate; report its residual.
    const auto r = it.residual(u);
    double worst = 0.0;
    for (double v : r) worst = std::max(worst, std::abs(v));
    rep.residual = worst;
    rep.converged = worst <= cfg.tol;
  }
  for (double v : u)
    if (!std::isfinite(v)) fail(ErrorKind::numerical, "solver produced a non-finite value");
  sol.u = GridFunction(grid);
  sol.u.values = std::move(u);
  rep.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return sol;
}

TwoBoxReport two_box_sensitivity(const OperatorSpec& spec, const Coefficients& coeffs,
                                 const Grid& grid, const SolveConfig& cfg) {
  const int n = grid.dim();
  Box big;
  std::vector<int> big_shape(n);
  for (int k = 0; k < n; ++k) {
    const double mid = 0.5 * (grid.box().lo[k] + grid.box().hi[k]);
    const double half = grid.box().hi[k] - grid.box().lo[k];
    big.lo.push_back(mid - half);
    big.hi.push_back(mid + half);
    big_shape[k] = 2 * (grid.shape()[k] - 1) + 1;
  }
  SolveConfig small_cfg = cfg;
  small_cfg.initial.reset();
  SolveConfig big_cfg = small_cfg;
  const Solution a = solve(spec, coeffs, grid, small_cfg);
  const Solution b = solve(spec, coeffs, Grid(big, big_shape), big_cfg);

  TwoBoxReport rep;
  rep.small_box = a.report;
  rep.large_box = b.report;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const Point x = grid.point(i);
    bool inner = true;
    for (int k = 0; k < n; ++k) {
      const double mid = 0.5 * (grid.box().lo[k] + grid.box().hi[k]);
      const double quarter = 0.25 * (grid.box().hi[k] - grid.box().lo[k]);
      if (std::abs(x[k] - mid) > quarter + 1e-12) inner = false;
    }
    if (!inner) continue;
    rep.inner_window_max_difference =
        std::max(rep.inner_window_max_difference, std::abs(a.u.values[i] - b.u.interpolate(x)));
  }
  return rep;
}

}  // namespace subell
