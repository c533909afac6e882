#include "subell/operators.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "subell/error.hpp"

namespace subell {

EllipticityBounds::EllipticityBounds(double lo, double hi) : lambda(lo), Lambda(hi) {
  require(lo > 0.0 && hi >= lo && std::isfinite(hi), ErrorKind::input,
          "ellipticity bounds need 0 < lambda <= Lambda");
}

std::string_view to_string(GKind kind) noexcept {
  switch (kind) {
    case GKind::trace: return "trace";
    case GKind::pucci_plus: return "pucci_plus";
    case GKind::pucci_minus: return "pucci_minus";
    case GKind::custom: return "custom";
  }
  return "unknown";
}

GKind parse_g_kind(std::string_view s) {
  if (s == "trace") return GKind::trace;
  if (s == "pucci_plus") return GKind::pucci_plus;
  if (s == "pucci_minus") return GKind::pucci_minus;
  fail(ErrorKind::input, "unknown operator kind '" + std::string(s) + "'");
}

OperatorSpec OperatorSpec::make(GKind kind, EllipticityBounds bounds,
                                std::shared_ptr<const CarnotStructure> structure) {
  require(kind != GKind::custom, ErrorKind::input, "use make_custom for a user G");
  require(structure != nullptr, ErrorKind::input, "operator needs a structure");
  OperatorSpec s;
  s.kind = kind;
  s.bounds = bounds;
  s.structure = std::move(structure);
  return s;
}

OperatorSpec OperatorSpec::make_custom(GFunction g, EllipticityBounds bounds,
                                       std::shared_ptr<const CarnotStructure> structure) {
  require(static_cast<bool>(g), ErrorKind::input, "custom G must be callable");
  require(structure != nullptr, ErrorKind::input, "operator needs a structure");
  OperatorSpec s;
  s.kind = GKind::custom;
  s.bounds = bounds;
  s.structure = std::move(structure);
  s.custom = std::move(g);
  return s;
}

EllipticityBounds OperatorSpec::effective_bounds() const {
  return kind == GKind::trace ? EllipticityBounds{1.0, 1.0} : bounds;
}

namespace {

std::pair<double, double> positive_negative_parts(const SymMatrix& n) {
  double pos = 0.0;
  double neg = 0.0;
  for (double e : eigenvalues(n)) {
    if (e > 0.0) pos += e;
    else neg -= e;
  }
  return {pos, neg};
}

}  // namespace

double pucci_plus(const SymMatrix& n, EllipticityBounds b) {
  const auto [pos, neg] = positive_negative_parts(n);
  return b.Lambda * pos - b.lambda * neg;
}

double pucci_minus(const SymMatrix& n, EllipticityBounds b) {
  const auto [pos, neg] = positive_negative_parts(n);
  return b.lambda * pos - b.Lambda * neg;
}

double g_eval(const OperatorSpec& spec, const SymMatrix& n) {
  switch (spec.kind) {
    case GKind::trace: return n.trace();
    case GKind::pucci_plus: return pucci_plus(n, spec.bounds);
    case GKind::pucci_minus: return pucci_minus(n, spec.bounds);
    case GKind::custom: return spec.custom(n);
  }
  return 0.0;
}

double f_eval(const OperatorSpec& spec, const SymMatrix& m, const Point& x) {
  const CarnotStructure& s = *spec.structure;
  require(m.dim() == s.n, ErrorKind::input, "Hessian dimension does not match structure");
  return g_eval(spec, congruence(sigma_at(s, x), m));
}

namespace {

SymMatrix random_symmetric(int dim, std::mt19937_64& rng, double scale) {
  std::normal_distribution<double> g(0.0, scale);
  SymMatrix a(dim);
  for (int i = 0; i < dim; ++i)
    for (int j = i; j < dim; ++j) a.set(i, j, g(rng));
  return a;
}

// C^T C with C a random square matrix; positive semidefinite by construction.
SymMatrix random_psd(int dim, std::mt19937_64& rng, double scale) {
  std::normal_distribution<double> g(0.0, scale);
  Matrix c(dim, dim);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) c(i, j) = g(rng);
  // Occasionally low rank, which exercises the degenerate directions.
  if (std::uniform_int_distribution<int>(0, 3)(rng) == 0)
    for (int j = 0; j < dim; ++j) c(0, j) = 0.0;
  return gram_of_columns(c);
}

}  // namespace

PropertyReport sandwich_check(const OperatorSpec& spec, int trials, std::uint64_t seed) {
  require(trials >= 1, ErrorKind::input, "trials must be >= 1");
  const int m = spec.structure->m;
  const EllipticityBounds b = spec.effective_bounds();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> mag(-2.0, 1.0);

  PropertyReport r;
  r.property = "ellipticity_sandwich";
  r.trials = trials;
  for (int t = 0; t < trials; ++t) {
    const double scale = std::pow(10.0, mag(rng));
    const SymMatrix a = random_symmetric(m, rng, scale);
    // Every 50th trial checks A == B.
    const SymMatrix gap = (t % 50 == 0) ? SymMatrix(m) : random_psd(m, rng, scale);
    const SymMatrix bm = a - gap;
    const double diff = g_eval(spec, a) - g_eval(spec, bm);
    const double tr = gap.trace();
    const double tol = 1e-9 * std::max({1.0, a.max_abs(), bm.max_abs()});
    const double slack = std::min(diff - b.lambda * tr, b.Lambda * tr - diff);
    r.worst_slack = std::min(r.worst_slack, slack);
    if (slack < -tol) {
      if (!r.witness) r.witness = std::make_pair(a, bm);
      ++r.violations;
    }
  }
  return r;
}

PropertyReport degenerate_ellipticity_check(const OperatorSpec& spec, const Point& x,
                                            int trials, std::uint64_t seed) {
  require(trials >= 1, ErrorKind::input, "trials must be >= 1");
  const int n = spec.structure->n;
  require(x.dim() == n, ErrorKind::input, "point dimension mismatch");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> mag(-2.0, 1.0);

  PropertyReport r;
  r.property = "degenerate_ellipticity";
  r.trials = trials;
  for (int t = 0; t < trials; ++t) {
    const double scale = std::pow(10.0, mag(rng));
    const SymMatrix mm = random_symmetric(n, rng, scale);
    const SymMatrix nn = (t % 50 == 0) ? mm : mm + random_psd(n, rng, scale);
    const double fm = f_eval(spec, mm, x);
    const double fn = f_eval(spec, nn, x);
    const double sx = std::max(1.0, sigma_at(*spec.structure, x).max_abs());
    const double tol = 1e-9 * std::max({1.0, mm.max_abs(), nn.max_abs()}) * sx * sx;
    const double slack = fn - fm;
    r.worst_slack = std::min(r.worst_slack, slack);
    if (slack < -tol) {
      if (!r.witness) r.witness = std::make_pair(mm, nn);
      ++r.violations;
    }
  }
  return r;
}

OperatorSpec certify(OperatorSpec spec, int trials, std::uint64_t seed) {
  const PropertyReport r = sandwich_check(spec, trials, seed);
  require(r.passed(), ErrorKind::precondition,
          "G violates the ellipticity sandwich in " + std::to_string(r.violations) + " of " +
              std::to_string(r.trials) + " trials");
  spec.certified = true;
  return spec;
}

}  // namespace subell
