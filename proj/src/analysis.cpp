#include "subell/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <random>

#include "subell/error.hpp"

namespace subell {

namespace {

// Calls fn(i, j, r) for every pair (small grids) or a seeded sample whose
// distances are log-uniform between h and the box diameter, so every decade
// of scales is represented.
template <class Fn>
std::size_t for_each_pair(const GridFunction& u, const PairSampling& s, Fn&& fn) {
  const Grid& g = u.grid;
  const std::size_t count = g.size();
  require(count >= 2, ErrorKind::input, "need at least two nodes");
  std::vector<Point> pts;
  pts.reserve(count);
  for (std::size_t i = 0; i < count; ++i) pts.push_back(g.point(i));

  if (count <= s.all_pairs_limit) {
    std::size_t visited = 0;
    for (std::size_t i = 0; i < count; ++i)
      for (std::size_t j = i + 1; j < count; ++j) {
        fn(i, j, euclidean_distance(pts[i], pts[j]));
        ++visited;
      }
    return visited;
  }

  const int n = g.dim();
  double diam2 = 0.0;
  for (int k = 0; k < n; ++k) diam2 += std::pow(g.box().hi[k] - g.box().lo[k], 2);
  const double log_lo = std::log(g.h());
  const double log_hi = std::log(std::sqrt(diam2));
  std::mt19937_64 rng(s.seed);
  std::uniform_int_distribution<std::size_t> pick(0, count - 1);
  std::uniform_real_distribution<double> logr(log_lo, log_hi);
  std::normal_distribution<double> gauss;
  std::vector<int> idx(n);
  std::vector<double> dir(n);
  std::size_t visited = 0;
  for (std::size_t t = 0; t < s.samples; ++t) {
    const std::size_t i = pick(rng);
    const double r = std::exp(logr(rng));
    double norm = 0.0;
    for (double& d : dir) {
      d = gauss(rng);
      norm += d * d;
    }
    norm = std::sqrt(norm);
    if (norm == 0.0) continue;
    const auto base = g.multi_index(i);
    for (int k = 0; k < n; ++k) {
      const long step = std::lround(r * dir[k] / norm / g.h());
      idx[k] = static_cast<int>(std::clamp<long>(base[k] + step, 0, g.shape()[k] - 1));
    }
    const std::size_t j = g.flat_index(idx);
    if (j == i) continue;
    fn(i, j, euclidean_distance(pts[i], pts[j]));
    ++visited;
  }
  return visited;
}

}  // namespace

double holder_seminorm(const GridFunction& u, double alpha, const PairSampling& sampling) {
  require(alpha > 0.0 && alpha <= 1.0, ErrorKind::input, "alpha must lie in (0, 1]");
  double best = 0.0;
  for_each_pair(u, sampling, [&](std::size_t i, std::size_t j, double r) {
    best = std::max(best, std::abs(u.values[i] - u.values[j]) / std::pow(r, alpha));
  });
  return best;
}

AlphaFit fit_alpha(const GridFunction& u, const PairSampling& sampling) {
  const Grid& g = u.grid;
  const int nbins = 12;
  double diam2 = 0.0;
  for (int k = 0; k < g.dim(); ++k) diam2 += std::pow(g.box().hi[k] - g.box().lo[k], 2);
  const double r_lo = g.h() * (1.0 - 1e-9);
  // Increments over more than half the diameter saturate against the box
  // and flatten the slope; such pairs count toward L but not toward the fit.
  const double r_hi = 0.5 * std::sqrt(diam2) * (1.0 + 1e-9);
  const double span = std::log(r_hi / r_lo);

  AlphaFit fit;
  fit.bins.resize(nbins);
  for (int b = 0; b < nbins; ++b) {
    fit.bins[b].r_lo = r_lo * std::exp(span * b / nbins);
    fit.bins[b].r_hi = r_lo * std::exp(span * (b + 1) / nbins);
  }
  for_each_pair(u, sampling, [&](std::size_t i, std::size_t j, double r) {
    if (r > r_hi) return;
    int b = static_cast<int>(std::floor(nbins * std::log(r / r_lo) / span));
    b = std::clamp(b, 0, nbins - 1);
    DistanceBin& bin = fit.bins[b];
    const double inc = std::abs(u.values[i] - u.values[j]);
    ++bin.pairs;
    if (inc > bin.max_increment || bin.pairs == 1) {
      bin.max_increment = inc;
      bin.r_at_max = r;
    }
  });

  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  int used = 0;
  for (const DistanceBin& b : fit.bins) {
    if (b.pairs == 0 || b.max_increment <= 0.0) continue;
    const double lx = std::log(b.r_at_max);
    const double ly = std::log(b.max_increment);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    ++used;
  }
  const double den = used * sxx - sx * sx;
  if (used < 2 || den <= 0.0) {
    fit.degenerate = true;
    fit.alpha = 1.0;
    fit.L = 0.0;
    return fit;
  }
  const double slope = (used * sxy - sx * sy) / den;
  fit.alpha = std::clamp(slope, 1e-3, 1.0);
  fit.L = holder_seminorm(u, fit.alpha, sampling);
  return fit;
}

void write_bins_csv(std::ostream& os, const std::vector<DistanceBin>& bins) {
  os << "bin,r_lo,r_hi,r_at_max,max_increment,pairs\n";
  os.precision(17);
  for (std::size_t b = 0; b < bins.size(); ++b)
    os << b << ',' << bins[b].r_lo << ',' << bins[b].r_hi << ',' << bins[b].r_at_max << ','
       << bins[b].max_increment << ',' << bins[b].pairs << '\n';
}

bool HolderReport::hypotheses_pass() const {
  return std::all_of(hypothesis_verdicts.begin(), hypothesis_verdicts.end(),
                     [](const auto& kv) { return kv.second.passed; });
}

HolderReport verify_theorem(const OperatorSpec& spec, const Coefficients& coeffs,
                            const GridFunction& u, const SolveReport& solve_report,
                            const ConstantBundle& k, const VerifyOptions& options) {
  require(solve_report.converged, ErrorKind::precondition,
          "verification needs a converged solution");
  require(spec.structure != nullptr && spec.structure->n == u.grid.dim(), ErrorKind::input,
          "structure does not match the grid");
  k.validate();
  const Grid& g = u.grid;
  const CarnotStructure& s = *spec.structure;
  HolderReport rep;

  {
    double c_min = std::numeric_limits<double>::infinity();
    if (coeffs.c.value)
      for (std::size_t i = 0; i < g.size(); ++i)
        c_min = std::min(c_min, coeffs.c.value(g.point(i).coords));
    Verdict v;
    v.passed = k.c0 > 0.0 && c_min >= k.c0 * (1.0 - 1e-12);
    v.detail = "c0 = " + std::to_string(k.c0) + ", min c on grid = " + std::to_string(c_min);
    rep.hypothesis_verdicts["c0_positive"] = v;
  }
  {
    rep.lipschitz_sigma = lipschitz_sigma_estimate(s, g.box(), options.lipschitz_samples);
    Verdict v;
    // C must dominate the sampled Lipschitz constant squared.
    v.passed = std::isfinite(rep.lipschitz_sigma) &&
               rep.lipschitz_sigma * rep.lipschitz_sigma <= k.C * (1.0 + 1e-9) + 1e-12;
    v.detail = "estimate " + std::to_string(rep.lipschitz_sigma) + ", C = " + std::to_string(k.C);
    rep.hypothesis_verdicts["lipschitz_sigma"] = v;
  }
  {
    // Spheres inside the box: radii up to the inscribed radius about the centre.
    double inscribed = std::numeric_limits<double>::infinity();
    for (int d = 0; d < g.dim(); ++d)
      inscribed = std::min(inscribed, 0.5 * (g.box().hi[d] - g.box().lo[d]));
    std::vector<double> radii;
    for (int j = 0; j < 6; ++j) radii.push_back(inscribed * std::pow(2.0, j - 5));
    rep.growth = growth_condition_margin(s, k.c0, k.Lambda, radii, options.growth_tol);
    Verdict v;
    v.passed = rep.growth.satisfied;
    v.detail = "box-local; tail estimate " + std::to_string(rep.growth.tail_estimate);
    if (rep.growth.analytic_limit)
      v.detail += ", analytic margin " + std::to_string(*rep.growth.analytic_limit);
    rep.hypothesis_verdicts["growth_condition"] = v;
  }

  const AlphaFit fit = fit_alpha(u, options.sampling);
  rep.alpha_fit = fit.alpha;
  rep.degenerate_fit = fit.degenerate;
  rep.L_fit = fit.L;
  rep.bins = fit.bins;

  // Same pair set as L_fit, so every quotient is <= L_fit exactly.
  rep.max_violation = -std::numeric_limits<double>::infinity();
  rep.pair_count = for_each_pair(u, options.sampling, [&](std::size_t i, std::size_t j, double r) {
    const double ra = std::pow(r, rep.alpha_fit);
    const double q = std::abs(u.values[i] - u.values[j]) / ra;
    rep.max_violation = std::max(rep.max_violation, (q - rep.L_fit) * ra);
  });

  rep.alpha_limit = admissible_alpha_limit(k);
  rep.alpha_admissible = rep.alpha_fit < rep.alpha_limit;
  rep.alpha_within_data_exponents = rep.alpha_fit <= std::min(k.beta_c, k.beta_f);
  if (rep.alpha_admissible) {
    rep.theorem_bound = holder_constant_bound(k, rep.alpha_fit);
    rep.l_fit_within_bound = rep.L_fit <= *rep.theorem_bound;
  }
  return rep;
}

}  // namespace subell
