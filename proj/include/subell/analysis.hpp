#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "subell/doubling.hpp"
#include "subell/operators.hpp"
#include "subell/solver.hpp"

namespace subell {

struct PairSampling {
  std::size_t all_pairs_limit = 4096;  // node count up to which every pair is used
  std::size_t samples = 1'000'000;
  std::uint64_t seed = 31337;
};

/// max over node pairs of |u(x) - u(y)| / |x - y|^alpha.
double holder_seminorm(const GridFunction& u, double alpha, const PairSampling& sampling = {});

struct DistanceBin {
  double r_lo = 0.0;
  double r_hi = 0.0;
  double r_at_max = 0.0;  // distance of the pair attaining max_increment
  double max_increment = 0.0;
  std::size_t pairs = 0;
};

struct AlphaFit {
  double alpha = 1.0;        // clamped to (0, 1]; meaningless when degenerate
  double L = 0.0;            // holder_seminorm at alpha
  bool degenerate = false;   // constant data: no slope to fit, L reported as 0
  std::vector<DistanceBin> bins;
};

/// Least-squares slope of log(max increment) against log(distance) over 12
/// geometric distance bins from h to half the box diameter.
AlphaFit fit_alpha(const GridFunction& u, const PairSampling& sampling = {});

void write_bins_csv(std::ostream& os, const std::vector<DistanceBin>& bins);

struct Verdict {
  bool passed = false;
  std::string detail;
};

struct HolderReport {
  double alpha_fit = 1.0;
  double L_fit = 0.0;
  bool degenerate_fit = false;
  std::size_t pair_count = 0;
  double max_violation = 0.0;  // max of |u(x)-u(y)| - L_fit |x-y|^alpha_fit, <= 0
  double alpha_limit = 0.0;    // c0 / (C Lambda)
  bool alpha_admissible = false;
  // alpha_fit <= min(beta_c, beta_f); reported, not used to gate the bound.
  bool alpha_within_data_exponents = false;
  std::optional<double> theorem_bound;
  std::optional<bool> l_fit_within_bound;
  double lipschitz_sigma = 0.0;
  GrowthMargin growth;
  std::map<std::string, Verdict> hypothesis_verdicts;  // c0_positive, lipschitz_sigma, growth_condition
  std::vector<DistanceBin> bins;

  bool hypotheses_pass() const;
};

struct VerifyOptions {
  PairSampling sampling;
  int lipschitz_samples = 400;
  double growth_tol = 1e-9;
};

/// Checks the hypotheses on the working box, fits the Holder modulus of u and
/// evaluates the explicit constant. The growth verdict is box-local: the
/// limsup is extrapolated from spheres inside the grid box.
HolderReport verify_theorem(const OperatorSpec& spec, const Coefficients& coeffs,
                            const GridFunction& u, const SolveReport& solve_report,
                            const ConstantBundle& k, const VerifyOptions& options = {});

}  // namespace subell
