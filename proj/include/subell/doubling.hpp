#pragma once

#include <optional>
#include <vector>

#include "subell/carnot.hpp"
#include "subell/symlin.hpp"

namespace subell {

/// Parameters of the doubled-variable test function
/// u(x) - u(y) - L|x-y|^alpha - delta|x|^2 - epsilon.
struct DoublingParams {
  double L = 1.0;
  double alpha = 0.5;
  double delta = 0.0;
  double epsilon = 0.0;
  double mu = 1.0;
  double eta = 1.1;

  void validate() const;
};

/// Data entering the explicit Holder constant. The c-term carries
/// (L_c, beta_c) and the f-term (L_f, beta_f).
struct ConstantBundle {
  double c0 = 1.0;
  double cbar = 1.0;
  double Lambda = 1.0;
  double C = 0.0;  // trace-inequality constant, Lip(sigma)^2 * eta
  double L_c = 0.0;
  double beta_c = 1.0;
  double L_f = 0.0;
  double beta_f = 1.0;
  double u_inf = 0.0;

  void validate() const;
};

struct PhiHessian {
  SymMatrix m;      // n x n block
  SymMatrix block;  // [[M, -M], [-M, M]], 2n x 2n
};

/// Hessian of L|x - y|^alpha in the 2n variables (x, y).
PhiHessian phi_hessian_block(const Point& x, const Point& y, double L, double alpha);

/// Closed form of M^2: alpha^2 L^2 r^{2(alpha-2)} (alpha(alpha-2) e(x)e + I).
SymMatrix phi_hessian_square(const Point& x, const Point& y, double L, double alpha);

/// Value of L|x-y|^alpha; the reference the Hessian is checked against.
double phi_value(const Point& x, const Point& y, double L, double alpha);

struct TraceBound {
  double lhs = 0.0;  // Tr(sx A sx^T - sy B sy^T)
  double rhs = 0.0;  // L alpha r^{alpha-2} eta Tr((sx - sy)(sx - sy)^T)
};

TraceBound sums_trace_bound(const Matrix& sx, const Matrix& sy, const SymMatrix& a,
                            const SymMatrix& b, double L, double alpha, double r, double eta);

/// Trace-inequality constant from a Lipschitz bound of sigma: Lip^2 * eta.
double trace_inequality_constant(double lipschitz_sigma, double eta);

/// Largest admissible exponent c0 / (C Lambda) (infinite when C == 0).
double admissible_alpha_limit(const ConstantBundle& k);

/// Right-hand side of the explicit Holder seminorm bound; any L strictly above
/// it is admissible. Throws inadmissible when alpha >= c0 / (C Lambda).
double holder_constant_bound(const ConstantBundle& k, double alpha);

struct GrowthMargin {
  std::vector<double> radii;
  std::vector<double> margins;  // max over |x| = R of Tr P(x)/R^2 - c0/(2 Lambda)
  double tail_estimate = 0.0;   // extrapolated limsup assuming a + b/R^2 decay
  std::optional<double> analytic_limit;  // preset closed form, when known
  bool satisfied = false;
};

/// Sampled growth condition on spheres of the given radii.
GrowthMargin growth_condition_margin(const CarnotStructure& s, double c0, double Lambda,
                                     const std::vector<double>& radii, double tol = 1e-9);

/// Pairs (r, rhs(r)) for a sigma that is only gamma-Holder, with the fitted
/// log-log slope; the slope approximates alpha - 2 + 2 gamma.
struct HolderSigmaWitness {
  std::vector<double> r;
  std::vector<double> rhs;
  double fitted_exponent = 0.0;
  double predicted_exponent = 0.0;  // alpha - 2 + 2 gamma
  double alpha = 0.0;
};

HolderSigmaWitness lower_regularity_witness(double gamma, double alpha, double L = 1.0,
                                            double eta = 1.1);

}  // namespace subell
