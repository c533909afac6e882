#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>

#include "subell/carnot.hpp"
#include "subell/symlin.hpp"

namespace subell {

struct EllipticityBounds {
  double lambda = 1.0;
  double Lambda = 1.0;

  EllipticityBounds() = default;
  EllipticityBounds(double lo, double hi);
};

enum class GKind { trace, pucci_plus, pucci_minus, custom };

std::string_view to_string(GKind kind) noexcept;
GKind parse_g_kind(std::string_view s);

using GFunction = std::function<double(const SymMatrix&)>;

/// F(M, x) = G(sigma(x) M sigma(x)^T) with G one of the trace / Pucci pair, or
/// a user callable that has passed the ellipticity sandwich.
struct OperatorSpec {
  GKind kind = GKind::trace;
  EllipticityBounds bounds;
  std::shared_ptr<const CarnotStructure> structure;
  GFunction custom;
  bool certified = false;  // custom G passed sandwich_check

  static OperatorSpec make(GKind kind, EllipticityBounds bounds,
                           std::shared_ptr<const CarnotStructure> structure);
  static OperatorSpec make_custom(GFunction g, EllipticityBounds bounds,
                                  std::shared_ptr<const CarnotStructure> structure);

  /// Bounds used by the sandwich; the trace kind behaves as lambda = Lambda = 1.
  EllipticityBounds effective_bounds() const;
};

/// Scalar field with the Holder data the regularity estimate consumes.
struct HolderField {
  std::function<double(std::span<const double>)> value;
  double seminorm = 0.0;  // L in |g(x) - g(y)| <= L |x - y|^exponent
  double exponent = 1.0;
};

struct Coefficients {
  HolderField c;
  HolderField f;
  double c0 = 0.0;  // inf of c over the working box
};

double g_eval(const OperatorSpec& spec, const SymMatrix& n);
double f_eval(const OperatorSpec& spec, const SymMatrix& m, const Point& x);

/// P^+ / P^- of a symmetric matrix from its eigenvalues.
double pucci_plus(const SymMatrix& n, EllipticityBounds b);
double pucci_minus(const SymMatrix& n, EllipticityBounds b);

struct PropertyReport {
  std::string property;
  int trials = 0;
  int violations = 0;
  double worst_slack = 0.0;  // most negative slack seen (>= -tol means pass)
  std::optional<std::pair<SymMatrix, SymMatrix>> witness;

  bool passed() const noexcept { return violations == 0; }
};

/// Random pairs B <= A; checks lambda Tr(A-B) <= G(A)-G(B) <= Lambda Tr(A-B).
PropertyReport sandwich_check(const OperatorSpec& spec, int trials, std::uint64_t seed = 7);

/// Random pairs M <= N in S^n; checks F(M, x) <= F(N, x).
PropertyReport degenerate_ellipticity_check(const OperatorSpec& spec, const Point& x,
                                            int trials, std::uint64_t seed = 11);

/// Runs sandwich_check on a custom G and returns the spec marked certified;
/// throws precondition when the sandwich fails.
OperatorSpec certify(OperatorSpec spec, int trials = 2000, std::uint64_t seed = 7);

}  // namespace subell
