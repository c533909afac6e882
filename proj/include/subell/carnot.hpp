#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "subell/polynomial.hpp"
#include "subell/symlin.hpp"

namespace subell {

/// A point of R^n.
struct Point {
  std::vector<double> coords;

  Point() = default;
  explicit Point(std::vector<double> c) : coords(std::move(c)) {}
  Point(std::initializer_list<double> c) : coords(c) {}

  int dim() const noexcept { return static_cast<int>(coords.size()); }
  double operator[](int i) const { return coords[i]; }
  double& operator[](int i) { return coords[i]; }
  operator std::span<const double>() const noexcept { return coords; }

  bool operator==(const Point&) const = default;
};

double euclidean_distance(const Point& a, const Point& b);

/// Axis-aligned bounding box.
struct Box {
  std::vector<double> lo;
  std::vector<double> hi;

  static Box cube(int n, double lo, double hi);
  int dim() const noexcept { return static_cast<int>(lo.size()); }
  bool contains(const Point& x, double slack = 0.0) const;
};

using SigmaFn = std::function<Matrix(std::span<const double>)>;
using GroupLawFn = std::function<Point(const Point&, const Point&)>;
using DilationFn = std::function<Point(double, const Point&)>;

/// A sub-Riemannian structure on R^n given by an m x n matrix field sigma;
/// the rows of sigma(x) are the horizontal vector fields X_1..X_m at x.
struct CarnotStructure {
  std::string name;
  int n = 0;
  int m = 0;
  int step = 1;
  SigmaFn sigma;
  GroupLawFn group_law;  // empty when no group structure is known
  DilationFn dilation;   // empty when no dilations are known
  std::optional<double> lipschitz_sigma;
  /// Homogeneous degree of each coordinate under the dilations (all 1 when
  /// there are none). Drives the CC search quantization.
  std::vector<int> degrees;
  /// Polynomial entries of sigma, row-major, when sigma is polynomial.
  std::optional<std::vector<Polynomial>> sigma_polynomials;
  /// limsup_{|x|->inf} Tr(P(x))/|x|^2, when known in closed form.
  std::optional<double> trace_growth_limit;
};

/// Looks up a named preset: "euclidean:<n>", "heisenberg1", "engel1",
/// "line2d", "grushin-like2d".
CarnotStructure make_structure(std::string_view name);

/// Builds a structure from a table of rational entries (row-major).
CarnotStructure make_rational_structure(std::string name, int rows, int cols,
                                        std::vector<RationalFunction> entries);

Matrix sigma_at(const CarnotStructure& s, const Point& x);
SymMatrix p_matrix_at(const CarnotStructure& s, const Point& x);
double trace_p(const CarnotStructure& s, const Point& x);
Point group_mul(const CarnotStructure& s, const Point& x, const Point& y);
Point dilate(const CarnotStructure& s, double t, const Point& x);

/// sum_i X_i(X_i u)(x) computed by applying the polynomial vector fields to
/// u twice. Requires polynomial sigma.
double sum_of_squares(const CarnotStructure& s, const Polynomial& u, const Point& x);

struct EngelTraceValue {
  double trace_form = 0.0;    // Tr(sigma D^2u sigma^T)
  double vector_form = 0.0;   // X_1^2 u + X_2^2 u - x_2 du/dx_4
};

/// Both routes of the Engel trace identity at x. Requires the engel1 preset.
EngelTraceValue engel_trace_operator(const CarnotStructure& s, const Polynomial& u,
                                     const Point& x);

/// The square root of P on H^1 exactly as typeset in the source display; it
/// does not square back to P and is kept only for the erratum check.
Matrix heisenberg_sqrt_p_as_printed(const Point& x);

struct CcOptions {
  std::optional<Box> box;          // defaults to a box around a and b
  std::size_t max_nodes = 3'000'000;
};

struct CcEstimate {
  double length = 0.0;
  int moves = 0;
  std::size_t nodes_visited = 0;
};

/// Upper approximation of the Carnot-Caratheodory distance: breadth-first
/// search over piecewise horizontal paths made of flows along +-X_i of
/// duration `resolution`. Each move contributes `resolution` to the length.
CcEstimate cc_distance_estimate(const CarnotStructure& s, const Point& a, const Point& b,
                                double resolution, const CcOptions& options = {});

/// Max over sampled pairs of |sigma(x) - sigma(y)|_F / |x - y|. Sampled, so a
/// lower bound for the Lipschitz constant on the box.
double lipschitz_sigma_estimate(const CarnotStructure& s, const Box& box, int samples,
                                std::uint64_t seed = 12345);

}  // namespace subell
