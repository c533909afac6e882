#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "subell/carnot.hpp"
#include "subell/operators.hpp"

namespace subell {

/// Uniform box grid with equal spacing on every axis.
class Grid {
 public:
  Grid() = default;
  /// Throws input if the implied spacing differs between axes or a shape is < 3.
  Grid(Box box, std::vector<int> shape);

  int dim() const noexcept { return static_cast<int>(shape_.size()); }
  const Box& box() const noexcept { return box_; }
  const std::vector<int>& shape() const noexcept { return shape_; }
  double h() const noexcept { return h_; }
  std::size_t size() const noexcept { return size_; }

  std::vector<int> multi_index(std::size_t flat) const;
  std::size_t flat_index(std::span<const int> multi) const;
  Point point(std::size_t flat) const;
  bool is_boundary(std::size_t flat) const;

 private:
  Box box_;
  std::vector<int> shape_;
  std::vector<std::size_t> strides_;
  double h_ = 0.0;
  std::size_t size_ = 0;
};

struct GridFunction {
  Grid grid;
  std::vector<double> values;

  GridFunction() = default;
  explicit GridFunction(Grid g, double fill = 0.0)
      : grid(std::move(g)), values(grid.size(), fill) {}

  /// Multilinear interpolation; x must lie in the grid box.
  double interpolate(const Point& x) const;
};

/// Samples fn at every node.
GridFunction sample(const Grid& grid, const std::function<double(std::span<const double>)>& fn);

/// Writes "x1,...,xn,value" rows with a header line.
void write_csv(std::ostream& os, const GridFunction& u);

using ScalarFn = std::function<double(std::span<const double>)>;

struct SolveConfig {
  /// Dirichlet data; evaluated at boundary nodes and where a stencil meets the
  /// box boundary.
  ScalarFn boundary;
  /// Stencil step along a unit direction: the multiple of h nearest to
  /// stencil_scale * sqrt(h), at least h.
  double stencil_scale = 1.0;
  /// Fraction of the local pseudo-time step 1 / (diag + c) taken per sweep.
  double relaxation = 1.0;
  double tol = 1e-6;
  int max_iters = 200000;
  /// Initial interior values; zero when absent.
  std::optional<std::vector<double>> initial;
};

struct SolveReport {
  int iterations = 0;
  double residual = 0.0;  // max-norm residual of the returned iterate
  double dt_min = 0.0;    // smallest local pseudo-time step
  double dt_max = 0.0;
  double wall_seconds = 0.0;
  bool converged = false;
};

/// Second derivative of u along the unit vector v/|v| at a grid node, by a
/// centred difference of half-width h_eff with multilinear interpolation.
/// Throws boundary_stencil when x +- h_eff v/|v| leaves the box.
double directional_second_difference(const GridFunction& u, std::size_t node,
                                     std::span<const double> v, double h_eff);

/// F_h(u, x) - c(x) u(x) - f(x) at an interior node.
double discrete_operator(const OperatorSpec& spec, const Coefficients& coeffs,
                         const GridFunction& u, std::size_t node, const SolveConfig& cfg);

/// Discretised N_h = sigma D^2u sigma^T at an interior node (polarization of
/// directional differences along the horizontal fields).
SymMatrix discrete_horizontal_hessian(const OperatorSpec& spec, const GridFunction& u,
                                      std::size_t node, const SolveConfig& cfg);

/// Nonlinear Jacobi pseudo-time iteration for F(D^2u, x) - c u = f with
/// Dirichlet data. Geometry of the fixed stencils is built once.
class SchemeIteration {
 public:
  SchemeIteration(OperatorSpec spec, Coefficients coeffs, Grid grid, SolveConfig cfg);
  ~SchemeIteration();
  SchemeIteration(SchemeIteration&&) noexcept;
  SchemeIteration& operator=(SchemeIteration&&) noexcept;

  const Grid& grid() const noexcept;

  /// Boundary nodes set to the Dirichlet data, interior from cfg.initial or 0.
  std::vector<double> initial_state() const;

  /// One sweep: out = in + relaxation * residual / (diag + c) at interior
  /// nodes, boundary copied. Returns the max-norm residual of `in`.
  double step(std::span<const double> in, std::span<double> out) const;

  /// Residual F_h(u) - c u - f at every node (0 on the boundary).
  std::vector<double> residual(std::span<const double> u) const;

  std::pair<double, double> dt_range() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

struct Solution {
  GridFunction u;
  SolveReport report;
};

/// Throws numerical on NaN; non-convergence is reported, not thrown.
Solution solve(const OperatorSpec& spec, const Coefficients& coeffs, const Grid& grid,
               const SolveConfig& cfg);

struct TwoBoxReport {
  double inner_window_max_difference = 0.0;
  SolveReport small_box;
  SolveReport large_box;
};

/// Solves on the grid box and on a box twice as wide with the same spacing and
/// compares both on the inner half-window of the original box.
TwoBoxReport two_box_sensitivity(const OperatorSpec& spec, const Coefficients& coeffs,
                                 const Grid& grid, const SolveConfig& cfg);

}  // namespace subell
