#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "grid.hpp"

namespace ezmfg::ode {

/// Values attached to a time grid: one per cell (piecewise constant) or one
/// per grid point (pointwise, linearly interpolated by quadrature).
struct GridFunction {
  enum class Kind { PiecewiseConstant, Pointwise };

  TimeGrid grid;
  std::vector<double> values;
  Kind kind = Kind::Pointwise;

  static GridFunction piecewise_constant(TimeGrid grid, std::vector<double> cell_values);
  static GridFunction pointwise(TimeGrid grid, std::vector<double> point_values);

  /// Throws if the value count does not match the grid or a value is not finite.
  void check() const;
};

/// Raised when an integrator produces a non-finite state.
class BlowUp : public std::runtime_error {
 public:
  BlowUp(double time, const std::string& what);
  double time() const { return time_; }

 private:
  double time_;
};

/// Integral of f over [a, b]; a and b must be grid points. Exact cell sum for
/// piecewise-constant data, trapezoid rule for pointwise data.
double integrate(const GridFunction& f, double a, double b);

struct QuadratureResult {
  double value;
  double error_estimate;  // |refined - coarse| / 3
};

/// Composite trapezoid on n_per_cell sub-intervals per grid cell, refined once
/// and Richardson-extrapolated. Never evaluates f across a cell boundary from
/// the wrong side: the integrand receives the cell index.
QuadratureResult integrate_richardson(const std::function<double(double t, std::size_t cell)>& f,
                                      const TimeGrid& grid, double a, double b,
                                      std::size_t n_per_cell = 8);

using ScalarRhs = std::function<double(double t, double y, std::size_t cell)>;

/// Classical fourth-order Runge-Kutta, marched from T back to 0 with
/// `substeps` equal steps per grid cell. Returns the path at the grid points.
/// The right-hand side is always evaluated with the index of the cell being
/// traversed, so piecewise-constant data never leaks across cell boundaries.
GridFunction rk4_backward(const ScalarRhs& rhs, double terminal, const TimeGrid& grid,
                          std::size_t substeps = 10);

using SystemRhs =
    std::function<void(double t, std::span<const double> y, std::size_t cell, std::span<double> dy)>;

/// Vector-valued variant of rk4_backward; result[i] is the state at grid point i.
std::vector<std::vector<double>> rk4_backward_system(const SystemRhs& rhs,
                                                     std::vector<double> terminal,
                                                     const TimeGrid& grid, std::size_t substeps);

/// Numerical solution of y' = y^2 + B(t) y with y(T) = D by rk4_backward.
/// `b` must be piecewise constant on its grid. The step never exceeds
/// kMaxRiccatiStep / max(1, D), whatever `substeps` says.
inline constexpr double kMaxRiccatiStep = 1e-2;
GridFunction riccati_numeric(const GridFunction& b, double terminal, std::size_t substeps = 10);

}  // namespace ezmfg::ode
