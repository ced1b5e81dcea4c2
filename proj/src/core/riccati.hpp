#pragma once

#include <vector>

#include "grid.hpp"

namespace ezmfg {

/// Closed-form solution of the backward Riccati equation
///
///     y'(t) = y(t)^2 + B(t) y(t),   y(T) = D > 0,
///
/// with B piecewise constant on the grid:
///
///     y(t) = D / ( exp(int_t^T B) + D int_t^T exp(int_t^s B) ds ).
///
/// The denominator u = 1/y solves the linear equation u' = -1 - B u, so both
/// integrals are evaluated exactly cell by cell. y stays positive for all t.
class RiccatiClosedForm {
 public:
  RiccatiClosedForm() = default;
  RiccatiClosedForm(TimeGrid grid, std::vector<double> b_cells, double terminal);

  /// y(t) on [0, T]; y(T) = D (the Riccati terminal value, not the c*(T) = 1
  /// consumption convention).
  double value(double t) const { return 1.0 / reciprocal(t); }
  /// u(t) = 1 / y(t).
  double reciprocal(double t) const;
  /// int_a^b y(s) ds, exact: y = -(log u)' - B.
  double integral(double a, double b) const;
  /// int_a^b B(s) ds, exact.
  double b_integral(double a, double b) const;

  double terminal() const { return terminal_; }
  const std::vector<double>& b_cells() const { return b_; }
  const TimeGrid& grid() const { return grid_; }

 private:
  TimeGrid grid_;
  std::vector<double> b_;
  double terminal_ = 1.0;
  std::vector<double> u_at_points_;   // u(t_j)
  std::vector<double> b_cumulative_;  // int_0^{t_j} B
};

}  // namespace ezmfg
