#include "riccati.hpp"

#include <cassert>
#include <cmath>
#include <stdexcept>

namespace ezmfg {

namespace {

// (e^x - 1) / x, continuous at 0.
double expm1_ratio(double x) { return x == 0.0 ? 1.0 : std::expm1(x) / x; }

// u at the left end of a span of length tau inside one cell, given u at the
// right end: u(t) = e^{b tau} u_right + int_0^tau e^{b s} ds.
double step_back(double u_right, double b, double tau) {
  return std::exp(b * tau) * u_right + tau * expm1_ratio(b * tau);
}

}  // namespace

RiccatiClosedForm::RiccatiClosedForm(TimeGrid grid, std::vector<double> b_cells, double terminal)
    : grid_(std::move(grid)), b_(std::move(b_cells)), terminal_(terminal) {
  if (b_.size() != grid_.n_cells())
    throw std::invalid_argument("RiccatiClosedForm: one B value per cell expected");
  if (!(terminal_ > 0.0) || !std::isfinite(terminal_))
    throw std::invalid_argument("RiccatiClosedForm: terminal value D must be positive");
  const std::size_t m = grid_.n_cells();
  u_at_points_.assign(m + 1, 0.0);
  u_at_points_[m] = 1.0 / terminal_;
  for (std::size_t j = m; j-- > 0;) {
    u_at_points_[j] = step_back(u_at_points_[j + 1], b_[j], grid_.cell_width(j));
    // u' = -1 - B u with u(T) > 0 keeps u > 0 going backward.
    assert(u_at_points_[j] > 0.0);
    if (!std::isfinite(u_at_points_[j]) || !(u_at_points_[j] > 0.0))
      throw std::runtime_error("RiccatiClosedForm: non-positive or non-finite denominator");
  }
  b_cumulative_.assign(m + 1, 0.0);
  for (std::size_t j = 0; j < m; ++j)
    b_cumulative_[j + 1] = b_cumulative_[j] + b_[j] * grid_.cell_width(j);
}

double RiccatiClosedForm::reciprocal(double t) const {
  if (t >= grid_.horizon()) return u_at_points_.back();
  if (t <= 0.0) return u_at_points_.front();
  const std::size_t j = grid_.cell_of(t);
  return step_back(u_at_points_[j + 1], b_[j], grid_[j + 1] - t);
}

double RiccatiClosedForm::b_integral(double a, double b) const {
  auto cumulative = [this](double t) {
    const std::size_t j = grid_.cell_of(t);
    return b_cumulative_[j] + b_[j] * (t - grid_[j]);
  };
  return cumulative(b) - cumulative(a);
}

double RiccatiClosedForm::integral(double a, double b) const {
  return std::log(reciprocal(a)) - std::log(reciprocal(b)) - b_integral(a, b);
}

}  // namespace ezmfg
