#include "grid.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace ezmfg {

namespace {
double point_tolerance(std::span<const double> pts) {
  return 1e-12 * std::max(1.0, std::abs(pts.back()));
}
}  // namespace

TimeGrid::TimeGrid(std::vector<double> points) : points_(std::move(points)) {
  if (points_.size() < 2) throw std::invalid_argument("time grid needs at least two points");
  if (points_.front() != 0.0) throw std::invalid_argument("time grid must start at 0");
  for (std::size_t i = 1; i < points_.size(); ++i) {
    if (!(points_[i] > points_[i - 1]) || !std::isfinite(points_[i]))
      throw std::invalid_argument("time grid must be strictly increasing (index " +
                                  std::to_string(i) + ")");
  }
}

TimeGrid TimeGrid::uniform(double horizon, std::size_t n_cells) {
  if (!(horizon > 0.0) || !std::isfinite(horizon))
    throw std::invalid_argument("horizon T must be positive");
  if (n_cells == 0) throw std::invalid_argument("grid needs at least one cell");
  std::vector<double> pts(n_cells + 1);
  for (std::size_t i = 0; i <= n_cells; ++i)
    pts[i] = horizon * static_cast<double>(i) / static_cast<double>(n_cells);
  pts.back() = horizon;
  return TimeGrid(std::move(pts));
}

std::size_t TimeGrid::cell_of(double t) const {
  if (t <= points_.front()) return 0;
  if (t >= points_.back()) return n_cells() - 1;
  auto it = std::upper_bound(points_.begin(), points_.end(), t);
  return static_cast<std::size_t>(it - points_.begin()) - 1;
}

std::size_t TimeGrid::index_of(double t) const {
  const double tol = point_tolerance(points_);
  auto it = std::lower_bound(points_.begin(), points_.end(), t - tol);
  if (it == points_.end() || std::abs(*it - t) > tol)
    throw std::out_of_range("time " + std::to_string(t) + " is not a grid point");
  return static_cast<std::size_t>(it - points_.begin());
}

bool TimeGrid::on_grid(double t) const {
  const double tol = point_tolerance(points_);
  auto it = std::lower_bound(points_.begin(), points_.end(), t - tol);
  return it != points_.end() && std::abs(*it - t) <= tol;
}

bool TimeGrid::is_uniform(double rel_tol) const {
  const double h = cell_width(0);
  for (std::size_t j = 1; j < n_cells(); ++j)
    if (std::abs(cell_width(j) - h) > rel_tol * h * static_cast<double>(n_cells())) return false;
  return true;
}

}  // namespace ezmfg
