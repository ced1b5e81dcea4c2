#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace ezmfg {

/// Strictly increasing time points 0 = t_0 < ... < t_M = T.
///
/// Coefficients attached to the grid are piecewise constant on the half-open
/// cells [t_j, t_{j+1}); cell j is the one that starts at t_j.
class TimeGrid {
 public:
  TimeGrid() = default;
  explicit TimeGrid(std::vector<double> points);

  static TimeGrid uniform(double horizon, std::size_t n_cells);

  std::size_t n_points() const { return points_.size(); }
  std::size_t n_cells() const { return points_.empty() ? 0 : points_.size() - 1; }
  double horizon() const { return points_.back(); }
  double operator[](std::size_t i) const { return points_[i]; }
  double cell_width(std::size_t cell) const { return points_[cell + 1] - points_[cell]; }
  std::span<const double> points() const { return points_; }

  /// Cell containing t, with t = T mapped to the last cell (left limit).
  std::size_t cell_of(double t) const;

  /// Index of the grid point equal to t (relative tolerance 1e-12), or throws.
  std::size_t index_of(double t) const;
  bool on_grid(double t) const;

  bool is_uniform(double rel_tol = 1e-12) const;

  friend bool operator==(const TimeGrid&, const TimeGrid&) = default;

 private:
  std::vector<double> points_;
};

}  // namespace ezmfg
