#include "ode.hpp"

#include <algorithm>
#include <cmath>

namespace ezmfg::ode {

GridFunction GridFunction::piecewise_constant(TimeGrid grid, std::vector<double> cell_values) {
  GridFunction f{std::move(grid), std::move(cell_values), Kind::PiecewiseConstant};
  f.check();
  return f;
}

GridFunction GridFunction::pointwise(TimeGrid grid, std::vector<double> point_values) {
  GridFunction f{std::move(grid), std::move(point_values), Kind::Pointwise};
  f.check();
  return f;
}

void GridFunction::check() const {
  const std::size_t expected = kind == Kind::PiecewiseConstant ? grid.n_cells() : grid.n_points();
  if (values.size() != expected)
    throw std::invalid_argument("grid function has " + std::to_string(values.size()) +
                                " values, expected " + std::to_string(expected));
  for (double v : values)
    if (!std::isfinite(v)) throw std::invalid_argument("grid function values must be finite");
}

BlowUp::BlowUp(double time, const std::string& what)
    : std::runtime_error(what + " (non-finite state at t = " + std::to_string(time) + ")"),
      time_(time) {}

double integrate(const GridFunction& f, double a, double b) {
  if (a > b) throw std::invalid_argument("integrate: lower limit exceeds upper limit");
  const std::size_t ia = f.grid.index_of(a);
  const std::size_t ib = f.grid.index_of(b);
  double acc = 0.0;
  for (std::size_t j = ia; j < ib; ++j) {
    const double w = f.grid.cell_width(j);
    if (f.kind == GridFunction::Kind::PiecewiseConstant)
      acc += f.values[j] * w;
    else
      acc += 0.5 * (f.values[j] + f.values[j + 1]) * w;
  }
  return acc;
}

namespace {

double trapezoid_cells(const std::function<double(double, std::size_t)>& f, const TimeGrid& grid,
                       double a, double b, std::size_t n_per_cell) {
  double acc = 0.0;
  const std::size_t first = grid.cell_of(a);
  for (std::size_t j = first; j < grid.n_cells(); ++j) {
    const double lo = std::max(a, grid[j]);
    const double hi = std::min(b, grid[j + 1]);
    if (hi <= lo) {
      if (grid[j] >= b) break;
      continue;
    }
    const double h = (hi - lo) / static_cast<double>(n_per_cell);
    double s = 0.5 * (f(lo, j) + f(hi, j));
    for (std::size_t i = 1; i < n_per_cell; ++i) s += f(lo + h * static_cast<double>(i), j);
    acc += s * h;
  }
  return acc;
}

}  // namespace

QuadratureResult integrate_richardson(const std::function<double(double, std::size_t)>& f,
                                      const TimeGrid& grid, double a, double b,
                                      std::size_t n_per_cell) {
  if (a > b) throw std::invalid_argument("integrate_richardson: lower limit exceeds upper limit");
  if (n_per_cell == 0) throw std::invalid_argument("integrate_richardson: n_per_cell must be >= 1");
  if (a == b) return {0.0, 0.0};
  const double coarse = trapezoid_cells(f, grid, a, b, n_per_cell);
  const double fine = trapezoid_cells(f, grid, a, b, 2 * n_per_cell);
  return {fine + (fine - coarse) / 3.0, std::abs(fine - coarse) / 3.0};
}

GridFunction rk4_backward(const ScalarRhs& rhs, double terminal, const TimeGrid& grid,
                          std::size_t substeps) {
  if (substeps == 0) throw std::invalid_argument("rk4_backward: substeps must be >= 1");
  if (!std::isfinite(terminal)) throw BlowUp(grid.horizon(), "rk4_backward: terminal value");
  std::vector<double> path(grid.n_points());
  double y = terminal;
  path.back() = y;
  for (std::size_t j = grid.n_cells(); j-- > 0;) {
    const double h = grid.cell_width(j) / static_cast<double>(substeps);
    for (std::size_t s = 0; s < substeps; ++s) {
      // March from t down to t - h, i.e. forward in reversed time.
      const double t = grid[j + 1] - h * static_cast<double>(s);
      const double k1 = rhs(t, y, j);
      const double k2 = rhs(t - 0.5 * h, y - 0.5 * h * k1, j);
      const double k3 = rhs(t - 0.5 * h, y - 0.5 * h * k2, j);
      const double k4 = rhs(t - h, y - h * k3, j);
      y -= h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      if (!std::isfinite(y)) throw BlowUp(t - h, "rk4_backward");
    }
    path[j] = y;
  }
  return GridFunction{grid, std::move(path), GridFunction::Kind::Pointwise};
}

std::vector<std::vector<double>> rk4_backward_system(const SystemRhs& rhs,
                                                     std::vector<double> terminal,
                                                     const TimeGrid& grid, std::size_t substeps) {
  if (substeps == 0) throw std::invalid_argument("rk4_backward_system: substeps must be >= 1");
  const std::size_t n = terminal.size();
  std::vector<std::vector<double>> out(grid.n_points());
  std::vector<double> y = std::move(terminal);
  std::vector<double> k1(n), k2(n), k3(n), k4(n), tmp(n);
  out.back() = y;
  for (std::size_t j = grid.n_cells(); j-- > 0;) {
    const double h = grid.cell_width(j) / static_cast<double>(substeps);
    for (std::size_t s = 0; s < substeps; ++s) {
      const double t = grid[j + 1] - h * static_cast<double>(s);
      rhs(t, y, j, k1);
      for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] - 0.5 * h * k1[i];
      rhs(t - 0.5 * h, tmp, j, k2);
      for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] - 0.5 * h * k2[i];
      rhs(t - 0.5 * h, tmp, j, k3);
      for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] - h * k3[i];
      rhs(t - h, tmp, j, k4);
      for (std::size_t i = 0; i < n; ++i) {
        y[i] -= h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        if (!std::isfinite(y[i])) throw BlowUp(t - h, "rk4_backward_system");
      }
    }
    out[j] = y;
  }
  return out;
}

GridFunction riccati_numeric(const GridFunction& b, double terminal, std::size_t substeps) {
  if (b.kind != GridFunction::Kind::PiecewiseConstant)
    throw std::invalid_argument("riccati_numeric: B must be piecewise constant");
  b.check();
  const auto& coeff = b.values;
  // coarse grids still get steps of at most kMaxRiccatiStep; y ~ 1/(T - t + 1/D)
  // near T, so a large D needs proportionally smaller steps there
  double widest = 0.0;
  for (std::size_t j = 0; j < b.grid.n_cells(); ++j) widest = std::max(widest, b.grid.cell_width(j));
  const double step = kMaxRiccatiStep / std::max(1.0, terminal);
  const auto needed = static_cast<std::size_t>(std::ceil(widest / step - 1e-9));
  return rk4_backward(
      [&coeff](double, double y, std::size_t cell) { return y * y + coeff[cell] * y; }, terminal,
      b.grid, std::max(substeps, needed));
}

}  // namespace ezmfg::ode
