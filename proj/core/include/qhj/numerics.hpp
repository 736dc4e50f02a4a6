#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <vector>

// Small numerical kernels shared by the basis, field and trajectory code.
namespace qhj::numerics {

std::vector<double> uniform_grid(double x_min, double x_max, std::size_t points);

// Returns the common spacing if the grid is uniform to a relative 1e-9,
// otherwise nullopt.
std::optional<double> uniform_spacing(std::span<const double> grid);

// Index i of the interval [grid[i], grid[i+1]] containing x, clamped to the
// first/last interval for x outside the grid.
std::size_t locate(std::span<const double> grid, double x);

// Cubic Hermite interpolation on [x0, x1] with values y and slopes dy.
double hermite(double x0, double x1, double y0, double y1, double dy0,
               double dy1, double x);
double hermite_slope(double x0, double x1, double y0, double y1, double dy0,
                     double dy1, double x);

// Fourth-order first derivative of uniformly sampled data: centered five-point
// stencil in the interior, one-sided five-point stencils at the two ends on
// each side.
std::vector<double> derivative4(std::span<const double> y, double h);

// Running integral of uniformly sampled f, starting at zero. Even nodes get
// composite Simpson; odd nodes add a three-point single-interval rule.
std::vector<double> cumulative_simpson(std::span<const double> f, double h);

// Central difference with one Richardson level:
// (4 D(h) - D(2h)) / 3, where D(h) = (f(+h) - f(-h)) / 2h.
// The four values are f(x-2h), f(x-h), f(x+h), f(x+2h).
double richardson_central(double fm2, double fm1, double fp1, double fp2,
                          double h);

// Five-point centered derivative of a scalar function.
double derivative5(const std::function<double(double)>& f, double x, double h);

}  // namespace qhj::numerics
