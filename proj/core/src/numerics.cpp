#include "qhj/numerics.hpp"

#include <algorithm>
#include <cmath>

#include "qhj/errors.hpp"

namespace qhj::numerics {

std::vector<double> uniform_grid(double x_min, double x_max, std::size_t points) {
  if (points < 2) throw PreconditionError("grid needs at least two points");
  if (!(x_min < x_max)) throw PreconditionError("grid requires x_min < x_max");
  std::vector<double> grid(points);
  const double h = (x_max - x_min) / static_cast<double>(points - 1);
  for (std::size_t i = 0; i < points; ++i) {
    grid[i] = x_min + h * static_cast<double>(i);
  }
  grid.back() = x_max;
  return grid;
}

std::optional<double> uniform_spacing(std::span<const double> grid) {
  if (grid.size() < 2) return std::nullopt;
  const double h = (grid.back() - grid.front()) / static_cast<double>(grid.size() - 1);
  if (!(h > 0.0)) return std::nullopt;
  for (std::size_t i = 1; i < grid.size(); ++i) {
    if (std::abs((grid[i] - grid[i - 1]) - h) > 1e-9 * h + 1e-12 * std::abs(grid[i])) {
      return std::nullopt;
    }
  }
  return h;
}

std::size_t locate(std::span<const double> grid, double x) {
  const auto it = std::upper_bound(grid.begin(), grid.end(), x);
  const auto hi = static_cast<std::size_t>(it - grid.begin());
  if (hi == 0) return 0;
  return std::min(hi - 1, grid.size() - 2);
}

double hermite(double x0, double x1, double y0, double y1, double dy0,
               double dy1, double x) {
  const double h = x1 - x0;
  const double s = (x - x0) / h;
  const double s2 = s * s;
  const double s3 = s2 * s;
  const double h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
  const double h10 = s3 - 2.0 * s2 + s;
  const double h01 = -2.0 * s3 + 3.0 * s2;
  const double h11 = s3 - s2;
  return h00 * y0 + h10 * h * dy0 + h01 * y1 + h11 * h * dy1;
}

double hermite_slope(double x0, double x1, double y0, double y1, double dy0,
                     double dy1, double x) {
  const double h = x1 - x0;
  const double s = (x - x0) / h;
  const double s2 = s * s;
  const double d00 = (6.0 * s2 - 6.0 * s) / h;
  const double d10 = 3.0 * s2 - 4.0 * s + 1.0;
  const double d01 = (-6.0 * s2 + 6.0 * s) / h;
  const double d11 = 3.0 * s2 - 2.0 * s;
  return d00 * y0 + d10 * dy0 + d01 * y1 + d11 * dy1;
}

std::vector<double> derivative4(std::span<const double> y, double h) {
  const std::size_t n = y.size();
  if (n < 5) throw PreconditionError("fourth-order derivative needs at least five samples");
  std::vector<double> d(n);
  const double inv12h = 1.0 / (12.0 * h);
  for (std::size_t i = 2; i + 2 < n; ++i) {
    d[i] = (y[i - 2] - 8.0 * y[i - 1] + 8.0 * y[i + 1] - y[i + 2]) * inv12h;
  }
  d[0] = (-25.0 * y[0] + 48.0 * y[1] - 36.0 * y[2] + 16.0 * y[3] - 3.0 * y[4]) * inv12h;
  d[1] = (-3.0 * y[0] - 10.0 * y[1] + 18.0 * y[2] - 6.0 * y[3] + y[4]) * inv12h;
  d[n - 1] = (25.0 * y[n - 1] - 48.0 * y[n - 2] + 36.0 * y[n - 3] -
              16.0 * y[n - 4] + 3.0 * y[n - 5]) * inv12h;
  d[n - 2] = (3.0 * y[n - 1] + 10.0 * y[n - 2] - 18.0 * y[n - 3] +
              6.0 * y[n - 4] - y[n - 5]) * inv12h;
  return d;
}

std::vector<double> cumulative_simpson(std::span<const double> f, double h) {
  const std::size_t n = f.size();
  std::vector<double> out(n, 0.0);
  if (n < 2) return out;
  if (n == 2) {
    out[1] = 0.5 * h * (f[0] + f[1]);
    return out;
  }
  for (std::size_t i = 2; i < n; i += 2) {
    out[i] = out[i - 2] + h / 3.0 * (f[i - 2] + 4.0 * f[i - 1] + f[i]);
  }
  for (std::size_t i = 1; i < n; i += 2) {
    if (i + 1 < n) {
      out[i] = out[i - 1] + h / 12.0 * (5.0 * f[i - 1] + 8.0 * f[i] - f[i + 1]);
    } else {
      // Last node with no right neighbour: integrate backwards from i-1 using
      // the mirrored three-point rule over [x_{i-2}, x_i].
      out[i] = out[i - 1] + h / 12.0 * (-f[i - 2] + 8.0 * f[i - 1] + 5.0 * f[i]);
    }
  }
  return out;
}

double richardson_central(double fm2, double fm1, double fp1, double fp2,
                          double h) {
  const double d1 = (fp1 - fm1) / (2.0 * h);
  const double d2 = (fp2 - fm2) / (4.0 * h);
  return (4.0 * d1 - d2) / 3.0;
}

double derivative5(const std::function<double(double)>& f, double x, double h) {
  return (f(x - 2.0 * h) - 8.0 * f(x - h) + 8.0 * f(x + h) - f(x + 2.0 * h)) /
         (12.0 * h);
}

}  // namespace qhj::numerics
