#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace qhj {

enum class PotentialKind { Free, Harmonic, Linear, Tabulated };

std::string to_string(PotentialKind kind);
PotentialKind potential_kind_from_string(const std::string& name);

// A one-dimensional potential V(x) on a closed interval.
//
// Free:       V = 0
// Harmonic:   V = stiffness * (x - center)^2 / 2
// Linear:     V = offset + slope * x
// Tabulated:  natural cubic spline through (x, V) samples
class PotentialSpec {
 public:
  // Free particle on [0, 1].
  PotentialSpec() : PotentialSpec(PotentialKind::Free, {}, 0.0, 1.0) {}

  static PotentialSpec free(double x_min, double x_max);
  static PotentialSpec harmonic(double stiffness, double x_min, double x_max,
                                double center = 0.0);
  static PotentialSpec linear(double slope, double offset, double x_min,
                              double x_max);
  // Samples must be strictly increasing in x and cover [x_min, x_max].
  static PotentialSpec tabulated(std::vector<double> xs, std::vector<double> vs,
                                 double x_min, double x_max);
  // Two-column CSV (x, V) with a header line.
  static PotentialSpec from_csv(const std::filesystem::path& path,
                                double x_min, double x_max);

  double operator()(double x) const;
  std::vector<double> sample(std::span<const double> grid) const;

  PotentialKind kind() const noexcept { return kind_; }
  double x_min() const noexcept { return x_min_; }
  double x_max() const noexcept { return x_max_; }
  const std::vector<double>& params() const noexcept { return params_; }
  std::string describe() const;

 private:
  PotentialSpec(PotentialKind kind, std::vector<double> params, double x_min,
                double x_max);

  PotentialKind kind_;
  std::vector<double> params_;
  double x_min_;
  double x_max_;
  // Tabulated only: knots, values and spline second derivatives.
  std::vector<double> knots_;
  std::vector<double> values_;
  std::vector<double> second_;
};

}  // namespace qhj
