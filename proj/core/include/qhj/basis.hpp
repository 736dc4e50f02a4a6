#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qhj/constants.hpp"
#include "qhj/potential.hpp"

namespace qhj {

// Values and first derivatives of the two solutions at one point.
struct BasisSample {
  double phi1 = 0.0;
  double dphi1 = 0.0;
  double phi2 = 0.0;
  double dphi2 = 0.0;
};

// Two independent real solutions of -hbar^2/2m phi'' + V phi = E phi on a
// grid. `curvature` holds q(x) = 2m (V - E) / hbar^2, so phi'' = q phi.
//
// The Wronskian phi1' phi2 - phi1 phi2' is stored as computed; it is not
// normalised (sin/cos at wavenumber k carries W = k).
struct SolutionBasis {
  double energy = 0.0;
  PhysicalConstants consts;
  std::vector<double> grid;
  std::vector<double> phi1;
  std::vector<double> dphi1;
  std::vector<double> phi2;
  std::vector<double> dphi2;
  std::vector<double> curvature;
  double wronskian = 0.0;
  std::string id;
  // Closed-form evaluator, set for analytic bases and their transforms.
  std::function<BasisSample(double)> exact;

  BasisSample node(std::size_t i) const {
    return {phi1[i], dphi1[i], phi2[i], dphi2[i]};
  }
  // Exact evaluator when available, otherwise cubic Hermite interpolation of
  // phi (slope phi') and phi' (slope q phi). Extrapolates at most a few grid
  // spacings past either end; further out raises DomainError.
  BasisSample sample(double x) const;
  double x_min() const { return grid.front(); }
  double x_max() const { return grid.back(); }
};

struct Seed {
  double value = 0.0;
  double slope = 0.0;
};

// Initial conditions for (phi1, phi2). The default pair reproduces
// (sin kx / k, cos kx) when seeded at x = 0.
struct SeedPair {
  Seed first{0.0, 1.0};
  Seed second{1.0, 0.0};
};

// phi1 = sin kx, phi2 = cos kx (W = k); rescaled: phi1 = sin(kx)/k (W = 1);
// E = 0: phi1 = x, phi2 = 1 (W = 1).
SolutionBasis analytic_free_basis(double energy, const PhysicalConstants& consts,
                                  std::span<const double> grid, bool rescaled = false);

// Numerov integration of phi'' = q phi from seeds placed on the grid node
// nearest `seed_x` (default: the first node), outward in both directions.
SolutionBasis numeric_basis(const PotentialSpec& potential, double energy,
                            const PhysicalConstants& consts,
                            std::span<const double> grid,
                            const SeedPair& seeds = {},
                            std::optional<double> seed_x = std::nullopt);

// Rows of the matrix acting on (phi1, phi2):
//   theta1 = mu phi1 + nu phi2,  theta2 = alpha phi1 + beta phi2.
struct TransformCoefficients {
  double mu = 1.0;
  double nu = 0.0;
  double alpha = 0.0;
  double beta = 1.0;

  double determinant() const { return mu * beta - nu * alpha; }
  // Matrix product this * inner: apply `inner` first, then this.
  TransformCoefficients after(const TransformCoefficients& inner) const {
    return {mu * inner.mu + nu * inner.alpha, mu * inner.nu + nu * inner.beta,
            alpha * inner.mu + beta * inner.alpha, alpha * inner.nu + beta * inner.beta};
  }
};

// A real function of the wavenumber together with its derivative.
struct WavenumberFunction {
  std::string name;
  std::function<double(double)> value;
  std::function<double(double)> derivative;

  static WavenumberFunction zero();
  static WavenumberFunction constant(double c);
  static WavenumberFunction identity();  // f(k) = k
  static WavenumberFunction square();    // f(k) = k^2
  static WavenumberFunction reciprocal();  // f(k) = 1/k
  // Accepts "0", "k", "k^2", "1/k" or a decimal constant.
  static WavenumberFunction parse(const std::string& text);
};

// Either constant coefficients (mu, nu, alpha, beta), or the free-particle
// family theta1 = sin kx + g(k) cos kx, theta2 = cos kx + f(k) sin kx, which
// maps to (mu, nu, alpha, beta) = (1, g, f, 1) acting on (sin, cos).
class BasisTransform {
 public:
  enum class Kind { General, FreeParticle };

  static BasisTransform general(const TransformCoefficients& c);
  static BasisTransform free_particle(WavenumberFunction f, WavenumberFunction g);
  static BasisTransform identity() { return general({}); }

  TransformCoefficients at_wavenumber(double k) const;
  TransformCoefficients at_energy(double energy, const PhysicalConstants& consts) const;

  Kind kind() const noexcept { return kind_; }
  bool energy_dependent() const noexcept { return kind_ == Kind::FreeParticle; }
  const WavenumberFunction& f() const noexcept { return f_; }
  const WavenumberFunction& g() const noexcept { return g_; }
  std::string describe() const;

 private:
  Kind kind_ = Kind::General;
  TransformCoefficients coefficients_;
  WavenumberFunction f_;
  WavenumberFunction g_;
};

SolutionBasis transform_basis(const SolutionBasis& basis, const BasisTransform& transform);
SolutionBasis transform_basis(const SolutionBasis& basis, const TransformCoefficients& c);

// max over interior nodes of |phi'' - (2m/hbar^2)(V - E) phi| using centred
// second differences, for both solutions.
double schrodinger_residual(const SolutionBasis& basis, const PotentialSpec& potential,
                            const PhysicalConstants& consts);

// max |W(x) - W(x_min)| / |W(x_min)| from the value and derivative arrays.
double wronskian_drift(const SolutionBasis& basis);

}  // namespace qhj
