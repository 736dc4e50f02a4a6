#include "qhj/basis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "qhj/errors.hpp"
#include "qhj/numerics.hpp"

namespace qhj {

namespace {

constexpr double kAnalyticDriftLimit = 1e-8;
constexpr double kNumericDriftLimit = 1e-6;
constexpr int kExtrapolationSpacings = 4;

void fill_from_exact(SolutionBasis& basis) {
  const std::size_t n = basis.grid.size();
  basis.phi1.resize(n);
  basis.dphi1.resize(n);
  basis.phi2.resize(n);
  basis.dphi2.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const BasisSample s = basis.exact(basis.grid[i]);
    basis.phi1[i] = s.phi1;
    basis.dphi1[i] = s.dphi1;
    basis.phi2[i] = s.phi2;
    basis.dphi2[i] = s.dphi2;
  }
}

void check_grid(std::span<const double> grid) {
  if (grid.empty()) throw PreconditionError("grid is empty");
  for (std::size_t i = 1; i < grid.size(); ++i) {
    if (!(grid[i] > grid[i - 1])) {
      throw PreconditionError("grid must be strictly increasing");
    }
  }
}

}  // namespace

BasisSample SolutionBasis::sample(double x) const {
  if (exact) return exact(x);
  const std::size_t n = grid.size();
  const double lo_h = grid[1] - grid[0];
  const double hi_h = grid[n - 1] - grid[n - 2];
  if (x < grid.front() - kExtrapolationSpacings * lo_h ||
      x > grid.back() + kExtrapolationSpacings * hi_h) {
    throw DomainError("basis lookup outside grid");
  }
  const std::size_t i = numerics::locate(grid, x);
  const double x0 = grid[i];
  const double x1 = grid[i + 1];
  BasisSample s;
  s.phi1 = numerics::hermite(x0, x1, phi1[i], phi1[i + 1], dphi1[i], dphi1[i + 1], x);
  s.phi2 = numerics::hermite(x0, x1, phi2[i], phi2[i + 1], dphi2[i], dphi2[i + 1], x);
  s.dphi1 = numerics::hermite(x0, x1, dphi1[i], dphi1[i + 1], curvature[i] * phi1[i],
                              curvature[i + 1] * phi1[i + 1], x);
  s.dphi2 = numerics::hermite(x0, x1, dphi2[i], dphi2[i + 1], curvature[i] * phi2[i],
                              curvature[i + 1] * phi2[i + 1], x);
  return s;
}

SolutionBasis analytic_free_basis(double energy, const PhysicalConstants& consts,
                                  std::span<const double> grid, bool rescaled) {
  consts.validate();
  if (!(energy >= 0.0) || !std::isfinite(energy)) {
    throw UnsupportedEnergyError("analytic free basis requires E >= 0");
  }
  check_grid(grid);

  SolutionBasis basis;
  basis.energy = energy;
  basis.consts = consts;
  basis.grid.assign(grid.begin(), grid.end());

  if (energy == 0.0) {
    basis.wronskian = 1.0;
    basis.exact = [](double x) { return BasisSample{x, 1.0, 1.0, 0.0}; };
    basis.id = "free:E=0";
  } else {
    const double k = wavenumber(energy, consts);
    if (rescaled) {
      basis.wronskian = 1.0;
      basis.exact = [k](double x) {
        const double s = std::sin(k * x);
        const double c = std::cos(k * x);
        return BasisSample{s / k, c, c, -k * s};
      };
      basis.id = "free:rescaled";
    } else {
      basis.wronskian = k;
      basis.exact = [k](double x) {
        const double s = std::sin(k * x);
        const double c = std::cos(k * x);
        return BasisSample{s, k * c, c, -k * s};
      };
      basis.id = "free:sincos";
    }
  }
  const double q = -2.0 * consts.mass * energy / (consts.hbar * consts.hbar);
  basis.curvature.assign(basis.grid.size(), q);
  fill_from_exact(basis);

  if (basis.grid.size() > 1 && wronskian_drift(basis) > kAnalyticDriftLimit) {
    throw IntegrationFailure("analytic basis Wronskian is not constant");
  }
  return basis;
}

namespace {

// One Numerov sweep from node `from` (with its neighbour `from - dir` already
// set) in direction dir = +1 / -1.
void numerov_sweep(std::vector<double>& phi, const std::vector<double>& q, double h,
                   std::size_t start, int dir) {
  const double h2 = h * h / 12.0;
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(phi.size());
  for (std::ptrdiff_t i = static_cast<std::ptrdiff_t>(start); ; i += dir) {
    const std::ptrdiff_t next = i + dir;
    const std::ptrdiff_t prev = i - dir;
    if (next < 0 || next >= n) break;
    const double w_prev = 1.0 - h2 * q[prev];
    const double w_cur = 1.0 + 5.0 * h2 * q[i];
    const double w_next = 1.0 - h2 * q[next];
    phi[next] = (2.0 * w_cur * phi[i] - w_prev * phi[prev]) / w_next;
  }
}

// Accurate first step off the seed: many RK4 micro-steps of (phi, phi').
double first_step(const PotentialSpec& potential, double energy,
                  const PhysicalConstants& consts, double x0, double h, Seed seed) {
  constexpr int kSubsteps = 64;
  const double scale = 2.0 * consts.mass / (consts.hbar * consts.hbar);
  auto q = [&](double x) { return scale * (potential(x) - energy); };
  double y = seed.value;
  double dy = seed.slope;
  const double dx = h / kSubsteps;
  double x = x0;
  for (int s = 0; s < kSubsteps; ++s) {
    const double k1y = dy, k1d = q(x) * y;
    const double k2y = dy + 0.5 * dx * k1d, k2d = q(x + 0.5 * dx) * (y + 0.5 * dx * k1y);
    const double k3y = dy + 0.5 * dx * k2d, k3d = q(x + 0.5 * dx) * (y + 0.5 * dx * k2y);
    const double k4y = dy + dx * k3d, k4d = q(x + dx) * (y + dx * k3y);
    y += dx / 6.0 * (k1y + 2.0 * k2y + 2.0 * k3y + k4y);
    dy += dx / 6.0 * (k1d + 2.0 * k2d + 2.0 * k3d + k4d);
    x += dx;
  }
  return y;
}

std::vector<double> integrate_seed(const PotentialSpec& potential, double energy,
                                   const PhysicalConstants& consts,
                                   const std::vector<double>& grid,
                                   const std::vector<double>& q, double h,
                                   std::size_t seed_index, Seed seed) {
  const std::size_t n = grid.size();
  std::vector<double> phi(n, 0.0);
  phi[seed_index] = seed.value;
  if (seed_index + 1 < n) {
    phi[seed_index + 1] = first_step(potential, energy, consts, grid[seed_index], h, seed);
    numerov_sweep(phi, q, h, seed_index + 1, +1);
  }
  if (seed_index > 0) {
    phi[seed_index - 1] = first_step(potential, energy, consts, grid[seed_index], -h, seed);
    numerov_sweep(phi, q, h, seed_index - 1, -1);
  }
  return phi;
}

}  // namespace

SolutionBasis numeric_basis(const PotentialSpec& potential, double energy,
                            const PhysicalConstants& consts,
                            std::span<const double> grid, const SeedPair& seeds,
                            std::optional<double> seed_x) {
  consts.validate();
  check_grid(grid);
  if (grid.size() < 5) throw PreconditionError("numeric basis needs at least five grid points");
  const auto spacing = numerics::uniform_spacing(grid);
  if (!spacing) throw PreconditionError("numeric basis requires a uniform grid");
  const double h = *spacing;

  const double w_seed = seeds.first.slope * seeds.second.value -
                        seeds.first.value * seeds.second.slope;
  const double seed_scale = std::max({std::abs(seeds.first.value), std::abs(seeds.first.slope),
                                      std::abs(seeds.second.value), std::abs(seeds.second.slope)});
  if (!(std::abs(w_seed) > 1e-14 * seed_scale * seed_scale)) {
    throw PreconditionError("seed pairs are linearly dependent (Wronskian 0)");
  }

  std::size_t seed_index = 0;
  if (seed_x) {
    const double pos = (*seed_x - grid.front()) / h;
    const double rounded = std::round(pos);
    if (rounded < 0 || rounded > static_cast<double>(grid.size() - 1) ||
        std::abs(pos - rounded) > 1e-6) {
      throw PreconditionError("seed position must coincide with a grid node");
    }
    seed_index = static_cast<std::size_t>(rounded);
  }

  SolutionBasis basis;
  basis.energy = energy;
  basis.consts = consts;
  basis.grid.assign(grid.begin(), grid.end());
  const double scale = 2.0 * consts.mass / (consts.hbar * consts.hbar);
  basis.curvature.resize(basis.grid.size());
  for (std::size_t i = 0; i < basis.grid.size(); ++i) {
    basis.curvature[i] = scale * (potential(basis.grid[i]) - energy);
  }
  basis.phi1 = integrate_seed(potential, energy, consts, basis.grid, basis.curvature, h,
                              seed_index, seeds.first);
  basis.phi2 = integrate_seed(potential, energy, consts, basis.grid, basis.curvature, h,
                              seed_index, seeds.second);
  basis.dphi1 = numerics::derivative4(basis.phi1, h);
  basis.dphi2 = numerics::derivative4(basis.phi2, h);
  // The seeds fix the derivative at the seed node exactly.
  basis.dphi1[seed_index] = seeds.first.slope;
  basis.dphi2[seed_index] = seeds.second.slope;
  basis.wronskian = w_seed;
  basis.id = "numerov:" + potential.describe();

  for (std::size_t i = 0; i < basis.grid.size(); ++i) {
    const double w = basis.dphi1[i] * basis.phi2[i] - basis.phi1[i] * basis.dphi2[i];
    if (!std::isfinite(w) || std::abs(w - w_seed) > kNumericDriftLimit * std::abs(w_seed)) {
      std::ostringstream os;
      os << "Numerov Wronskian drift at x=" << basis.grid[i] << " (W=" << w
         << ", seed W=" << w_seed << ")";
      throw IntegrationFailure(os.str());
    }
  }
  return basis;
}

WavenumberFunction WavenumberFunction::zero() { return constant(0.0); }

WavenumberFunction WavenumberFunction::constant(double c) {
  std::ostringstream os;
  os << c;
  return {os.str(), [c](double) { return c; }, [](double) { return 0.0; }};
}

WavenumberFunction WavenumberFunction::identity() {
  return {"k", [](double k) { return k; }, [](double) { return 1.0; }};
}

WavenumberFunction WavenumberFunction::square() {
  return {"k^2", [](double k) { return k * k; }, [](double k) { return 2.0 * k; }};
}

WavenumberFunction WavenumberFunction::reciprocal() {
  return {"1/k", [](double k) { return 1.0 / k; }, [](double k) { return -1.0 / (k * k); }};
}

WavenumberFunction WavenumberFunction::parse(const std::string& text) {
  if (text == "k") return identity();
  if (text == "k^2") return square();
  if (text == "1/k") return reciprocal();
  try {
    std::size_t used = 0;
    const double c = std::stod(text, &used);
    if (used == text.size()) return constant(c);
  } catch (const std::logic_error&) {
  }
  throw PreconditionError("unknown wavenumber function '" + text + "'");
}

BasisTransform BasisTransform::general(const TransformCoefficients& c) {
  if (!std::isfinite(c.mu) || !std::isfinite(c.nu) || !std::isfinite(c.alpha) ||
      !std::isfinite(c.beta)) {
    throw PreconditionError("transform coefficients must be finite");
  }
  const double scale = std::max({std::abs(c.mu * c.beta), std::abs(c.nu * c.alpha), 1e-300});
  if (std::abs(c.determinant()) <= 1e-14 * scale) {
    throw PreconditionError("degenerate transform: mu*beta == nu*alpha");
  }
  BasisTransform t;
  t.kind_ = Kind::General;
  t.coefficients_ = c;
  return t;
}

BasisTransform BasisTransform::free_particle(WavenumberFunction f, WavenumberFunction g) {
  BasisTransform t;
  t.kind_ = Kind::FreeParticle;
  t.f_ = std::move(f);
  t.g_ = std::move(g);
  return t;
}

TransformCoefficients BasisTransform::at_wavenumber(double k) const {
  if (kind_ == Kind::General) return coefficients_;
  const double fv = f_.value(k);
  const double gv = g_.value(k);
  if (std::abs(1.0 - fv * gv) <= 1e-14) {
    throw PreconditionError("degenerate free-particle transform: f*g == 1");
  }
  return {1.0, gv, fv, 1.0};
}

TransformCoefficients BasisTransform::at_energy(double energy,
                                                const PhysicalConstants& consts) const {
  if (kind_ == Kind::General) return coefficients_;
  return at_wavenumber(wavenumber(energy, consts));
}

std::string BasisTransform::describe() const {
  std::ostringstream os;
  if (kind_ == Kind::General) {
    os << "general(mu=" << coefficients_.mu << ", nu=" << coefficients_.nu
       << ", alpha=" << coefficients_.alpha << ", beta=" << coefficients_.beta << ")";
  } else {
    os << "free(f=" << f_.name << ", g=" << g_.name << ")";
  }
  return os.str();
}

SolutionBasis transform_basis(const SolutionBasis& basis, const TransformCoefficients& c) {
  const double det = c.determinant();
  const double scale = std::max({std::abs(c.mu * c.beta), std::abs(c.nu * c.alpha), 1e-300});
  if (std::abs(det) <= 1e-14 * scale) {
    throw PreconditionError("degenerate transform: mu*beta == nu*alpha");
  }
  SolutionBasis out;
  out.energy = basis.energy;
  out.consts = basis.consts;
  out.grid = basis.grid;
  out.curvature = basis.curvature;
  const std::size_t n = basis.grid.size();
  out.phi1.resize(n);
  out.dphi1.resize(n);
  out.phi2.resize(n);
  out.dphi2.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    out.phi1[i] = c.mu * basis.phi1[i] + c.nu * basis.phi2[i];
    out.dphi1[i] = c.mu * basis.dphi1[i] + c.nu * basis.dphi2[i];
    out.phi2[i] = c.alpha * basis.phi1[i] + c.beta * basis.phi2[i];
    out.dphi2[i] = c.alpha * basis.dphi1[i] + c.beta * basis.dphi2[i];
  }
  out.wronskian = det * basis.wronskian;
  if (basis.exact) {
    out.exact = [inner = basis.exact, c](double x) {
      const BasisSample s = inner(x);
      return BasisSample{c.mu * s.phi1 + c.nu * s.phi2, c.mu * s.dphi1 + c.nu * s.dphi2,
                         c.alpha * s.phi1 + c.beta * s.phi2,
                         c.alpha * s.dphi1 + c.beta * s.dphi2};
    };
  }
  std::ostringstream os;
  os << basis.id << "|T(" << c.mu << "," << c.nu << "," << c.alpha << "," << c.beta << ")";
  out.id = os.str();
  return out;
}

SolutionBasis transform_basis(const SolutionBasis& basis, const BasisTransform& transform) {
  return transform_basis(basis, transform.at_energy(basis.energy, basis.consts));
}

double schrodinger_residual(const SolutionBasis& basis, const PotentialSpec& potential,
                            const PhysicalConstants& consts) {
  const auto spacing = numerics::uniform_spacing(basis.grid);
  if (!spacing) throw PreconditionError("residual check requires a uniform grid");
  const double h2 = *spacing * *spacing;
  const double scale = 2.0 * consts.mass / (consts.hbar * consts.hbar);
  double worst = 0.0;
  for (std::size_t i = 1; i + 1 < basis.grid.size(); ++i) {
    const double q = scale * (potential(basis.grid[i]) - basis.energy);
    for (const auto* phi : {&basis.phi1, &basis.phi2}) {
      const auto& p = *phi;
      const double second = (p[i + 1] - 2.0 * p[i] + p[i - 1]) / h2;
      worst = std::max(worst, std::abs(second - q * p[i]));
    }
  }
  return worst;
}

double wronskian_drift(const SolutionBasis& basis) {
  const double w0 = basis.dphi1[0] * basis.phi2[0] - basis.phi1[0] * basis.dphi2[0];
  if (w0 == 0.0) return std::numeric_limits<double>::infinity();
  double worst = 0.0;
  for (std::size_t i = 1; i < basis.grid.size(); ++i) {
    const double w = basis.dphi1[i] * basis.phi2[i] - basis.phi1[i] * basis.dphi2[i];
    worst = std::max(worst, std::abs(w - w0) / std::abs(w0));
  }
  return worst;
}

}  // namespace qhj
