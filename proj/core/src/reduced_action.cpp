#include "qhj/reduced_action.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "qhj/errors.hpp"
#include "qhj/numerics.hpp"

namespace qhj {

namespace {

constexpr double kPi = std::numbers::pi;

double principal_arctan(double n, double d) {
  if (d == 0.0) return n > 0.0 ? 0.5 * kPi : -0.5 * kPi;
  return std::atan(n / d);
}

// Nearest branch of the principal phase to `reference`.
double continue_branch(double principal, double reference) {
  return principal + kPi * std::round((reference - principal) / kPi);
}

}  // namespace

void Microstate::validate() const {
  if (!std::isfinite(energy) || !std::isfinite(a) || !std::isfinite(b) ||
      !std::isfinite(lambda) || !std::isfinite(t0)) {
    throw PreconditionError("microstate constants must be finite");
  }
  if (a == 0.0) throw PreconditionError("microstate requires a != 0");
}

LocalState local_state(const BasisSample& s, double curvature, double a, double b,
                       double wronskian, const PhysicalConstants& consts) {
  const double n = a * s.phi1 + b * s.phi2;
  const double d = s.phi2;
  const double dn = a * s.dphi1 + b * s.dphi2;
  const double dd = s.dphi2;
  const double r = n * n + d * d;
  const double dr = 2.0 * (n * dn + d * dd);
  const double d2r = 2.0 * (dn * dn + dd * dd + curvature * r);

  LocalState out;
  out.principal_phase = principal_arctan(n, d);
  out.P = consts.hbar * a * wronskian / r;
  const double ratio = dr / r;
  out.dP = -out.P * ratio;
  out.d2P = out.P * (2.0 * ratio * ratio - d2r / r);
  out.Q = quantum_potential_value(out.P, out.dP, out.d2P, consts);
  return out;
}

double quantum_potential_value(double P, double dP, double d2P,
                               const PhysicalConstants& consts) {
  const double first = dP / P;
  return consts.hbar * consts.hbar / (4.0 * consts.mass) * (d2P / P - 1.5 * first * first);
}

ReducedActionField build_reduced_action(const SolutionBasis& basis, const Microstate& ms,
                                        const PotentialSpec& potential,
                                        const PhysicalConstants& consts,
                                        const FieldOptions& options) {
  consts.validate();
  ms.validate();
  if (std::abs(basis.energy - ms.energy) > 1e-12 * std::max(1.0, std::abs(ms.energy))) {
    throw PreconditionError("basis energy does not match microstate energy");
  }
  if (basis.wronskian == 0.0) throw PreconditionError("basis Wronskian vanishes");
  if (basis.grid.size() < 2) throw PreconditionError("field needs at least two grid points");

  ReducedActionField field;
  field.grid = basis.grid;
  field.microstate = ms;
  field.basis_id = basis.id;
  field.basis = basis;
  field.potential = potential;
  field.consts = consts;
  field.turning_epsilon = options.turning_epsilon;

  const std::size_t n = basis.grid.size();
  field.V = potential.sample(field.grid);
  field.phase.resize(n);
  field.S0.resize(n);
  field.P.resize(n);
  field.dP.resize(n);
  field.d2P.resize(n);

  const double scale = 2.0 * consts.mass / (consts.hbar * consts.hbar);
  for (std::size_t i = 0; i < n; ++i) {
    const double q = scale * (field.V[i] - ms.energy);
    const LocalState st = local_state(basis.node(i), q, ms.a, ms.b, basis.wronskian, consts);
    field.P[i] = st.P;
    field.dP[i] = st.dP;
    field.d2P[i] = st.d2P;
    if (i == 0) {
      field.phase[i] = st.principal_phase;
    } else {
      const double dx = field.grid[i] - field.grid[i - 1];
      const double predicted =
          field.phase[i - 1] + 0.5 * (field.P[i] + field.P[i - 1]) * dx / consts.hbar;
      field.phase[i] = continue_branch(st.principal_phase, predicted);
      if (std::abs(field.phase[i] - predicted) > 0.25 * kPi) {
        throw PreconditionError("grid too coarse to unwrap the reduced action");
      }
    }
    field.S0[i] = consts.hbar * (field.phase[i] + ms.lambda);
  }
  field.Q = quantum_potential(field);

  const double v_max = *std::max_element(field.V.begin(), field.V.end());
  if (!(ms.energy > v_max + options.turning_epsilon)) {
    field.has_xhat = false;
    field.xhat_note = "E <= max V on grid; quantum coordinate not constructed";
  } else if (!numerics::uniform_spacing(field.grid)) {
    field.has_xhat = false;
    field.xhat_note = "non-uniform grid; quantum coordinate not constructed";
  } else {
    field.xhat = quantum_coordinate(field, potential, consts, options.turning_epsilon);
    field.has_xhat = true;
  }
  return field;
}

std::vector<double> quantum_potential(const ReducedActionField& field) {
  std::vector<double> q(field.P.size());
  for (std::size_t i = 0; i < q.size(); ++i) {
    q[i] = quantum_potential_value(field.P[i], field.dP[i], field.d2P[i], field.consts);
  }
  return q;
}

double qshje_residual(const ReducedActionField& field, const PotentialSpec& potential,
                      const PhysicalConstants& consts) {
  double worst = 0.0;
  for (std::size_t i = 0; i < field.grid.size(); ++i) {
    const double v = potential(field.grid[i]);
    const double r = field.P[i] * field.P[i] / (2.0 * consts.mass) + v + field.Q[i] -
                     field.microstate.energy;
    worst = std::max(worst, std::abs(r));
  }
  return worst;
}

std::vector<double> quantum_coordinate(const ReducedActionField& field,
                                       const PotentialSpec& potential,
                                       const PhysicalConstants& consts, double epsilon) {
  const auto spacing = numerics::uniform_spacing(field.grid);
  if (!spacing) throw PreconditionError("quantum coordinate requires a uniform grid");
  const std::size_t n = field.grid.size();
  std::vector<double> slope(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double kinetic = field.microstate.energy - potential(field.grid[i]);
    if (!(kinetic > epsilon)) {
      std::ostringstream os;
      os << "turning point: E - V = " << kinetic << " at x = " << field.grid[i];
      throw TurningPointError(os.str(), field.grid[i]);
    }
    slope[i] = field.P[i] / std::sqrt(2.0 * consts.mass * kinetic);
  }
  std::vector<double> xhat = numerics::cumulative_simpson(slope, *spacing);
  for (double& v : xhat) v += field.grid.front();
  return xhat;
}

double lagrangian_along(const ReducedActionField& field, double x, double xdot,
                        const PotentialSpec& potential, const PhysicalConstants& consts) {
  const FieldPoint p = field.at(x);
  const double v = potential(x);
  return p.P * xdot - p.P * p.P / (2.0 * consts.mass) - v - p.Q;
}

FieldPoint ReducedActionField::at(double x) const {
  const BasisSample s = basis.sample(x);
  const double v = potential(x);
  const double q = 2.0 * consts.mass * (v - microstate.energy) / (consts.hbar * consts.hbar);
  const LocalState st = local_state(s, q, microstate.a, microstate.b, basis.wronskian, consts);

  const std::size_t i = numerics::locate(grid, x);
  const double reference =
      numerics::hermite(grid[i], grid[i + 1], phase[i], phase[i + 1], P[i] / consts.hbar,
                        P[i + 1] / consts.hbar, x);
  const double unwrapped = continue_branch(st.principal_phase, reference);

  FieldPoint out;
  out.x = x;
  out.S0 = consts.hbar * (unwrapped + microstate.lambda);
  out.P = st.P;
  out.dP = st.dP;
  out.d2P = st.d2P;
  out.Q = st.Q;
  out.V = v;
  return out;
}

double ReducedActionField::action_at(double x) const { return at(x).S0; }

double ReducedActionField::xhat_slope(double x) const {
  const FieldPoint p = at(x);
  const double kinetic = microstate.energy - p.V;
  if (!(kinetic > turning_epsilon)) {
    throw TurningPointError("turning point in quantum coordinate lookup", x);
  }
  return p.P / std::sqrt(2.0 * consts.mass * kinetic);
}

double ReducedActionField::xhat_at(double x) const {
  if (!has_xhat) throw PreconditionError("field has no quantum coordinate: " + xhat_note);
  const double h = grid[1] - grid[0];
  if (x < grid.front() - 4.0 * h || x > grid.back() + 4.0 * h) {
    throw DomainError("quantum coordinate lookup outside grid");
  }
  const std::size_t i = numerics::locate(grid, x);
  const double s0 = xhat_slope(grid[i]);
  const double s1 = xhat_slope(grid[i + 1]);
  return numerics::hermite(grid[i], grid[i + 1], xhat[i], xhat[i + 1], s0, s1, x);
}

double ReducedActionField::xhat_inverse(double target) const {
  if (!has_xhat) throw PreconditionError("field has no quantum coordinate: " + xhat_note);
  const bool increasing = xhat.back() > xhat.front();
  const double lo_val = increasing ? xhat.front() : xhat.back();
  const double hi_val = increasing ? xhat.back() : xhat.front();
  if (target < lo_val || target > hi_val) {
    throw DomainError("quantum coordinate value outside the range of the field");
  }
  // Interval containing the target on the monotone grid.
  std::size_t lo = 0;
  std::size_t hi = xhat.size() - 1;
  while (hi - lo > 1) {
    const std::size_t mid = (lo + hi) / 2;
    const bool below = increasing ? xhat[mid] <= target : xhat[mid] >= target;
    if (below) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  const double x0 = grid[lo];
  const double x1 = grid[hi];
  const double s0 = xhat_slope(x0);
  const double s1 = xhat_slope(x1);
  auto g = [&](double x) {
    return numerics::hermite(x0, x1, xhat[lo], xhat[hi], s0, s1, x) - target;
  };
  auto dg = [&](double x) {
    return numerics::hermite_slope(x0, x1, xhat[lo], xhat[hi], s0, s1, x);
  };
  // Newton safeguarded by bisection on [x0, x1].
  double a = x0;
  double b = x1;
  double x = x0 + (target - xhat[lo]) / (xhat[hi] - xhat[lo]) * (x1 - x0);
  for (int it = 0; it < 60; ++it) {
    const double gx = g(x);
    if (gx == 0.0) return x;
    const bool left = (g(a) < 0.0) == (gx < 0.0);
    if (left) {
      a = x;
    } else {
      b = x;
    }
    double next = x - gx / dg(x);
    if (!(next > a && next < b)) next = 0.5 * (a + b);
    if (std::abs(next - x) <= 1e-16 * std::max(1.0, std::abs(x))) return next;
    x = next;
  }
  return x;
}

}  // namespace qhj
