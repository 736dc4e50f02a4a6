#pragma once

#include <array>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qhj/basis.hpp"
#include "qhj/reduced_action.hpp"

namespace qhj {

// BD: xdot * dS0/dx = 2 (E - V).
// FloydJacobi: t - t0 = [dS0/dE] at fixed x.
// XhatJacobi: t - t0 = [dS0hat/dE] at fixed quantum coordinate.
enum class Law { BD, FloydJacobi, XhatJacobi };

std::string to_string(Law law);
Law law_from_string(const std::string& name);

enum class Termination { Completed, ReachedStop, TurningPoint, Domain, NonMonotoneTime };

std::string to_string(Termination t);

struct TrajectorySample {
  double t = 0.0;
  double x = 0.0;
  double velocity = 0.0;
  double action = 0.0;  // accumulated integral of L dt
};

struct Trajectory {
  Law law = Law::BD;
  std::vector<TrajectorySample> samples;
  Microstate microstate;
  double max_step_error = 0.0;
  Termination termination = Termination::Completed;
};

// 2 (E - V(x)) / P(x).
double bd_velocity(const ReducedActionField& field, double x);

struct BdOptions {
  double step_tolerance = 1e-10;
  double cadence = 1e-2;
  double initial_step = 1e-3;
  // Stop (ReachedStop) when the trajectory crosses this position.
  std::optional<double> x_stop;
};

// Integrates dx/dt = 2(E - V)/P together with the action dA/dt = L from
// t0 for a duration t_span. Output samples sit on a fixed cadence with a final
// sample at the termination point.
Trajectory integrate_bd(const ReducedActionField& field, double x0, double t_span,
                        const PotentialSpec& potential, const PhysicalConstants& consts,
                        const BdOptions& options = {});

// t(x) along a trajectory whose x is strictly monotone, by cubic Hermite
// interpolation with slope 1/velocity.
double time_at_position(const Trajectory& trajectory, double x);

using BasisFactory = std::function<SolutionBasis(double energy)>;

struct StencilOptions {
  double relative_delta = 1e-6;
  double min_delta = 1e-9;
};

double stencil_delta(double energy, const StencilOptions& options);

// Fields at E - 2d, E - d, E, E + d, E + 2d sharing grid and (a, b, lambda, t0).
// The outer pair feeds one Richardson extrapolation level.
class EnergyStencil {
 public:
  static EnergyStencil build(const BasisFactory& factory, const Microstate& ms,
                             const PotentialSpec& potential, const PhysicalConstants& consts,
                             const StencilOptions& options = {},
                             const FieldOptions& field_options = {});
  // Members ordered by offset -2, -1, 0, +1, +2.
  static EnergyStencil from_fields(double delta, std::array<ReducedActionField, 5> fields);

  double delta() const noexcept { return delta_; }
  const ReducedActionField& center() const noexcept { return fields_[2]; }
  const ReducedActionField& member(int offset) const { return fields_.at(offset + 2); }

  // Richardson-extrapolated central difference in E of a per-field quantity.
  double energy_derivative(const std::function<double(const ReducedActionField&)>& g) const;

 private:
  double delta_ = 0.0;
  std::array<ReducedActionField, 5> fields_;
};

// [S0(x; E + d) - S0(x; E - d)] / 2d with one Richardson level, (a, b, lambda)
// held fixed.
double floyd_time(const EnergyStencil& stencil, double x);

// Floyd time for (sin kx, cos kx):
//   (m a / hbar k) x / [(1 + b^2) cos^2 kx + a^2 sin^2 kx + 2 a b sin kx cos kx].
double floyd_time_closed_free(double x, double k, double a, double b,
                              const PhysicalConstants& consts);

// Floyd time for theta1 = sin kx, theta2 = cos kx + f(k) sin kx with
// constants (a~, b~).
double floyd_time_closed_transformed(double x, double k, double a_tilde, double b_tilde,
                                     double f, double dfdk, const PhysicalConstants& consts);

// [dS0/dE] at fixed quantum coordinate xhat* = xhat(x_ref; E).
double xhat_jacobi_time(const EnergyStencil& stencil, double x_ref);

struct GapSample {
  double x = 0.0;
  double floyd = 0.0;
  double xhat_jacobi = 0.0;
  double predicted = 0.0;  // sqrt(2m(E - V)) [dxhat/dE]_x
  double residual = 0.0;   // |floyd - xhat_jacobi - predicted|
};

// Checks t_Floyd - t_xhat = (dS0hat/dxhat) [dxhat/dE]_x.
GapSample jacobi_gap(const EnergyStencil& stencil, double x);

// |P - m (1 - dQ/dE) xdot_Floyd| / |P| with xdot_Floyd from local differencing
// of floyd_time in x. dx = 0 picks four grid spacings.
double fm_relation_check(const EnergyStencil& stencil, double x, double dx = 0.0);

struct HamiltonianSample {
  double t = 0.0;
  double x = 0.0;
  double H = 0.0;
  double canonical_velocity = 0.0;
  double bd_velocity = 0.0;
};

// H = (P^2/2m)(dx/dxhat)^2 + V and the canonical velocity (P/m)(dx/dxhat)^2
// along a BD trajectory, with (dx/dxhat)^2 = 2m(E - V)/P^2.
std::vector<HamiltonianSample> hamiltonian_along(const ReducedActionField& field,
                                                 const Trajectory& trajectory,
                                                 const PotentialSpec& potential,
                                                 const PhysicalConstants& consts);

// Samples a Jacobi-law time function at the given positions. Velocities come
// from local differencing; the action is accumulated by the trapezoid rule.
// Truncated (NonMonotoneTime) at the first sample where t fails to increase.
Trajectory jacobi_trajectory(const EnergyStencil& stencil, Law law,
                             std::span<const double> positions, double dx = 0.0);

}  // namespace qhj
