#include "qhj/trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "qhj/errors.hpp"
#include "qhj/numerics.hpp"
#include "qhj/ode.hpp"

namespace qhj {

std::string to_string(Law law) {
  switch (law) {
    case Law::BD:
      return "bd";
    case Law::FloydJacobi:
      return "floyd";
    case Law::XhatJacobi:
      return "xhat";
  }
  return "unknown";
}

Law law_from_string(const std::string& name) {
  if (name == "bd") return Law::BD;
  if (name == "floyd") return Law::FloydJacobi;
  if (name == "xhat") return Law::XhatJacobi;
  throw PreconditionError("unknown law '" + name + "'");
}

std::string to_string(Termination t) {
  switch (t) {
    case Termination::Completed:
      return "completed";
    case Termination::ReachedStop:
      return "reached_stop";
    case Termination::TurningPoint:
      return "turning_point";
    case Termination::Domain:
      return "domain";
    case Termination::NonMonotoneTime:
      return "non_monotone_time";
  }
  return "unknown";
}

double bd_velocity(const ReducedActionField& field, double x) {
  const FieldPoint p = field.at(x);
  return 2.0 * (field.energy() - p.V) / p.P;
}

namespace {

using State = ode::State<2>;

// Root of g on [t0, t1] given g(t0) and g(t1) of opposite sign.
double bisect(const std::function<double(double)>& g, double t0, double t1) {
  double g0 = g(t0);
  for (int i = 0; i < 100; ++i) {
    const double mid = 0.5 * (t0 + t1);
    const double gm = g(mid);
    if ((gm < 0.0) == (g0 < 0.0)) {
      t0 = mid;
      g0 = gm;
    } else {
      t1 = mid;
    }
    if (t1 - t0 <= 1e-15 * std::max(1.0, std::abs(t1))) break;
  }
  return 0.5 * (t0 + t1);
}

}  // namespace

Trajectory integrate_bd(const ReducedActionField& field, double x0, double t_span,
                        const PotentialSpec& potential, const PhysicalConstants& consts,
                        const BdOptions& options) {
  if (!(t_span > 0.0)) throw PreconditionError("t_span must be positive");
  if (!(options.cadence > 0.0)) throw PreconditionError("cadence must be positive");
  if (!(options.step_tolerance > 0.0)) throw PreconditionError("step tolerance must be positive");
  if (x0 < field.x_min() || x0 > field.x_max()) {
    throw PreconditionError("start position outside the field grid");
  }
  const double energy = field.energy();
  const double eps = field.turning_epsilon;
  if (!(energy - potential(x0) > eps)) {
    throw PreconditionError("start position is not in the classically allowed region");
  }

  auto rhs = [&](double, const State& y) -> State {
    const double x = y[0];
    if (!std::isfinite(x)) throw DomainError("non-finite position");
    const FieldPoint p = field.at(x);
    const double v = 2.0 * (energy - p.V) / p.P;
    const double lagrangian = p.P * v - p.P * p.P / (2.0 * consts.mass) - p.V - p.Q;
    return {v, lagrangian};
  };

  ode::StepControl control;
  control.rtol = options.step_tolerance;
  control.atol = options.step_tolerance;
  control.initial_step = std::min(options.initial_step, options.cadence);
  control.max_step = options.cadence;
  ode::DormandPrince<2> solver(rhs, control);
  solver.reset(0.0, {x0, 0.0});

  Trajectory traj;
  traj.law = Law::BD;
  traj.microstate = field.microstate;
  const double t0 = field.microstate.t0;
  auto push = [&](double tau, const State& y) {
    traj.samples.push_back({t0 + tau, y[0], bd_velocity(field, y[0]), y[1]});
  };
  push(0.0, solver.state());

  std::size_t next_tick = 1;
  auto emit_until = [&](const ode::AcceptedStep<2>& step, double tau_end) {
    for (;; ++next_tick) {
      const double tick = options.cadence * static_cast<double>(next_tick);
      if (tick > tau_end * (1.0 + 1e-14)) break;
      push(tick, step(std::min(tick, step.t1)));
    }
  };

  const double lo = field.x_min();
  const double hi = field.x_max();
  for (;;) {
    if (solver.time() >= t_span * (1.0 - 1e-15)) {
      traj.termination = Termination::Completed;
      break;
    }
    ode::AcceptedStep<2> step;
    try {
      step = solver.step(t_span);
    } catch (const IntegrationFailure&) {
      traj.termination = Termination::Domain;
      break;
    }
    traj.max_step_error = std::max(traj.max_step_error, step.error_estimate);

    // Earliest event inside this step, if any.
    double event_tau = step.t1;
    std::optional<Termination> event;
    auto consider = [&](const std::function<double(double)>& g, Termination kind) {
      const double g0 = g(step.t0);
      const double g1 = g(step.t1);
      if ((g0 < 0.0) != (g1 < 0.0) || g1 == 0.0) {
        const double root = bisect(g, step.t0, step.t1);
        if (root <= event_tau) {
          event_tau = root;
          event = kind;
        }
      }
    };
    const auto x_of = [&](double tau) { return step(tau)[0]; };
    consider([&](double tau) { return x_of(tau) - lo; }, Termination::Domain);
    consider([&](double tau) { return hi - x_of(tau); }, Termination::Domain);
    if (options.x_stop) {
      const double stop = *options.x_stop;
      if (stop != x0) {
        const double sign = stop > x0 ? 1.0 : -1.0;
        consider([&](double tau) { return sign * (stop - x_of(tau)); }, Termination::ReachedStop);
      }
    }
    // Turning points are only tested inside the grid.
    const double xa = std::clamp(x_of(step.t0), lo, hi);
    const double xb = std::clamp(step.y1[0], lo, hi);
    if (energy - potential(xa) > eps && !(energy - potential(xb) > eps)) {
      consider(
          [&](double tau) {
            return energy - potential(std::clamp(x_of(tau), lo, hi)) - eps;
          },
          Termination::TurningPoint);
    }

    if (event) {
      emit_until(step, event_tau);
      State y = step(event_tau);
      if (*event == Termination::Domain) y[0] = std::clamp(y[0], lo, hi);
      if (*event == Termination::ReachedStop) y[0] = *options.x_stop;
      if (traj.samples.back().t < t0 + event_tau) push(event_tau, y);
      traj.termination = *event;
      break;
    }
    emit_until(step, step.t1);
  }
  if (traj.termination == Termination::Completed &&
      traj.samples.back().t < t0 + solver.time() * (1.0 - 1e-14)) {
    push(solver.time(), solver.state());
  }
  return traj;
}

double time_at_position(const Trajectory& trajectory, double x) {
  const auto& s = trajectory.samples;
  if (s.size() < 2) throw DomainError("trajectory has fewer than two samples");
  const bool increasing = s.back().x > s.front().x;
  const double lo = increasing ? s.front().x : s.back().x;
  const double hi = increasing ? s.back().x : s.front().x;
  const double tol = 1e-12 * std::max(1.0, std::abs(x));
  if (x < lo - tol || x > hi + tol) throw DomainError("position outside trajectory range");
  std::size_t a = 0;
  std::size_t b = s.size() - 1;
  while (b - a > 1) {
    const std::size_t mid = (a + b) / 2;
    if ((s[mid].x <= x) == increasing) {
      a = mid;
    } else {
      b = mid;
    }
  }
  return numerics::hermite(s[a].x, s[b].x, s[a].t, s[b].t, 1.0 / s[a].velocity,
                           1.0 / s[b].velocity, x);
}

double stencil_delta(double energy, const StencilOptions& options) {
  return std::max(options.relative_delta * std::abs(energy), options.min_delta);
}

EnergyStencil EnergyStencil::build(const BasisFactory& factory, const Microstate& ms,
                                   const PotentialSpec& potential,
                                   const PhysicalConstants& consts,
                                   const StencilOptions& options,
                                   const FieldOptions& field_options) {
  const double d = stencil_delta(ms.energy, options);
  if (ms.energy - 2.0 * d < 0.0) {
    throw PreconditionError("energy stencil would cross E = 0");
  }
  std::array<ReducedActionField, 5> fields;
  for (int j = -2; j <= 2; ++j) {
    const double e = ms.energy + static_cast<double>(j) * d;
    fields[static_cast<std::size_t>(j + 2)] =
        build_reduced_action(factory(e), ms.with_energy(e), potential, consts, field_options);
  }
  return from_fields(d, std::move(fields));
}

EnergyStencil EnergyStencil::from_fields(double delta, std::array<ReducedActionField, 5> fields) {
  if (!(delta > 0.0)) throw PreconditionError("stencil delta must be positive");
  const ReducedActionField& c = fields[2];
  const double hbar = c.consts.hbar;
  for (int j = -2; j <= 2; ++j) {
    const ReducedActionField& f = fields[static_cast<std::size_t>(j + 2)];
    if (f.grid != c.grid) throw StencilInconsistency("stencil members use different grids");
    const Microstate& m = f.microstate;
    const Microstate& mc = c.microstate;
    if (m.a != mc.a || m.b != mc.b || m.lambda != mc.lambda || m.t0 != mc.t0) {
      throw StencilInconsistency("stencil members must share (a, b, lambda, t0)");
    }
    const double expected = mc.energy + static_cast<double>(j) * delta;
    if (std::abs(m.energy - expected) > 1e-9 * delta + 1e-15 * std::abs(expected)) {
      throw StencilInconsistency("stencil member energy does not match its offset");
    }
    if (std::abs(f.S0.front() - c.S0.front()) >= 0.5 * std::numbers::pi * hbar) {
      throw StencilInconsistency("stencil members disagree on the winding at x_min");
    }
  }
  EnergyStencil s;
  s.delta_ = delta;
  s.fields_ = std::move(fields);
  return s;
}

double EnergyStencil::energy_derivative(
    const std::function<double(const ReducedActionField&)>& g) const {
  return numerics::richardson_central(g(fields_[0]), g(fields_[1]), g(fields_[3]),
                                      g(fields_[4]), delta_);
}

double floyd_time(const EnergyStencil& stencil, double x) {
  const ReducedActionField& c = stencil.center();
  const double reference = c.action_at(x);
  const double limit = 0.5 * std::numbers::pi * c.consts.hbar;
  return stencil.energy_derivative([&](const ReducedActionField& f) {
    const double s = f.action_at(x);
    if (std::abs(s - reference) >= limit) {
      throw StencilInconsistency("winding mismatch between stencil members");
    }
    return s;
  });
}

double floyd_time_closed_free(double x, double k, double a, double b,
                              const PhysicalConstants& consts) {
  const double s = std::sin(k * x);
  const double c = std::cos(k * x);
  const double den = (1.0 + b * b) * c * c + a * a * s * s + 2.0 * a * b * s * c;
  if (!(den > 0.0)) throw SingularConfiguration("Floyd closed form: nonpositive denominator");
  return consts.mass * a / (consts.hbar * k) * x / den;
}

double floyd_time_closed_transformed(double x, double k, double a_tilde, double b_tilde,
                                     double f, double dfdk, const PhysicalConstants& consts) {
  const double s = std::sin(k * x);
  const double c = std::cos(k * x);
  const double at = a_tilde;
  const double bt = b_tilde;
  const double den = (1.0 + bt * bt) * c * c +
                     (at * at + bt * bt * f * f + f * f + 2.0 * at * bt * f) * s * s +
                     2.0 * (f + at * bt + bt * bt * f) * s * c;
  if (!(den > 0.0)) {
    throw SingularConfiguration("transformed Floyd closed form: nonpositive denominator");
  }
  return consts.mass * at / (consts.hbar * k) * (x - dfdk * s * s) / den;
}

double xhat_jacobi_time(const EnergyStencil& stencil, double x_ref) {
  const double target = stencil.center().xhat_at(x_ref);
  return stencil.energy_derivative([&](const ReducedActionField& f) {
    return f.action_at(f.xhat_inverse(target));
  });
}

GapSample jacobi_gap(const EnergyStencil& stencil, double x) {
  const ReducedActionField& c = stencil.center();
  GapSample g;
  g.x = x;
  g.floyd = floyd_time(stencil, x);
  g.xhat_jacobi = xhat_jacobi_time(stencil, x);
  const double dxhat_de =
      stencil.energy_derivative([&](const ReducedActionField& f) { return f.xhat_at(x); });
  const double kinetic = c.energy() - c.potential(x);
  g.predicted = std::sqrt(2.0 * c.consts.mass * kinetic) * dxhat_de;
  g.residual = std::abs(g.floyd - g.xhat_jacobi - g.predicted);
  return g;
}

namespace {

// Fourth-order first derivative, centred where the stencil fits in [lo, hi],
// one-sided otherwise.
double position_derivative(const std::function<double(double)>& f, double x, double h,
                           double lo, double hi) {
  if (x - 2.0 * h >= lo && x + 2.0 * h <= hi) return numerics::derivative5(f, x, h);
  const double dir = (x - 2.0 * h < lo) ? 1.0 : -1.0;
  const double s = dir * h;
  return (-25.0 * f(x) + 48.0 * f(x + s) - 36.0 * f(x + 2.0 * s) + 16.0 * f(x + 3.0 * s) -
          3.0 * f(x + 4.0 * s)) /
         (12.0 * s);
}

double default_dx(const ReducedActionField& f) { return 4.0 * (f.grid[1] - f.grid[0]); }

}  // namespace

double fm_relation_check(const EnergyStencil& stencil, double x, double dx) {
  const ReducedActionField& c = stencil.center();
  if (dx <= 0.0) dx = default_dx(c);
  const double dq_de =
      stencil.energy_derivative([&](const ReducedActionField& f) { return f.at(x).Q; });
  const double dt_dx = position_derivative([&](double y) { return floyd_time(stencil, y); }, x,
                                           dx, c.x_min(), c.x_max());
  const double p = c.at(x).P;
  const double velocity = 1.0 / dt_dx;
  if (!std::isfinite(velocity) || std::abs(velocity) <= 1e-12 * std::abs(p) / c.consts.mass) {
    throw SingularVelocity("Floyd velocity is numerically zero");
  }
  return std::abs(p - c.consts.mass * (1.0 - dq_de) * velocity) / std::abs(p);
}

std::vector<HamiltonianSample> hamiltonian_along(const ReducedActionField& field,
                                                 const Trajectory& trajectory,
                                                 const PotentialSpec& potential,
                                                 const PhysicalConstants& consts) {
  if (trajectory.law != Law::BD) {
    throw PreconditionError("Hamiltonian check applies to BD trajectories");
  }
  if (!field.has_xhat) {
    throw PreconditionError("Hamiltonian check needs the quantum coordinate: " + field.xhat_note);
  }
  std::vector<HamiltonianSample> out;
  out.reserve(trajectory.samples.size());
  for (const TrajectorySample& s : trajectory.samples) {
    const FieldPoint p = field.at(s.x);
    const double v = potential(s.x);
    const double kinetic = field.energy() - v;
    const double dx_dxhat2 = 2.0 * consts.mass * kinetic / (p.P * p.P);
    HamiltonianSample h;
    h.t = s.t;
    h.x = s.x;
    h.H = p.P * p.P / (2.0 * consts.mass) * dx_dxhat2 + v;
    h.canonical_velocity = p.P / consts.mass * dx_dxhat2;
    h.bd_velocity = 2.0 * kinetic / p.P;
    out.push_back(h);
  }
  return out;
}

Trajectory jacobi_trajectory(const EnergyStencil& stencil, Law law,
                             std::span<const double> positions, double dx) {
  if (law == Law::BD) throw PreconditionError("BD trajectories come from integrate_bd");
  const ReducedActionField& c = stencil.center();
  if (dx <= 0.0) dx = default_dx(c);
  std::function<double(double)> time_of;
  if (law == Law::FloydJacobi) {
    time_of = [&](double x) { return floyd_time(stencil, x); };
  } else {
    time_of = [&](double x) { return xhat_jacobi_time(stencil, x); };
  }

  Trajectory traj;
  traj.law = law;
  traj.microstate = c.microstate;
  traj.termination = Termination::Completed;
  for (double x : positions) {
    const double t = c.microstate.t0 + time_of(x);
    if (!traj.samples.empty() && !(t > traj.samples.back().t)) {
      traj.termination = Termination::NonMonotoneTime;
      break;
    }
    const double dt_dx = position_derivative(time_of, x, dx, c.x_min(), c.x_max());
    const double v = 1.0 / dt_dx;
    double action = 0.0;
    const FieldPoint p = c.at(x);
    const double lagrangian =
        p.P * v - p.P * p.P / (2.0 * c.consts.mass) - p.V - p.Q;
    if (!traj.samples.empty()) {
      const TrajectorySample& prev = traj.samples.back();
      const FieldPoint pp = c.at(prev.x);
      const double prev_l = pp.P * prev.velocity - pp.P * pp.P / (2.0 * c.consts.mass) -
                            pp.V - pp.Q;
      action = prev.action + 0.5 * (lagrangian + prev_l) * (t - prev.t);
    }
    traj.samples.push_back({t, x, v, action});
  }
  return traj;
}

}  // namespace qhj
