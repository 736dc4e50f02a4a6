#include "qhj/invariance.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>

#include "qhj/errors.hpp"
#include "qhj/numerics.hpp"

namespace qhj {

namespace {

constexpr double kPi = std::numbers::pi;

struct MatchSystem {
  double a, b, mu, nu, alpha, beta, det;

  std::array<double, 3> residual(double at, double bt) const {
    const double A = at * mu + bt * alpha;
    const double B = at * nu + bt * beta;
    const double c = at * det / a;
    return {A * A + alpha * alpha - c * a * a, A * B + alpha * beta - c * a * b,
            B * B + beta * beta - c * (b * b + 1.0)};
  }

  // Rows d/d(a~), d/d(b~).
  std::array<std::array<double, 2>, 3> jacobian(double at, double bt) const {
    const double A = at * mu + bt * alpha;
    const double B = at * nu + bt * beta;
    return {{{2.0 * A * mu - det * a, 2.0 * A * alpha},
             {mu * B + A * nu - det * b, alpha * B + A * beta},
             {2.0 * B * nu - det * (b * b + 1.0) / a, 2.0 * B * beta}}};
  }
};

double norm(const std::array<double, 3>& r) {
  return std::sqrt(r[0] * r[0] + r[1] * r[1] + r[2] * r[2]);
}

double principal_phase(const BasisSample& s, double a, double b) {
  const double n = a * s.phi1 + b * s.phi2;
  const double d = s.phi2;
  if (d == 0.0) return n > 0.0 ? 0.5 * kPi : -0.5 * kPi;
  return std::atan(n / d);
}

double momentum(const BasisSample& s, double a, double b, double w, double hbar) {
  const double n = a * s.phi1 + b * s.phi2;
  const double d = s.phi2;
  return hbar * a * w / (n * n + d * d);
}

}  // namespace

MatchedConstants match_constants(const Microstate& ms, const TransformCoefficients& t,
                                 const SolutionBasis& basis, const MatchOptions& options) {
  ms.validate();
  const double det = t.determinant();
  const double scale = std::max({std::abs(t.mu * t.beta), std::abs(t.nu * t.alpha), 1e-300});
  if (std::abs(det) <= 1e-14 * scale) {
    throw PreconditionError("degenerate transform: mu*beta == nu*alpha");
  }
  const MatchSystem sys{ms.a, ms.b, t.mu, t.nu, t.alpha, t.beta, det};

  // Seed: the second row (alpha, beta) of the transformed (N, D) map is fixed,
  // so sqrt(c) and a rotation angle follow from it directly.
  const double ys = t.alpha / ms.a;
  const double yc = t.beta - ms.b * t.alpha / ms.a;
  const double s = std::hypot(ys, yc);
  if (!(s > 0.0)) throw NoMatchError("transform annihilates the denominator");
  const double sin_t = ys / s;
  const double cos_t = yc / s;
  const double A0 = s * ms.a * cos_t;
  const double B0 = s * (ms.b * cos_t - sin_t);
  double at = (A0 * t.beta - B0 * t.alpha) / det;
  double bt = (t.mu * B0 - t.nu * A0) / det;

  const double f_scale =
      1.0 + std::abs(sys.a * sys.a) + std::abs(sys.b * sys.b) + t.alpha * t.alpha + t.beta * t.beta;
  MatchedConstants out;
  auto r = sys.residual(at, bt);
  double rn = norm(r);
  int it = 0;
  for (; it < options.max_iterations && rn > 1e-15 * f_scale; ++it) {
    const auto j = sys.jacobian(at, bt);
    // Normal equations of the overdetermined (but consistent) system.
    double m00 = 0, m01 = 0, m11 = 0, g0 = 0, g1 = 0;
    for (int row = 0; row < 3; ++row) {
      m00 += j[row][0] * j[row][0];
      m01 += j[row][0] * j[row][1];
      m11 += j[row][1] * j[row][1];
      g0 += j[row][0] * r[row];
      g1 += j[row][1] * r[row];
    }
    const double dm = m00 * m11 - m01 * m01;
    if (!(std::abs(dm) > 0.0)) break;
    const double da = -(m11 * g0 - m01 * g1) / dm;
    const double db = -(m00 * g1 - m01 * g0) / dm;
    double step = 1.0;
    bool improved = false;
    for (int ls = 0; ls < 30; ++ls) {
      const auto trial = sys.residual(at + step * da, bt + step * db);
      if (norm(trial) < rn) {
        at += step * da;
        bt += step * db;
        r = trial;
        rn = norm(trial);
        improved = true;
        break;
      }
      step *= 0.5;
    }
    if (!improved) break;
  }
  if (rn > 1e-9 * f_scale || !std::isfinite(rn)) {
    throw NoMatchError("matching system did not converge");
  }
  out.iterations = it;
  out.a_tilde = at;
  out.b_tilde = bt;
  if (at == 0.0) throw NoMatchError("matched a~ vanishes");

  const SolutionBasis transformed = transform_basis(basis, t);
  const double hbar = basis.consts.hbar;
  double worst = 0.0;
  for (std::size_t i = 0; i < basis.grid.size(); ++i) {
    const double p = momentum(basis.node(i), ms.a, ms.b, basis.wronskian, hbar);
    const double pt = momentum(transformed.node(i), at, bt, transformed.wronskian, hbar);
    worst = std::max(worst, std::abs(p - pt) / std::abs(p));
  }
  out.residual = worst;
  out.matched = worst < options.tolerance;
  out.lambda_tilde = ms.lambda + principal_phase(basis.node(0), ms.a, ms.b) -
                     principal_phase(transformed.node(0), at, bt);
  return out;
}

MatchedConstants match_constants(const Microstate& ms, const BasisTransform& transform,
                                 const SolutionBasis& basis, const MatchOptions& options) {
  return match_constants(ms, transform.at_energy(basis.energy, basis.consts), basis, options);
}

Microstate apply_matched(const Microstate& ms, const MatchedConstants& matched) {
  Microstate out = ms;
  out.a = matched.a_tilde;
  out.b = matched.b_tilde;
  out.lambda = matched.lambda_tilde;
  return out;
}

namespace {

double max_sample_deviation(const Trajectory& a, const Trajectory& b) {
  const std::size_t n = std::min(a.samples.size(), b.samples.size());
  double worst = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    worst = std::max(worst, std::abs(a.samples[i].x - b.samples[i].x));
  }
  return worst;
}

}  // namespace

InvarianceResult bd_invariance_check(const Microstate& ms, const BasisTransform& transform,
                                     const SolutionBasis& basis, const PotentialSpec& potential,
                                     const PhysicalConstants& consts, double x0, double t_span,
                                     const BdOptions& options) {
  const TransformCoefficients c = transform.at_energy(basis.energy, consts);
  InvarianceResult out;
  out.matched = match_constants(ms, c, basis);
  const ReducedActionField original = build_reduced_action(basis, ms, potential, consts);
  const ReducedActionField transformed = build_reduced_action(
      transform_basis(basis, c), apply_matched(ms, out.matched), potential, consts);
  out.original = integrate_bd(original, x0, t_span, potential, consts, options);
  out.transformed = integrate_bd(transformed, x0, t_span, potential, consts, options);
  out.max_deviation = max_sample_deviation(out.original, out.transformed);
  return out;
}

ContradictionReport floyd_contradiction(const ContradictionInput& in,
                                        const PhysicalConstants& consts, double tolerance,
                                        int curve_samples) {
  if (!(in.k > 0.0)) throw PreconditionError("contradiction check requires k > 0");
  const double f = in.f;
  const double at = in.a_tilde;
  const double bt = in.b_tilde;
  const double den = at * at + bt * bt * f * f + f * f + 2.0 * at * bt * f;
  auto signed_residual = [&](double x) { return in.a * at * (x - in.dfdk) - x * den; };

  ContradictionReport r;
  r.e_half = signed_residual(0.5 * kPi / in.k);
  r.e_three_half = signed_residual(1.5 * kPi / in.k);
  r.r_half = std::abs(r.e_half);
  r.r_three_half = std::abs(r.e_three_half);
  r.joint_solvable = r.r_half < tolerance && r.r_three_half < tolerance;
  r.dfdk = in.dfdk;

  // Direct comparison of the two time curves over two periods.
  const double x_end = 2.0 * kPi / in.k;
  double worst = 0.0;
  for (int i = 0; i <= curve_samples; ++i) {
    const double x = x_end * static_cast<double>(i) / static_cast<double>(curve_samples);
    try {
      const double t1 = floyd_time_closed_free(x, in.k, in.a, in.b, consts);
      const double t2 =
          floyd_time_closed_transformed(x, in.k, at, bt, f, in.dfdk, consts);
      worst = std::max(worst, std::abs(t1 - t2));
    } catch (const SingularConfiguration&) {
      worst = std::numeric_limits<double>::infinity();
    }
  }
  r.curve_gap = worst;
  return r;
}

SweepResult contradiction_sweep(double a, double k, double f, double dfdk, int resolution,
                                double half_width) {
  if (resolution < 2) throw PreconditionError("sweep resolution must be at least 2");
  SweepResult best{std::numeric_limits<double>::infinity(), 0.0, 0.0};
  const double step = 2.0 * half_width / static_cast<double>(resolution - 1);
  const double x1 = 0.5 * kPi / k;
  const double x3 = 1.5 * kPi / k;
  for (int i = 0; i < resolution; ++i) {
    const double at = -half_width + step * static_cast<double>(i);
    if (std::abs(at) < 0.5 * step * 1e-6) continue;
    for (int j = 0; j < resolution; ++j) {
      const double bt = -half_width + step * static_cast<double>(j);
      const double den = at * at + bt * bt * f * f + f * f + 2.0 * at * bt * f;
      const double r1 = std::abs(a * at * (x1 - dfdk) - x1 * den);
      const double r3 = std::abs(a * at * (x3 - dfdk) - x3 * den);
      const double m = std::max(r1, r3);
      if (m < best.min_max_residual) best = {m, at, bt};
    }
  }
  return best;
}

std::string to_string(EnergyConvention c) {
  switch (c) {
    case EnergyConvention::FaraggiMatone:
      return "faraggi_matone";
    case EnergyConvention::TransformFollowsEnergy:
      return "transform_follows_energy";
    case EnergyConvention::Rematched:
      return "rematched";
  }
  return "unknown";
}

double fm_proposal_time(const BasisFactory& factory, const Microstate& ms,
                        const BasisTransform& transform, const PotentialSpec& potential,
                        const PhysicalConstants& consts, double x,
                        EnergyConvention convention, const StencilOptions& options) {
  const double e0 = ms.energy;
  const double d = stencil_delta(e0, options);
  if (e0 - 2.0 * d < 0.0) throw PreconditionError("energy stencil would cross E = 0");
  const SolutionBasis central = factory(e0);
  const TransformCoefficients t0 = transform.at_energy(e0, consts);
  const MatchedConstants frozen = match_constants(ms, t0, central);

  std::array<double, 5> action{};
  for (int j = -2; j <= 2; ++j) {
    const double e = e0 + static_cast<double>(j) * d;
    const SolutionBasis phi = j == 0 ? central : factory(e);
    const TransformCoefficients tj =
        convention == EnergyConvention::FaraggiMatone ? t0 : transform.at_energy(e, consts);
    const MatchedConstants constants = convention == EnergyConvention::Rematched
                                           ? match_constants(ms.with_energy(e), tj, phi)
                                           : frozen;
    const Microstate mj = apply_matched(ms.with_energy(e), constants);
    const ReducedActionField field =
        build_reduced_action(transform_basis(phi, tj), mj, potential, consts);
    action[static_cast<std::size_t>(j + 2)] = field.action_at(x);
  }
  const double limit = 0.5 * kPi * consts.hbar;
  for (double s : action) {
    if (std::abs(s - action[2]) >= limit) {
      throw StencilInconsistency("winding mismatch between stencil members");
    }
  }
  return numerics::richardson_central(action[0], action[1], action[3], action[4], d);
}

namespace {

std::vector<double> rescaling_grid(double x) {
  const double lo = std::min(0.0, x);
  const double hi = std::max({0.0, x, lo + 1.0});
  return numerics::uniform_grid(lo, hi + 0.5, 4001);
}

}  // namespace

double rescaling_extra_term(double k, double x, double a, double b,
                            const PhysicalConstants& consts) {
  return rescaling_report(k, x, a, b, consts, 0.0).extra_term;
}

RescalingReport rescaling_report(double k, double x, double a, double b,
                                 const PhysicalConstants& consts, double t_span,
                                 const StencilOptions& options) {
  if (!(k > 0.0)) throw PreconditionError("rescaling check requires k > 0");
  const double energy = energy_from_wavenumber(k, consts);
  const std::vector<double> grid = rescaling_grid(x);
  const Microstate ms{energy, a, b, 0.0, 0.0};
  const PotentialSpec free = PotentialSpec::free(grid.front(), grid.back());

  auto plain = [&](double e) { return analytic_free_basis(e, consts, grid, false); };
  auto rescaled = [&](double e) { return analytic_free_basis(e, consts, grid, true); };
  const EnergyStencil s_plain = EnergyStencil::build(plain, ms, free, consts, options);
  const EnergyStencil s_rescaled = EnergyStencil::build(rescaled, ms, free, consts, options);

  RescalingReport r;
  r.plain_time = floyd_time(s_plain, x);
  r.rescaled_time = floyd_time(s_rescaled, x);
  r.extra_term = r.rescaled_time - r.plain_time;

  if (t_span > 0.0) {
    Microstate absorbed = ms;
    absorbed.a = a * k;
    const ReducedActionField f_plain = build_reduced_action(plain(energy), ms, free, consts);
    const ReducedActionField f_rescaled =
        build_reduced_action(rescaled(energy), absorbed, free, consts);
    const double x0 = grid.front();
    const Trajectory t1 = integrate_bd(f_plain, x0, t_span, free, consts);
    const Trajectory t2 = integrate_bd(f_rescaled, x0, t_span, free, consts);
    r.bd_max_deviation = max_sample_deviation(t1, t2);
    r.bd_bit_identical = t1.samples.size() == t2.samples.size() &&
                         std::equal(t1.samples.begin(), t1.samples.end(), t2.samples.begin(),
                                    [](const TrajectorySample& p, const TrajectorySample& q) {
                                      return p.t == q.t && p.x == q.x;
                                    });
  }
  return r;
}

}  // namespace qhj
