// Acceptance suite: one line per criterion, nonzero exit if any fails.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "qhj/invariance.hpp"
#include "qhj/trajectory.hpp"
#include "support.hpp"

using namespace qhj;
using qhj::testing::FreeSetup;
using qhj::testing::HarmonicSetup;
using qhj::testing::kUnits;

namespace {

struct Outcome {
  bool passed = false;
  std::string detail;
};

std::string fmt(const char* pattern, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, pattern, a, b, c);
  return buf;
}

std::vector<double> sample_points(double lo, double hi, std::size_t n) {
  return numerics::uniform_grid(lo, hi, n);
}

BdOptions bd_to(double x_stop) {
  BdOptions o;
  o.x_stop = x_stop;
  return o;
}

// 1. a = 1, b = 0, k = 1: BD, Floyd and xhat-Jacobi times equal x - x0.
Outcome classical_coincidence() {
  const FreeSetup setup;
  const Microstate ms{0.5, 1.0, 0.0, 0.0, 0.0};
  const ReducedActionField field = setup.field(ms);
  const EnergyStencil stencil = setup.stencil(ms);
  const Trajectory bd = integrate_bd(field, 0.0, 3.5, setup.potential, kUnits, bd_to(3.0));
  double worst = 0.0;
  for (double x : sample_points(0.05, 3.0, 50)) {
    worst = std::max(worst, std::abs(time_at_position(bd, x) - x));
    worst = std::max(worst, std::abs(floyd_time(stencil, x) - x));
    worst = std::max(worst, std::abs(xhat_jacobi_time(stencil, x) - x));
  }
  return {worst < 1e-9, fmt("max |t - (x - x0)| = %.3e (< 1e-9)", worst)};
}

// 2. a = 2, b = 0: 2E(t - t0) = S0(x) - S0(x0) along BD over x in [0, 3].
Outcome bd_action_relation() {
  const FreeSetup setup;
  const Microstate ms{0.5, 2.0, 0.0, 0.0, 0.0};
  const ReducedActionField field = setup.field(ms);
  const Trajectory bd = integrate_bd(field, 0.0, 20.0, setup.potential, kUnits, bd_to(3.0));
  const double s_start = field.action_at(0.0);
  double worst = 0.0;
  for (const TrajectorySample& s : bd.samples) {
    worst = std::max(worst, std::abs(2.0 * ms.energy * s.t - (field.action_at(s.x) - s_start)));
  }
  const bool covers = bd.samples.back().x >= 3.0 - 1e-12;
  return {covers && worst < 1e-8,
          fmt("max |2E(t - t0) - dS0| = %.3e (< 1e-8), x reached %.6g", worst,
              bd.samples.back().x)};
}

// 3. Finite-difference Floyd time against the closed form, 20 random (a, b).
Outcome floyd_closed_form() {
  const FreeSetup setup;
  std::mt19937_64 rng(2026);
  const double k = wavenumber(0.5, kUnits);
  double worst = 0.0;
  for (int draw = 0; draw < 20; ++draw) {
    double a = qhj::testing::uniform(rng, 0.2, 3.0);
    if (rng() & 1u) a = -a;
    const double b = qhj::testing::uniform(rng, -2.0, 2.0);
    const Microstate ms{0.5, a, b, 0.0, 0.0};
    const EnergyStencil stencil = setup.stencil(ms);
    for (double x : sample_points(0.05, 3.0, 50)) {
      const double closed = floyd_time_closed_free(x, k, a, b, kUnits);
      worst = std::max(worst, std::abs(floyd_time(stencil, x) - closed) / std::abs(closed));
    }
  }
  return {worst < 1e-6, fmt("max relative error = %.3e over 20 x 50 (< 1e-6)", worst)};
}

// 4. Transformed-basis Floyd time: f = 0 reduces bit-for-bit; f = k matches
// a symbolic derivative evaluated independently.
Outcome transformed_closed_form() {
  const double k = 1.0;
  bool reduces = true;
  for (double x : sample_points(0.1, 2.8, 10)) {
    for (double a : {2.0, -0.7}) {
      for (double b : {0.0, 0.4}) {
        reduces = reduces && floyd_time_closed_transformed(x, k, a, b, 0.0, 0.0, kUnits) ==
                                 floyd_time_closed_free(x, k, a, b, kUnits);
      }
    }
  }
  // d/dE arctan(a~ sin kx / (cos kx + k sin kx) + b~) at E = 1/2,
  // a~ = 5/2, b~ = -1/2, computed symbolically to 25 digits.
  const double xs[10] = {0.1, 0.4, 0.7, 1.0, 1.3, 1.6, 1.9, 2.2, 2.5, 2.8};
  const double expected[10] = {
      0.1748388722653033484546698, 0.3413932747765669231299777, 0.2538773409312091873717968,
      0.1868796422249565739836313, 0.1963133021849956816341091, 0.3006185393049750343222563,
      0.5449772636631977390405627, 1.044467361013240839586902,  2.064906389763701801921705,
      4.021666946437986219284534};
  double worst = 0.0;
  for (int i = 0; i < 10; ++i) {
    const double t = floyd_time_closed_transformed(xs[i], k, 2.5, -0.5, k, 1.0, kUnits);
    worst = std::max(worst, std::abs(t - expected[i]) / std::max(1.0, std::abs(expected[i])));
  }
  return {reduces && worst < 1e-12,
          std::string("f=0 bit-identical: ") + (reduces ? "yes" : "no") +
              fmt("; f=k max error = %.3e (< 1e-12)", worst)};
}

// 5. Brute-force (a~, b~) sweep of the two matching residuals.
Outcome contradiction() {
  const SweepResult dependent = contradiction_sweep(1.0, 1.0, 1.0, 1.0);
  const SweepResult fixed = contradiction_sweep(1.0, 1.0, 0.0, 0.0);
  const SweepResult constant = contradiction_sweep(1.0, 1.0, 0.5, 0.0);
  const bool ok = dependent.min_max_residual > 0.1 && fixed.min_max_residual < 1e-10 &&
                  constant.min_max_residual < 1e-10;
  return {ok, fmt("f=k: min max(r_half, r_three_half) = %.4f (> 0.1); f=0: %.3e, f=1/2: %.3e (< 1e-10)",
                  dependent.min_max_residual, fixed.min_max_residual,
                  constant.min_max_residual)};
}

// 6. BD invariance under 50 random nondegenerate transforms, free and harmonic.
Outcome bd_invariance() {
  double match_worst = 0.0;
  double free_dev = 0.0;
  double harmonic_dev = 0.0;
  std::mt19937_64 rng(42);
  {
    const FreeSetup setup;
    const Microstate ms{0.5, 2.0, 0.0, 0.0, 0.0};
    const SolutionBasis basis = setup.factory()(ms.energy);
    for (int i = 0; i < 50; ++i) {
      const auto t = BasisTransform::general(qhj::testing::random_transform(rng));
      const InvarianceResult r =
          bd_invariance_check(ms, t, basis, setup.potential, kUnits, 0.0, 10.0, bd_to(3.0));
      match_worst = std::max(match_worst, r.matched.residual);
      free_dev = std::max(free_dev, r.max_deviation);
    }
  }
  {
    const HarmonicSetup setup;
    const Microstate ms{1.2, 1.5, 0.3, 0.0, 0.0};
    const SolutionBasis basis = setup.factory()(ms.energy);
    for (int i = 0; i < 50; ++i) {
      const auto t = BasisTransform::general(qhj::testing::random_transform(rng));
      const InvarianceResult r =
          bd_invariance_check(ms, t, basis, setup.potential, kUnits, -1.1, 10.0, bd_to(1.1));
      match_worst = std::max(match_worst, r.matched.residual);
      harmonic_dev = std::max(harmonic_dev, r.max_deviation);
    }
  }
  return {match_worst < 1e-10 && free_dev < 1e-8 && harmonic_dev < 1e-6,
          fmt("momentum %.3e (< 1e-10), BD free %.3e (< 1e-8), harmonic %.3e (< 1e-6)",
              match_worst, free_dev, harmonic_dev)};
}

// 7. P^2/2m + V + Q = E on analytic and Numerov bases.
Outcome qshje_closure() {
  double analytic = 0.0;
  for (bool rescaled : {false, true}) {
    FreeSetup setup;
    setup.rescaled = rescaled;
    for (const Microstate& ms : {Microstate{0.5, 2.0, 0.0, 0.0, 0.0},
                                 Microstate{0.5, 0.7, -0.4, 0.0, 0.0},
                                 Microstate{0.0, 1.5, 0.3, 0.0, 0.0}}) {
      analytic = std::max(analytic, qshje_residual(setup.field(ms), setup.potential, kUnits));
    }
  }
  const HarmonicSetup harmonic;
  const double numeric = qshje_residual(harmonic.field({1.2, 1.5, 0.3, 0.0, 0.0}),
                                        harmonic.potential, kUnits);
  return {analytic < 1e-10 && numeric < 1e-6,
          fmt("analytic %.3e (< 1e-10), Numerov h=1e-3 %.3e (< 1e-6)", analytic, numeric)};
}

double worst_fm(const EnergyStencil& stencil, const std::vector<double>& xs) {
  double worst = 0.0;
  for (double x : xs) worst = std::max(worst, fm_relation_check(stencil, x));
  return worst;
}

// 8. P = m (1 - dQ/dE) xdot_Floyd.
Outcome fm_relation() {
  const double free_err =
      worst_fm(FreeSetup{}.stencil({0.5, 2.0, 0.0, 0.0, 0.0}), sample_points(0.05, 3.0, 50));
  const double harmonic_err = worst_fm(HarmonicSetup{}.stencil({1.2, 1.5, 0.3, 0.0, 0.0}),
                                       sample_points(-1.1, 1.1, 50));
  return {free_err < 1e-5 && harmonic_err < 1e-4,
          fmt("free a=2 %.3e (< 1e-5), harmonic %.3e (< 1e-4)", free_err, harmonic_err)};
}

template <typename Setup>
void hamiltonian_errors(const Setup& setup, const Microstate& ms, double x0, double x_stop,
                        double& h_err, double& v_err) {
  const ReducedActionField field = setup.field(ms);
  const Trajectory bd = integrate_bd(field, x0, 20.0, setup.potential, kUnits, bd_to(x_stop));
  for (const HamiltonianSample& s : hamiltonian_along(field, bd, setup.potential, kUnits)) {
    h_err = std::max(h_err, std::abs(s.H - ms.energy));
    v_err = std::max(v_err, std::abs(s.canonical_velocity - s.bd_velocity));
  }
}

// 9. H = E and canonical velocity = BD velocity along BD trajectories.
Outcome hamiltonian() {
  double h_err = 0.0;
  double v_err = 0.0;
  hamiltonian_errors(FreeSetup{}, {0.5, 2.0, 0.0, 0.0, 0.0}, 0.0, 3.0, h_err, v_err);
  hamiltonian_errors(FreeSetup{}, {0.5, 0.7, -0.4, 0.0, 0.0}, 0.0, 3.0, h_err, v_err);
  hamiltonian_errors(HarmonicSetup{}, {1.2, 1.5, 0.3, 0.0, 0.0}, -1.1, 1.1, h_err, v_err);
  return {h_err < 1e-10 && v_err < 1e-10,
          fmt("|H - E| = %.3e, |xdot_can - xdot_BD| = %.3e (< 1e-10)", h_err, v_err)};
}

double worst_gap(const EnergyStencil& stencil, const std::vector<double>& xs) {
  double worst = 0.0;
  for (double x : xs) worst = std::max(worst, jacobi_gap(stencil, x).residual);
  return worst;
}

// 10. t_Floyd - t_xhat = sqrt(2m(E - V)) [dxhat/dE]_x at default stencil.
Outcome gap_identity() {
  const double free_err =
      worst_gap(FreeSetup{}.stencil({0.5, 2.0, 0.0, 0.0, 0.0}), sample_points(0.05, 3.0, 50));
  const double harmonic_err = worst_gap(HarmonicSetup{}.stencil({1.2, 1.5, 0.3, 0.0, 0.0}),
                                        sample_points(-1.1, 1.1, 50));
  return {free_err < 1e-5 && harmonic_err < 1e-5,
          fmt("free %.3e, harmonic %.3e (< 1e-5)", free_err, harmonic_err)};
}

template <typename Setup>
double action_error(const Setup& setup, const Microstate& ms, double x0, double x_stop) {
  const ReducedActionField field = setup.field(ms);
  const Trajectory bd = integrate_bd(field, x0, 20.0, setup.potential, kUnits, bd_to(x_stop));
  const double s_start = field.action_at(x0);
  double worst = 0.0;
  for (const TrajectorySample& s : bd.samples) {
    const double expected = field.action_at(s.x) - s_start - ms.energy * (s.t - ms.t0);
    worst = std::max(worst, std::abs(s.action - expected));
  }
  return worst;
}

// 11. Integral of L dt = S0 - E (t - t0) + const.
Outcome action_identity() {
  double worst = action_error(FreeSetup{}, {0.5, 2.0, 0.0, 0.0, 0.0}, 0.0, 3.0);
  worst = std::max(worst, action_error(FreeSetup{}, {0.5, 0.7, -0.4, 0.0, 0.3}, 0.0, 3.0));
  worst = std::max(worst, action_error(HarmonicSetup{}, {1.2, 1.5, 0.3, 0.0, 0.0}, -1.1, 1.1));
  return {worst < 1e-8, fmt("max |int L dt - (dS0 - E dt)| = %.3e (< 1e-8)", worst)};
}

// 12. (sin(kx)/k, cos kx) changes the Floyd time; BD is bit-identical.
Outcome rescaling() {
  const RescalingReport r = rescaling_report(1.0, 0.5, 1.0, 0.0, kUnits);
  const bool ok = std::abs(r.extra_term) > 1e-8 && r.bd_bit_identical;
  return {ok, fmt("extra term = %.12f (nonzero), BD max deviation = %.1e", r.extra_term,
                  r.bd_max_deviation) +
                  (r.bd_bit_identical ? " (bit-identical)" : " (NOT bit-identical)")};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"classical coincidence", classical_coincidence},
      {"BD action relation", bd_action_relation},
      {"Floyd closed form", floyd_closed_form},
      {"transformed-basis closed form", transformed_closed_form},
      {"matching contradiction", contradiction},
      {"BD basis invariance", bd_invariance},
      {"QSHJE closure", qshje_closure},
      {"FM relation", fm_relation},
      {"Hamiltonian identities", hamiltonian},
      {"Jacobi gap identity", gap_identity},
      {"action identity", action_identity},
      {"rescaling pathology", rescaling},
  };
  int failures = 0;
  int index = 0;
  for (const auto& [name, run] : criteria) {
    ++index;
    const auto start = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = run();
    } catch (const std::exception& e) {
      out = {false, std::string("threw: ") + e.what()};
    }
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (seconds >= 10.0) {
      out.passed = false;
      out.detail += " [exceeded 10 s]";
    }
    failures += out.passed ? 0 : 1;
    std::printf("[%s] AC%02d %s: %s (%.2f s)\n", out.passed ? "PASS" : "FAIL", index, name,
                out.detail.c_str(), seconds);
  }
  std::printf("%d/%zu criteria passed\n", index - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
