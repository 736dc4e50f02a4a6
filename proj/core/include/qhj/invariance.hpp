#pragma once

#include <string>

#include "qhj/basis.hpp"
#include "qhj/reduced_action.hpp"
#include "qhj/trajectory.hpp"

namespace qhj {

// Constants (a~, b~, lambda~) for which the transformed basis reproduces the
// original momentum pointwise.
struct MatchedConstants {
  double a_tilde = 0.0;
  double b_tilde = 0.0;
  double lambda_tilde = 0.0;
  double residual = 0.0;  // max |P - P~| / |P| on the grid
  bool matched = false;
  int iterations = 0;
};

struct MatchOptions {
  double tolerance = 1e-10;
  int max_iterations = 100;
};

// With A = a~ mu + b~ alpha, B = a~ nu + b~ beta and c = a~ det(T) / a, equal
// momenta require
//   A^2 + alpha^2 = c a^2,  A B + alpha beta = c a b,  B^2 + beta^2 = c (b^2 + 1).
// Solved by damped Gauss-Newton; lambda~ matches S0 at x_min.
MatchedConstants match_constants(const Microstate& ms, const TransformCoefficients& transform,
                                 const SolutionBasis& basis, const MatchOptions& options = {});
MatchedConstants match_constants(const Microstate& ms, const BasisTransform& transform,
                                 const SolutionBasis& basis, const MatchOptions& options = {});

Microstate apply_matched(const Microstate& ms, const MatchedConstants& matched);

struct InvarianceResult {
  MatchedConstants matched;
  double max_deviation = 0.0;  // max |x(t) - x~(t)| over common samples
  Trajectory original;
  Trajectory transformed;
};

InvarianceResult bd_invariance_check(const Microstate& ms, const BasisTransform& transform,
                                     const SolutionBasis& basis, const PotentialSpec& potential,
                                     const PhysicalConstants& consts, double x0, double t_span,
                                     const BdOptions& options = {});

struct ContradictionInput {
  double a = 1.0;
  double b = 0.0;  // only enters the direct curve comparison
  double a_tilde = 1.0;
  double b_tilde = 0.0;
  double k = 1.0;
  double f = 0.0;
  double dfdk = 0.0;
};

struct ContradictionReport {
  // Signed residuals of the matching conditions at x = pi/2k and x = 3pi/2k:
  //   e = a a~ (X - f') - X (a~^2 + b~^2 f^2 + f^2 + 2 a~ b~ f).
  double e_half = 0.0;
  double e_three_half = 0.0;
  double r_half = 0.0;
  double r_three_half = 0.0;
  bool joint_solvable = false;
  double dfdk = 0.0;
  // max over sampled x of |t_free(a, b) - t_transformed(a~, b~, f, f')|.
  double curve_gap = 0.0;
};

ContradictionReport floyd_contradiction(const ContradictionInput& input,
                                        const PhysicalConstants& consts,
                                        double tolerance = 1e-10, int curve_samples = 256);

struct SweepResult {
  double min_max_residual = 0.0;
  double a_tilde = 0.0;
  double b_tilde = 0.0;
};

// Brute-force minimum of max(r_half, r_three_half) on a resolution x
// resolution grid over [-half_width, half_width]^2, skipping a~ = 0.
SweepResult contradiction_sweep(double a, double k, double f, double dfdk,
                                int resolution = 501, double half_width = 5.0);

// What is held fixed when the Floyd time is taken in a transformed basis
// whose coefficients depend on E.
enum class EnergyConvention {
  // Transform coefficients and matched constants frozen at the central
  // energy: E-dependence absorbable into the constants is discarded.
  FaraggiMatone,
  // Coefficients follow E, matched constants frozen.
  TransformFollowsEnergy,
  // Coefficients follow E and the constants are re-matched at every energy.
  Rematched,
};

std::string to_string(EnergyConvention c);

double fm_proposal_time(const BasisFactory& factory, const Microstate& ms,
                        const BasisTransform& transform, const PotentialSpec& potential,
                        const PhysicalConstants& consts, double x,
                        EnergyConvention convention = EnergyConvention::FaraggiMatone,
                        const StencilOptions& options = {});

struct RescalingReport {
  double plain_time = 0.0;     // basis (sin kx, cos kx)
  double rescaled_time = 0.0;  // basis (sin(kx)/k, cos kx)
  double extra_term = 0.0;     // rescaled_time - plain_time
  double bd_max_deviation = 0.0;
  bool bd_bit_identical = false;
};

// Floyd time with (sin(kx)/k, cos kx) minus Floyd time with (sin kx, cos kx),
// both at fixed (a, b).
double rescaling_extra_term(double k, double x, double a, double b,
                            const PhysicalConstants& consts);

// Also integrates BD in both bases, with a -> a k for the rescaled one so
// that P is the same field.
RescalingReport rescaling_report(double k, double x, double a, double b,
                                 const PhysicalConstants& consts, double t_span = 1.0,
                                 const StencilOptions& options = {});

}  // namespace qhj
