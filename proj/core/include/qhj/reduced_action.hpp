#pragma once

#include <string>
#include <vector>

#include "qhj/basis.hpp"
#include "qhj/constants.hpp"
#include "qhj/potential.hpp"

namespace qhj {

// Integration constants selecting one trajectory. (E, a, b) are treated as
// independent of each other when energy derivatives are taken.
struct Microstate {
  double energy = 0.5;
  double a = 1.0;
  double b = 0.0;
  double lambda = 0.0;
  double t0 = 0.0;

  void validate() const;
  Microstate with_energy(double e) const {
    Microstate m = *this;
    m.energy = e;
    return m;
  }
};

// Momentum, its derivatives and the quantum potential at one point, from the
// closed forms
//   N = a phi1 + b phi2,  D = phi2,  R = N^2 + D^2,
//   P = hbar a W / R,
//   P' = -P R'/R,  P'' = P (2 R'^2/R^2 - R''/R),
// with R'' = 2 (N'^2 + D'^2 + q R) since N and D solve phi'' = q phi.
struct LocalState {
  double principal_phase = 0.0;  // arctan(N/D) in [-pi/2, pi/2]
  double P = 0.0;
  double dP = 0.0;
  double d2P = 0.0;
  double Q = 0.0;
};

LocalState local_state(const BasisSample& s, double curvature, double a, double b,
                       double wronskian, const PhysicalConstants& consts);

// Q = (hbar^2 / 4m) [P''/P - (3/2)(P'/P)^2].
double quantum_potential_value(double P, double dP, double d2P,
                               const PhysicalConstants& consts);

struct FieldPoint {
  double x = 0.0;
  double S0 = 0.0;
  double P = 0.0;
  double dP = 0.0;
  double d2P = 0.0;
  double Q = 0.0;
  double V = 0.0;
};

struct FieldOptions {
  // Quantum coordinate and BD machinery need E - V > epsilon.
  double turning_epsilon = 1e-9;
};

struct ReducedActionField {
  std::vector<double> grid;
  std::vector<double> phase;  // unwrapped arctan, S0 = hbar (phase + lambda)
  std::vector<double> S0;
  std::vector<double> P;
  std::vector<double> dP;
  std::vector<double> d2P;
  std::vector<double> Q;
  std::vector<double> V;
  std::vector<double> xhat;  // empty when has_xhat is false
  bool has_xhat = false;
  std::string xhat_note;

  Microstate microstate;
  std::string basis_id;
  SolutionBasis basis;
  PotentialSpec potential;
  PhysicalConstants consts;
  double turning_epsilon = 1e-9;

  double energy() const { return microstate.energy; }
  double x_min() const { return grid.front(); }
  double x_max() const { return grid.back(); }

  // Closed-form evaluation at an arbitrary x, with the S0 branch chosen to
  // continue the grid unwrapping.
  FieldPoint at(double x) const;
  double action_at(double x) const;
  // dxhat/dx = P / sqrt(2m(E - V)).
  double xhat_slope(double x) const;
  double xhat_at(double x) const;
  // x with xhat(x) = target; DomainError if target lies outside the grid image.
  double xhat_inverse(double target) const;
};

// S0 = hbar [arctan(a phi1/phi2 + b) + n(x) pi] + hbar lambda with the winding
// n(x) making S0 continuous, n(x_min) = 0.
ReducedActionField build_reduced_action(const SolutionBasis& basis, const Microstate& ms,
                                        const PotentialSpec& potential,
                                        const PhysicalConstants& consts,
                                        const FieldOptions& options = {});

std::vector<double> quantum_potential(const ReducedActionField& field);

// max |P^2/2m + V + Q - E| over the grid.
double qshje_residual(const ReducedActionField& field, const PotentialSpec& potential,
                      const PhysicalConstants& consts);

// xhat(x) = x_min + integral of P / sqrt(2m(E - V)) by cumulative Simpson.
// Throws TurningPointError where E - V <= epsilon.
std::vector<double> quantum_coordinate(const ReducedActionField& field,
                                       const PotentialSpec& potential,
                                       const PhysicalConstants& consts,
                                       double epsilon = 1e-9);

// L = P xdot - P^2/2m - V - Q, the higher-derivative Lagrangian after the
// quantum potential is substituted into its bracket.
double lagrangian_along(const ReducedActionField& field, double x, double xdot,
                        const PotentialSpec& potential, const PhysicalConstants& consts);

}  // namespace qhj
