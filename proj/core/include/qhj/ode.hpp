#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>

#include "qhj/errors.hpp"

// Adaptive Dormand-Prince 5(4) with Hairer's fourth-order dense output.
namespace qhj::ode {

template <std::size_t N>
using State = std::array<double, N>;

struct StepControl {
  double rtol = 1e-10;
  double atol = 1e-10;
  double initial_step = 1e-3;
  double max_step = std::numeric_limits<double>::infinity();
  int max_rejections = 200;
};

template <std::size_t N>
struct AcceptedStep {
  double t0 = 0.0;
  double t1 = 0.0;
  State<N> y0{};
  State<N> y1{};
  double error_estimate = 0.0;  // max abs local error component
  std::array<State<N>, 5> rcont{};

  State<N> operator()(double t) const {
    const double h = t1 - t0;
    const double s = (t - t0) / h;
    const double s1 = 1.0 - s;
    State<N> out;
    for (std::size_t i = 0; i < N; ++i) {
      out[i] = rcont[0][i] +
               s * (rcont[1][i] + s1 * (rcont[2][i] + s * (rcont[3][i] + s1 * rcont[4][i])));
    }
    return out;
  }
};

template <std::size_t N>
class DormandPrince {
 public:
  using Rhs = std::function<State<N>(double, const State<N>&)>;

  DormandPrince(Rhs rhs, StepControl control) : rhs_(std::move(rhs)), control_(control) {
    h_ = control_.initial_step;
  }

  void reset(double t, const State<N>& y) {
    t_ = t;
    y_ = y;
    k1_ = rhs_(t_, y_);
    h_ = std::min(control_.initial_step, control_.max_step);
  }

  double time() const { return t_; }
  const State<N>& state() const { return y_; }
  const State<N>& derivative() const { return k1_; }

  // Takes one accepted step, never past t_limit. RHS evaluations that raise
  // DomainError count as rejections and halve the step.
  AcceptedStep<N> step(double t_limit) {
    int rejections = 0;
    for (;;) {
      double h = std::min({h_, control_.max_step, t_limit - t_});
      if (!(h > 1e-14 * std::max(1.0, std::abs(t_)))) {
        throw IntegrationFailure("step size underflow");
      }
      State<N> k2, k3, k4, k5, k6, k7, y1, y_stage;
      bool domain_failure = false;
      try {
        for (std::size_t i = 0; i < N; ++i) y_stage[i] = y_[i] + h * (a21 * k1_[i]);
        k2 = rhs_(t_ + c2 * h, y_stage);
        for (std::size_t i = 0; i < N; ++i) y_stage[i] = y_[i] + h * (a31 * k1_[i] + a32 * k2[i]);
        k3 = rhs_(t_ + c3 * h, y_stage);
        for (std::size_t i = 0; i < N; ++i)
          y_stage[i] = y_[i] + h * (a41 * k1_[i] + a42 * k2[i] + a43 * k3[i]);
        k4 = rhs_(t_ + c4 * h, y_stage);
        for (std::size_t i = 0; i < N; ++i)
          y_stage[i] = y_[i] + h * (a51 * k1_[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
        k5 = rhs_(t_ + c5 * h, y_stage);
        for (std::size_t i = 0; i < N; ++i)
          y_stage[i] = y_[i] + h * (a61 * k1_[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] +
                                    a65 * k5[i]);
        k6 = rhs_(t_ + h, y_stage);
        for (std::size_t i = 0; i < N; ++i)
          y1[i] = y_[i] + h * (a71 * k1_[i] + a73 * k3[i] + a74 * k4[i] + a75 * k5[i] +
                               a76 * k6[i]);
        k7 = rhs_(t_ + h, y1);
      } catch (const DomainError&) {
        domain_failure = true;
      }
      if (domain_failure) {
        h_ = 0.5 * h;
        if (++rejections > control_.max_rejections) {
          throw IntegrationFailure("too many rejected steps");
        }
        continue;
      }

      double err2 = 0.0;
      double max_abs_err = 0.0;
      for (std::size_t i = 0; i < N; ++i) {
        const double e = h * (e1 * k1_[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] +
                              e7 * k7[i]);
        const double sc =
            control_.atol + control_.rtol * std::max(std::abs(y_[i]), std::abs(y1[i]));
        err2 += (e / sc) * (e / sc);
        max_abs_err = std::max(max_abs_err, std::abs(e));
      }
      const double err = std::sqrt(err2 / static_cast<double>(N));
      const double factor =
          err == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0);
      if (err <= 1.0) {
        AcceptedStep<N> out;
        out.t0 = t_;
        out.t1 = t_ + h;
        out.y0 = y_;
        out.y1 = y1;
        out.error_estimate = max_abs_err;
        for (std::size_t i = 0; i < N; ++i) {
          const double dy = y1[i] - y_[i];
          const double bspl = h * k1_[i] - dy;
          out.rcont[0][i] = y_[i];
          out.rcont[1][i] = dy;
          out.rcont[2][i] = bspl;
          out.rcont[3][i] = dy - h * k7[i] - bspl;
          out.rcont[4][i] = h * (d1 * k1_[i] + d3 * k3[i] + d4 * k4[i] + d5 * k5[i] +
                                 d6 * k6[i] + d7 * k7[i]);
        }
        t_ = out.t1;
        y_ = y1;
        k1_ = k7;
        h_ = h * (rejections > 0 ? std::min(1.0, factor) : factor);
        return out;
      }
      h_ = h * std::max(0.2, factor);
      if (++rejections > control_.max_rejections) {
        throw IntegrationFailure("too many rejected steps");
      }
    }
  }

 private:
  static constexpr double c2 = 1.0 / 5.0, c3 = 3.0 / 10.0, c4 = 4.0 / 5.0, c5 = 8.0 / 9.0;
  static constexpr double a21 = 1.0 / 5.0;
  static constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
  static constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
  static constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0,
                          a53 = 64448.0 / 6561.0, a54 = -212.0 / 729.0;
  static constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0,
                          a63 = 46732.0 / 5247.0, a64 = 49.0 / 176.0,
                          a65 = -5103.0 / 18656.0;
  static constexpr double a71 = 35.0 / 384.0, a73 = 500.0 / 1113.0, a74 = 125.0 / 192.0,
                          a75 = -2187.0 / 6784.0, a76 = 11.0 / 84.0;
  static constexpr double e1 = 71.0 / 57600.0, e3 = -71.0 / 16695.0, e4 = 71.0 / 1920.0,
                          e5 = -17253.0 / 339200.0, e6 = 22.0 / 525.0, e7 = -1.0 / 40.0;
  static constexpr double d1 = -12715105075.0 / 11282082432.0,
                          d3 = 87487479700.0 / 32700410799.0,
                          d4 = -10690763975.0 / 1880347072.0,
                          d5 = 701980252875.0 / 199316789632.0,
                          d6 = -1453857185.0 / 822651844.0,
                          d7 = 69997945.0 / 29380423.0;

  Rhs rhs_;
  StepControl control_;
  double t_ = 0.0;
  double h_ = 1e-3;
  State<N> y_{};
  State<N> k1_{};
};

}  // namespace qhj::ode
