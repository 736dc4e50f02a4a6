#include "qhj/potential.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "qhj/errors.hpp"

namespace qhj {

std::string to_string(PotentialKind kind) {
  switch (kind) {
    case PotentialKind::Free:
      return "free";
    case PotentialKind::Harmonic:
      return "harmonic";
    case PotentialKind::Linear:
      return "linear";
    case PotentialKind::Tabulated:
      return "tabulated";
  }
  return "unknown";
}

PotentialKind potential_kind_from_string(const std::string& name) {
  if (name == "free") return PotentialKind::Free;
  if (name == "harmonic") return PotentialKind::Harmonic;
  if (name == "linear") return PotentialKind::Linear;
  if (name == "tabulated") return PotentialKind::Tabulated;
  throw PreconditionError("unknown potential kind '" + name + "'");
}

PotentialSpec::PotentialSpec(PotentialKind kind, std::vector<double> params,
                             double x_min, double x_max)
    : kind_(kind), params_(std::move(params)), x_min_(x_min), x_max_(x_max) {
  if (!(x_min < x_max) || !std::isfinite(x_min) || !std::isfinite(x_max)) {
    throw PreconditionError("potential domain must satisfy x_min < x_max");
  }
  for (double p : params_) {
    if (!std::isfinite(p)) throw PreconditionError("potential parameter is not finite");
  }
}

PotentialSpec PotentialSpec::free(double x_min, double x_max) {
  return PotentialSpec(PotentialKind::Free, {}, x_min, x_max);
}

PotentialSpec PotentialSpec::harmonic(double stiffness, double x_min,
                                      double x_max, double center) {
  if (!(stiffness > 0.0)) throw PreconditionError("harmonic stiffness must be positive");
  return PotentialSpec(PotentialKind::Harmonic, {stiffness, center}, x_min, x_max);
}

PotentialSpec PotentialSpec::linear(double slope, double offset, double x_min,
                                    double x_max) {
  return PotentialSpec(PotentialKind::Linear, {slope, offset}, x_min, x_max);
}

PotentialSpec PotentialSpec::tabulated(std::vector<double> xs,
                                       std::vector<double> vs, double x_min,
                                       double x_max) {
  if (xs.size() != vs.size() || xs.size() < 2) {
    throw PreconditionError("tabulated potential needs at least two (x, V) samples");
  }
  for (std::size_t i = 1; i < xs.size(); ++i) {
    if (!(xs[i] > xs[i - 1])) {
      throw PreconditionError("tabulated potential samples must be strictly increasing in x");
    }
  }
  for (double v : vs) {
    if (!std::isfinite(v)) throw PreconditionError("tabulated potential value is not finite");
  }
  if (xs.front() > x_min || xs.back() < x_max) {
    throw PreconditionError("tabulated potential samples do not cover the domain");
  }
  PotentialSpec spec(PotentialKind::Tabulated, {}, x_min, x_max);

  // Natural cubic spline, tridiagonal solve for the second derivatives.
  const std::size_t n = xs.size();
  std::vector<double> second(n, 0.0);
  std::vector<double> u(n, 0.0);
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const double sig = (xs[i] - xs[i - 1]) / (xs[i + 1] - xs[i - 1]);
    const double p = sig * second[i - 1] + 2.0;
    second[i] = (sig - 1.0) / p;
    const double slope_diff = (vs[i + 1] - vs[i]) / (xs[i + 1] - xs[i]) -
                              (vs[i] - vs[i - 1]) / (xs[i] - xs[i - 1]);
    u[i] = (6.0 * slope_diff / (xs[i + 1] - xs[i - 1]) - sig * u[i - 1]) / p;
  }
  second[n - 1] = 0.0;
  for (std::size_t i = n - 1; i-- > 0;) {
    second[i] = second[i] * second[i + 1] + u[i];
  }
  second[0] = 0.0;

  spec.knots_ = std::move(xs);
  spec.values_ = std::move(vs);
  spec.second_ = std::move(second);
  return spec;
}

PotentialSpec PotentialSpec::from_csv(const std::filesystem::path& path,
                                      double x_min, double x_max) {
  std::ifstream in(path);
  if (!in) throw PreconditionError("cannot open potential table " + path.string());
  std::string line;
  if (!std::getline(in, line)) {
    throw PreconditionError("potential table " + path.string() + " is empty");
  }
  std::vector<double> xs, vs;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) {
      throw PreconditionError("potential table line " + std::to_string(line_no) +
                              ": expected two comma-separated columns");
    }
    try {
      const double x = std::stod(line.substr(0, comma));
      const double v = std::stod(line.substr(comma + 1));
      xs.push_back(x);
      vs.push_back(v);
    } catch (const std::logic_error&) {
      throw PreconditionError("potential table line " + std::to_string(line_no) +
                              ": not a number");
    }
  }
  return tabulated(std::move(xs), std::move(vs), x_min, x_max);
}

double PotentialSpec::operator()(double x) const {
  switch (kind_) {
    case PotentialKind::Free:
      return 0.0;
    case PotentialKind::Harmonic: {
      const double d = x - params_[1];
      return 0.5 * params_[0] * d * d;
    }
    case PotentialKind::Linear:
      return params_[1] + params_[0] * x;
    case PotentialKind::Tabulated: {
      if (x < knots_.front() || x > knots_.back()) {
        throw DomainError("x outside tabulated potential range");
      }
      auto it = std::upper_bound(knots_.begin(), knots_.end(), x);
      std::size_t hi = static_cast<std::size_t>(it - knots_.begin());
      if (hi >= knots_.size()) hi = knots_.size() - 1;
      const std::size_t lo = hi - 1;
      const double h = knots_[hi] - knots_[lo];
      const double a = (knots_[hi] - x) / h;
      const double b = (x - knots_[lo]) / h;
      return a * values_[lo] + b * values_[hi] +
             ((a * a * a - a) * second_[lo] + (b * b * b - b) * second_[hi]) *
                 (h * h) / 6.0;
    }
  }
  return 0.0;
}

std::vector<double> PotentialSpec::sample(std::span<const double> grid) const {
  std::vector<double> out(grid.size());
  std::transform(grid.begin(), grid.end(), out.begin(),
                 [this](double x) { return (*this)(x); });
  return out;
}

std::string PotentialSpec::describe() const {
  std::ostringstream os;
  os << to_string(kind_);
  switch (kind_) {
    case PotentialKind::Harmonic:
      os << "(stiffness=" << params_[0] << ", center=" << params_[1] << ")";
      break;
    case PotentialKind::Linear:
      os << "(slope=" << params_[0] << ", offset=" << params_[1] << ")";
      break;
    case PotentialKind::Tabulated:
      os << "(" << knots_.size() << " samples)";
      break;
    case PotentialKind::Free:
      break;
  }
  return os.str();
}

}  // namespace qhj
