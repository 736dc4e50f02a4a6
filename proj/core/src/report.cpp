#include "qhj/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <set>

#include "qhj/errors.hpp"

namespace qhj {

std::string format_number(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", value);
  return buf;
}

ComparisonTable build_comparison_table(const std::vector<Trajectory>& trajectories,
                                       const std::vector<GapSample>& gaps) {
  if (trajectories.empty()) throw AlignmentError("no trajectories to compare");
  std::set<Law> seen;
  for (const Trajectory& t : trajectories) {
    if (!seen.insert(t.law).second) {
      throw AlignmentError("more than one trajectory for law " + to_string(t.law));
    }
    if (t.samples.empty()) throw AlignmentError("trajectory " + to_string(t.law) + " is empty");
  }
  const Trajectory* bd = nullptr;
  const Trajectory* floyd = nullptr;
  const Trajectory* xhat = nullptr;
  for (const Trajectory& t : trajectories) {
    if (t.law == Law::BD) bd = &t;
    if (t.law == Law::FloydJacobi) floyd = &t;
    if (t.law == Law::XhatJacobi) xhat = &t;
  }
  const Microstate& ms = trajectories.front().microstate;
  for (const Trajectory& t : trajectories) {
    const Microstate& m = t.microstate;
    if (m.energy != ms.energy || m.a != ms.a || m.b != ms.b || m.t0 != ms.t0) {
      throw AlignmentError("trajectories do not share a microstate");
    }
  }

  std::vector<double> xs;
  std::size_t count = 0;
  const Trajectory* jacobi_ref = floyd ? floyd : xhat;
  if (jacobi_ref) {
    count = jacobi_ref->samples.size();
    for (const Trajectory* t : {floyd, xhat}) {
      if (t) count = std::min(count, t->samples.size());
    }
    for (std::size_t i = 0; i < count; ++i) {
      const double x = jacobi_ref->samples[i].x;
      for (const Trajectory* t : {floyd, xhat}) {
        if (t && t->samples[i].x != x) {
          throw AlignmentError("Jacobi-law trajectories are sampled at different positions");
        }
      }
      xs.push_back(x);
    }
  } else {
    for (const TrajectorySample& s : bd->samples) xs.push_back(s.x);
    count = xs.size();
  }
  if (!gaps.empty()) {
    if (gaps.size() < count) throw AlignmentError("gap column shorter than the table");
    for (std::size_t i = 0; i < count; ++i) {
      if (gaps[i].x != xs[i]) throw AlignmentError("gap samples are at different positions");
    }
  }

  ComparisonTable table;
  table.columns.push_back("x");
  if (bd) table.columns.push_back("t_bd");
  if (floyd) table.columns.push_back("t_floyd");
  if (xhat) table.columns.push_back("t_xhat");
  if (!gaps.empty()) table.columns.push_back("jacobi_gap");

  for (std::size_t i = 0; i < count; ++i) {
    std::vector<double> row{xs[i]};
    if (bd) {
      if (jacobi_ref) {
        try {
          row.push_back(time_at_position(*bd, xs[i]));
        } catch (const DomainError&) {
          throw AlignmentError("BD trajectory does not cover the comparison range");
        }
      } else {
        row.push_back(bd->samples[i].t);
      }
    }
    if (floyd) row.push_back(floyd->samples[i].t);
    if (xhat) row.push_back(xhat->samples[i].t);
    if (!gaps.empty()) row.push_back(gaps[i].floyd - gaps[i].xhat_jacobi);
    table.rows.push_back(std::move(row));
  }
  return table;
}

void write_csv(const ComparisonTable& table, std::ostream& out) {
  for (std::size_t c = 0; c < table.columns.size(); ++c) {
    out << (c ? "," : "") << table.columns[c];
  }
  out << "\n";
  for (const auto& row : table.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      out << (c ? "," : "") << format_number(row[c]);
    }
    out << "\n";
  }
}

void emit_comparison_table(const std::vector<Trajectory>& trajectories,
                           const std::vector<GapSample>& gaps, std::ostream& out) {
  write_csv(build_comparison_table(trajectories, gaps), out);
}

void write_field_csv(const ReducedActionField& field, std::ostream& out) {
  out << "x,S0,P,Q,xhat,V\n";
  for (std::size_t i = 0; i < field.grid.size(); ++i) {
    out << format_number(field.grid[i]) << ',' << format_number(field.S0[i]) << ','
        << format_number(field.P[i]) << ',' << format_number(field.Q[i]) << ','
        << (field.has_xhat ? format_number(field.xhat[i]) : std::string()) << ','
        << format_number(field.V[i]) << "\n";
  }
}

void write_trajectory_csv(const ReducedActionField& field,
                          const std::vector<Trajectory>& trajectories, std::ostream& out) {
  out << "law,t,x,P,Q,H,L,action\n";
  const double m = field.consts.mass;
  for (const Trajectory& traj : trajectories) {
    for (const TrajectorySample& s : traj.samples) {
      const FieldPoint p = field.at(s.x);
      const double kinetic = field.energy() - p.V;
      const double h = kinetic > field.turning_epsilon
                           ? p.P * p.P / (2.0 * m) * (2.0 * m * kinetic / (p.P * p.P)) + p.V
                           : std::nan("");
      const double l = p.P * s.velocity - p.P * p.P / (2.0 * m) - p.V - p.Q;
      out << to_string(traj.law) << ',' << format_number(s.t) << ',' << format_number(s.x)
          << ',' << format_number(p.P) << ',' << format_number(p.Q) << ','
          << format_number(h) << ',' << format_number(l) << ',' << format_number(s.action)
          << "\n";
    }
  }
}

}  // namespace qhj
