#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "qhj/reduced_action.hpp"
#include "qhj/trajectory.hpp"

namespace qhj {

// x-aligned times under each law plus the Jacobi gap column.
struct ComparisonTable {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

// Rows come from the Jacobi-law trajectories (which must share x samples),
// or from the BD samples when only BD trajectories are given. BD times are
// interpolated at the row positions. Throws AlignmentError on empty input,
// duplicate laws, or ranges that do not line up.
ComparisonTable build_comparison_table(const std::vector<Trajectory>& trajectories,
                                       const std::vector<GapSample>& gaps = {});

// 12 significant digits, header row, RFC-4180 compatible.
void write_csv(const ComparisonTable& table, std::ostream& out);
void emit_comparison_table(const std::vector<Trajectory>& trajectories,
                           const std::vector<GapSample>& gaps, std::ostream& out);

// Columns x, S0, P, Q, xhat, V (xhat empty where not constructed).
void write_field_csv(const ReducedActionField& field, std::ostream& out);

// Columns law, t, x, P, Q, H, L, action.
void write_trajectory_csv(const ReducedActionField& field,
                          const std::vector<Trajectory>& trajectories, std::ostream& out);

std::string format_number(double value);

}  // namespace qhj
