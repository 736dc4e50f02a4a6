#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "qhj/basis.hpp"
#include "qhj/constants.hpp"
#include "qhj/potential.hpp"
#include "qhj/reduced_action.hpp"
#include "qhj/trajectory.hpp"

namespace qhj {

struct GridSpec {
  double x_min = 0.0;
  double x_max = 1.0;
  std::size_t points = 4001;
};

struct BasisSpec {
  enum class Kind { Analytic, Numeric };
  Kind kind = Kind::Analytic;
  bool rescaled = false;
  SeedPair seeds;
  std::optional<double> seed_x;
};

struct TrajectorySpec {
  double x0 = 0.0;
  double t_span = 1.0;
  std::optional<double> x_stop;
  double cadence = 1e-2;
  double step_tolerance = 1e-10;
};

struct ComparisonSpec {
  double x_start = 0.0;
  double x_end = 1.0;
  std::size_t points = 50;
};

struct TransformSpec {
  std::string label;
  BasisTransform transform;
};

struct RandomTransformSpec {
  std::size_t count = 0;
  double range = 2.0;
  double min_abs_determinant = 0.2;
};

struct ContradictionSpec {
  double a = 1.0;
  double k = 1.0;
  WavenumberFunction f = WavenumberFunction::identity();
};

struct RescalingSpec {
  double k = 1.0;
  double x = 0.5;
  double a = 1.0;
  double b = 0.0;
  double t_span = 1.0;
};

// Pass thresholds. Names match the check names in the run report.
struct ToleranceSet {
  double wronskian_analytic = 1e-8;
  double wronskian_numeric = 1e-6;
  double schrodinger_residual = 1e-6;
  double qshje_analytic = 1e-10;
  double qshje_numeric = 1e-6;
  double bd_action_relation = 1e-8;
  double action_identity = 1e-8;
  double hamiltonian = 1e-10;
  double canonical_velocity = 1e-10;
  double floyd_closed_form = 1e-6;
  double classical_coincidence = 1e-9;
  double jacobi_gap = 1e-5;
  double fm_relation_analytic = 1e-5;
  double fm_relation_numeric = 1e-4;
  double momentum_match = 1e-10;
  double bd_invariance_analytic = 1e-8;
  double bd_invariance_numeric = 1e-6;
  double fm_proposal = 1e-5;
  double floyd_dependence = 1e-2;  // a finding, not a pass/fail threshold
  double contradiction_gap = 0.1;
  double contradiction_zero = 1e-10;

  double* lookup(const std::string& name);
  void scale(double factor);
};

struct ScenarioConfig {
  std::string name = "scenario";
  PhysicalConstants constants;
  PotentialSpec potential;
  GridSpec grid;
  BasisSpec basis;
  std::vector<Microstate> microstates;
  std::set<Law> laws{Law::BD, Law::FloydJacobi, Law::XhatJacobi};
  TrajectorySpec trajectory;
  ComparisonSpec comparison;
  std::vector<TransformSpec> transforms;
  RandomTransformSpec random_transforms;
  std::optional<ContradictionSpec> contradiction;
  std::optional<RescalingSpec> rescaling;
  StencilOptions stencil;
  ToleranceSet tolerances;
  std::uint64_t seed = 42;
  std::optional<std::filesystem::path> output_dir;
};

// Parses and validates a scenario. Relative file references resolve against
// base_dir. Violations raise ConfigError naming the field and constraint.
ScenarioConfig parse_scenario(const std::string& text,
                              const std::filesystem::path& base_dir = {});
ScenarioConfig load_scenario(const std::filesystem::path& path);

// Name -> text of the scenarios compiled into the library.
const std::map<std::string, std::string>& builtin_fixtures();

struct CheckResult {
  std::string name;
  bool passed = false;
  double value = 0.0;
  double threshold = 0.0;
  std::string relation;  // "<", ">" or "==": passes when value relation threshold
  std::string note;
};

struct StageResult {
  std::string name;
  bool ok = true;
  std::string error;
  double seconds = 0.0;
};

struct Finding {
  std::string name;
  double value = 0.0;
  bool flag = false;
  std::string note;
};

struct RunReport {
  std::string scenario;
  std::uint64_t seed = 0;
  std::vector<CheckResult> checks;
  std::vector<StageResult> stages;
  std::vector<Finding> findings;
  std::vector<std::string> files;

  bool all_passed() const;
  // 0 when every check passed and no stage failed, 1 otherwise.
  int exit_code() const;
  const CheckResult* find_check(const std::string& name) const;
  const Finding* find_finding(const std::string& name) const;
};

struct RunOptions {
  std::optional<std::filesystem::path> output_dir;  // no artifacts when unset
};

// basis -> field -> trajectories -> comparisons -> invariance. A failing stage
// marks itself failed and skips the stages that depend on it.
RunReport run_scenario(const ScenarioConfig& config, const RunOptions& options = {});

}  // namespace qhj
