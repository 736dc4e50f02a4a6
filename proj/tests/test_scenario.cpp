#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "qhj/errors.hpp"
#include "qhj/report.hpp"
#include "qhj/scenario.hpp"
#include "support.hpp"

namespace qhj {
namespace {

namespace fs = std::filesystem;

const char* kMinimal = R"({
  "potential": {"kind": "free"},
  "grid": {"x_min": 0.0, "x_max": 4.0, "points": 4001},
  "microstates": [{"E": 0.5, "a": 1.0, "b": 0.0}],
  "laws": "all",
  "trajectory": {"x0": 0.0, "t_span": 3.5, "x_stop": 3.0},
  "comparison": {"x_start": 0.05, "x_end": 3.0, "points": 50}
})";

std::string with(const std::string& from, const std::string& to) {
  std::string s = kMinimal;
  const auto pos = s.find(from);
  EXPECT_NE(pos, std::string::npos) << from;
  return s.replace(pos, from.size(), to);
}

void expect_config_error(const std::string& text, const std::string& field,
                         const std::string& constraint_part) {
  try {
    parse_scenario(text);
    FAIL() << "expected ConfigError for " << field;
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.field(), field);
    EXPECT_NE(e.constraint().find(constraint_part), std::string::npos) << e.constraint();
  }
}

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("qhj_scenario_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

TEST(ScenarioParse, AllBuiltinFixturesValidate) {
  const auto& fixtures = builtin_fixtures();
  ASSERT_EQ(fixtures.size(), 4u);
  for (const auto& [name, text] : fixtures) {
    EXPECT_NO_THROW(parse_scenario(text)) << name;
  }
}

TEST(ScenarioParse, Defaults) {
  const auto cfg = parse_scenario(kMinimal);
  EXPECT_EQ(cfg.seed, 42u);
  EXPECT_EQ(cfg.laws.size(), 3u);
  EXPECT_EQ(cfg.constants.hbar, 1.0);
  EXPECT_EQ(cfg.tolerances.jacobi_gap, 1e-5);
  EXPECT_FALSE(cfg.output_dir.has_value());
}

TEST(ScenarioParse, ZeroAIsAConfigError) {
  expect_config_error(with("\"a\": 1.0", "\"a\": 0.0"), "microstates[0].a", "a != 0");
}

TEST(ScenarioParse, TooFewGridPoints) {
  expect_config_error(with("\"points\": 4001", "\"points\": 100"), "grid.points", ">= 101");
}

TEST(ScenarioParse, NonPositiveTolerance) {
  std::string s = kMinimal;
  s.insert(s.rfind('}'), ", \"tolerances\": {\"jacobi_gap\": 0}");
  expect_config_error(s, "tolerances.jacobi_gap", "> 0");
  s = kMinimal;
  s.insert(s.rfind('}'), ", \"tolerances\": {\"gap\": 1e-3}");
  expect_config_error(s, "tolerances.gap", "unknown");
}

TEST(ScenarioParse, UnknownKeysAndKinds) {
  std::string s = kMinimal;
  s.insert(s.rfind('}'), ", \"colour\": \"red\"");
  expect_config_error(s, "colour", "unknown key");
  expect_config_error(with("\"free\"", "\"box\""), "potential.kind", "must be one of");
  expect_config_error(with("\"laws\": \"all\"", "\"laws\": [\"newton\"]"), "laws", "bd");
}

TEST(ScenarioParse, AnalyticBasisNeedsFreePotential) {
  expect_config_error(with(R"({"kind": "free"})", R"({"kind": "harmonic", "stiffness": 1})"),
                      "basis.kind", "free potential");
}

TEST(ScenarioParse, MalformedDocument) {
  expect_config_error("{ not json", "<document>", "JSON");
  expect_config_error(with("\"E\": 0.5", "\"E\": \"half\""), "microstates[0].E", "number");
}

TEST(ScenarioParse, RangeChecks) {
  expect_config_error(with("\"x0\": 0.0", "\"x0\": 7.0"), "trajectory.x0", "inside");
  expect_config_error(with("\"x_end\": 3.0", "\"x_end\": 5.0"), "comparison", "inside");
}

TEST(ScenarioParse, TabulatedPotentialResolvesRelativeToBaseDir) {
  const auto dir = scratch("tabulated");
  fs::create_directories(dir);
  {
    std::ofstream out(dir / "v.csv");
    out << "x,V\n";
    for (int i = 0; i <= 40; ++i) out << 0.1 * i << ",0\n";
  }
  const auto cfg =
      parse_scenario(with(R"({"kind": "free"})", R"({"kind": "tabulated", "file": "v.csv"})")
                         .insert(1, "\"basis\": {\"kind\": \"numeric\"},"),
                     dir);
  EXPECT_EQ(cfg.potential.kind(), PotentialKind::Tabulated);
  const auto report = run_scenario(cfg);
  EXPECT_TRUE(report.all_passed());
  fs::remove_all(dir);
}

TEST(ScenarioRun, MinimalClassicalPasses) {
  const auto report = run_scenario(parse_scenario(kMinimal));
  EXPECT_EQ(report.exit_code(), 0);
  ASSERT_NE(report.find_check("classical_coincidence[ms0]"), nullptr);
  EXPECT_TRUE(report.find_check("classical_coincidence[ms0]")->passed);
  std::set<std::string> names;
  for (const auto& c : report.checks) EXPECT_TRUE(names.insert(c.name).second) << c.name;
  EXPECT_TRUE(report.files.empty());
}

TEST(ScenarioRun, ArtifactsAreDeterministic) {
  const auto cfg = parse_scenario(builtin_fixtures().at("microstate"));
  const auto a = scratch("det_a");
  const auto b = scratch("det_b");
  const auto ra = run_scenario(cfg, {a});
  const auto rb = run_scenario(cfg, {b});
  ASSERT_EQ(ra.files, rb.files);
  EXPECT_FALSE(ra.files.empty());
  for (const auto& f : ra.files) EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
  EXPECT_TRUE(fs::exists(a / "timings.txt"));
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST(ScenarioRun, ContradictionFixtureFlagsBasisDependence) {
  const auto report = run_scenario(parse_scenario(builtin_fixtures().at("contradiction")));
  EXPECT_EQ(report.exit_code(), 0);
  const auto* f = report.find_finding("floyd_basis_dependence[f_k,ms0]");
  ASSERT_NE(f, nullptr);
  EXPECT_TRUE(f->flag);
  EXPECT_GT(f->value, 1e-2);
  EXPECT_TRUE(report.find_check("bd_invariance")->passed);
  const auto* constant = report.find_finding("floyd_basis_dependence[f_const,ms0]");
  ASSERT_NE(constant, nullptr);
  EXPECT_FALSE(constant->flag);
}

TEST(ScenarioRun, TightenedTolerancesFailWithExitOne) {
  auto cfg = parse_scenario(kMinimal);
  cfg.tolerances.scale(1e-12);
  const auto report = run_scenario(cfg);
  EXPECT_FALSE(report.all_passed());
  EXPECT_EQ(report.exit_code(), 1);
}

TEST(ScenarioRun, FailedStageSkipsDependents) {
  // A very coarse Numerov grid on a stiff well loses its Wronskian.
  const auto cfg = parse_scenario(R"({
    "potential": {"kind": "harmonic", "stiffness": 400},
    "basis": {"kind": "numeric"},
    "grid": {"x_min": -3.0, "x_max": 3.0, "points": 101},
    "microstates": [{"E": 0.5, "a": 1.0}]
  })");
  const auto report = run_scenario(cfg);
  ASSERT_GE(report.stages.size(), 2u);
  EXPECT_EQ(report.stages[0].name, "basis");
  EXPECT_FALSE(report.stages[0].ok);
  bool field_skipped = false;
  for (const auto& s : report.stages) {
    if (s.name == "field") field_skipped = !s.ok && s.error.find("skipped") != std::string::npos;
  }
  EXPECT_TRUE(field_skipped);
  EXPECT_EQ(report.exit_code(), 1);
}

TEST(ScenarioRun, SeedChangesRandomTransformsOnly) {
  auto cfg = parse_scenario(builtin_fixtures().at("microstate"));
  cfg.seed = 1234;
  const auto dir = scratch("seed");
  const auto report = run_scenario(cfg, {dir});
  EXPECT_EQ(report.seed, 1234u);
  EXPECT_NE(slurp(dir / "report.json").find("\"seed\": 1234"), std::string::npos);
  fs::remove_all(dir);
}

TEST(ComparisonTable, EmptyInputIsAnAlignmentError) {
  EXPECT_THROW(build_comparison_table({}, {}), AlignmentError);
}

class ComparisonFixture : public ::testing::Test {
 protected:
  testing::FreeSetup setup;
  Microstate ms{0.5, 2.0, 0.0, 0.0, 0.0};
  std::vector<double> xs = numerics::uniform_grid(0.05, 3.0, 20);

  Trajectory bd() {
    const auto field = setup.field(ms);
    BdOptions o;
    o.x_stop = 3.0;
    return integrate_bd(field, 0.0, 10.0, setup.potential, testing::kUnits, o);
  }
};

TEST_F(ComparisonFixture, SingleBdTrajectoryGivesTwoColumns) {
  const auto table = build_comparison_table({bd()}, {});
  ASSERT_EQ(table.columns.size(), 2u);
  EXPECT_EQ(table.columns[0], "x");
  EXPECT_EQ(table.columns[1], "t_bd");
}

TEST_F(ComparisonFixture, ThreeLawsGiveFiveOrderedColumns) {
  const auto st = setup.stencil(ms);
  std::vector<GapSample> gaps;
  for (double x : xs) gaps.push_back(jacobi_gap(st, x));
  const auto table = build_comparison_table(
      {jacobi_trajectory(st, Law::XhatJacobi, xs), bd(), jacobi_trajectory(st, Law::FloydJacobi, xs)},
      gaps);
  const std::vector<std::string> expected{"x", "t_bd", "t_floyd", "t_xhat", "jacobi_gap"};
  EXPECT_EQ(table.columns, expected);
  ASSERT_EQ(table.rows.size(), xs.size());
  for (std::size_t i = 1; i < table.rows.size(); ++i) {
    EXPECT_GT(table.rows[i][0], table.rows[i - 1][0]);
  }
  std::ostringstream out;
  write_csv(table, out);
  EXPECT_EQ(out.str().substr(0, out.str().find('\n')), "x,t_bd,t_floyd,t_xhat,jacobi_gap");
}

TEST_F(ComparisonFixture, MisalignedRangesRejected) {
  const auto st = setup.stencil(ms);
  const auto other = numerics::uniform_grid(0.1, 2.0, 20);
  EXPECT_THROW(build_comparison_table({jacobi_trajectory(st, Law::FloydJacobi, xs),
                                       jacobi_trajectory(st, Law::XhatJacobi, other)},
                                      {}),
               AlignmentError);
  EXPECT_THROW(build_comparison_table({jacobi_trajectory(st, Law::FloydJacobi, xs),
                                       jacobi_trajectory(st, Law::FloydJacobi, xs)},
                                      {}),
               AlignmentError);
  BdOptions o;
  o.x_stop = 1.0;
  const auto short_bd = integrate_bd(setup.field(ms), 0.0, 10.0, setup.potential,
                                     testing::kUnits, o);
  EXPECT_THROW(build_comparison_table({short_bd, jacobi_trajectory(st, Law::FloydJacobi, xs)}, {}),
               AlignmentError);
}

TEST(Report, TwelveSignificantDigits) {
  EXPECT_EQ(format_number(1.0 / 3.0), "0.333333333333");
  EXPECT_EQ(format_number(-2.5e-11), "-2.5e-11");
  EXPECT_EQ(format_number(3.0), "3");
}

}  // namespace
}  // namespace qhj
