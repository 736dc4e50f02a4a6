#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "qhj/errors.hpp"
#include "qhj/report.hpp"
#include "qhj/scenario.hpp"

namespace {

constexpr int kExitConfigError = 2;

struct CommonFlags {
  std::optional<std::string> out;
  std::optional<double> tolerance_scale;
  std::optional<std::uint64_t> seed;
};

std::filesystem::path resolve_output(const CommonFlags& flags, const qhj::ScenarioConfig& cfg) {
  if (flags.out) return *flags.out;
  if (cfg.output_dir) return *cfg.output_dir;
  if (const char* env = std::getenv("QHJTRAJ_OUT"); env && *env) return env;
  return "qhjtraj-out";
}

void apply_flags(const CommonFlags& flags, qhj::ScenarioConfig& cfg) {
  if (flags.tolerance_scale) {
    if (!(*flags.tolerance_scale > 0.0)) {
      throw qhj::ConfigError("--tolerance-scale", "must be > 0");
    }
    cfg.tolerances.scale(*flags.tolerance_scale);
  }
  if (flags.seed) cfg.seed = *flags.seed;
}

int execute(qhj::ScenarioConfig cfg, const CommonFlags& flags) {
  apply_flags(flags, cfg);
  const auto out = resolve_output(flags, cfg);
  const qhj::RunReport report = qhj::run_scenario(cfg, {out});

  std::cout << "scenario " << report.scenario << " (seed " << report.seed << ")\n";
  for (const auto& s : report.stages) {
    std::cout << "  stage " << s.name << (s.ok ? " ok" : " FAILED") << " "
              << qhj::format_number(s.seconds) << " s";
    if (!s.error.empty()) std::cout << ": " << s.error;
    std::cout << "\n";
  }
  for (const auto& c : report.checks) {
    std::cout << "  [" << (c.passed ? "PASS" : "FAIL") << "] " << c.name << " = "
              << qhj::format_number(c.value) << " (" << c.relation << " "
              << qhj::format_number(c.threshold) << ")\n";
  }
  for (const auto& f : report.findings) {
    std::cout << "  finding " << f.name << " = " << qhj::format_number(f.value)
              << (f.flag ? " [flagged] " : " ") << f.note << "\n";
  }
  std::cout << "artifacts in " << out.string() << "\n";
  return report.exit_code();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quantum Hamilton-Jacobi trajectory laws: BD, Floyd and quantum-coordinate times"};
  app.require_subcommand(1);

  CommonFlags flags;
  std::string config_path;
  std::string fixture;

  auto add_common = [&flags](CLI::App* sub) {
    sub->add_option("--out", flags.out, "Output directory");
    sub->add_option("--tolerance-scale", flags.tolerance_scale, "Multiply every tolerance");
    sub->add_option("--seed", flags.seed, "Seed for random transform sampling");
  };

  CLI::App* run = app.add_subcommand("run", "Run a scenario file");
  run->add_option("config", config_path, "Scenario file")->required();
  add_common(run);

  CLI::App* validate = app.add_subcommand("validate", "Validate a scenario file");
  validate->add_option("config", config_path, "Scenario file")->required();

  CLI::App* demo = app.add_subcommand("demo", "Run a built-in scenario");
  std::string names;
  for (const auto& [name, text] : qhj::builtin_fixtures()) {
    names += names.empty() ? name : ", " + name;
  }
  demo->add_option("fixture", fixture, "One of: " + names)->required();
  add_common(demo);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfigError;
  }

  try {
    if (*validate) {
      const qhj::ScenarioConfig cfg = qhj::load_scenario(config_path);
      std::cout << "ok: " << cfg.name << " (" << cfg.microstates.size() << " microstates)\n";
      return 0;
    }
    if (*run) return execute(qhj::load_scenario(config_path), flags);
    const auto& fixtures = qhj::builtin_fixtures();
    const auto it = fixtures.find(fixture);
    if (it == fixtures.end()) {
      throw qhj::ConfigError("fixture", "must be one of: " + names);
    }
    return execute(qhj::parse_scenario(it->second, std::filesystem::current_path()), flags);
  } catch (const qhj::ConfigError& e) {
    std::cerr << "config error: " << e.field() << ": " << e.constraint() << "\n";
    return kExitConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
