#include "qhj/scenario.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>

#include "json.hpp"
#include "qhj/errors.hpp"
#include "qhj/invariance.hpp"
#include "qhj/numerics.hpp"
#include "qhj/report.hpp"

namespace qhj {

using json = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// Tolerances

double* ToleranceSet::lookup(const std::string& name) {
  static const std::map<std::string, double ToleranceSet::*> fields = {
      {"wronskian_analytic", &ToleranceSet::wronskian_analytic},
      {"wronskian_numeric", &ToleranceSet::wronskian_numeric},
      {"schrodinger_residual", &ToleranceSet::schrodinger_residual},
      {"qshje_analytic", &ToleranceSet::qshje_analytic},
      {"qshje_numeric", &ToleranceSet::qshje_numeric},
      {"bd_action_relation", &ToleranceSet::bd_action_relation},
      {"action_identity", &ToleranceSet::action_identity},
      {"hamiltonian", &ToleranceSet::hamiltonian},
      {"canonical_velocity", &ToleranceSet::canonical_velocity},
      {"floyd_closed_form", &ToleranceSet::floyd_closed_form},
      {"classical_coincidence", &ToleranceSet::classical_coincidence},
      {"jacobi_gap", &ToleranceSet::jacobi_gap},
      {"fm_relation_analytic", &ToleranceSet::fm_relation_analytic},
      {"fm_relation_numeric", &ToleranceSet::fm_relation_numeric},
      {"momentum_match", &ToleranceSet::momentum_match},
      {"bd_invariance_analytic", &ToleranceSet::bd_invariance_analytic},
      {"bd_invariance_numeric", &ToleranceSet::bd_invariance_numeric},
      {"fm_proposal", &ToleranceSet::fm_proposal},
      {"floyd_dependence", &ToleranceSet::floyd_dependence},
      {"contradiction_gap", &ToleranceSet::contradiction_gap},
      {"contradiction_zero", &ToleranceSet::contradiction_zero},
  };
  const auto it = fields.find(name);
  return it == fields.end() ? nullptr : &(this->*(it->second));
}

void ToleranceSet::scale(double factor) {
  for (double* t : {&wronskian_analytic, &wronskian_numeric, &schrodinger_residual,
                    &qshje_analytic, &qshje_numeric, &bd_action_relation, &action_identity, &hamiltonian,
                    &canonical_velocity, &floyd_closed_form, &classical_coincidence, &jacobi_gap,
                    &fm_relation_analytic, &fm_relation_numeric, &momentum_match,
                    &bd_invariance_analytic, &bd_invariance_numeric, &fm_proposal,
                    &contradiction_zero}) {
    *t *= factor;
  }
}

// ---------------------------------------------------------------------------
// Parsing

namespace {

class Reader {
 public:
  Reader(const json& node, std::string path) : node_(node), path_(std::move(path)) {
    if (!node_.is_object()) throw ConfigError(path_.empty() ? "<root>" : path_, "must be an object");
  }

  void allow(std::initializer_list<const char*> keys) const {
    for (auto it = node_.begin(); it != node_.end(); ++it) {
      bool known = false;
      for (const char* k : keys) known = known || it.key() == k;
      if (!known) throw ConfigError(field(it.key()), "unknown key");
    }
  }

  bool has(const char* key) const { return node_.contains(key); }
  const json& raw(const char* key) const { return node_.at(key); }
  std::string field(const std::string& key) const {
    return path_.empty() ? key : path_ + "." + key;
  }

  double number(const char* key, std::optional<double> fallback = std::nullopt) const {
    if (!has(key)) {
      if (fallback) return *fallback;
      throw ConfigError(field(key), "required");
    }
    const json& v = node_.at(key);
    if (!v.is_number()) throw ConfigError(field(key), "must be a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) throw ConfigError(field(key), "must be finite");
    return d;
  }

  std::optional<double> optional_number(const char* key) const {
    if (!has(key) || node_.at(key).is_null()) return std::nullopt;
    return number(key);
  }

  std::uint64_t unsigned_integer(const char* key, std::uint64_t fallback) const {
    if (!has(key)) return fallback;
    const json& v = node_.at(key);
    if (!v.is_number_integer() || (v.is_number_integer() && v.get<std::int64_t>() < 0 &&
                                   !v.is_number_unsigned())) {
      throw ConfigError(field(key), "must be a non-negative integer");
    }
    return v.get<std::uint64_t>();
  }

  bool boolean(const char* key, bool fallback) const {
    if (!has(key)) return fallback;
    const json& v = node_.at(key);
    if (!v.is_boolean()) throw ConfigError(field(key), "must be a boolean");
    return v.get<bool>();
  }

  std::string string(const char* key, std::optional<std::string> fallback = std::nullopt) const {
    if (!has(key)) {
      if (fallback) return *fallback;
      throw ConfigError(field(key), "required");
    }
    const json& v = node_.at(key);
    if (!v.is_string()) throw ConfigError(field(key), "must be a string");
    return v.get<std::string>();
  }

  Reader child(const char* key) const { return Reader(node_.at(key), field(key)); }

 private:
  const json& node_;
  std::string path_;
};

Seed parse_seed(const json& v, const std::string& field) {
  if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) {
    throw ConfigError(field, "must be a [value, slope] pair");
  }
  return {v[0].get<double>(), v[1].get<double>()};
}

WavenumberFunction parse_function(const json& v, const std::string& field) {
  try {
    if (v.is_number()) return WavenumberFunction::constant(v.get<double>());
    if (v.is_string()) return WavenumberFunction::parse(v.get<std::string>());
  } catch (const PreconditionError& e) {
    throw ConfigError(field, e.what());
  }
  throw ConfigError(field, "must be a number or one of \"k\", \"k^2\", \"1/k\"");
}

}  // namespace

ScenarioConfig parse_scenario(const std::string& text, const std::filesystem::path& base_dir) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("<document>", std::string("not valid JSON: ") + e.what());
  }
  const Reader root(doc, "");
  root.allow({"name", "constants", "potential", "grid", "basis", "microstates", "laws",
              "trajectory", "comparison", "transforms", "random_transforms", "contradiction",
              "rescaling", "stencil", "tolerances", "seed", "output_dir"});

  ScenarioConfig cfg;
  cfg.name = root.string("name", "scenario");

  if (root.has("constants")) {
    const Reader c = root.child("constants");
    c.allow({"hbar", "mass"});
    cfg.constants.hbar = c.number("hbar", 1.0);
    cfg.constants.mass = c.number("mass", 1.0);
    if (!(cfg.constants.hbar > 0.0)) throw ConfigError("constants.hbar", "must be > 0");
    if (!(cfg.constants.mass > 0.0)) throw ConfigError("constants.mass", "must be > 0");
  }

  {
    const Reader g = root.child("grid");
    g.allow({"x_min", "x_max", "points"});
    cfg.grid.x_min = g.number("x_min");
    cfg.grid.x_max = g.number("x_max");
    cfg.grid.points = g.unsigned_integer("points", 4001);
    if (!(cfg.grid.x_min < cfg.grid.x_max)) throw ConfigError("grid.x_max", "must exceed grid.x_min");
    if (cfg.grid.points < 101) throw ConfigError("grid.points", "must be >= 101");
  }

  {
    const Reader p = root.child("potential");
    const std::string kind = p.string("kind");
    if (kind == "free") {
      p.allow({"kind"});
      cfg.potential = PotentialSpec::free(cfg.grid.x_min, cfg.grid.x_max);
    } else if (kind == "harmonic") {
      p.allow({"kind", "stiffness", "center"});
      const double k = p.number("stiffness");
      if (!(k > 0.0)) throw ConfigError("potential.stiffness", "must be > 0");
      cfg.potential = PotentialSpec::harmonic(k, cfg.grid.x_min, cfg.grid.x_max,
                                              p.number("center", 0.0));
    } else if (kind == "linear") {
      p.allow({"kind", "slope", "offset"});
      cfg.potential = PotentialSpec::linear(p.number("slope"), p.number("offset", 0.0),
                                            cfg.grid.x_min, cfg.grid.x_max);
    } else if (kind == "tabulated") {
      p.allow({"kind", "file"});
      std::filesystem::path file = p.string("file");
      if (file.is_relative()) file = base_dir / file;
      try {
        cfg.potential = PotentialSpec::from_csv(file, cfg.grid.x_min, cfg.grid.x_max);
      } catch (const PreconditionError& e) {
        throw ConfigError("potential.file", e.what());
      }
    } else {
      throw ConfigError("potential.kind", "must be one of free, harmonic, linear, tabulated");
    }
  }

  if (root.has("basis")) {
    const Reader b = root.child("basis");
    b.allow({"kind", "rescaled", "seeds", "seed_x"});
    const std::string kind = b.string("kind", "analytic");
    if (kind == "analytic") {
      cfg.basis.kind = BasisSpec::Kind::Analytic;
    } else if (kind == "numeric") {
      cfg.basis.kind = BasisSpec::Kind::Numeric;
    } else {
      throw ConfigError("basis.kind", "must be analytic or numeric");
    }
    cfg.basis.rescaled = b.boolean("rescaled", false);
    if (b.has("seeds")) {
      const json& s = b.raw("seeds");
      if (!s.is_array() || s.size() != 2) throw ConfigError("basis.seeds", "must hold two seeds");
      cfg.basis.seeds.first = parse_seed(s[0], "basis.seeds[0]");
      cfg.basis.seeds.second = parse_seed(s[1], "basis.seeds[1]");
      const double w = cfg.basis.seeds.first.slope * cfg.basis.seeds.second.value -
                       cfg.basis.seeds.first.value * cfg.basis.seeds.second.slope;
      if (w == 0.0) throw ConfigError("basis.seeds", "seeds must be linearly independent");
    }
    cfg.basis.seed_x = b.optional_number("seed_x");
  }
  if (cfg.basis.kind == BasisSpec::Kind::Analytic && cfg.potential.kind() != PotentialKind::Free) {
    throw ConfigError("basis.kind", "analytic basis requires a free potential");
  }
  if (cfg.basis.kind == BasisSpec::Kind::Numeric && cfg.basis.rescaled) {
    throw ConfigError("basis.rescaled", "only applies to the analytic basis");
  }

  {
    if (!root.has("microstates")) throw ConfigError("microstates", "required");
    const json& list = root.raw("microstates");
    if (!list.is_array() || list.empty()) throw ConfigError("microstates", "must be a non-empty array");
    for (std::size_t i = 0; i < list.size(); ++i) {
      const Reader m(list[i], "microstates[" + std::to_string(i) + "]");
      m.allow({"E", "a", "b", "lambda", "t0"});
      Microstate ms;
      ms.energy = m.number("E");
      ms.a = m.number("a");
      ms.b = m.number("b", 0.0);
      ms.lambda = m.number("lambda", 0.0);
      ms.t0 = m.number("t0", 0.0);
      if (ms.a == 0.0) throw ConfigError(m.field("a"), "must satisfy a != 0");
      if (!(ms.energy >= 0.0)) throw ConfigError(m.field("E"), "must be >= 0");
      cfg.microstates.push_back(ms);
    }
  }

  if (root.has("laws")) {
    const json& laws = root.raw("laws");
    if (laws.is_string() && laws.get<std::string>() == "all") {
      // default set
    } else if (laws.is_array() && !laws.empty()) {
      cfg.laws.clear();
      for (const json& l : laws) {
        if (!l.is_string()) throw ConfigError("laws", "entries must be strings");
        try {
          cfg.laws.insert(law_from_string(l.get<std::string>()));
        } catch (const PreconditionError&) {
          throw ConfigError("laws", "entries must be bd, floyd or xhat");
        }
      }
    } else {
      throw ConfigError("laws", "must be \"all\" or a non-empty array");
    }
  }

  if (root.has("trajectory")) {
    const Reader t = root.child("trajectory");
    t.allow({"x0", "t_span", "x_stop", "cadence", "step_tolerance"});
    cfg.trajectory.x0 = t.number("x0", cfg.grid.x_min);
    cfg.trajectory.t_span = t.number("t_span", 1.0);
    cfg.trajectory.x_stop = t.optional_number("x_stop");
    cfg.trajectory.cadence = t.number("cadence", 1e-2);
    cfg.trajectory.step_tolerance = t.number("step_tolerance", 1e-10);
  } else {
    cfg.trajectory.x0 = cfg.grid.x_min;
  }
  if (cfg.trajectory.x0 < cfg.grid.x_min || cfg.trajectory.x0 > cfg.grid.x_max) {
    throw ConfigError("trajectory.x0", "must lie inside the grid");
  }
  if (!(cfg.trajectory.t_span > 0.0)) throw ConfigError("trajectory.t_span", "must be > 0");
  if (!(cfg.trajectory.cadence > 0.0)) throw ConfigError("trajectory.cadence", "must be > 0");
  if (!(cfg.trajectory.step_tolerance > 0.0)) {
    throw ConfigError("trajectory.step_tolerance", "must be > 0");
  }

  if (root.has("comparison")) {
    const Reader c = root.child("comparison");
    c.allow({"x_start", "x_end", "points"});
    cfg.comparison.x_start = c.number("x_start");
    cfg.comparison.x_end = c.number("x_end");
    cfg.comparison.points = c.unsigned_integer("points", 50);
  } else {
    const double span = cfg.grid.x_max - cfg.grid.x_min;
    cfg.comparison.x_start = cfg.grid.x_min + 0.05 * span;
    cfg.comparison.x_end = cfg.grid.x_max - 0.05 * span;
  }
  if (!(cfg.comparison.x_start < cfg.comparison.x_end)) {
    throw ConfigError("comparison.x_end", "must exceed comparison.x_start");
  }
  if (cfg.comparison.x_start < cfg.grid.x_min || cfg.comparison.x_end > cfg.grid.x_max) {
    throw ConfigError("comparison", "range must lie inside the grid");
  }
  if (cfg.comparison.points < 2) throw ConfigError("comparison.points", "must be >= 2");

  if (root.has("transforms")) {
    const json& list = root.raw("transforms");
    if (!list.is_array()) throw ConfigError("transforms", "must be an array");
    for (std::size_t i = 0; i < list.size(); ++i) {
      const Reader t(list[i], "transforms[" + std::to_string(i) + "]");
      const std::string kind = t.string("kind");
      TransformSpec spec;
      try {
        if (kind == "general") {
          t.allow({"kind", "label", "mu", "nu", "alpha", "beta"});
          spec.transform = BasisTransform::general(
              {t.number("mu"), t.number("nu"), t.number("alpha"), t.number("beta")});
        } else if (kind == "free") {
          t.allow({"kind", "label", "f", "g"});
          const WavenumberFunction f =
              t.has("f") ? parse_function(t.raw("f"), t.field("f")) : WavenumberFunction::zero();
          const WavenumberFunction g =
              t.has("g") ? parse_function(t.raw("g"), t.field("g")) : WavenumberFunction::zero();
          if (cfg.basis.kind != BasisSpec::Kind::Analytic || cfg.basis.rescaled) {
            throw ConfigError(t.field("kind"), "free-particle transforms need the sin/cos basis");
          }
          spec.transform = BasisTransform::free_particle(f, g);
        } else {
          throw ConfigError(t.field("kind"), "must be general or free");
        }
      } catch (const PreconditionError& e) {
        throw ConfigError(t.field("kind"), e.what());
      }
      spec.label = t.string("label", "transform" + std::to_string(i));
      cfg.transforms.push_back(std::move(spec));
    }
  }

  if (root.has("random_transforms")) {
    const Reader r = root.child("random_transforms");
    r.allow({"count", "range", "min_abs_determinant"});
    cfg.random_transforms.count = r.unsigned_integer("count", 0);
    cfg.random_transforms.range = r.number("range", 2.0);
    cfg.random_transforms.min_abs_determinant = r.number("min_abs_determinant", 0.2);
    if (!(cfg.random_transforms.range > 0.0)) {
      throw ConfigError("random_transforms.range", "must be > 0");
    }
    if (!(cfg.random_transforms.min_abs_determinant > 0.0) ||
        cfg.random_transforms.min_abs_determinant >= cfg.random_transforms.range *
                                                          cfg.random_transforms.range) {
      throw ConfigError("random_transforms.min_abs_determinant", "must be in (0, range^2)");
    }
  }

  if (root.has("contradiction")) {
    const Reader c = root.child("contradiction");
    c.allow({"a", "k", "f"});
    ContradictionSpec spec;
    spec.a = c.number("a", 1.0);
    spec.k = c.number("k", 1.0);
    if (c.has("f")) spec.f = parse_function(c.raw("f"), "contradiction.f");
    if (spec.a == 0.0) throw ConfigError("contradiction.a", "must satisfy a != 0");
    if (!(spec.k > 0.0)) throw ConfigError("contradiction.k", "must be > 0");
    cfg.contradiction = spec;
  }

  if (root.has("rescaling")) {
    const Reader r = root.child("rescaling");
    r.allow({"k", "x", "a", "b", "t_span"});
    RescalingSpec spec;
    spec.k = r.number("k", 1.0);
    spec.x = r.number("x", 0.5);
    spec.a = r.number("a", 1.0);
    spec.b = r.number("b", 0.0);
    spec.t_span = r.number("t_span", 1.0);
    if (!(spec.k > 0.0)) throw ConfigError("rescaling.k", "must be > 0");
    if (spec.a == 0.0) throw ConfigError("rescaling.a", "must satisfy a != 0");
    if (!(spec.t_span > 0.0)) throw ConfigError("rescaling.t_span", "must be > 0");
    cfg.rescaling = spec;
  }

  if (root.has("stencil")) {
    const Reader s = root.child("stencil");
    s.allow({"relative_delta", "min_delta"});
    cfg.stencil.relative_delta = s.number("relative_delta", 1e-6);
    cfg.stencil.min_delta = s.number("min_delta", 1e-9);
    if (!(cfg.stencil.relative_delta > 0.0)) {
      throw ConfigError("stencil.relative_delta", "must be > 0");
    }
    if (!(cfg.stencil.min_delta > 0.0)) throw ConfigError("stencil.min_delta", "must be > 0");
  }
  for (const Microstate& ms : cfg.microstates) {
    if (ms.energy - 2.0 * stencil_delta(ms.energy, cfg.stencil) < 0.0 &&
        (cfg.laws.count(Law::FloydJacobi) || cfg.laws.count(Law::XhatJacobi))) {
      throw ConfigError("microstates.E", "Jacobi laws need E > 2 * stencil delta");
    }
  }

  if (root.has("tolerances")) {
    const Reader t = root.child("tolerances");
    const json& node = root.raw("tolerances");
    for (auto it = node.begin(); it != node.end(); ++it) {
      double* slot = cfg.tolerances.lookup(it.key());
      if (!slot) throw ConfigError(t.field(it.key()), "unknown tolerance");
      const double v = t.number(it.key().c_str());
      if (!(v > 0.0)) throw ConfigError(t.field(it.key()), "must be > 0");
      *slot = v;
    }
  }

  cfg.seed = root.unsigned_integer("seed", 42);
  if (root.has("output_dir")) {
    std::filesystem::path out = root.string("output_dir");
    if (out.is_relative()) out = base_dir / out;
    cfg.output_dir = out;
  }
  return cfg;
}

ScenarioConfig load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("<file>", "cannot read " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_scenario(ss.str(), path.parent_path());
}

// ---------------------------------------------------------------------------
// Report

bool RunReport::all_passed() const {
  for (const auto& c : checks) {
    if (!c.passed) return false;
  }
  for (const auto& s : stages) {
    if (!s.ok) return false;
  }
  return true;
}

int RunReport::exit_code() const { return all_passed() ? 0 : 1; }

const CheckResult* RunReport::find_check(const std::string& name) const {
  for (const auto& c : checks) {
    if (c.name == name) return &c;
  }
  return nullptr;
}

const Finding* RunReport::find_finding(const std::string& name) const {
  for (const auto& f : findings) {
    if (f.name == name) return &f;
  }
  return nullptr;
}

// ---------------------------------------------------------------------------
// Pipeline

namespace {

struct MicrostateRun {
  Microstate ms;
  std::string tag;
  std::optional<SolutionBasis> basis;
  std::optional<ReducedActionField> field;
  std::optional<EnergyStencil> stencil;
  std::vector<Trajectory> trajectories;
  std::vector<GapSample> gaps;
};

// Uniform double in [0, 1) from the top 53 bits.
double unit_uniform(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

class Runner {
 public:
  Runner(const ScenarioConfig& cfg, const RunOptions& options) : cfg_(cfg), options_(options) {
    report_.scenario = cfg.name;
    report_.seed = cfg.seed;
    grid_ = numerics::uniform_grid(cfg.grid.x_min, cfg.grid.x_max, cfg.grid.points);
    xs_ = numerics::uniform_grid(cfg.comparison.x_start, cfg.comparison.x_end,
                                 cfg.comparison.points);
    for (std::size_t i = 0; i < cfg.microstates.size(); ++i) {
      MicrostateRun run;
      run.ms = cfg.microstates[i];
      run.tag = "ms" + std::to_string(i);
      runs_.push_back(std::move(run));
    }
    if (options_.output_dir) std::filesystem::create_directories(*options_.output_dir);
  }

  RunReport run() {
    const bool basis_ok = stage("basis", [&] { basis_stage(); });
    const bool field_ok = basis_ok && stage("field", [&] { field_stage(); });
    const bool traj_ok = field_ok && stage("trajectories", [&] { trajectory_stage(); });
    const bool cmp_ok = traj_ok && stage("comparisons", [&] { comparison_stage(); });
    if (cmp_ok) {
      stage("invariance", [&] { invariance_stage(); });
    } else {
      skip("comparisons", traj_ok);
      skip("invariance", false);
    }
    if (!field_ok) skip("trajectories", false);
    if (!basis_ok) skip("field", false);
    if (cfg_.contradiction) stage("contradiction", [&] { contradiction_stage(); });
    if (cfg_.rescaling) stage("rescaling", [&] { rescaling_stage(); });
    write_reports();
    return report_;
  }

 private:
  bool analytic() const { return cfg_.basis.kind == BasisSpec::Kind::Analytic; }
  bool free_sincos() const {
    return analytic() && !cfg_.basis.rescaled && cfg_.potential.kind() == PotentialKind::Free;
  }

  BasisFactory factory() const {
    if (analytic()) {
      return [this](double e) {
        return analytic_free_basis(e, cfg_.constants, grid_, cfg_.basis.rescaled);
      };
    }
    return [this](double e) {
      return numeric_basis(cfg_.potential, e, cfg_.constants, grid_, cfg_.basis.seeds,
                           cfg_.basis.seed_x);
    };
  }

  bool stage(const std::string& name, const std::function<void()>& body) {
    StageResult r;
    r.name = name;
    const auto start = std::chrono::steady_clock::now();
    try {
      body();
    } catch (const std::exception& e) {
      r.ok = false;
      r.error = e.what();
    }
    r.seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    report_.stages.push_back(r);
    return r.ok;
  }

  void skip(const std::string& name, bool already_recorded) {
    if (already_recorded) return;
    for (const auto& s : report_.stages) {
      if (s.name == name) return;
    }
    report_.stages.push_back({name, false, "skipped: an earlier stage failed", 0.0});
  }

  void check(const std::string& name, double value, double threshold,
             const std::string& relation = "<", const std::string& note = {}) {
    CheckResult c;
    c.name = name;
    c.value = value;
    c.threshold = threshold;
    c.relation = relation;
    c.note = note;
    if (relation == "==") {
      c.passed = value == threshold;
    } else {
      c.passed = std::isfinite(value) && (relation == "<" ? value < threshold : value > threshold);
    }
    report_.checks.push_back(c);
  }

  void finding(const std::string& name, double value, bool flag, const std::string& note) {
    report_.findings.push_back({name, value, flag, note});
  }

  std::ofstream open(const std::string& filename) {
    const auto path = *options_.output_dir / filename;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    report_.files.push_back(filename);
    return out;
  }

  void basis_stage() {
    const BasisFactory make = factory();
    const ToleranceSet& tol = cfg_.tolerances;
    for (MicrostateRun& run : runs_) {
      run.basis = make(run.ms.energy);
      check("wronskian[" + run.tag + "]", wronskian_drift(*run.basis),
            analytic() ? tol.wronskian_analytic : tol.wronskian_numeric);
      check("schrodinger_residual[" + run.tag + "]",
            schrodinger_residual(*run.basis, cfg_.potential, cfg_.constants),
            tol.schrodinger_residual);
    }
  }

  void field_stage() {
    for (MicrostateRun& run : runs_) {
      run.field = build_reduced_action(*run.basis, run.ms, cfg_.potential, cfg_.constants);
      check("qshje_residual[" + run.tag + "]",
            qshje_residual(*run.field, cfg_.potential, cfg_.constants),
            analytic() ? cfg_.tolerances.qshje_analytic : cfg_.tolerances.qshje_numeric);
      if (options_.output_dir) {
        auto out = open("field_" + run.tag + ".csv");
        write_field_csv(*run.field, out);
      }
    }
  }

  void trajectory_stage() {
    const ToleranceSet& tol = cfg_.tolerances;
    const PhysicalConstants& c = cfg_.constants;
    for (MicrostateRun& run : runs_) {
      const ReducedActionField& field = *run.field;
      const bool want_jacobi = cfg_.laws.count(Law::FloydJacobi) || cfg_.laws.count(Law::XhatJacobi);
      if (want_jacobi || !cfg_.transforms.empty() || cfg_.random_transforms.count > 0) {
        run.stencil = EnergyStencil::build(factory(), run.ms, cfg_.potential, c, cfg_.stencil);
      }

      if (cfg_.laws.count(Law::BD)) {
        BdOptions bd;
        bd.cadence = cfg_.trajectory.cadence;
        bd.step_tolerance = cfg_.trajectory.step_tolerance;
        bd.x_stop = cfg_.trajectory.x_stop;
        Trajectory traj =
            integrate_bd(field, cfg_.trajectory.x0, cfg_.trajectory.t_span, cfg_.potential, c, bd);

        const double s_start = field.action_at(traj.samples.front().x);
        double action_err = 0.0;
        double relation_err = 0.0;
        for (const TrajectorySample& s : traj.samples) {
          const double ds = field.action_at(s.x) - s_start;
          const double elapsed = s.t - field.microstate.t0;
          action_err = std::max(action_err, std::abs(s.action - ds + field.energy() * elapsed));
          relation_err = std::max(relation_err, std::abs(2.0 * field.energy() * elapsed - ds));
        }
        check("action_identity[" + run.tag + "]", action_err, tol.action_identity);
        if (cfg_.potential.kind() == PotentialKind::Free) {
          check("bd_action_relation[" + run.tag + "]", relation_err, tol.bd_action_relation);
        }
        if (field.has_xhat) {
          double h_err = 0.0;
          double v_err = 0.0;
          for (const HamiltonianSample& h : hamiltonian_along(field, traj, cfg_.potential, c)) {
            h_err = std::max(h_err, std::abs(h.H - field.energy()));
            v_err = std::max(v_err, std::abs(h.canonical_velocity - h.bd_velocity));
          }
          check("hamiltonian[" + run.tag + "]", h_err, tol.hamiltonian);
          check("canonical_velocity[" + run.tag + "]", v_err, tol.canonical_velocity);
        }
        run.trajectories.push_back(std::move(traj));
      }
      if (cfg_.laws.count(Law::FloydJacobi)) {
        run.trajectories.push_back(jacobi_trajectory(*run.stencil, Law::FloydJacobi, xs_));
      }
      if (cfg_.laws.count(Law::XhatJacobi) && field.has_xhat) {
        run.trajectories.push_back(jacobi_trajectory(*run.stencil, Law::XhatJacobi, xs_));
      }
    }
  }

  void comparison_stage() {
    const ToleranceSet& tol = cfg_.tolerances;
    const PhysicalConstants& c = cfg_.constants;
    for (MicrostateRun& run : runs_) {
      const ReducedActionField& field = *run.field;
      if (!run.stencil) continue;
      const EnergyStencil& st = *run.stencil;
      const double e = run.ms.energy;

      if (free_sincos() && e > 0.0) {
        const double k = wavenumber(e, c);
        double rel = 0.0;
        for (double x : xs_) {
          const double closed = floyd_time_closed_free(x, k, run.ms.a, run.ms.b, c);
          rel = std::max(rel, std::abs(floyd_time(st, x) - closed) / std::abs(closed));
        }
        check("floyd_closed_form[" + run.tag + "]", rel, tol.floyd_closed_form);

        if (run.ms.a == 1.0 && run.ms.b == 0.0) {
          const double inv_v = c.mass / (c.hbar * k);
          double worst = 0.0;
          for (double x : xs_) {
            for (const Trajectory& t : run.trajectories) {
              double expected = 0.0;
              double got = 0.0;
              if (t.law == Law::BD) {
                if (x < t.samples.front().x || x > t.samples.back().x) continue;
                got = time_at_position(t, x) - run.ms.t0;
                expected = (x - cfg_.trajectory.x0) * inv_v;
              } else {
                got = (t.law == Law::FloydJacobi ? floyd_time(st, x) : xhat_jacobi_time(st, x));
                expected = x * inv_v;
              }
              worst = std::max(worst, std::abs(got - expected));
            }
          }
          check("classical_coincidence[" + run.tag + "]", worst, tol.classical_coincidence);
        }
      }

      if (field.has_xhat) {
        double worst = 0.0;
        for (double x : xs_) {
          run.gaps.push_back(jacobi_gap(st, x));
          worst = std::max(worst, run.gaps.back().residual);
        }
        check("jacobi_gap[" + run.tag + "]", worst, tol.jacobi_gap);
      }

      double fm = 0.0;
      for (double x : xs_) fm = std::max(fm, fm_relation_check(st, x));
      check("fm_relation[" + run.tag + "]", fm,
            analytic() ? tol.fm_relation_analytic : tol.fm_relation_numeric);

      if (options_.output_dir) {
        auto traj_out = open("trajectory_" + run.tag + ".csv");
        write_trajectory_csv(field, run.trajectories, traj_out);
        if (!run.trajectories.empty()) {
          auto cmp_out = open("comparison_" + run.tag + ".csv");
          emit_comparison_table(run.trajectories, run.gaps, cmp_out);
        }
      }
    }
  }

  std::vector<TransformSpec> all_transforms() {
    std::vector<TransformSpec> out = cfg_.transforms;
    std::mt19937_64 rng(cfg_.seed);
    const double range = cfg_.random_transforms.range;
    std::size_t made = 0;
    while (made < cfg_.random_transforms.count) {
      TransformCoefficients t;
      t.mu = (2.0 * unit_uniform(rng) - 1.0) * range;
      t.nu = (2.0 * unit_uniform(rng) - 1.0) * range;
      t.alpha = (2.0 * unit_uniform(rng) - 1.0) * range;
      t.beta = (2.0 * unit_uniform(rng) - 1.0) * range;
      if (std::abs(t.determinant()) < cfg_.random_transforms.min_abs_determinant) continue;
      out.push_back({"random" + std::to_string(made), BasisTransform::general(t)});
      ++made;
    }
    return out;
  }

  void invariance_stage() {
    const ToleranceSet& tol = cfg_.tolerances;
    const PhysicalConstants& c = cfg_.constants;
    const std::vector<TransformSpec> transforms = all_transforms();
    json entries = json::array();
    BdOptions bd;
    bd.cadence = cfg_.trajectory.cadence;
    bd.step_tolerance = cfg_.trajectory.step_tolerance;
    bd.x_stop = cfg_.trajectory.x_stop;
    // A handful of comparison points keeps the energy-dependent checks cheap.
    std::vector<double> probe;
    const std::size_t stride = std::max<std::size_t>(1, xs_.size() / 8);
    for (std::size_t i = 0; i < xs_.size(); i += stride) probe.push_back(xs_[i]);

    double worst_match = 0.0;
    double worst_bd = 0.0;
    for (MicrostateRun& run : runs_) {
      const double e = run.ms.energy;
      for (const TransformSpec& spec : transforms) {
        const TransformCoefficients tc = spec.transform.at_energy(e, c);
        const InvarianceResult inv = bd_invariance_check(run.ms, spec.transform, *run.basis,
                                                         cfg_.potential, c,
                                                         cfg_.trajectory.x0,
                                                         cfg_.trajectory.t_span, bd);
        worst_match = std::max(worst_match, inv.matched.residual);
        worst_bd = std::max(worst_bd, inv.max_deviation);

        json entry;
        entry["microstate"] = run.tag;
        entry["transform"] = spec.label;
        entry["description"] = spec.transform.describe();
        entry["coefficients"] = {{"mu", tc.mu}, {"nu", tc.nu}, {"alpha", tc.alpha},
                                 {"beta", tc.beta}};
        entry["matched"] = {{"a_tilde", inv.matched.a_tilde},
                            {"b_tilde", inv.matched.b_tilde},
                            {"lambda_tilde", inv.matched.lambda_tilde}};
        entry["momentum_residual"] = inv.matched.residual;
        entry["bd_deviation"] = inv.max_deviation;

        if (spec.transform.energy_dependent() && run.stencil) {
          const std::string key = spec.label + "," + run.tag;
          const BasisFactory make = factory();
          double fm_dev = 0.0;
          double floyd_dev = 0.0;
          for (double x : probe) {
            const double original = floyd_time(*run.stencil, x);
            const double fm = fm_proposal_time(make, run.ms, spec.transform, cfg_.potential, c,
                                               x, EnergyConvention::FaraggiMatone, cfg_.stencil);
            const double natural =
                fm_proposal_time(make, run.ms, spec.transform, cfg_.potential, c, x,
                                 EnergyConvention::TransformFollowsEnergy, cfg_.stencil);
            fm_dev = std::max(fm_dev, std::abs(fm - original));
            floyd_dev = std::max(floyd_dev, std::abs(natural - original));
          }
          check("fm_proposal[" + key + "]", fm_dev, tol.fm_proposal);
          const bool dependent = floyd_dev > tol.floyd_dependence;
          finding("floyd_basis_dependence[" + key + "]", floyd_dev, dependent,
                  dependent ? "Floyd time changes with the solution basis"
                            : "no Floyd basis dependence above threshold");
          entry["floyd_deviation"] = floyd_dev;
          entry["fm_deviation"] = fm_dev;

          const double k = wavenumber(e, c);
          ContradictionInput ci;
          ci.a = run.ms.a;
          ci.b = run.ms.b;
          ci.a_tilde = inv.matched.a_tilde;
          ci.b_tilde = inv.matched.b_tilde;
          ci.k = k;
          ci.f = spec.transform.f().value(k);
          ci.dfdk = spec.transform.f().derivative(k);
          const ContradictionReport cr = floyd_contradiction(ci, c, tol.contradiction_zero);
          entry["contradiction"] = {{"r_half", cr.r_half},
                                    {"r_three_half", cr.r_three_half},
                                    {"dfdk", cr.dfdk},
                                    {"joint_solvable", cr.joint_solvable}};
        } else {
          entry["floyd_deviation"] = 0.0;
        }
        entries.push_back(entry);
      }
    }
    if (!transforms.empty()) {
      check("momentum_match", worst_match, tol.momentum_match);
      check("bd_invariance", worst_bd,
            analytic() ? tol.bd_invariance_analytic : tol.bd_invariance_numeric);
    }
    invariance_json_["seed"] = cfg_.seed;
    invariance_json_["transforms"] = entries;
  }

  void contradiction_stage() {
    const ContradictionSpec& spec = *cfg_.contradiction;
    const ToleranceSet& tol = cfg_.tolerances;
    const double f = spec.f.value(spec.k);
    const double dfdk = spec.f.derivative(spec.k);
    const SweepResult sweep = contradiction_sweep(spec.a, spec.k, f, dfdk);
    ContradictionInput ci;
    ci.a = spec.a;
    ci.a_tilde = sweep.a_tilde;
    ci.b_tilde = sweep.b_tilde;
    ci.k = spec.k;
    ci.f = f;
    ci.dfdk = dfdk;
    const ContradictionReport cr = floyd_contradiction(ci, cfg_.constants, tol.contradiction_zero);
    if (dfdk != 0.0) {
      check("contradiction_sweep", sweep.min_max_residual, tol.contradiction_gap, ">",
            "df/dk != 0: no common (a~, b~)");
    } else {
      check("contradiction_sweep", sweep.min_max_residual, tol.contradiction_zero, "<",
            "df/dk == 0: conditions jointly solvable");
    }
    finding("contradiction_joint_solvable", sweep.min_max_residual, cr.joint_solvable,
            cr.joint_solvable ? "both conditions satisfied" : "conditions cannot both hold");
    invariance_json_["contradiction"] = {{"a", spec.a},
                                         {"k", spec.k},
                                         {"f", spec.f.name},
                                         {"dfdk", dfdk},
                                         {"sweep_min", sweep.min_max_residual},
                                         {"a_tilde", sweep.a_tilde},
                                         {"b_tilde", sweep.b_tilde},
                                         {"r_half", cr.r_half},
                                         {"r_three_half", cr.r_three_half},
                                         {"joint_solvable", cr.joint_solvable}};
  }

  void rescaling_stage() {
    const RescalingSpec& spec = *cfg_.rescaling;
    const RescalingReport r =
        rescaling_report(spec.k, spec.x, spec.a, spec.b, cfg_.constants, spec.t_span, cfg_.stencil);
    check("rescaling_extra_term", std::abs(r.extra_term), 1e-8, ">",
          "explicit 1/k factor changes the Floyd time");
    check("rescaling_bd_bit_identical", r.bd_max_deviation, 0.0, "==",
          "BD trajectory with a -> a k in the rescaled basis");
    invariance_json_["rescaling"] = {{"k", spec.k},
                                     {"x", spec.x},
                                     {"plain_time", r.plain_time},
                                     {"rescaled_time", r.rescaled_time},
                                     {"extra_term", r.extra_term},
                                     {"bd_max_deviation", r.bd_max_deviation},
                                     {"bd_bit_identical", r.bd_bit_identical}};
  }

  void write_reports() {
    if (!options_.output_dir) return;
    if (!invariance_json_.empty()) {
      auto out = open("invariance.json");
      out << invariance_json_.dump(2) << "\n";
    }
    {
      std::ofstream timings(*options_.output_dir / "timings.txt");
      for (const auto& s : report_.stages) timings << s.name << " " << s.seconds << "\n";
    }
    report_.files.push_back("report.json");
    json doc;
    doc["scenario"] = report_.scenario;
    doc["seed"] = report_.seed;
    doc["passed"] = report_.all_passed();
    json stages = json::array();
    for (const auto& s : report_.stages) {
      stages.push_back({{"name", s.name}, {"ok", s.ok}, {"error", s.error}});
    }
    doc["stages"] = stages;
    json checks = json::array();
    for (const auto& c : report_.checks) {
      checks.push_back({{"name", c.name},
                        {"passed", c.passed},
                        {"value", c.value},
                        {"relation", c.relation},
                        {"threshold", c.threshold},
                        {"note", c.note}});
    }
    doc["checks"] = checks;
    json findings = json::array();
    for (const auto& f : report_.findings) {
      findings.push_back(
          {{"name", f.name}, {"value", f.value}, {"flag", f.flag}, {"note", f.note}});
    }
    doc["findings"] = findings;
    doc["files"] = report_.files;
    std::ofstream out(*options_.output_dir / "report.json", std::ios::binary);
    if (!out) throw Error("cannot write report.json");
    out << doc.dump(2) << "\n";
  }

  const ScenarioConfig& cfg_;
  RunOptions options_;
  RunReport report_;
  std::vector<double> grid_;
  std::vector<double> xs_;
  std::vector<MicrostateRun> runs_;
  json invariance_json_ = json::object();
};

}  // namespace

RunReport run_scenario(const ScenarioConfig& config, const RunOptions& options) {
  Runner runner(config, options);
  return runner.run();
}

}  // namespace qhj
