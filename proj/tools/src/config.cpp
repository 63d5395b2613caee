#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <set>

#include "backheat/cli.hpp"
#include "backheat/errors.hpp"

namespace backheat::cli {

using nlohmann::json;

namespace {

struct NamedProfile {
  Geometry geometry;
  double (*value)(const NodePosition&);
};

double example_1d_1(const NodePosition& p) {
  const double s = std::sin(std::numbers::pi * p.x);
  return 7.0 / 24.0 * (s + 1.0 - p.x) * (s + std::sqrt(p.x));
}
double example_1d_2(const NodePosition& p) { return 6.0 * (1.0 - p.x) * std::log(1.0 + p.x * p.x); }
double example_2d_1(const NodePosition& p) {
  return std::sin(std::numbers::pi * p.r) * std::sin(0.5 * p.theta);
}
double example_2d_2(const NodePosition& p) {
  const double q = p.r * (1.0 - p.r);
  return q * q * std::cos(0.25 * p.r * p.theta);
}
double zero_profile(const NodePosition&) { return 0.0; }
double one_profile(const NodePosition&) { return 1.0; }

const std::map<std::string, NamedProfile>& profiles() {
  static const std::map<std::string, NamedProfile> table{
      {"1d-example1", {Geometry::kInterval, example_1d_1}},
      {"1d-example2", {Geometry::kInterval, example_1d_2}},
      {"2d-example1", {Geometry::kDisk, example_2d_1}},
      {"2d-example2", {Geometry::kDisk, example_2d_2}},
  };
  return table;
}

std::string geometry_name(Geometry g) { return g == Geometry::kInterval ? "interval" : "disk"; }
std::string noise_model_name(NoiseModel m) {
  return m == NoiseModel::kPerNode ? "per_node" : "uniform_shift";
}

template <typename T>
T get_as(const json& v, const std::string& key) {
  try {
    return v.get<T>();
  } catch (const json::exception&) {
    throw ConfigError("config key '" + key + "' has the wrong type");
  }
}

int get_int(const json& v, const std::string& key) {
  if (!v.is_number_integer()) throw ConfigError("config key '" + key + "' must be an integer");
  return get_as<int>(v, key);
}

double get_number(const json& v, const std::string& key) {
  if (!v.is_number()) throw ConfigError("config key '" + key + "' must be a number");
  return v.get<double>();
}

std::vector<double> get_numbers(const json& v, const std::string& key) {
  if (v.is_number()) return {v.get<double>()};
  if (!v.is_array()) throw ConfigError("config key '" + key + "' must be a number or an array");
  std::vector<double> out;
  for (const auto& e : v) out.push_back(get_number(e, key));
  return out;
}

/// Node table in degree-of-freedom order, looked up by position.
InitialProfile table_profile(const ProblemConfig& cfg, std::vector<double> values) {
  const Grid grid = cfg.make_grid();
  if (values.size() != grid.size()) {
    throw ConfigError("exact table has " + std::to_string(values.size()) + " entries, grid has " +
                      std::to_string(grid.size()));
  }
  auto lookup = [grid, values = std::move(values)](const NodePosition& p) {
    const std::size_t dof = grid.geometry() == Geometry::kInterval ? grid.interval().dof(p.i)
                                                                    : grid.disk().dof(p.i, p.j);
    return values[dof];
  };
  return {"table", lookup};
}

json echo_of(const RunSettings& s) {
  const auto& c = s.problem;
  json j;
  j["preset"] = s.preset;
  j["geometry"] = geometry_name(c.geometry);
  if (c.geometry == Geometry::kInterval) {
    j["length"] = c.length;
    j["nx"] = c.nx;
  } else {
    j["nr"] = c.nr;
    j["ntheta"] = c.ntheta;
  }
  j["final_time"] = c.final_time;
  j["time_steps"] = c.time_steps;
  j["diffusivity"] = c.diffusivity;
  j["surface_diffusivity"] = c.surface_diffusivity;
  j["bulk_potential"] = c.bulk_potential;
  j["boundary_potential"] = c.boundary_potential;
  j["epsilon"] = c.epsilon;
  j["threshold"] = c.threshold;
  j["noise_levels"] = s.noise_levels;
  j["noise_model"] = noise_model_name(c.noise_model);
  j["seed"] = c.seed;
  j["max_iter"] = c.max_iter;
  j["exact"] = s.exact_name;
  j["trajectory"] = s.trajectory;
  j["parallel"] = s.parallel;
  j["trials"] = s.trials;
  return j;
}

}  // namespace

void finalize(RunSettings& s) {
  if (s.noise_levels.empty()) s.noise_levels = {s.problem.noise_level};
  for (double p : s.noise_levels) {
    if (!(p >= 0.0 && p < 1.0)) throw ConfigError("noise levels must lie in [0, 1)");
  }
  s.problem.noise_level = s.noise_levels.front();
  s.problem.validate();
  if (s.trials < 0) throw ConfigError("trials must be >= 0");
  s.echo = echo_of(s);
}

std::vector<std::string> preset_names() {
  std::vector<std::string> out;
  for (const auto& [name, _] : profiles()) out.push_back(name);
  return out;
}

InitialProfile named_profile(const std::string& name) {
  if (name == "zero") return {name, zero_profile};
  if (name == "one") return {name, one_profile};
  const auto it = profiles().find(name);
  if (it == profiles().end()) throw ConfigError("unknown initial profile '" + name + "'");
  return {name, it->second.value};
}

RunSettings preset(const std::string& name) {
  const auto it = profiles().find(name);
  if (it == profiles().end()) throw ConfigError("unknown preset '" + name + "'");
  RunSettings s;
  s.preset = name;
  s.exact_name = name;
  auto& c = s.problem;
  c.geometry = it->second.geometry;
  c.exact = named_profile(name);
  c.epsilon = 1e-8;
  c.noise_level = 0.01;
  c.noise_model = NoiseModel::kUniformShift;
  c.time_steps = 100;
  c.max_iter = 500;
  if (c.geometry == Geometry::kInterval) {
    c.length = 1.0;
    c.nx = 25;
    c.final_time = 0.03;
    c.threshold = 1e-6;
    c.surface_diffusivity = 0.0;
  } else {
    c.nr = 25;
    c.ntheta = 25;
    c.final_time = 0.01;
    c.surface_diffusivity = 1.0;
    c.threshold = name == "2d-example1" ? 5.82e-5 : 2.92e-7;
  }
  return s;
}

RunSettings apply_json(RunSettings s, const json& doc) {
  if (!doc.is_object()) throw ConfigError("config must be a JSON object");
  static const std::set<std::string> known{
      "preset",         "geometry",    "length",         "nx",
      "nr",             "ntheta",      "final_time",     "time_steps",
      "diffusivity",    "surface_diffusivity", "bulk_potential", "boundary_potential",
      "epsilon",        "threshold",   "noise_level",    "noise_levels",
      "noise_model",    "seed",        "max_iter",       "exact",
      "trajectory",     "parallel",    "trials"};
  for (const auto& [key, _] : doc.items()) {
    if (!known.count(key)) throw ConfigError("unknown config key '" + key + "'");
  }
  if (doc.contains("noise_level") && doc.contains("noise_levels")) {
    throw ConfigError("give either noise_level or noise_levels, not both");
  }
  if (doc.contains("preset")) {
    const auto name = get_as<std::string>(doc["preset"], "preset");
    if (!s.preset.empty() && s.preset != name) {
      throw ConfigError("config preset '" + name + "' conflicts with --preset " + s.preset);
    }
    if (s.preset.empty()) s = preset(name);
  }
  auto& c = s.problem;
  std::optional<std::vector<double>> table;
  for (const auto& [key, v] : doc.items()) {
    if (key == "preset") continue;
    if (key == "geometry") {
      const auto g = get_as<std::string>(v, key);
      if (g == "interval") c.geometry = Geometry::kInterval;
      else if (g == "disk") c.geometry = Geometry::kDisk;
      else throw ConfigError("geometry must be 'interval' or 'disk'");
    } else if (key == "length") c.length = get_number(v, key);
    else if (key == "nx") c.nx = get_int(v, key);
    else if (key == "nr") c.nr = get_int(v, key);
    else if (key == "ntheta") c.ntheta = get_int(v, key);
    else if (key == "final_time") c.final_time = get_number(v, key);
    else if (key == "time_steps") c.time_steps = get_int(v, key);
    else if (key == "diffusivity") c.diffusivity = get_number(v, key);
    else if (key == "surface_diffusivity") c.surface_diffusivity = get_number(v, key);
    else if (key == "bulk_potential") c.bulk_potential = get_numbers(v, key);
    else if (key == "boundary_potential") c.boundary_potential = get_numbers(v, key);
    else if (key == "epsilon") c.epsilon = get_number(v, key);
    else if (key == "threshold") c.threshold = get_number(v, key);
    else if (key == "noise_level") {
      c.noise_level = get_number(v, key);
      s.noise_levels.clear();
    } else if (key == "noise_levels") {
      if (!v.is_array() || v.empty()) throw ConfigError("noise_levels must be a non-empty array");
      s.noise_levels = get_numbers(v, key);
    } else if (key == "noise_model") {
      const auto m = get_as<std::string>(v, key);
      if (m == "per_node") c.noise_model = NoiseModel::kPerNode;
      else if (m == "uniform_shift") c.noise_model = NoiseModel::kUniformShift;
      else throw ConfigError("noise_model must be 'per_node' or 'uniform_shift'");
    } else if (key == "seed") {
      if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0)) {
        throw ConfigError("seed must be a non-negative integer");
      }
      c.seed = v.get<std::uint64_t>();
    } else if (key == "max_iter") c.max_iter = get_int(v, key);
    else if (key == "exact") {
      if (v.is_string()) {
        s.exact_name = v.get<std::string>();
        c.exact = named_profile(s.exact_name);
      } else if (v.is_array()) {
        table = get_numbers(v, key);
      } else {
        throw ConfigError("exact must be a profile name or an array of node values");
      }
    } else if (key == "trajectory") s.trajectory = get_as<bool>(v, key);
    else if (key == "parallel") s.parallel = get_as<bool>(v, key);
    else if (key == "trials") s.trials = get_int(v, key);
  }
  if (table) {
    s.exact_name = "table";
    c.exact = table_profile(c, std::move(*table));
  }
  return s;
}

RunSettings load_settings(const std::optional<std::filesystem::path>& config,
                          const std::optional<std::string>& preset_name,
                          std::optional<std::uint64_t> seed,
                          const std::optional<std::vector<double>>& noise_levels, bool parallel) {
  RunSettings s = preset_name ? preset(*preset_name) : RunSettings{};
  if (config) {
    std::ifstream in(*config);
    if (!in) throw ConfigError("cannot open config file " + config->string());
    json doc;
    try {
      doc = json::parse(in);
    } catch (const json::parse_error& e) {
      throw ConfigError(std::string("invalid JSON in config: ") + e.what());
    }
    s = apply_json(std::move(s), doc);
  }
  if (seed) s.problem.seed = *seed;
  if (noise_levels) {
    if (noise_levels->empty()) throw ConfigError("--noise-levels needs at least one value");
    s.noise_levels = *noise_levels;
  }
  if (parallel) s.parallel = true;
  finalize(s);
  return s;
}

}  // namespace backheat::cli
