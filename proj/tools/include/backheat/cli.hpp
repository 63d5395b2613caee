#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "backheat/inversion.hpp"

namespace backheat::cli {

enum ExitCode : int {
  kOk = 0,
  kConfigFailure = 2,
  kNumericFailure = 3,
  kNoConvergence = 4,
  kPropertyViolation = 5,
};

/// A resolved run: preset defaults, then config file keys, then flags.
struct RunSettings {
  ProblemConfig problem;
  std::string preset;          // empty when none was named
  std::string exact_name;      // profile name, "table" or empty
  std::vector<double> noise_levels;  // reconstruct runs one CG per level
  bool trajectory = true;      // forward: every time step vs final state only
  bool parallel = false;       // reconstruct: run noise levels concurrently
  int trials = 0;              // verify: 0 means the subcommand default
  nlohmann::json echo;         // resolved configuration, for the manifest
};

std::vector<std::string> preset_names();
/// Throws ConfigError for an unknown name.
RunSettings preset(const std::string& name);

/// Closed-form initial temperatures: the four example profiles plus
/// "zero" and "one". Throws ConfigError for an unknown name.
InitialProfile named_profile(const std::string& name);

/// Applies a JSON document on top of `base`. Unknown keys, wrong types and
/// out-of-range values throw ConfigError.
RunSettings apply_json(RunSettings base, const nlohmann::json& doc);

/// Collapses noise settings, validates, and fills `echo`. Commands expect
/// finalized settings.
void finalize(RunSettings& s);

/// Full resolution used by the executable.
RunSettings load_settings(const std::optional<std::filesystem::path>& config,
                          const std::optional<std::string>& preset_name,
                          std::optional<std::uint64_t> seed,
                          const std::optional<std::vector<double>>& noise_levels = std::nullopt,
                          bool parallel = false);

/// Shortest round-trip-safe text with 17 significant digits.
std::string format_number(double v);

/// Writes to a sibling temporary file, then renames over `path`.
void write_atomic(const std::filesystem::path& path, const std::string& content);

/// Header row plus one record per degree of freedom with node coordinates.
std::string field_csv(const Grid& grid, const std::vector<std::string>& names,
                      const std::vector<const StateField*>& columns);
std::string trajectory_csv(const Grid& grid, const Trajectory& traj, bool final_only = false);
std::string history_csv(const Reconstruction& rec);
/// (r, theta, g_exact - g_rec) for every disk node; the origin is emitted once.
std::string error_surface_csv(const Grid& grid, const StateField& exact, const StateField& rec);

/// Worker count for `jobs` tasks: at most BACKHEAT_THREADS when set,
/// otherwise at most the hardware concurrency.
unsigned worker_count(std::size_t jobs);

int cmd_forward(const RunSettings& s, const std::filesystem::path& out);
int cmd_reconstruct(const RunSettings& s, const std::filesystem::path& out);
int cmd_spectrum(const RunSettings& s, const std::filesystem::path& out);
int cmd_verify(const RunSettings& s, const std::string& what, const std::filesystem::path& out);
int cmd_noise(const RunSettings& s, const std::filesystem::path& out);

/// Entry point of the executable; never throws.
int run(int argc, char** argv);

}  // namespace backheat::cli
