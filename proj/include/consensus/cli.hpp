#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "consensus/io.hpp"

namespace consensus::cli {

enum ExitCode : int { kSuccess = 0, kAnalysisFailure = 1, kInputError = 2 };

/// Parsed scenario bundle for `simulate`. Sub-documents may be inline objects
/// or paths relative to the scenario file.
struct ScenarioConfig {
  io::Json model;
  io::Json topology;
  std::optional<io::Json> gains;
  /// {"method": "algorithm1" | "algorithm2" | "user", "delta": float, "K": [[...]]}
  std::optional<io::Json> design;
  std::optional<io::Json> formation;
  SimMode mode = SimMode::Observer;
  std::optional<std::vector<Vector>> x0;
  std::optional<std::vector<Vector>> v0;
  std::uint64_t seed = 1;
  int steps = 1000;
};

ScenarioConfig load_scenario(const std::filesystem::path& path);

/// Entry point shared by the executable and the tests. `args` excludes the
/// program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace consensus::cli
