#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "landau/config.hpp"

namespace landau {

/// Environment variable that overrides output.dir (the --out flag wins over it).
constexpr const char* kOutDirEnv = "LANDAU_OUT_DIR";

/// Semantic version written to every manifest.
std::string_view code_version() noexcept;

struct RunOptions {
  std::optional<std::filesystem::path> out_dir;
  int threads = 0;  // 0 keeps the OpenMP default
  std::optional<std::uint64_t> seed;
};

struct RunSummary {
  int exit_code = 0;  // 0 success, 2 certificate failure, 1 runtime error
  std::filesystem::path out_dir;
  std::filesystem::path manifest;
  std::map<std::string, bool> checks;
  std::string error;
};

/// Resolves the output directory, dispatches the experiment and writes its
/// files and manifest.json. Runtime errors are caught and recorded in the
/// manifest (with the blow-up time and mode when the dynamics diverge).
RunSummary run_experiment(const RunConfig& config, const RunOptions& options = {});

struct KeyDiff {
  std::string key;
  double abs_diff = 0.0;  // sup over common samples of |a - b|
  double rel_diff = 0.0;  // abs_diff / sup |b|
  std::size_t samples = 0;
};

struct CompareReport {
  std::vector<std::string> manifests;
  std::vector<KeyDiff> first;   // run 0 vs run 1
  std::vector<KeyDiff> second;  // run 1 vs run 2 (three-way compare only)
  /// first.abs_diff / second.abs_diff per key: about 2^p for step-halving runs of order p.
  std::map<std::string, double> convergence_factor;
};

/// Keys compared: "field" (E_k from fields.csv) and "rho", plus "F",
/// "Gen_alpha0", "Gen_alpha1" when every run has norms.csv. Samples are
/// matched on (t, k); runs must share K and T. Throws Error(grid_mismatch).
CompareReport compare_runs(std::span<const std::filesystem::path> manifests,
                           std::span<const std::string> keys = {});

std::string to_json(const CompareReport& report);

}  // namespace landau
