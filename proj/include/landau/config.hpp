#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "landau/certify.hpp"
#include "landau/dynamics.hpp"
#include "landau/echoes.hpp"
#include "landau/error.hpp"
#include "landau/linear.hpp"

namespace landau {

enum class Experiment { free, simulate, roots, penrose, green, echo, certify, norms_report };

std::string_view to_string(Experiment e) noexcept;
Experiment experiment_from_string(std::string_view name);

constexpr int kSchemaVersion = 1;

struct RootsSpec {
  std::vector<double> ks{0.5, 1.0, 2.0, 3.0};
  SearchBox box{-6.0, 0.5, 0.0, 6.0};
};

struct PenroseSpec {
  std::vector<double> ks{1, 2, 3, 4, 5, 6, 7, 8};
};

struct GreenSpec {
  std::vector<double> ks{1.0, 2.0, 3.0};
  double dt = 0.01;
  long samples = 2000;
};

struct EchoSpec {
  EchoPulse first{-4, -4.0, 1e-3, 2.0};
  EchoPulse second{5, 15.0, 1e-3, 2.0};
};

struct CertifySpec {
  BoundId bound = BoundId::exp_bd;
  Sweep sweep;
  /// Pass threshold on the sweep sup. exp-bd defaults to 1 + 1e-9; the
  /// integral bounds pass when the sup is finite.
  double max_sup = 0.0;  // 0 means the bound's default
};

/// How `simulate` obtains the field: time stepping, or the Picard iteration
/// on the field equation driven by the interaction tensor of a stepped run.
struct SolverSpec {
  bool fixed_point = false;
  FixedPointOptions options;
};

struct RunConfig {
  int schema_version = kSchemaVersion;
  Experiment experiment = Experiment::simulate;
  DynamicsConfig dynamics;
  std::string output_dir = "out";
  RootsSpec roots;
  PenroseSpec penrose;
  GreenSpec green;
  EchoSpec echo;
  CertifySpec certify;
  SolverSpec solver;
  /// Canonical (sorted-key, compact) JSON of the parsed file; hashed into the manifest.
  std::string canonical;
};

/// Every problem found in a config, reported together.
class ConfigError : public Error {
 public:
  explicit ConfigError(std::vector<std::string> problems);
  const std::vector<std::string>& problems() const noexcept { return problems_; }

 private:
  std::vector<std::string> problems_;
};

/// Parses and validates a JSON config. Syntax errors carry line and column,
/// semantic errors the dotted key path. Unknown keys are rejected.
RunConfig parse_config(std::string_view text);
RunConfig load_config(const std::filesystem::path& path);

}  // namespace landau
