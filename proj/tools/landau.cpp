#include <cstdint>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "landau/config.hpp"
#include "landau/experiments.hpp"
#include "landau/io.hpp"

namespace fs = std::filesystem;

namespace {

int report_config_error(const landau::ConfigError& e) {
  std::cerr << "invalid config (" << e.problems().size() << " problem(s)):\n";
  for (const auto& p : e.problems()) std::cerr << "  " << p << '\n';
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spectral Vlasov-Riesz lab: linear response, nonlinear dynamics, echoes and bound certificates"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(landau::code_version()));

  std::string config_path;
  std::string out_dir;
  int threads = 0;
  std::uint64_t seed = 0;

  auto* validate = app.add_subcommand("validate", "Check a config and report every problem");
  validate->add_option("--config,config", config_path, "Config file (JSON)")->required();

  auto* run = app.add_subcommand("run", "Run the experiment named in a config");
  run->add_option("--config,config", config_path, "Config file (JSON)")->required();
  run->add_option("--out", out_dir, "Output directory (overrides output.dir and LANDAU_OUT_DIR)");
  run->add_option("--threads", threads, "OpenMP threads")->check(CLI::NonNegativeNumber);
  auto* seed_opt = run->add_option("--seed", seed, "Seed for randomized certificate tuples");

  std::vector<std::string> manifests;
  std::vector<std::string> keys;
  std::string compare_out;
  auto* compare = app.add_subcommand("compare", "Relative sup-norm differences between two or three runs");
  compare->add_option("manifests", manifests, "manifest.json of each run (coarse to fine)")
      ->required()
      ->expected(2, 3)
      ->check(CLI::ExistingFile);
  compare->add_option("--keys", keys, "Keys to compare (field, rho, F, Gen_alpha0, Gen_alpha1)");
  compare->add_option("--out", compare_out, "Write the report to this file as well");

  CLI11_PARSE(app, argc, argv);

  try {
    if (validate->parsed()) {
      const auto c = landau::load_config(config_path);
      std::cout << "ok: experiment " << landau::to_string(c.experiment) << ", config hash "
                << landau::io::sha256(c.canonical) << '\n';
      return 0;
    }
    if (run->parsed()) {
      const auto c = landau::load_config(config_path);
      landau::RunOptions opt;
      if (!out_dir.empty()) opt.out_dir = fs::path(out_dir);
      opt.threads = threads;
      if (seed_opt->count() > 0) opt.seed = seed;
      const auto s = landau::run_experiment(c, opt);
      for (const auto& [name, ok] : s.checks) std::cout << (ok ? "pass " : "FAIL ") << name << '\n';
      if (!s.error.empty()) std::cerr << "error: " << s.error << '\n';
      std::cout << "manifest: " << s.manifest.string() << '\n';
      return s.exit_code;
    }
    if (compare->parsed()) {
      std::vector<fs::path> paths(manifests.begin(), manifests.end());
      const auto rep = landau::compare_runs(paths, keys);
      const auto text = landau::to_json(rep);
      std::cout << text;
      if (!compare_out.empty()) landau::io::write_atomic(compare_out, text);
      return 0;
    }
  } catch (const landau::ConfigError& e) {
    return report_config_error(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
