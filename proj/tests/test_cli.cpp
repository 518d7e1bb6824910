#include <doctest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <cmath>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include <json.hpp>

#include "landau/io.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

const fs::path kCli = LANDAU_CLI_PATH;
const fs::path kConfigs = LANDAU_CONFIG_DIR;

// Per-process scratch directory, removed at exit.
struct Scratch {
  fs::path dir = fs::temp_directory_path() / ("landau_cli_" + std::to_string(::getpid()));
  Scratch() {
    fs::remove_all(dir);
    fs::create_directories(dir);
  }
  ~Scratch() {
    std::error_code ec;
    fs::remove_all(dir, ec);
  }
} const kScratch;

const fs::path& scratch() { return kScratch.dir; }

struct Result {
  int code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Result cli(const std::string& args, const std::string& env = "") {
  static int counter = 0;
  const auto o = scratch() / ("stdout_" + std::to_string(counter));
  const auto e = scratch() / ("stderr_" + std::to_string(counter++));
  const std::string cmd = env + " \"" + kCli.string() + "\" " + args + " > \"" + o.string() + "\" 2> \"" +
                          e.string() + "\"";
  const int status = std::system(cmd.c_str());
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(o), slurp(e)};
}

fs::path write_config(const std::string& name, const json& j) {
  const auto p = scratch() / name;
  std::ofstream(p) << j.dump(2);
  return p;
}

json read_json(const fs::path& p) { return json::parse(slurp(p)); }

json free_config() {
  return json::parse(R"({
    "schema_version": 1, "experiment": "free",
    "grid": {"K": 4, "T": 5, "dt": 0.05},
    "data": {"closed_form": {"epsilon": 0.001, "k": 1, "width": 1.0}}
  })");
}

json simulate_config(double dt) {
  auto j = json::parse(R"({
    "schema_version": 1, "experiment": "simulate",
    "grid": {"K": 4, "T": 10},
    "data": {"closed_form": {"epsilon": 0.001, "k": 1, "width": 1.0}},
    "output": {}
  })");
  j["grid"]["dt"] = dt;
  // Gronwall finite differences need checkpoints at most 0.25 apart
  j["output"]["checkpoint_every"] = static_cast<int>(std::lround(0.2 / dt));
  return j;
}

bool has_partial(const fs::path& dir) {
  for (const auto& e : fs::recursive_directory_iterator(dir))
    if (e.path().extension() == ".partial") return true;
  return false;
}

}  // namespace

TEST_CASE("validate reports every problem at once") {
  const auto ok = cli("validate --config \"" + (kConfigs / "free.json").string() + "\"");
  CHECK(ok.code == 0);
  CHECK(ok.out.find("ok: experiment free") != std::string::npos);

  const auto bad = cli("validate --config \"" + (kConfigs / "invalid.json").string() + "\"");
  CHECK(bad.code == 1);
  CHECK(bad.err.find("3 problem(s)") != std::string::npos);
  CHECK(bad.err.find("riesz.alpha must lie in [0,2]") != std::string::npos);
  CHECK(bad.err.find("grid.stepz: unknown key") != std::string::npos);
  CHECK(bad.err.find("theta1 <= theta2") != std::string::npos);

  const auto p = scratch() / "broken.json";
  std::ofstream(p) << "{\n  \"schema_version\": 1,\n  \"experiment\": \n}\n";
  const auto parse = cli("validate --config \"" + p.string() + "\"");
  CHECK(parse.code == 1);
  CHECK(parse.err.find("line 4") != std::string::npos);
  CHECK(parse.err.find("column") != std::string::npos);
}

TEST_CASE("every shipped config except the invalid one validates") {
  for (const auto& e : fs::directory_iterator(kConfigs)) {
    if (e.path().filename() == "invalid.json") continue;
    CAPTURE(e.path().string());
    CHECK(cli("validate \"" + e.path().string() + "\"").code == 0);
  }
}

TEST_CASE("free run writes two files and a consistent manifest") {
  const auto out = scratch() / "free";
  const auto r = cli("run --config \"" + write_config("free.json", free_config()).string() + "\" --out \"" +
                     out.string() + "\"");
  REQUIRE(r.code == 0);
  const auto m = read_json(out / "manifest.json");
  CHECK(m["status"] == "ok");
  CHECK(m["experiment"] == "free");
  REQUIRE(m["files"].size() == 2);
  for (const auto& f : m["files"]) {
    const auto path = out / f["name"].get<std::string>();
    REQUIRE(fs::exists(path));
    CHECK(fs::file_size(path) == f["size"].get<std::uintmax_t>());
    CHECK(landau::io::sha256_file(path) == f["sha256"].get<std::string>());
  }
  const auto fields = slurp(out / "fields.csv");
  CHECK(fields.rfind("t,k,E_re,E_im,E_abs,rho_re,rho_im", 0) == 0);
  CHECK(!has_partial(out));
  CHECK(!fs::exists(out / ".lock"));
}

TEST_CASE("output directory resolution") {
  const auto env_dir = scratch() / "from_env";
  const auto cfg = write_config("free_env.json", free_config());
  CHECK(cli("run \"" + cfg.string() + "\"", "LANDAU_OUT_DIR=\"" + env_dir.string() + "\"").code == 0);
  CHECK(fs::exists(env_dir / "manifest.json"));
  const auto flag_dir = scratch() / "from_flag";
  CHECK(cli("run \"" + cfg.string() + "\" --out \"" + flag_dir.string() + "\"",
            "LANDAU_OUT_DIR=\"" + (scratch() / "unused").string() + "\"")
            .code == 0);
  CHECK(fs::exists(flag_dir / "manifest.json"));
  CHECK(!fs::exists(scratch() / "unused"));
}

TEST_CASE("certify exp-bd sets the pass flag") {
  const auto out = scratch() / "certify";
  const auto r = cli("run \"" + (kConfigs / "certify_exp_bd.json").string() + "\" --out \"" + out.string() + "\"");
  CHECK(r.code == 0);
  const auto m = read_json(out / "manifest.json");
  CHECK(m["checks"]["certificate"] == true);
  const auto c = read_json(out / "certificate.json");
  CHECK(c["sup"].get<double>() <= 1.0 + 1e-9);
}

TEST_CASE("blow-up exits 1 and records time and mode") {
  auto j = json::parse(R"({
    "schema_version": 1, "experiment": "simulate",
    "equilibrium": {"family": "two-stream", "v0": 3, "width": 1, "mass": 25},
    "riesz": {"alpha": 2, "coupling": "linear"},
    "grid": {"K": 1, "T": 400, "dt": 0.05},
    "data": {"closed_form": {"epsilon": 0.001, "k": 1, "width": 1.0}}
  })");
  const auto out = scratch() / "blowup";
  const auto r = cli("run \"" + write_config("blowup.json", j).string() + "\" --out \"" + out.string() + "\"");
  CHECK(r.code == 1);
  const auto m = read_json(out / "manifest.json");
  CHECK(m["status"] == "error");
  REQUIRE(m.contains("blow_up"));
  CHECK(std::abs(m["blow_up"]["k"].get<int>()) == 1);
  CHECK(m["blow_up"]["t"].get<double>() > 100.0);
  CHECK(!has_partial(out));
}

TEST_CASE("a held lock refuses a second run") {
  const auto out = scratch() / "locked";
  fs::create_directories(out);
  std::ofstream(out / ".lock") << "other";
  const auto r = cli("run \"" + write_config("free_lock.json", free_config()).string() + "\" --out \"" +
                     out.string() + "\"");
  CHECK(r.code == 1);
  CHECK(!fs::exists(out / "manifest.json"));
  CHECK(slurp(out / ".lock") == "other");
}

TEST_CASE("identical runs are bit-identical and compare to zero") {
  const auto cfg = write_config("sim_det.json", simulate_config(0.05));
  const auto a = scratch() / "det_a", b = scratch() / "det_b";
  REQUIRE(cli("run \"" + cfg.string() + "\" --out \"" + a.string() + "\" --threads 1").code == 0);
  REQUIRE(cli("run \"" + cfg.string() + "\" --out \"" + b.string() + "\" --threads 2").code == 0);
  const auto ma = read_json(a / "manifest.json"), mb = read_json(b / "manifest.json");
  CHECK(ma["config_hash"] == mb["config_hash"]);
  REQUIRE(ma["files"].size() == mb["files"].size());
  for (std::size_t i = 0; i < ma["files"].size(); ++i) CHECK(ma["files"][i]["sha256"] == mb["files"][i]["sha256"]);
  const auto report = scratch() / "cmp.json";
  const auto r = cli("compare \"" + (a / "manifest.json").string() + "\" \"" + (b / "manifest.json").string() +
                     "\" --out \"" + report.string() + "\"");
  REQUIRE(r.code == 0);
  const auto j = read_json(report);
  REQUIRE(j["diffs"].size() >= 2);
  for (const auto& d : j["diffs"]) CHECK(d["abs_diff"].get<double>() == 0.0);

  const auto free_dir = scratch() / "free_cmp";
  REQUIRE(cli("run \"" + write_config("free_cmp.json", free_config()).string() + "\" --out \"" + free_dir.string() +
              "\"")
              .code == 0);
  const auto mismatch = cli("compare \"" + (a / "manifest.json").string() + "\" \"" +
                            (free_dir / "manifest.json").string() + "\"");
  CHECK(mismatch.code == 1);
  CHECK(mismatch.err.find("grid mismatch") != std::string::npos);
}

TEST_CASE("step-halving study reports a third-order factor") {
  std::string args = "compare";
  int i = 0;
  for (double dt : {0.1, 0.05, 0.025}) {
    const auto out = scratch() / ("dt_" + std::to_string(i));
    const auto cfg = write_config("dt_" + std::to_string(i++) + ".json", simulate_config(dt));
    REQUIRE(cli("run \"" + cfg.string() + "\" --out \"" + out.string() + "\"").code == 0);
    args += " \"" + (out / "manifest.json").string() + "\"";
  }
  const auto r = cli(args + " --keys field");
  REQUIRE(r.code == 0);
  const auto j = json::parse(r.out);
  const double f = j["convergence_factor"]["field"].get<double>();
  MESSAGE("convergence factor " << f);
  CHECK(f >= 6.0);
  CHECK(f <= 10.0);
}

TEST_CASE("snapshot layout") {
  landau::SpectralState g(2, 3, 0.25, 17);
  std::mt19937_64 rng(1);
  std::normal_distribution<double> n;
  for (auto& v : g.data()) v = {n(rng), n(rng)};
  const auto p = scratch() / "snap.bin";
  landau::io::write_snapshot(p, g);
  const auto bytes = slurp(p);
  REQUIRE(bytes.size() == 8 + 4 * 8 + 16 * 5 * 7);
  CHECK(bytes.substr(0, 8) == "LNDSNAP1");
  std::int64_t K, J, step;
  double d;
  std::memcpy(&K, bytes.data() + 8, 8);
  std::memcpy(&J, bytes.data() + 16, 8);
  std::memcpy(&d, bytes.data() + 24, 8);
  std::memcpy(&step, bytes.data() + 32, 8);
  CHECK(K == 2);
  CHECK(J == 3);
  CHECK(d == 0.25);
  CHECK(step == 17);
  double first[2];
  std::memcpy(first, bytes.data() + 40, 16);
  CHECK(first[0] == g.at(-2, -3).real());
  CHECK(first[1] == g.at(-2, -3).imag());
  const auto back = landau::io::read_snapshot(p);
  CHECK(back.step() == 17);
  CHECK(std::equal(g.data().begin(), g.data().end(), back.data().begin()));

  std::ofstream(scratch() / "junk.bin") << "not a snapshot";
  CHECK_THROWS(landau::io::read_snapshot(scratch() / "junk.bin"));
}

TEST_CASE("simulate run writes snapshots matching the final state grid") {
  const auto out = scratch() / "sim_snap";
  REQUIRE(cli("run \"" + write_config("sim_snap.json", simulate_config(0.05)).string() + "\" --out \"" +
              out.string() + "\"")
              .code == 0);
  const auto s0 = landau::io::read_snapshot(out / "state_initial.bin");
  const auto s1 = landau::io::read_snapshot(out / "state_final.bin");
  CHECK(s0.step() == 0);
  CHECK(s1.step() == 200);
  CHECK(s0.max_mode() == 4);
  CHECK(s1.max_eta_index() == s0.max_eta_index());
  const auto m = read_json(out / "manifest.json");
  CHECK(m["checks"]["cond_lambda"] == true);
  CHECK(m["checks"]["gronwall"] == true);
  CHECK(!has_partial(out));
}
