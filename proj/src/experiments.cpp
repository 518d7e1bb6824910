#include "landau/experiments.hpp"

#include <omp.h>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <limits>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

#include "landau/io.hpp"

namespace landau {

namespace fs = std::filesystem;
using json = nlohmann::json;
using io::fmt;

std::string_view code_version() noexcept { return "0.1.0"; }

namespace {

std::string utc_now() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t tt = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&tt, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

json cjson(cplx z) { return json::array({z.real(), z.imag()}); }

/// Finite doubles as numbers, others as strings (JSON has no inf / nan).
json num(double x) {
  if (std::isfinite(x)) return x;
  return std::isnan(x) ? "nan" : (x > 0 ? "inf" : "-inf");
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

class Outputs {
 public:
  explicit Outputs(fs::path dir) : dir_(std::move(dir)) {}
  const fs::path& dir() const noexcept { return dir_; }
  void write(const std::string& name, std::string_view content) {
    io::write_atomic(dir_ / name, content);
    names_.push_back(name);
  }
  void snapshot(const std::string& name, const SpectralState& s) {
    io::write_snapshot(dir_ / name, s);
    names_.push_back(name);
  }
  json listing() const {
    json files = json::array();
    for (const auto& n : names_) {
      files.push_back({{"name", n}, {"size", fs::file_size(dir_ / n)}, {"sha256", io::sha256_file(dir_ / n)}});
    }
    return files;
  }

 private:
  fs::path dir_;
  std::vector<std::string> names_;
};

double field_factor(int k, double alpha) { return k * std::pow(std::abs(static_cast<double>(k)), -alpha); }

std::string fields_csv(const FieldHistory& field, double alpha) {
  std::ostringstream os;
  os << "t,k,E_re,E_im,E_abs,rho_re,rho_im\n";
  const auto times = field.times();
  for (std::size_t n = 0; n < times.size(); ++n) {
    for (int k = 1; k <= field.max_mode(); ++k) {
      const cplx e = field.at(n, k);
      const cplx rho = e / cplx(0.0, -field_factor(k, alpha));
      os << fmt(times[n]) << ',' << k << ',' << fmt(e.real()) << ',' << fmt(e.imag()) << ',' << fmt(std::abs(e))
         << ',' << fmt(rho.real()) << ',' << fmt(rho.imag()) << '\n';
    }
  }
  return os.str();
}

std::string norms_csv(const RunOutput& run, double dt) {
  std::ostringstream os;
  os << "t,lambda_t,F,Gen_alpha0,Gen_alpha1,gronwall_residual\n";
  for (const auto& cp : run.checkpoints) {
    const auto& st = run.steps[static_cast<std::size_t>(std::llround(cp.t / dt))];
    os << fmt(cp.t) << ',' << fmt(st.lambda_t) << ',' << fmt(st.F) << ',' << fmt(cp.gen_alpha0) << ','
       << fmt(cp.gen_alpha1) << ',' << fmt(cp.gronwall_residual) << '\n';
  }
  return os.str();
}

json grid_json(const DynamicsConfig& d) {
  return {{"K", d.grid.K}, {"T", d.grid.T}, {"dt", d.grid.dt}, {"scheme", to_string(d.grid.scheme)}};
}

struct Context {
  const RunConfig& config;
  const RunOptions& options;
  Outputs& out;
  std::map<std::string, bool>& checks;
  json& metrics;
};

json run_summary_json(const RunOutput& r) {
  json j = {{"c0", r.c0},
            {"eps0", r.eps0},
            {"worst_cond_lambda", num(r.worst_cond_lambda)},
            {"worst_gen_excess", num(r.worst_gen_excess)},
            {"worst_tail_ratio", r.worst_tail_ratio},
            {"max_hermitian_defect", r.max_hermitian_defect},
            {"zero_mode_drift", r.zero_mode_drift},
            {"scattering_distance", r.scattering_distance}};
  double sup_e = 0.0;
  for (const auto& s : r.steps) sup_e = std::max(sup_e, s.sup_E);
  j["sup_E"] = sup_e;
  if (r.gronwall) j["gronwall_worst"] = r.gronwall->worst;
  return j;
}

void dynamic_checks(Context& cx, const RunOutput& r) {
  cx.checks["cond_lambda"] = r.worst_cond_lambda <= 0.0;
  cx.checks["generator_growth"] = r.worst_gen_excess <= 1e-12 * std::max(1.0, r.eps0);
  if (r.gronwall) cx.checks["gronwall"] = r.gronwall->pass;
}

void run_free(Context& cx) {
  DynamicsConfig d = cx.config.dynamics;
  d.coupling = Coupling::free;
  const auto r = simulate(d, {true, false});
  cx.out.write("fields.csv", fields_csv(r.field, d.alpha));
  double worst = 0.0;
  const auto times = r.field.times();
  for (std::size_t n = 0; n < times.size(); ++n) {
    for (int k = 1; k <= d.grid.K; ++k) {
      const cplx rho = r.field.at(n, k) / cplx(0.0, -field_factor(k, d.alpha));
      worst = std::max(worst, std::abs(rho - free_density(d.data, k, times[n], d.grid.dt)));
    }
  }
  cx.metrics["max_density_deviation"] = worst;
  cx.metrics["max_hermitian_defect"] = r.max_hermitian_defect;
  cx.out.write("report.json", dump({{"experiment", "free"}, {"grid", grid_json(d)}, {"metrics", cx.metrics}}));
}

void run_simulate(Context& cx, bool norms_report) {
  DynamicsConfig d = cx.config.dynamics;
  const bool fp = cx.config.solver.fixed_point && !norms_report;
  d.gather_interactions = fp;
  const auto r = simulate(d, {true, true});
  cx.metrics = run_summary_json(r);
  dynamic_checks(cx, r);
  if (fp) {
    const auto sol = fixed_point_field_solve(d, *r.interactions, cx.config.solver.options);
    double diff = 0.0;
    double ref = 0.0;
    for (std::size_t n = 0; n < r.field.samples(); ++n) {
      for (int k = 1; k <= d.grid.K; ++k) {
        diff = std::max(diff, std::abs(sol.field.at(n, k) - r.field.at(n, k)));
        ref = std::max(ref, std::abs(r.field.at(n, k)));
      }
    }
    cx.metrics["fixed_point_iterations"] = sol.iterations;
    cx.metrics["fixed_point_trace"] = sol.trace;
    cx.metrics["stepped_vs_fixed_point_rel_diff"] = ref > 0.0 ? diff / ref : diff;
    cx.out.write("fields.csv", fields_csv(sol.field, d.alpha));
  } else if (!norms_report) {
    cx.out.write("fields.csv", fields_csv(r.field, d.alpha));
  }
  cx.out.write("norms.csv", norms_csv(r, d.grid.dt));
  if (norms_report) {
    std::ostringstream os;
    os << "t,z,Gen,F\n";
    const std::size_t nz = r.gronwall_radii.size();
    for (std::size_t i = 0; i < r.gen_samples.size(); ++i) {
      const auto& s = r.gen_samples[i];
      os << fmt(r.checkpoints[i / nz].t) << ',' << fmt(s.z) << ',' << fmt(s.value) << ','
         << fmt(r.gen_field_norms[i]) << '\n';
    }
    cx.out.write("generator.csv", os.str());
  } else {
    cx.out.snapshot("state_initial.bin", r.initial);
    cx.out.snapshot("state_final.bin", r.final);
  }
  cx.out.write("report.json", dump({{"experiment", to_string(cx.config.experiment)},
                                    {"grid", grid_json(d)},
                                    {"alpha", d.alpha},
                                    {"coupling", to_string(d.coupling)},
                                    {"solver", fp ? "fixed-point" : "time-stepping"},
                                    {"metrics", cx.metrics},
                                    {"checks", cx.checks}}));
}

void run_roots(Context& cx) {
  const auto& c = cx.config;
  json records = json::array();
  for (double k : c.roots.ks) {
    // the configured box may reach past the abscissa at small k; clip it there
    SearchBox box = c.roots.box;
    box.re_min = std::max(box.re_min, 0.95 * dispersion_abscissa(c.dynamics.profile, k));
    if (box.re_min >= box.re_max) throw Error(ErrorKind::abscissa, "roots box lies below the abscissa at k = " + fmt(k));
    const auto roots = find_roots(c.dynamics.profile, c.dynamics.alpha, k, box);
    json rs = json::array();
    bool growing = false;
    for (const auto& r : roots) {
      rs.push_back({{"re", r.lambda.real()}, {"im", r.lambda.imag()}, {"residual", r.residual},
                    {"iterations", r.iterations}});
      growing = growing || r.lambda.real() > 0.0;
    }
    records.push_back({{"k", k}, {"re_min", box.re_min}, {"roots", rs}, {"verdict", roots.empty() ? "none" : growing ? "growing" : "damped"}});
  }
  cx.metrics["records"] = records.size();
  cx.out.write("roots.json", dump({{"experiment", "roots"},
                                   {"alpha", c.dynamics.alpha},
                                   {"box", {c.roots.box.re_min, c.roots.box.re_max, c.roots.box.im_min, c.roots.box.im_max}},
                                   {"records", records}}));
}

void run_penrose(Context& cx) {
  const auto& c = cx.config;
  const auto v = penrose_verdict(c.dynamics.profile, c.dynamics.alpha, c.penrose.ks);
  json records = json::array();
  for (const auto& n : v.contours) {
    records.push_back({{"k", n.k}, {"xi_max", n.xi_max}, {"unstable_count", n.unstable_count},
                       {"min_abs", n.min_abs}, {"verdict", n.unstable_count == 0 ? "stable" : "unstable"}});
  }
  json j = {{"experiment", "penrose"}, {"alpha", c.dynamics.alpha}, {"stable", v.stable}, {"records", records}};
  if (v.unstable_k) j["unstable_k"] = *v.unstable_k;
  if (v.unstable_root) j["unstable_root"] = cjson(v.unstable_root->lambda);
  cx.metrics["stable"] = v.stable;
  cx.out.write("penrose.json", dump(j));
}

void run_green(Context& cx) {
  const auto& c = cx.config;
  json records = json::array();
  bool ok = true;
  for (double k : c.green.ks) {
    const auto g = green_kernel(c.dynamics.profile, c.dynamics.alpha, k, c.green.dt,
                                static_cast<std::size_t>(c.green.samples));
    std::ostringstream os;
    os << "t,Re,Im,envelope\n";
    for (std::size_t n = 0; n < g.times.size(); ++n) {
      os << fmt(g.times[n]) << ',' << fmt(g.values[n].real()) << ',' << fmt(g.values[n].imag()) << ','
         << fmt(g.envelope(g.times[n])) << '\n';
    }
    cx.out.write("green_k" + fmt(k) + ".csv", os.str());
    records.push_back({{"k", k}, {"residual", g.residual}, {"kernel_max", g.kernel_max}, {"fit_c", num(g.fit_c)},
                       {"fit_theta", num(g.fit_theta)}, {"fit_rate", num(g.fit_rate())}});
    ok = ok && g.residual < 1e-8;
  }
  cx.checks["resolvent_residual"] = ok;
  cx.out.write("green.json", dump({{"experiment", "green"}, {"alpha", c.dynamics.alpha}, {"dt", c.green.dt},
                                   {"records", records}}));
}

void run_echo_experiment(Context& cx) {
  const auto& c = cx.config;
  const auto ex = run_echo(c.dynamics, c.echo.first, c.echo.second);
  std::ostringstream os;
  os << "t,rho_re,rho_im,rho_abs\n";
  for (std::size_t n = 0; n < ex.times.size(); ++n) {
    os << fmt(ex.times[n]) << ',' << fmt(ex.density[n].real()) << ',' << fmt(ex.density[n].imag()) << ','
       << fmt(std::abs(ex.density[n])) << '\n';
  }
  cx.out.write("echo_trace.csv", os.str());
  auto pulse = [](const EchoPulse& p) {
    return json{{"k", p.k}, {"eta", p.eta}, {"amplitude", cjson(p.amplitude)}, {"width", p.width}};
  };
  cx.checks["echo_timing"] = ex.timing_error <= 0.05;
  cx.metrics = {{"peak_time", ex.peak_time}, {"peak_amplitude", ex.peak_amplitude}, {"timing_error", ex.timing_error}};
  cx.out.write("echo.json", dump({{"experiment", "echo"},
                                  {"pulses", {pulse(ex.first), pulse(ex.second)}},
                                  {"echo_mode", ex.echo_mode},
                                  {"predicted", {{"t1", ex.predicted.t1}, {"t2", ex.predicted.t2}, {"t3", ex.predicted.t3}}},
                                  {"grid", grid_json(c.dynamics)},
                                  {"coupling", to_string(c.dynamics.coupling)},
                                  {"metrics", cx.metrics}}));
}

void run_certify(Context& cx) {
  const auto& c = cx.config;
  Sweep sweep = c.certify.sweep;
  if (cx.options.seed) sweep.seed = *cx.options.seed;
  const auto cert = certify_bound(c.certify.bound, c.dynamics.norms, sweep);
  double limit = c.certify.max_sup;
  if (limit <= 0.0) limit = c.certify.bound == BoundId::exp_bd ? 1.0 + 1e-9 : std::numeric_limits<double>::infinity();
  cx.checks["certificate"] = cert.finite && cert.sup <= limit;
  std::ostringstream os;
  os << "t,sup\n";
  for (std::size_t i = 0; i < cert.times.size(); ++i) os << fmt(cert.times[i]) << ',' << fmt(cert.sup_by_time[i]) << '\n';
  cx.out.write("certify_trace.csv", os.str());
  auto tuple = [](const Tuple& t) { return json{{"k", t.k}, {"l", t.l}, {"t", t.t}}; };
  json regions = json::object();
  for (int r = 0; r < kRegions; ++r) {
    regions[std::string(to_string(static_cast<Region>(r)))] = {{"sup", num(cert.region_sup[r])},
                                                                {"arg", tuple(cert.region_arg[r])}};
  }
  const auto& p = cert.params;
  cx.metrics = {{"sup", num(cert.sup)}, {"limit", num(limit)}};
  cx.out.write("certificate.json",
               dump({{"experiment", "certify"},
                     {"bound", to_string(cert.id)},
                     {"params", {{"sigma", p.sigma}, {"lambda0", p.lambda0}, {"delta", p.delta}, {"theta1", p.theta1},
                                 {"theta2", p.theta2}}},
                     {"sweep", {{"k_max", sweep.k_max}, {"l_max", sweep.l_max}, {"t_min", sweep.t_min},
                                {"t_max", sweep.t_max}, {"t_points", sweep.t_points}, {"s_points", sweep.s_points},
                                {"random_points", sweep.random_points}, {"seed", sweep.seed},
                                {"rel_tol", sweep.rel_tol}}},
                     {"tuples", cert.tuples},
                     {"sup", num(cert.sup)},
                     {"arg", tuple(cert.arg)},
                     {"limit", num(limit)},
                     {"regions", regions},
                     {"finite", cert.finite}}));
}

}  // namespace

RunSummary run_experiment(const RunConfig& config, const RunOptions& options) {
  RunSummary s;
  if (options.out_dir) {
    s.out_dir = *options.out_dir;
  } else if (const char* env = std::getenv(kOutDirEnv); env && *env) {
    s.out_dir = env;
  } else {
    s.out_dir = config.output_dir;
  }
  if (options.threads > 0) omp_set_num_threads(options.threads);
  io::DirectoryLock lock(s.out_dir);
  s.manifest = s.out_dir / "manifest.json";

  json manifest = {{"schema_version", kSchemaVersion},
                   {"code_version", code_version()},
                   {"experiment", to_string(config.experiment)},
                   {"config_hash", io::sha256(config.canonical)},
                   {"config", json::parse(config.canonical)},
                   {"started", utc_now()}};
  Outputs out(s.out_dir);
  json metrics = json::object();
  Context cx{config, options, out, s.checks, metrics};
  try {
    switch (config.experiment) {
      case Experiment::free: run_free(cx); break;
      case Experiment::simulate: run_simulate(cx, false); break;
      case Experiment::norms_report: run_simulate(cx, true); break;
      case Experiment::roots: run_roots(cx); break;
      case Experiment::penrose: run_penrose(cx); break;
      case Experiment::green: run_green(cx); break;
      case Experiment::echo: run_echo_experiment(cx); break;
      case Experiment::certify: run_certify(cx); break;
    }
    bool all = true;
    for (const auto& [name, ok] : s.checks) all = all && ok;
    s.exit_code = all ? 0 : 2;
  } catch (const BlowUp& e) {
    s.exit_code = 1;
    s.error = e.what();
    manifest["blow_up"] = {{"t", e.time()}, {"k", e.mode()}, {"eta", e.eta()}};
  } catch (const std::exception& e) {
    s.exit_code = 1;
    s.error = e.what();
  }
  const auto kind = config.experiment;
  if (kind == Experiment::free || kind == Experiment::simulate || kind == Experiment::norms_report ||
      kind == Experiment::echo) {
    manifest["grid"] = grid_json(config.dynamics);
  }
  manifest["finished"] = utc_now();
  manifest["status"] = s.exit_code == 0 ? "ok" : s.exit_code == 2 ? "certificate-failure" : "error";
  if (!s.error.empty()) manifest["error"] = s.error;
  manifest["checks"] = s.checks;
  manifest["metrics"] = metrics;
  manifest["files"] = out.listing();
  io::write_atomic(s.manifest, dump(manifest));
  return s;
}

namespace {

struct Series {
  // key -> ((k, t-key) -> value)
  std::map<std::string, std::unordered_map<std::uint64_t, cplx>> values;
  std::vector<std::uint64_t> order;  // (k, t) keys in file order, fields.csv
};

std::uint64_t sample_key(int k, double t) {
  return (static_cast<std::uint64_t>(std::llround(t * 1e6)) << 12) ^ static_cast<std::uint64_t>(k & 0xfff);
}

std::vector<std::vector<std::string>> read_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::io, "cannot read " + path.string());
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    rows.push_back(std::move(cells));
  }
  return rows;
}

struct Run {
  json manifest;
  Series series;
};

Run load_run(const fs::path& manifest_path) {
  Run run;
  std::ifstream in(manifest_path);
  if (!in) throw Error(ErrorKind::io, "cannot read " + manifest_path.string());
  try {
    run.manifest = json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::io, manifest_path.string() + ": " + e.what());
  }
  const fs::path dir = manifest_path.parent_path();
  bool has_fields = false;
  bool has_norms = false;
  for (const auto& f : run.manifest.value("files", json::array())) {
    const auto name = f.value("name", "");
    has_fields = has_fields || name == "fields.csv";
    has_norms = has_norms || name == "norms.csv";
  }
  if (!has_fields) throw Error(ErrorKind::grid_mismatch, manifest_path.string() + " lists no fields.csv");
  const auto rows = read_csv(dir / "fields.csv");
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& r = rows[i];
    if (r.size() < 7) continue;
    const auto key = sample_key(std::stoi(r[1]), std::stod(r[0]));
    run.series.values["field"][key] = {std::stod(r[2]), std::stod(r[3])};
    run.series.values["rho"][key] = {std::stod(r[5]), std::stod(r[6])};
  }
  if (has_norms) {
    const auto nrows = read_csv(dir / "norms.csv");
    for (std::size_t i = 1; i < nrows.size(); ++i) {
      const auto& r = nrows[i];
      if (r.size() < 6) continue;
      const auto key = sample_key(0, std::stod(r[0]));
      run.series.values["F"][key] = std::stod(r[2]);
      run.series.values["Gen_alpha0"][key] = std::stod(r[3]);
      run.series.values["Gen_alpha1"][key] = std::stod(r[4]);
    }
  }
  return run;
}

KeyDiff diff(const std::string& key, const Run& a, const Run& b) {
  KeyDiff d;
  d.key = key;
  const auto ia = a.series.values.find(key);
  const auto ib = b.series.values.find(key);
  if (ia == a.series.values.end() || ib == b.series.values.end()) {
    throw Error(ErrorKind::grid_mismatch, "key '" + key + "' missing from a run");
  }
  double ref = 0.0;
  for (const auto& [k, va] : ia->second) {
    const auto it = ib->second.find(k);
    if (it == ib->second.end()) continue;
    d.abs_diff = std::max(d.abs_diff, std::abs(va - it->second));
    ref = std::max(ref, std::abs(it->second));
    ++d.samples;
  }
  if (d.samples == 0) throw Error(ErrorKind::grid_mismatch, "runs share no samples for key '" + key + "'");
  d.rel_diff = ref > 0.0 ? d.abs_diff / ref : d.abs_diff;
  return d;
}

}  // namespace

CompareReport compare_runs(std::span<const fs::path> manifests, std::span<const std::string> keys) {
  if (manifests.size() < 2 || manifests.size() > 3) {
    throw Error(ErrorKind::invalid_argument, "compare takes two or three manifests");
  }
  std::vector<Run> runs;
  CompareReport rep;
  for (const auto& m : manifests) {
    runs.push_back(load_run(m));
    rep.manifests.push_back(m.string());
  }
  const json& g0 = runs[0].manifest.value("grid", json::object());
  for (std::size_t i = 1; i < runs.size(); ++i) {
    const json& g = runs[i].manifest.value("grid", json::object());
    if (g.value("K", -1) != g0.value("K", -1) || std::abs(g.value("T", 0.0) - g0.value("T", 0.0)) > 1e-12) {
      throw Error(ErrorKind::grid_mismatch, "runs differ in K or T: " + g0.dump() + " vs " + g.dump());
    }
  }
  std::vector<std::string> names(keys.begin(), keys.end());
  if (names.empty()) {
    names = {"field", "rho"};
    bool norms = true;
    for (const auto& r : runs) norms = norms && r.series.values.count("F");
    if (norms) names.insert(names.end(), {"F", "Gen_alpha0", "Gen_alpha1"});
  }
  for (const auto& k : names) rep.first.push_back(diff(k, runs[0], runs[1]));
  if (runs.size() == 3) {
    for (std::size_t i = 0; i < names.size(); ++i) {
      rep.second.push_back(diff(names[i], runs[1], runs[2]));
      const double den = rep.second.back().abs_diff;
      rep.convergence_factor[names[i]] =
          den > 0.0 ? rep.first[i].abs_diff / den : std::numeric_limits<double>::infinity();
    }
  }
  return rep;
}

std::string to_json(const CompareReport& r) {
  auto list = [](const std::vector<KeyDiff>& v) {
    json a = json::array();
    for (const auto& d : v) {
      a.push_back({{"key", d.key}, {"abs_diff", d.abs_diff}, {"rel_diff", d.rel_diff}, {"samples", d.samples}});
    }
    return a;
  };
  json j = {{"manifests", r.manifests}, {"diffs", list(r.first)}};
  if (!r.second.empty()) {
    j["diffs_second"] = list(r.second);
    json f = json::object();
    for (const auto& [k, v] : r.convergence_factor) f[k] = num(v);
    j["convergence_factor"] = f;
  }
  return dump(j);
}

}  // namespace landau
