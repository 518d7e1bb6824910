#include "landau/config.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <optional>
#include <set>
#include <sstream>

#include <json.hpp>

namespace landau {

namespace {

using json = nlohmann::json;

std::string join(const std::vector<std::string>& v) {
  std::string out;
  for (const auto& s : v) out += "\n  " + s;
  return out;
}

std::string num(double x) {
  std::ostringstream os;
  os.precision(10);
  os << x;
  return os.str();
}

/// Collects problems while walking the document.
class Reader {
 public:
  std::vector<std::string> problems;

  void fail(const std::string& path, const std::string& msg) { problems.push_back(path + ": " + msg); }

  /// Object at `key` (empty when absent); records unknown keys.
  const json* section(const json& parent, const std::string& path, const char* key,
                      std::initializer_list<const char*> allowed) {
    const auto it = parent.find(key);
    if (it == parent.end()) return nullptr;
    const std::string p = path.empty() ? key : path + "." + key;
    if (!it->is_object()) {
      fail(p, "must be an object");
      return nullptr;
    }
    keys(*it, p, allowed);
    return &*it;
  }

  void keys(const json& obj, const std::string& path, std::initializer_list<const char*> allowed) {
    std::set<std::string> ok(allowed.begin(), allowed.end());
    for (auto it = obj.begin(); it != obj.end(); ++it) {
      if (!ok.count(it.key())) fail(path.empty() ? it.key() : path + "." + it.key(), "unknown key");
    }
  }

  /// Number at key with range [lo, hi]; `open_lo` makes the lower bound strict.
  void number(const json* obj, const std::string& path, const char* key, double& out, double lo, double hi,
              bool open_lo = false, const char* range_msg = nullptr) {
    if (!obj) return;
    const auto it = obj->find(key);
    if (it == obj->end()) return;
    const std::string p = path + "." + key;
    if (!it->is_number()) {
      fail(p, "must be a number");
      return;
    }
    const double v = it->get<double>();
    const bool bad = !std::isfinite(v) || v > hi || (open_lo ? v <= lo : v < lo);
    if (bad) {
      if (range_msg) {
        problems.push_back(std::string(range_msg) + " (got " + num(v) + ")");
      } else {
        fail(p, "must lie in " + std::string(open_lo ? "(" : "[") + num(lo) + ", " +
                    (std::isinf(hi) ? "inf)" : num(hi) + "]") + " (got " + num(v) + ")");
      }
      return;
    }
    out = v;
  }

  template <class Int>
  void integer(const json* obj, const std::string& path, const char* key, Int& out, long long lo, long long hi) {
    if (!obj) return;
    const auto it = obj->find(key);
    if (it == obj->end()) return;
    const std::string p = path + "." + key;
    if (!it->is_number_integer()) {
      fail(p, "must be an integer");
      return;
    }
    const long long v = it->get<long long>();
    if (v < lo || v > hi) {
      fail(p, "must lie in [" + std::to_string(lo) + ", " + std::to_string(hi) + "] (got " + std::to_string(v) + ")");
      return;
    }
    out = static_cast<Int>(v);
  }

  void string(const json* obj, const std::string& path, const char* key, std::string& out) {
    if (!obj) return;
    const auto it = obj->find(key);
    if (it == obj->end()) return;
    if (!it->is_string()) {
      fail(path + "." + key, "must be a string");
      return;
    }
    out = it->get<std::string>();
  }

  /// Complex scalar as a number or a [re, im] pair.
  std::optional<cplx> complex(const json& v, const std::string& path) {
    if (v.is_number()) return cplx(v.get<double>(), 0.0);
    if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number()) {
      return cplx(v[0].get<double>(), v[1].get<double>());
    }
    fail(path, "must be a number or a [re, im] pair");
    return std::nullopt;
  }

  void number_list(const json* obj, const std::string& path, const char* key, std::vector<double>& out,
                   bool nonzero) {
    if (!obj) return;
    const auto it = obj->find(key);
    if (it == obj->end()) return;
    const std::string p = path + "." + key;
    if (!it->is_array() || it->empty()) {
      fail(p, "must be a non-empty array of numbers");
      return;
    }
    std::vector<double> v;
    for (std::size_t i = 0; i < it->size(); ++i) {
      const auto& x = (*it)[i];
      if (!x.is_number() || !std::isfinite(x.get<double>()) || (nonzero && x.get<double>() == 0.0)) {
        fail(p + "[" + std::to_string(i) + "]", nonzero ? "must be a nonzero number" : "must be a number");
        return;
      }
      v.push_back(x.get<double>());
    }
    out = std::move(v);
  }

  template <class Parse, class T>
  void choice(const json* obj, const std::string& path, const char* key, T& out, Parse parse) {
    std::string s;
    const std::size_t before = problems.size();
    string(obj, path, key, s);
    if (problems.size() != before || s.empty()) return;
    try {
      out = parse(s);
    } catch (const Error& e) {
      fail(path + "." + key, e.what());
    }
  }
};

std::pair<std::size_t, std::size_t> line_col(std::string_view text, std::size_t byte) {
  std::size_t line = 1;
  std::size_t col = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

void read_profile(Reader& r, const json& root, RunConfig& c) {
  const json* eq = r.section(root, "", "equilibrium", {"family", "v0", "width", "mass", "theta0", "table"});
  auto& p = c.dynamics.profile;
  if (!eq) return;
  r.choice(eq, "equilibrium", "family", p.family, family_from_string);
  r.number(eq, "equilibrium", "v0", p.v0, 0.0, 1e6);
  r.number(eq, "equilibrium", "width", p.width, 0.0, 1e6, true);
  r.number(eq, "equilibrium", "mass", p.mass, 0.0, 1e12, true);
  r.number(eq, "equilibrium", "theta0", p.theta0, 0.0, 1e6, true);
  const json* table = r.section(*eq, "equilibrium", "table", {"eta", "values"});
  if (p.family == Family::two_stream && !eq->contains("v0")) r.fail("equilibrium.v0", "required for two-stream");
  if (p.family == Family::tabulated) {
    if (!table) {
      r.fail("equilibrium.table", "required for custom-tabulated");
      return;
    }
    r.number_list(table, "equilibrium.table", "eta", p.table_eta, false);
    const auto it = table->find("values");
    if (it == table->end() || !it->is_array()) {
      r.fail("equilibrium.table.values", "must be an array");
      return;
    }
    p.table_values.clear();
    for (std::size_t i = 0; i < it->size(); ++i) {
      if (auto v = r.complex((*it)[i], "equilibrium.table.values[" + std::to_string(i) + "]")) {
        p.table_values.push_back(*v);
      }
    }
  } else if (table) {
    r.fail("equilibrium.table", "only valid for custom-tabulated");
  }
  try {
    p.validate();
  } catch (const Error& e) {
    r.fail("equilibrium", e.what());
  }
}

void read_pulse(Reader& r, const json& v, const std::string& path, EchoPulse& p) {
  if (!v.is_object()) {
    r.fail(path, "must be an object");
    return;
  }
  r.keys(v, path, {"k", "eta", "amplitude", "width"});
  r.integer(&v, path, "k", p.k, -1024, 1024);
  r.number(&v, path, "eta", p.eta, -1e9, 1e9);
  r.number(&v, path, "width", p.width, 0.0, 1e6);
  if (v.contains("amplitude")) {
    if (auto a = r.complex(v["amplitude"], path + ".amplitude")) p.amplitude = *a;
  }
  if (p.k == 0) r.fail(path + ".k", "must be nonzero");
}

void read_data(Reader& r, const json& root, RunConfig& c) {
  const json* data = r.section(root, "", "data", {"modes", "closed_form"});
  auto& d = c.dynamics.data;
  if (!data) return;
  if (const auto it = data->find("modes"); it != data->end()) {
    if (!it->is_array()) {
      r.fail("data.modes", "must be an array");
    } else {
      for (std::size_t i = 0; i < it->size(); ++i) {
        EchoPulse p;
        read_pulse(r, (*it)[i], "data.modes[" + std::to_string(i) + "]", p);
        d.modes.push_back({p.k, p.eta, p.amplitude, p.width});
      }
    }
  }
  if (const json* cf = r.section(*data, "data", "closed_form", {"epsilon", "k", "width"})) {
    ClosedForm f;
    r.number(cf, "data.closed_form", "epsilon", f.epsilon, -1e6, 1e6);
    r.integer(cf, "data.closed_form", "k", f.k, -1024, 1024);
    r.number(cf, "data.closed_form", "width", f.width, 0.0, 1e6, true);
    if (f.k == 0) r.fail("data.closed_form.k", "must be nonzero");
    d.closed_form = f;
  }
}

void read_experiment_sections(Reader& r, const json& root, RunConfig& c) {
  if (const json* s = r.section(root, "", "roots", {"k", "box"})) {
    r.number_list(s, "roots", "k", c.roots.ks, true);
    if (const json* b = r.section(*s, "roots", "box", {"re_min", "re_max", "im_min", "im_max"})) {
      const double inf = std::numeric_limits<double>::infinity();
      r.number(b, "roots.box", "re_min", c.roots.box.re_min, -inf, inf);
      r.number(b, "roots.box", "re_max", c.roots.box.re_max, -inf, inf);
      r.number(b, "roots.box", "im_min", c.roots.box.im_min, -inf, inf);
      r.number(b, "roots.box", "im_max", c.roots.box.im_max, -inf, inf);
      if (!(c.roots.box.re_min < c.roots.box.re_max && c.roots.box.im_min < c.roots.box.im_max)) {
        r.fail("roots.box", "needs re_min < re_max and im_min < im_max");
      }
    }
  }
  if (const json* s = r.section(root, "", "penrose", {"k"})) r.number_list(s, "penrose", "k", c.penrose.ks, true);
  if (const json* s = r.section(root, "", "green", {"k", "dt", "samples"})) {
    r.number_list(s, "green", "k", c.green.ks, true);
    r.number(s, "green", "dt", c.green.dt, 0.0, 10.0, true);
    r.integer(s, "green", "samples", c.green.samples, 2, 100000000);
  }
  if (const json* s = r.section(root, "", "echo", {"pulses"})) {
    const auto it = s->find("pulses");
    if (it != s->end()) {
      if (!it->is_array() || it->size() != 2) {
        r.fail("echo.pulses", "must hold exactly two pulses");
      } else {
        read_pulse(r, (*it)[0], "echo.pulses[0]", c.echo.first);
        read_pulse(r, (*it)[1], "echo.pulses[1]", c.echo.second);
      }
    }
  }
  if (const json* s = r.section(root, "", "certify", {"bound", "k_max", "l_max", "t_min", "t_max", "t_points",
                                                      "s_points", "random_points", "rel_tol", "max_sup"})) {
    auto& w = c.certify.sweep;
    r.choice(s, "certify", "bound", c.certify.bound, bound_from_string);
    r.integer(s, "certify", "k_max", w.k_max, 1, 4096);
    r.integer(s, "certify", "l_max", w.l_max, 1, 4096);
    r.number(s, "certify", "t_min", w.t_min, 0.0, 1e9, true);
    r.number(s, "certify", "t_max", w.t_max, 0.0, 1e9, true);
    r.integer(s, "certify", "t_points", w.t_points, 1, 100000);
    r.integer(s, "certify", "s_points", w.s_points, 4, 100000);
    r.integer(s, "certify", "random_points", w.random_points, 0, 100000000);
    r.number(s, "certify", "rel_tol", w.rel_tol, 0.0, 1.0, true);
    r.number(s, "certify", "max_sup", c.certify.max_sup, 0.0, 1e300);
    if (w.t_max < w.t_min) r.fail("certify.t_max", "must not be below t_min");
  }
}

}  // namespace

std::string_view to_string(Experiment e) noexcept {
  switch (e) {
    case Experiment::free: return "free";
    case Experiment::simulate: return "simulate";
    case Experiment::roots: return "roots";
    case Experiment::penrose: return "penrose";
    case Experiment::green: return "green";
    case Experiment::echo: return "echo";
    case Experiment::certify: return "certify";
    case Experiment::norms_report: return "norms-report";
  }
  return "?";
}

Experiment experiment_from_string(std::string_view name) {
  for (auto e : {Experiment::free, Experiment::simulate, Experiment::roots, Experiment::penrose, Experiment::green,
                 Experiment::echo, Experiment::certify, Experiment::norms_report}) {
    if (to_string(e) == name) return e;
  }
  throw Error(ErrorKind::invalid_argument,
              "unknown experiment '" + std::string(name) +
                  "' (expected free, simulate, roots, penrose, green, echo, certify, norms-report)");
}

ConfigError::ConfigError(std::vector<std::string> problems)
    : Error(ErrorKind::config, std::to_string(problems.size()) + " problem(s) in config:" + join(problems)),
      problems_(std::move(problems)) {}

RunConfig parse_config(std::string_view text) {
  json root;
  try {
    root = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    const auto [line, col] = line_col(text, e.byte > 0 ? e.byte - 1 : 0);
    std::string what = e.what();
    if (const auto p = what.find("parse error"); p != std::string::npos) {
      const auto q = what.find(": ", p);
      what = q == std::string::npos ? what.substr(p) : what.substr(q + 2);
    }
    throw ConfigError({"line " + std::to_string(line) + ", column " + std::to_string(col) + ": " + what});
  }
  if (!root.is_object()) throw ConfigError({"<root>: must be an object"});

  Reader r;
  RunConfig c;
  r.keys(root, "", {"schema_version", "experiment", "equilibrium", "riesz", "grid", "data", "norms", "output",
                    "roots", "penrose", "green", "echo", "certify", "solver"});
  if (!root.contains("schema_version")) {
    r.fail("schema_version", "required");
  } else {
    r.integer(&root, "", "schema_version", c.schema_version, 0, 1000000);
    if (c.schema_version != kSchemaVersion) {
      r.fail("schema_version", "unsupported version (this build reads " + std::to_string(kSchemaVersion) + ")");
    }
  }
  if (!root.contains("experiment")) {
    r.fail("experiment", "required");
  } else {
    r.choice(&root, "", "experiment", c.experiment, experiment_from_string);
  }
  // Reader paths for top-level keys start with '.'; strip it.
  for (auto& p : r.problems) {
    if (!p.empty() && p[0] == '.') p.erase(0, 1);
  }

  auto& d = c.dynamics;
  read_profile(r, root, c);
  if (const json* s = r.section(root, "", "riesz", {"alpha", "coupling"})) {
    r.number(s, "riesz", "alpha", d.alpha, 0.0, 2.0, false, "riesz.alpha must lie in [0,2]");
    r.choice(s, "riesz", "coupling", d.coupling, coupling_from_string);
  }
  if (const json* s = r.section(root, "", "grid", {"K", "T", "dt", "J", "scheme"})) {
    r.integer(s, "grid", "K", d.grid.K, 1, 256);
    r.number(s, "grid", "T", d.grid.T, 0.0, 1e6, true);
    r.number(s, "grid", "dt", d.grid.dt, 0.0, 10.0, true);
    r.integer(s, "grid", "J", d.grid.J, 0, 100000000);
    r.choice(s, "grid", "scheme", d.grid.scheme, scheme_from_string);
    const double n = d.grid.T / d.grid.dt;
    if (std::abs(n - std::round(n)) > 1e-9 * std::max(1.0, n)) r.fail("grid.T", "must be an integer multiple of grid.dt");
  }
  read_data(r, root, c);
  if (const json* s = r.section(root, "", "norms", {"sigma", "lambda0", "delta", "theta1", "theta2"})) {
    auto& w = d.norms;
    r.number(s, "norms", "sigma", w.sigma, 0.0, 100.0);
    r.number(s, "norms", "lambda0", w.lambda0, 0.0, 100.0, true);
    r.number(s, "norms", "delta", w.delta, 0.0, 0.5, true);
    if (w.delta == 0.5) r.fail("norms.delta", "must lie in (0, 0.5)");
    r.number(s, "norms", "theta1", w.theta1, 0.0, 100.0, true);
    r.number(s, "norms", "theta2", w.theta2, 0.0, 100.0, true);
    if (w.theta1 > w.theta2) {
      r.fail("norms.theta1", "exceeds norms.theta2 (" + num(w.theta1) + " > " + num(w.theta2) +
                                 "); the exp-bd bound holds only for theta1 <= theta2");
    }
  }
  if (const json* s = r.section(root, "", "output", {"dir", "checkpoint_every"})) {
    r.string(s, "output", "dir", c.output_dir);
    r.integer(s, "output", "checkpoint_every", d.checkpoint_every, 1, 100000000);
  }
  read_experiment_sections(r, root, c);
  if (const json* s = r.section(root, "", "solver", {"method", "tolerance", "max_iterations"})) {
    std::string method = "time-stepping";
    r.string(s, "solver", "method", method);
    if (method == "fixed-point") {
      c.solver.fixed_point = true;
    } else if (method != "time-stepping") {
      r.fail("solver.method", "must be time-stepping or fixed-point");
    }
    r.number(s, "solver", "tolerance", c.solver.options.tolerance, 0.0, 1.0, true);
    r.integer(s, "solver", "max_iterations", c.solver.options.max_iterations, 1, 100000);
    if (c.solver.fixed_point && c.experiment != Experiment::simulate) {
      r.fail("solver.method", "fixed-point applies to experiment simulate only");
    }
  }

  const bool dynamic = c.experiment == Experiment::free || c.experiment == Experiment::simulate ||
                       c.experiment == Experiment::norms_report;
  if (dynamic) {
    if (d.data.modes.empty() && !d.data.closed_form) r.fail("data", "needs modes or closed_form");
    for (std::size_t i = 0; i < d.data.modes.size(); ++i) {
      if (std::abs(d.data.modes[i].k) > d.grid.K) {
        r.fail("data.modes[" + std::to_string(i) + "].k", "exceeds grid.K");
      }
    }
    if (d.data.closed_form && std::abs(d.data.closed_form->k) > d.grid.K) r.fail("data.closed_form.k", "exceeds grid.K");
    if (c.experiment == Experiment::free) d.coupling = Coupling::free;
  }
  if (c.experiment == Experiment::echo) {
    const auto& e = c.echo;
    try {
      const auto t = predict_echo(e.first.k, e.first.eta, e.second.k, e.second.eta);
      if (!t.causal) r.fail("echo.pulses", "non-causal setup: need t3 > max(t1, t2) >= 0");
      if (std::abs(e.first.k + e.second.k) > d.grid.K) r.fail("echo.pulses", "echo mode exceeds grid.K");
    } catch (const Error& err) {
      r.fail("echo.pulses", err.what());
    }
  }
  if (!r.problems.empty()) throw ConfigError(std::move(r.problems));
  c.canonical = root.dump();
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::io, "cannot read config " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return parse_config(os.str());
}

}  // namespace landau
