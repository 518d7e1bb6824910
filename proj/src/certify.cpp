#include "landau/certify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "landau/error.hpp"
#include "landau/quadrature.hpp"

namespace landau {

namespace {

double br1(double x) { return std::sqrt(1.0 + x * x); }
double br2(double k, double x) { return std::sqrt(1.0 + k * k + x * x); }

}  // namespace

double c_ratio(const WeightParams& p, int k, int l, double t, double s) {
  if (s >= t) return 0.0;
  const double lt = radius(p, t);
  const double ls = radius(p, s);
  const double kt = k * t;
  const double lsv = l * s;
  const double log_value = std::log(t - s) + lt * br2(k, kt) + p.sigma * std::log(br1(kt)) -
                           ls * br2(l, lsv) - p.sigma * std::log(br1(lsv)) -
                           ls * br2(k - l, kt - lsv) - p.sigma * std::log(br1(kt - lsv));
  return std::exp(log_value);
}

double derived_theta2(const WeightParams& p) {
  return 0.5 * p.lambda0 * p.delta * std::pow(2.0, -0.5 * (1.0 + p.delta));
}

double c_ratio_bound(const WeightParams& p, int k, int l, double t, double s) {
  if (s >= t) return 0.0;
  const double th = derived_theta2(p);
  const double m = std::min(br1(k * t - l * s), br1(l * s));
  return std::pow(2.0, p.sigma) * (t - s) *
         std::exp(-2.0 * th * std::abs(k) * (t - s) / std::pow(br1(t), p.delta)) * std::pow(m, -p.sigma);
}

std::string_view to_string(BoundId id) noexcept {
  switch (id) {
    case BoundId::cr1: return "CR1";
    case BoundId::cr1_riesz: return "CR1-Riesz";
    case BoundId::cr2: return "CR2";
    case BoundId::exp_bd: return "exp-bd";
  }
  return "?";
}

BoundId bound_from_string(std::string_view name) {
  if (name == "CR1") return BoundId::cr1;
  if (name == "CR1-Riesz") return BoundId::cr1_riesz;
  if (name == "CR2") return BoundId::cr2;
  if (name == "exp-bd") return BoundId::exp_bd;
  throw Error(ErrorKind::invalid_argument,
              "unknown bound '" + std::string(name) + "' (expected CR1, CR1-Riesz, CR2, exp-bd)");
}

std::string_view to_string(Region r) noexcept {
  switch (r) {
    case Region::early: return "early";
    case Region::nonresonant: return "nonresonant";
    case Region::resonant: return "resonant";
    case Region::diagonal: return "diagonal";
  }
  return "?";
}

Region classify(int k, int l, double t, double s) noexcept {
  if (s <= 0.5 * t) return Region::early;
  if (std::abs(k * t - l * s) > 0.25 * t) return Region::nonresonant;
  return k == l ? Region::diagonal : Region::resonant;
}

double bound_kernel(BoundId id, const WeightParams& p, int k, int l, double t, double s) {
  const double tdel = std::pow(br1(t), p.delta);
  const double dk = std::abs(static_cast<double>(k));
  switch (id) {
    case BoundId::cr1: {
      const double m = std::min(br1(k * t - l * s), br1(l * s));
      return (t - s) * std::exp(-p.theta2 * dk * (t - s) / tdel) * std::pow(m, -p.sigma);
    }
    case BoundId::cr1_riesz: {
      const double m = std::min(br2(l, l * s), br2(k - l, k * t - l * s));
      return dk * dk * (t - s) * std::exp(-0.5 * p.theta2 * dk * (t - s) / tdel) * std::pow(m, -p.sigma);
    }
    case BoundId::cr2: {
      const double m = std::min(br2(l, l * s), br2(k - l, k * t - l * s));
      return tdel * tdel * std::exp(-0.25 * p.theta2 * dk * (t - s) / tdel) * std::pow(m, -p.sigma);
    }
    case BoundId::exp_bd: {
      const double e = 1.0 - p.delta;
      return std::exp(p.theta1 * std::pow(br1(t), e) - p.theta2 * std::abs(t - s) / tdel -
                      p.theta1 * std::pow(br1(s), e));
    }
  }
  return 0.0;
}

std::vector<double> breakpoints(BoundId id, int k, int l, double t) {
  std::vector<double> b{0.0, t, 0.5 * t};
  if (id != BoundId::exp_bd && l != 0) {
    const double kt = k * t;
    for (double c : {kt, kt - 0.25 * t, kt + 0.25 * t}) b.push_back(c / l);
    if (id == BoundId::cr1) {
      b.push_back(kt / (2.0 * l));  // |kt - ls| = |ls|
    } else if (kt != 0.0) {
      // l^2 + (ls)^2 = (k-l)^2 + (kt-ls)^2 is linear in s
      const double dk = static_cast<double>(k - l) * (k - l) - static_cast<double>(l) * l;
      b.push_back((dk / kt + kt) / (2.0 * l));
    }
  }
  std::vector<double> out;
  for (double x : b) {
    if (std::isfinite(x) && x >= 0.0 && x <= t) out.push_back(x);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end(), [t](double a, double c) { return std::abs(a - c) <= 1e-14 * std::max(1.0, t); }),
            out.end());
  return out;
}

RegionValues bound_integral(BoundId id, const WeightParams& p, int k, int l, double t, double rel_tol) {
  if (id != BoundId::cr1 && id != BoundId::cr1_riesz) {
    throw Error(ErrorKind::invalid_argument, "bound_integral applies to CR1 and CR1-Riesz only");
  }
  RegionValues out;
  if (!(t > 0.0)) return out;
  const auto b = breakpoints(id, k, l, t);
  auto f = [&](double s) { return bound_kernel(id, p, k, l, t, s); };
  for (std::size_t i = 0; i + 1 < b.size(); ++i) {
    const auto r = quad::integrate(f, b[i], b[i + 1], rel_tol, 1e-300);
    const Region reg = classify(k, l, t, 0.5 * (b[i] + b[i + 1]));
    out.region[static_cast<int>(reg)] += r.value;
    out.total += r.value;
    out.error += r.error;
    out.converged = out.converged && r.converged;
  }
  return out;
}

RegionValues bound_supremum(BoundId id, const WeightParams& p, int k, int l, double t, int s_points) {
  if (id != BoundId::cr2 && id != BoundId::exp_bd) {
    throw Error(ErrorKind::invalid_argument, "bound_supremum applies to CR2 and exp-bd only");
  }
  RegionValues out;
  auto f = [&](double s) { return bound_kernel(id, p, k, l, t, s); };
  auto note = [&](double s, double v) {
    const int r = static_cast<int>(classify(k, l, t, s));
    out.region[r] = std::max(out.region[r], v);
    out.total = std::max(out.total, v);
  };
  if (!(t > 0.0)) {
    note(0.0, f(0.0));
    return out;
  }
  const auto b = breakpoints(id, k, l, t);
  const int n = std::max(4, s_points);
  for (std::size_t i = 0; i + 1 < b.size(); ++i) {
    const double a = b[i];
    const double c = b[i + 1];
    const double h = (c - a) / n;
    int best = 0;
    double best_v = -1.0;
    for (int m = 0; m <= n; ++m) {
      const double s = m == n ? c : a + m * h;
      const double v = f(s);
      note(s, v);
      if (v > best_v) {
        best_v = v;
        best = m;
      }
    }
    // golden-section search around the best sample
    double lo = a + std::max(0, best - 1) * h;
    double hi = std::min(c, a + std::min(n, best + 1) * h);
    const double g = 0.5 * (std::sqrt(5.0) - 1.0);
    double x1 = hi - g * (hi - lo);
    double x2 = lo + g * (hi - lo);
    double f1 = f(x1);
    double f2 = f(x2);
    for (int it = 0; it < 80 && hi - lo > 1e-14 * std::max(1.0, t); ++it) {
      if (f1 < f2) {
        lo = x1;
        x1 = x2;
        f1 = f2;
        x2 = lo + g * (hi - lo);
        f2 = f(x2);
      } else {
        hi = x2;
        x2 = x1;
        f2 = f1;
        x1 = hi - g * (hi - lo);
        f1 = f(x1);
      }
    }
    note(x1, f1);
    note(x2, f2);
  }
  return out;
}

void Sweep::validate() const {
  if (k_max < 1 || l_max < 1) throw Error(ErrorKind::invalid_argument, "sweep needs k_max, l_max >= 1");
  if (!(t_min > 0.0 && t_max >= t_min && std::isfinite(t_max))) {
    throw Error(ErrorKind::invalid_argument, "sweep needs 0 < t_min <= t_max < inf");
  }
  if (t_points < 1 || s_points < 4 || random_points < 0) {
    throw Error(ErrorKind::invalid_argument, "sweep needs t_points >= 1, s_points >= 4, random_points >= 0");
  }
  if (!(rel_tol > 0.0)) throw Error(ErrorKind::invalid_argument, "sweep rel_tol must be > 0");
}

std::vector<double> Sweep::times() const {
  std::vector<double> t(static_cast<std::size_t>(t_points));
  if (t_points == 1) {
    t[0] = t_max;
    return t;
  }
  const double r = std::log(t_max / t_min) / (t_points - 1);
  for (int i = 0; i < t_points; ++i) t[static_cast<std::size_t>(i)] = t_min * std::exp(r * i);
  t.back() = t_max;
  return t;
}

namespace {

bool tuple_less(const Tuple& a, const Tuple& b) {
  if (a.k != b.k) return a.k < b.k;
  if (a.l != b.l) return a.l < b.l;
  return a.t < b.t;
}

void take(double v, const Tuple& at, double& best, Tuple& arg, bool& first) {
  if (first || v > best || (v == best && tuple_less(at, arg))) {
    best = v;
    arg = at;
    first = false;
  }
}

}  // namespace

BoundCertificate certify_bound(BoundId id, const WeightParams& params, const Sweep& sweep, bool parallel) {
  params.validate();
  sweep.validate();
  BoundCertificate cert;
  cert.id = id;
  cert.sweep = sweep;
  cert.params = params;
  cert.times = sweep.times();
  const bool pairwise = id != BoundId::exp_bd;

  std::vector<Tuple> tuples;
  for (std::size_t it = 0; it < cert.times.size(); ++it) {
    if (!pairwise) {
      tuples.push_back({1, 1, cert.times[it]});
      continue;
    }
    for (int k = 1; k <= sweep.k_max; ++k) {
      for (int l = -sweep.l_max; l <= sweep.l_max; ++l) {
        if (l != 0) tuples.push_back({k, l, cert.times[it]});
      }
    }
  }
  const std::size_t grid_tuples = tuples.size();
  if (sweep.random_points > 0) {
    std::mt19937_64 rng(sweep.seed);
    std::uniform_int_distribution<int> kd(1, sweep.k_max);
    std::uniform_int_distribution<int> ld(1, sweep.l_max);
    std::bernoulli_distribution sign(0.5);
    std::uniform_real_distribution<double> ud(std::log(sweep.t_min), std::log(sweep.t_max));
    for (int i = 0; i < sweep.random_points; ++i) {
      Tuple tu;
      tu.k = pairwise ? kd(rng) : 1;
      tu.l = pairwise ? (sign(rng) ? 1 : -1) * ld(rng) : 1;
      tu.t = std::exp(ud(rng));
      tuples.push_back(tu);
    }
  }

  std::vector<RegionValues> values(tuples.size());
  const bool integral = id == BoundId::cr1 || id == BoundId::cr1_riesz;
  auto eval = [&](std::size_t i) {
    const Tuple& tu = tuples[i];
    values[i] = integral ? bound_integral(id, params, tu.k, tu.l, tu.t, sweep.rel_tol)
                         : bound_supremum(id, params, tu.k, tu.l, tu.t, sweep.s_points);
  };
  if (parallel) {
#pragma omp parallel for schedule(dynamic, 16)
    for (long i = 0; i < static_cast<long>(tuples.size()); ++i) eval(static_cast<std::size_t>(i));
  } else {
    for (std::size_t i = 0; i < tuples.size(); ++i) eval(i);
  }

  bool first = true;
  bool region_first[kRegions] = {true, true, true, true};
  double worst_error = -1.0;
  std::size_t worst_failed = tuples.size();
  cert.sup_by_time.assign(cert.times.size(), 0.0);
  for (std::size_t i = 0; i < tuples.size(); ++i) {
    const auto& v = values[i];
    if (!v.converged && v.error > worst_error) {
      worst_error = v.error;
      worst_failed = i;
    }
    take(v.total, tuples[i], cert.sup, cert.arg, first);
    for (int r = 0; r < kRegions; ++r) {
      take(v.region[r], tuples[i], cert.region_sup[r], cert.region_arg[r], region_first[r]);
    }
    if (i < grid_tuples) {
      const auto it = static_cast<std::size_t>(
          std::lower_bound(cert.times.begin(), cert.times.end(), tuples[i].t) - cert.times.begin());
      cert.sup_by_time[it] = std::max(cert.sup_by_time[it], v.total);
    }
  }
  if (worst_failed < tuples.size()) {
    const Tuple& w = tuples[worst_failed];
    throw Error(ErrorKind::refinement_failure,
                std::string(to_string(id)) + " quadrature did not reach tolerance at (k, l, t) = (" +
                    std::to_string(w.k) + ", " + std::to_string(w.l) + ", " + std::to_string(w.t) + ")");
  }
  cert.tuples = tuples.size();
  cert.finite = std::isfinite(cert.sup);
  return cert;
}

}  // namespace landau
