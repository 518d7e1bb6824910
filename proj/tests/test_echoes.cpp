#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include <boost/multiprecision/cpp_bin_float.hpp>

#include "landau/certify.hpp"
#include "landau/echoes.hpp"
#include "landau/error.hpp"

using namespace landau;

namespace {

DynamicsConfig echo_base(Coupling c) {
  DynamicsConfig cfg;
  cfg.profile = EquilibriumProfile::gaussian();
  cfg.alpha = 2.0;
  cfg.coupling = c;
  cfg.grid.K = 8;
  cfg.grid.T = 20.0;
  cfg.grid.dt = 0.05;
  return cfg;
}

const EchoPulse kFirst{-4, -4.0, 1e-3, 2.0};
const EchoPulse kSecond{5, 15.0, 1e-3, 2.0};

// Free-streaming packet data including the conjugates.
cplx packet(int k, double eta) {
  cplx v = 0.0;
  for (const auto& p : {kFirst, kSecond}) {
    if (k == p.k) v += p.amplitude * std::exp(-0.5 * p.width * p.width * (eta - p.eta) * (eta - p.eta));
    if (k == -p.k) v += std::conj(p.amplitude) * std::exp(-0.5 * p.width * p.width * (eta + p.eta) * (eta + p.eta));
  }
  return v;
}

// Second-order echo density of mode 1 with free-streaming inputs:
// rho(t) = -i int_0^t (t - s) sum_l E0_l(s) g0_{1-l, t-ls} ds, Simpson in s.
cplx second_order_echo(double t, int K, double alpha) {
  const int n = 4000;
  const double h = t / n;
  cplx sum = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double s = i * h;
    const double w = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    cplx inner = 0.0;
    for (int l = -K; l <= K; ++l) {
      if (l == 0 || std::abs(1 - l) > K) continue;
      const cplx e0 = cplx(0.0, -l * std::pow(std::abs(l), -alpha)) * packet(l, l * s);
      inner += e0 * packet(1 - l, t - l * s);
    }
    sum += w * (t - s) * inner;
  }
  return cplx(0.0, -1.0) * sum * h / 3.0;
}

}  // namespace

TEST_CASE("echo time prediction") {
  const auto a = predict_echo(5, 5.0, -4, 10.0);
  CHECK(a.t3 == doctest::Approx(15.0));
  const auto b = predict_echo(-4, -4.0, 5, 15.0);
  CHECK(b.t1 == doctest::Approx(1.0));
  CHECK(b.t2 == doctest::Approx(3.0));
  CHECK(b.t3 == doctest::Approx(11.0));
  CHECK(b.causal);
  // t2 = 10 / -4 < 0
  CHECK(!a.causal);
  try {
    (void)predict_echo(1, 1.0, -1, 3.0);
    FAIL("expected no_echo");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::no_echo);
  }
  CHECK_THROWS_AS((void)predict_echo(0, 1.0, 2, 3.0), Error);
  // energy moves from high to low modes in the standard setup
  CHECK(std::abs(-4 + 5) < std::max(4, 5));
}

TEST_CASE("peak location") {
  std::vector<double> t;
  std::vector<cplx> v;
  for (int n = 0; n <= 400; ++n) {
    t.push_back(n * 0.05);
    v.push_back(std::exp(-(t.back() - 11.03) * (t.back() - 11.03)));
  }
  const auto [tp, ap] = locate_peak(t, v, 3.0);
  CHECK(tp == doctest::Approx(11.03).epsilon(1e-3));
  CHECK(ap == doctest::Approx(1.0).epsilon(1e-3));
  std::vector<cplx> mono(t.size());
  for (std::size_t n = 0; n < t.size(); ++n) mono[n] = t[n];
  CHECK_THROWS_AS(locate_peak(t, mono, 3.0), Error);
}

TEST_CASE("nonlinear-only echo matches the second-order integral") {
  const auto e = run_echo(echo_base(Coupling::nonlinear_only), kFirst, kSecond);
  CHECK(e.echo_mode == 1);
  CHECK(e.timing_error < 0.02);
  std::vector<cplx> oracle;
  double gap = 0.0, size = 0.0;
  for (std::size_t n = 1; n < e.times.size(); n += 10) {
    const cplx o = second_order_echo(e.times[n], 8, 2.0);
    oracle.push_back(o);
    gap = std::max(gap, std::abs(e.density[n] - o));
    size = std::max(size, std::abs(o));
  }
  MESSAGE("second-order oracle relative gap " << gap / size << ", measured peak " << e.peak_time);
  CHECK(gap / size < 0.02);
  // oracle peak on the same coarse grid
  std::vector<double> ot;
  for (std::size_t n = 1; n < e.times.size(); n += 10) ot.push_back(e.times[n]);
  const auto [tp, ap] = locate_peak(ot, oracle, 3.0);
  CHECK(std::abs(tp - 11.0) / 11.0 < 0.02);
  CHECK(std::abs(ap - e.peak_amplitude) / ap < 0.02);
}

TEST_CASE("full echo: timing, linearity and the single-pulse control") {
  const auto cfg = echo_base(Coupling::full);
  const auto e = run_echo(cfg, kFirst, kSecond);
  MESSAGE("echo peak " << e.peak_time << " amplitude " << e.peak_amplitude);
  CHECK(e.timing_error < 0.05);

  EchoPulse doubled = kFirst;
  doubled.amplitude *= 2.0;
  const double r1 = run_echo(cfg, doubled, kSecond).peak_amplitude / e.peak_amplitude;
  doubled = kSecond;
  doubled.amplitude *= 2.0;
  const double r2 = run_echo(cfg, kFirst, doubled).peak_amplitude / e.peak_amplitude;
  CHECK(r1 >= 1.9);
  CHECK(r1 <= 2.1);
  CHECK(r2 >= 1.9);
  CHECK(r2 <= 2.1);

  auto single = cfg;
  single.data.modes = {{kSecond.k, kSecond.eta, kSecond.amplitude, kSecond.width}};
  const auto r = simulate(single, {true, false});
  double rho = 0.0;
  for (std::size_t n = 0; n < r.field.samples(); ++n) rho = std::max(rho, std::abs(r.field.at(n, 1)));
  CHECK(rho <= 1e-2 * e.peak_amplitude);
  EchoPulse silent = kFirst;
  silent.amplitude = 0.0;
  CHECK_THROWS_AS(run_echo(cfg, silent, kSecond), Error);
}

TEST_CASE("non-causal echo setups are rejected") {
  const auto cfg = echo_base(Coupling::full);
  CHECK_THROWS_AS(run_echo(cfg, {5, 5.0, 1e-3, 2.0}, {-4, 10.0, 1e-3, 2.0}), Error);
}

TEST_CASE("c_ratio against a multiprecision evaluation") {
  using mp = boost::multiprecision::cpp_bin_float_50;
  WeightParams w;
  w.sigma = 1.0;
  w.lambda0 = 1.0;
  w.delta = 0.1;
  const mp t = 10, s = 5, one = 1;
  auto lam = [&](const mp& x) { return mp(w.lambda0) * (one + pow(one + x, mp(-w.delta))); };
  auto A = [&](const mp& z, const mp& k, const mp& eta) {
    return exp(z * sqrt(one + k * k + eta * eta)) * pow(sqrt(one + eta * eta), mp(w.sigma));
  };
  // k = l = 1
  const mp ref = (t - s) * A(lam(t), 1, t) / (A(lam(s), 1, s) * A(lam(s), 0, t - s));
  const double got = c_ratio(w, 1, 1, 10.0, 5.0);
  CHECK(std::abs(got - ref.convert_to<double>()) <= 1e-12 * ref.convert_to<double>());
  CHECK(c_ratio(w, 3, -2, 7.0, 7.0) == 0.0);
}

TEST_CASE("slowly shrinking radius bound on c_ratio") {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> kk(1, 32), ll(-32, 32);
  std::uniform_real_distribution<double> lt(std::log(0.1), std::log(1000.0)), u(0.0, 1.0);
  const WeightParams w;
  double worst = 0.0;
  for (int i = 0; i < 10000; ++i) {
    int l = ll(rng);
    if (l == 0) l = 1;
    const int k = kk(rng);
    const double t = std::exp(lt(rng));
    const double s = t * u(rng);
    const double c = c_ratio(w, k, l, t, s);
    const double b = c_ratio_bound(w, k, l, t, s);
    if (b > 0.0) worst = std::max(worst, c / b);
    CHECK(c <= b * (1.0 + 1e-12));
  }
  MESSAGE("worst c_ratio / bound " << worst);
}

TEST_CASE("exp-bd certificate") {
  WeightParams w;
  w.theta1 = w.theta2 = 0.02;
  Sweep sw;
  sw.t_min = 0.01;
  sw.t_max = 200.0;
  sw.t_points = 100;
  const auto c = certify_bound(BoundId::exp_bd, w, sw);
  CHECK(c.finite);
  CHECK(c.sup <= 1.0 + 1e-9);
  CHECK(c.sup >= 1.0 - 1e-9);
}

TEST_CASE("CR1 sup is nonincreasing in sigma and theta2") {
  Sweep sw;
  sw.k_max = sw.l_max = 6;
  sw.t_max = 200.0;
  sw.t_points = 12;
  double prev = 1e300;
  for (double sigma : {1.0, 2.0, 3.0}) {
    WeightParams w;
    w.sigma = sigma;
    const auto c = certify_bound(BoundId::cr1, w, sw);
    CHECK(c.finite);
    CHECK(c.sup <= prev);
    prev = c.sup;
  }
  prev = 1e300;
  for (double theta2 : {0.02, 0.04, 0.08}) {
    WeightParams w;
    w.theta2 = theta2;
    const auto c = certify_bound(BoundId::cr1, w, sw);
    CHECK(c.sup <= prev);
    prev = c.sup;
  }
}

TEST_CASE("Riesz k = l branch gains two derivatives") {
  WeightParams w;
  w.sigma = 3.0;
  double worst = 0.0;
  for (int k = 1; k <= 32; ++k)
    for (double t : {1.0, 10.0, 100.0, 1000.0}) {
      const auto r = bound_integral(BoundId::cr1_riesz, w, k, k, t);
      CHECK(r.converged);
      worst = std::max(worst, r.region[static_cast<int>(Region::diagonal)]);
    }
  // k^2 int (t-s) <k(t-s)>^-3 ds <= int u (1 + u^2)^-3/2 du = 1
  CHECK(worst <= 1.0);
}

TEST_CASE("region split and breakpoints") {
  CHECK(classify(1, 1, 10.0, 2.0) == Region::early);
  CHECK(classify(1, 2, 10.0, 9.0) == Region::nonresonant);
  CHECK(classify(2, 3, 10.0, 6.8) == Region::resonant);
  CHECK(classify(2, 2, 10.0, 9.0) == Region::diagonal);
  const auto b = breakpoints(BoundId::cr1, 2, 3, 10.0);
  CHECK(b.front() == 0.0);
  CHECK(b.back() == 10.0);
  CHECK(std::is_sorted(b.begin(), b.end()));
  CHECK(std::any_of(b.begin(), b.end(), [](double x) { return std::abs(x - 20.0 / 3.0) < 1e-12; }));
  const WeightParams w;
  const auto r = bound_integral(BoundId::cr1, w, 2, 3, 10.0);
  double parts = 0.0;
  for (double x : r.region) parts += x;
  CHECK(parts == doctest::Approx(r.total).epsilon(1e-12));
  CHECK_THROWS_AS(bound_integral(BoundId::exp_bd, w, 1, 1, 1.0), Error);
  CHECK_THROWS_AS(bound_supremum(BoundId::cr1, w, 1, 1, 1.0), Error);
}

TEST_CASE("parallel certificate merge is deterministic") {
  WeightParams w;
  w.sigma = 3.0;
  Sweep sw;
  sw.k_max = sw.l_max = 8;
  sw.t_points = 10;
  sw.random_points = 200;
  sw.seed = 7;
  for (auto id : {BoundId::cr1, BoundId::cr2}) {
    const auto p = certify_bound(id, w, sw, true);
    const auto s = certify_bound(id, w, sw, false);
    CHECK(p.sup == s.sup);
    CHECK(p.arg.k == s.arg.k);
    CHECK(p.arg.l == s.arg.l);
    CHECK(p.arg.t == s.arg.t);
    CHECK(p.sup_by_time == s.sup_by_time);
    CHECK(p.tuples == s.tuples);
  }
  Sweep bad = sw;
  bad.t_min = -1.0;
  CHECK_THROWS_AS(bad.validate(), Error);
  CHECK(bound_from_string(to_string(BoundId::cr1_riesz)) == BoundId::cr1_riesz);
}
