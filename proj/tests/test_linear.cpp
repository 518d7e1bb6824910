#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "landau/equilibria.hpp"
#include "landau/error.hpp"
#include "landau/linear.hpp"

using namespace landau;

namespace {

// Independent oracle for the Maxwellian at alpha = 2: composite Simpson on
// [0, 60] of exp(-lambda tau) tau exp(-k^2 tau^2 / 2), secant iteration.
cplx simpson_dispersion(double k, cplx lambda) {
  const int n = 60000;
  const double h = 60.0 / n;
  cplx s = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double tau = i * h;
    const double w = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    s += w * std::exp(-lambda * tau) * tau * std::exp(-0.5 * k * k * tau * tau);
  }
  return 1.0 + s * h / 3.0;
}

cplx secant_root(double k, cplx a, cplx b) {
  cplx fa = simpson_dispersion(k, a), fb = simpson_dispersion(k, b);
  for (int i = 0; i < 40 && std::abs(b - a) > 1e-13; ++i) {
    const cplx c = b - fb * (b - a) / (fb - fa);
    a = b;
    fa = fb;
    b = c;
    fb = simpson_dispersion(k, b);
  }
  return b;
}

template <class F>
ErrorKind kind_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an Error");
  return ErrorKind::io;
}

const auto kMaxwell = EquilibriumProfile::gaussian();
// secant_root(0.5, -0.1 + 1.4i, -0.2 + 1.45i), frozen
const cplx kRootHalf{-0.1533594669, 1.4156618886};

}  // namespace

TEST_CASE("volterra kernel examples") {
  CHECK(volterra_kernel(kMaxwell, 2.0, 1.0, 0.0) == cplx(0.0));
  CHECK(volterra_kernel(kMaxwell, 2.0, 1.0, 1.0).real() == doctest::Approx(std::exp(-0.5)).epsilon(1e-14));
  CHECK(volterra_kernel(kMaxwell, 0.0, 2.0, 1.0).real() == doctest::Approx(4.0 * std::exp(-2.0)).epsilon(1e-14));
  CHECK(kind_of([] { (void)volterra_kernel(kMaxwell, 2.0, 0.0, 1.0); }) == ErrorKind::zero_mode);
}

TEST_CASE("independent oracle reproduces the frozen k = 0.5 root") {
  const cplx r = secant_root(0.5, {-0.1, 1.4}, {-0.2, 1.45});
  CHECK(std::abs(r - kRootHalf) < 1e-9);
}

TEST_CASE("dispersion function values") {
  CHECK(std::abs(dispersion(kMaxwell, 2.0, 0.5, 1e3) - 1.0) < 1e-5);
  CHECK(std::abs(dispersion(kMaxwell, 2.0, 0.5, kRootHalf)) < 1e-3);
  CHECK(std::abs(dispersion(kMaxwell, 2.0, 0.5, std::conj(kRootHalf))) < 1e-3);
  const cplx lam{0.3, 0.7};
  CHECK(std::abs(dispersion(kMaxwell, 2.0, 0.5, lam) - simpson_dispersion(0.5, lam)) < 1e-9);
  CHECK(kind_of([] { (void)dispersion(kMaxwell, 2.0, 0.5, cplx(-10.0, 0.0)); }) == ErrorKind::abscissa);
}

TEST_CASE("analyticity and conjugate symmetry") {
  for (double alpha : {0.0, 1.0, 2.0}) {
    for (double k : {0.5, 1.0, 2.0}) {
      for (cplx lam : {cplx(0.2, 0.5), cplx(-0.1, 1.3), cplx(1.0, -2.0)}) {
        const double h = 1e-4;
        const cplx dre = (dispersion(kMaxwell, alpha, k, lam + h) - dispersion(kMaxwell, alpha, k, lam - h)) / (2 * h);
        const cplx dim = (dispersion(kMaxwell, alpha, k, lam + cplx(0, h)) -
                          dispersion(kMaxwell, alpha, k, lam - cplx(0, h))) / cplx(0, 2 * h);
        CHECK(std::abs(dre - dim) < 1e-6);
        const auto dv = dispersion_with_derivative(kMaxwell, alpha, k, lam);
        CHECK(std::abs(dv.derivative - dre) < 1e-6);
        CHECK(std::abs(dispersion(kMaxwell, alpha, k, std::conj(lam)) - std::conj(dv.value)) < 1e-12);
      }
    }
  }
}

TEST_CASE("root finding in a box") {
  const auto roots = find_roots(kMaxwell, 2.0, 0.5, {-0.5, 0.3, 0.5, 2.5});
  REQUIRE(roots.size() == 1);
  CHECK(std::abs(roots[0].lambda - kRootHalf) < 1e-3);
  CHECK(std::abs(roots[0].lambda - kRootHalf) < 1e-8);
  CHECK(roots[0].residual < 1e-8);
  CHECK(find_roots(kMaxwell, 2.0, 0.5, {0.0, 1.0, -3.0, 3.0}).empty());
  CHECK(box_winding(kMaxwell, 2.0, 0.5, {0.0, 1.0, -3.0, 3.0}) == 0);

  const auto k1 = newton_root(kMaxwell, 2.0, 1.0, {-0.8, 2.0});
  CHECK(std::abs(k1.lambda - cplx(-0.8513304587, 2.0459048657)) < 1e-8);
}

TEST_CASE("two-stream instability") {
  const auto ts = EquilibriumProfile::two_stream(3.0);
  const std::vector<double> ks{0.2};
  const auto v = penrose_verdict(ts, 2.0, ks);
  CHECK(!v.stable);
  REQUIRE(v.unstable_root.has_value());
  CHECK(v.unstable_root->lambda.real() > 0.0);
  CHECK(v.unstable_root->lambda.real() == doctest::Approx(0.28450969).epsilon(1e-6));
  const auto roots = find_roots(ts, 2.0, 0.2, {0.05, 1.0, -1.0, 1.0});
  CHECK(roots.size() >= 1);
  for (const auto& r : roots) CHECK(r.lambda.real() > 0.0);
  const std::vector<double> stable_ks{0.5, 1.0};
  CHECK(penrose_verdict(ts, 2.0, stable_ks).stable);
}

TEST_CASE("Maxwellian is Penrose stable for every Riesz exponent") {
  std::vector<double> ks;
  for (int k = 1; k <= 8; ++k) ks.push_back(k);
  for (double alpha : {0.0, 1.0, 2.0}) {
    const auto v = penrose_verdict(kMaxwell, alpha, ks);
    CHECK(v.stable);
    CHECK(v.contours.size() == ks.size());
    for (const auto& c : v.contours) CHECK(c.unstable_count == 0);
  }
}

TEST_CASE("asymptotic Landau rate") {
  // e^{-1/2} / sqrt(2 pi)
  CHECK(landau_rate_asymptotic(kMaxwell, 1.0) == doctest::Approx(-0.24197072451914337).epsilon(1e-12));
  for (double k = 0.1; k < 20.0; k *= 1.3) CHECK(landau_rate_asymptotic(kMaxwell, k) < 0.0);
  CHECK(std::abs(landau_rate_asymptotic(kMaxwell, 100.0)) < 1e-5);
  // order-of-magnitude agreement with the least-damped root at small k
  cplx guess = kRootHalf;
  for (double k : {0.5, 0.4, 0.3}) {
    const auto r = newton_root(kMaxwell, 2.0, k, guess);
    guess = r.lambda;
    const double ratio = r.lambda.real() / landau_rate_asymptotic(kMaxwell, k);
    CHECK(ratio >= 0.2);
    CHECK(ratio <= 5.0);
  }
}

TEST_CASE("green kernel resolvent and envelope") {
  const auto g = green_kernel(kMaxwell, 2.0, 1.0, 0.01, 2000);
  CHECK(g.values.size() == 2000);
  CHECK(g.residual < 1e-8 * g.kernel_max);
  CHECK(g.fit_rate() > 0.0);
  CHECK(g.fit_rate() == doctest::Approx(0.8513304587).epsilon(0.05));
  for (std::size_t n = 0; n < g.values.size(); ++n) CHECK(std::abs(g.values[n]) <= g.envelope(g.times[n]) * (1.0 + 1e-9));
}

TEST_CASE("resolvent edge cases") {
  const std::vector<cplx> zero(100, 0.0);
  const auto r = volterra_resolvent(zero, 0.1);
  for (const auto& x : r) CHECK(x == cplx(0.0));
  std::vector<cplx> big(10, 2.0);
  CHECK(kind_of([&] { (void)volterra_resolvent(big, 1.0); }) == ErrorKind::step_size);
  const auto rb = volterra_resolvent(big, 0.01);
  CHECK(resolvent_residual(big, rb, 0.01) < 1e-12);
}

TEST_CASE("convolution with the Green kernel") {
  const auto g = green_kernel(kMaxwell, 2.0, 1.0, 0.01, 500);
  SUBCASE("impulse reproduces the kernel") {
    std::vector<cplx> s(500, 0.0);
    s[0] = 2.0 / g.dt;
    const auto out = convolve_green(g, s, g.dt);
    for (std::size_t n = 1; n < out.size(); ++n) CHECK(std::abs(out[n] - g.values[n]) < 1e-12);
  }
  SUBCASE("zero kernel is the identity") {
    GreenKernel z = g;
    std::fill(z.values.begin(), z.values.end(), cplx(0.0));
    std::vector<cplx> s(300);
    for (std::size_t n = 0; n < s.size(); ++n) s[n] = std::exp(cplx(-0.01, 0.3) * double(n));
    const auto out = convolve_green(z, s, z.dt);
    for (std::size_t n = 0; n < s.size(); ++n) CHECK(out[n] == s[n]);
  }
  SUBCASE("mismatched grids are rejected") {
    std::vector<cplx> s(10, 1.0);
    CHECK_THROWS_AS((void)convolve_green(g, s, 0.02), Error);
    std::vector<cplx> longer(600, 1.0);
    CHECK_THROWS_AS((void)convolve_green(g, longer, g.dt), Error);
  }
  SUBCASE("decaying source stays under the envelope bound") {
    const double theta1 = 0.1;
    std::vector<cplx> s(500);
    for (std::size_t n = 0; n < s.size(); ++n) s[n] = std::exp(-theta1 * std::hypot(1.0, n * g.dt));
    const auto out = convolve_green(g, s, g.dt);
    // direct quadrature of |S(t)| + int C e^{-rate (t - s)} |S(s)| ds
    for (std::size_t n = 0; n < out.size(); n += 25) {
      const double t = n * g.dt;
      double integral = 0.0;
      for (std::size_t m = 0; m <= n; ++m) {
        const double w = (m == 0 || m == n) ? 0.5 : 1.0;
        integral += w * g.envelope(t - m * g.dt) * std::abs(s[m]);
      }
      CHECK(std::abs(out[n]) <= std::abs(s[n]) + integral * g.dt + 1e-12);
    }
  }
}
