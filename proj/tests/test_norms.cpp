#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "landau/error.hpp"
#include "landau/norms.hpp"

using namespace landau;

namespace {

WeightParams params(double sigma) {
  WeightParams w;
  w.sigma = sigma;
  return w;
}

// g_{+-1, eta} = exp(-eta^2) on K = 1, eta in [-10, 10].
SpectralState gaussian_rows(double d_eta) {
  const int J = static_cast<int>(std::lround(10.0 / d_eta));
  SpectralState g(1, J, d_eta);
  for (int k : {-1, 1})
    for (int j = -J; j <= J; ++j) g.at(k, j) = std::exp(-g.eta(j) * g.eta(j));
  return g;
}

SpectralState random_state(std::mt19937_64& rng, int K, int J, int support_k, int support_j, double d_eta) {
  std::normal_distribution<double> n(0.0, 1.0);
  SpectralState g(K, J, d_eta);
  for (int k = -support_k; k <= support_k; ++k)
    for (int j = -support_j; j <= support_j; ++j) g.at(k, j) = cplx(n(rng), n(rng));
  return g;
}

}  // namespace

TEST_CASE("weight examples") {
  // high-precision evaluation of e^{0.5 sqrt 3} sqrt 2
  CHECK(weight(params(1.0), 0.5, 1.0, 1.0) == doctest::Approx(3.362211675083558).epsilon(1e-14));
  const auto w = params(1.0);
  CHECK(weight(w, 0.7, 2.0, 3.0) <= weight(w, 0.7, 1.0, 1.0) * weight(w, 0.7, 1.0, 2.0));
  CHECK(weight(params(0.0), 0.0, 5.0, -7.0) == 1.0);
  CHECK(bracket(0.0, 0.0) == 1.0);
}

TEST_CASE("radius example and monotonicity") {
  WeightParams w;
  w.lambda0 = 0.5;
  w.delta = 0.2;
  // 0.5 (1 + 4^{-0.2})
  CHECK(radius(w, 3.0) == doctest::Approx(0.8789291416275995).epsilon(1e-14));
  CHECK(radius(w, 0.0) == doctest::Approx(1.0));
  double prev = radius(w, 0.0);
  for (double t = 0.5; t < 1e4; t *= 1.7) {
    const double r = radius(w, t);
    CHECK(r < prev);
    CHECK(r > w.lambda0);
    CHECK(radius_rate(w, t) < 0.0);
    const double h = 1e-6 * (1.0 + t);
    CHECK(radius_rate(w, t) == doctest::Approx((radius(w, t + h) - radius(w, t - h)) / (2 * h)).epsilon(1e-6));
    prev = r;
  }
}

TEST_CASE("weight algebra property") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-30.0, 30.0);
  std::uniform_int_distribution<int> kk(-20, 20);
  std::uniform_real_distribution<double> zs(0.0, 2.0);
  std::uniform_real_distribution<double> ss(0.0, 4.0);
  for (int i = 0; i < 10000; ++i) {
    const double sigma = i % 5 == 0 ? 0.0 : ss(rng);
    const auto w = params(sigma);
    const double z = zs(rng);
    const int k1 = kk(rng), k2 = kk(rng);
    const double e1 = u(rng), e2 = u(rng);
    const double lhs = weight(w, z, k1 + k2, e1 + e2);
    const double rhs = weight(w, z, k1, e1) * weight(w, z, k2, e2);
    CHECK(lhs <= std::pow(2.0, sigma / 2.0) * rhs * (1.0 + 1e-13));
    if (sigma == 0.0) CHECK(lhs <= rhs * (1.0 + 1e-13));
  }
}

TEST_CASE("weight is nondecreasing in z, |k| and |eta|") {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(0.0, 20.0);
  for (int i = 0; i < 2000; ++i) {
    const auto w = params(u(rng) / 5.0);
    const double z = u(rng) / 10.0, k = std::floor(u(rng)), e = u(rng);
    const double a = weight(w, z, k, e);
    CHECK(weight(w, z + 0.1, k, e) >= a);
    CHECK(weight(w, z, k + 1.0, e) >= a);
    CHECK(weight(w, z, -k - 1.0, e) >= a);
    CHECK(weight(w, z, k, e + 0.3) >= a);
    CHECK(weight(w, z, k, -e - 0.3) >= a);
  }
}

TEST_CASE("weight parameters are validated") {
  WeightParams w;
  CHECK_NOTHROW(w.validate());
  w.delta = 0.5;
  CHECK_THROWS_AS(w.validate(), Error);
  w = WeightParams{};
  w.theta1 = 0.05;
  w.theta2 = 0.02;
  CHECK_THROWS_AS(w.validate(), Error);
}

TEST_CASE("generator norm of a gaussian state") {
  const auto w = params(0.0);
  // continuum values 2 sqrt(pi) + 4 and 2 sqrt(pi)
  const double exact1 = 2.0 * std::sqrt(std::numbers::pi) + 4.0;
  const double exact0 = 2.0 * std::sqrt(std::numbers::pi);
  double prev_err = 1e300;
  for (double d : {0.1, 0.05, 0.025}) {
    const auto g = gaussian_rows(d);
    const auto s = gen_norm(g, w, 0.0, 1);
    const auto s0 = gen_norm(g, w, 0.0, 0);
    CHECK(s0.value == doctest::Approx(exact0).epsilon(1e-10));
    const double err = std::abs(s.value - exact1);
    CHECK(err < 2.0 * d * d);
    CHECK(err < prev_err);
    prev_err = err;
    REQUIRE(s.breakdown.size() == 2);
    CHECK(s.breakdown[0] + s.breakdown[1] == doctest::Approx(s.value));
  }
  SpectralState zero(3, 40, 0.1);
  CHECK(gen_norm(zero, w, 0.3).value == 0.0);
}

TEST_CASE("field norm examples") {
  const auto w = params(0.0);
  const double eps = 1e-3;
  const std::vector<cplx> modes{eps, 0.0, eps};
  CHECK(f_norm(modes, 1, w, 0.0, 0.0) == doctest::Approx(2.0 * eps));
  // sigma = 1 at t = 2: <kt>^1 = sqrt(5)
  CHECK(f_norm(modes, 1, params(1.0), 2.0, 0.0) == doctest::Approx(2.0 * eps * std::sqrt(5.0)));
  FieldHistory h(1, 0.5);
  h.push(0.0, modes);
  h.push(0.5, modes);
  CHECK(f_norm(h, w, 0.5, 0.0) == doctest::Approx(2.0 * eps));
  try {
    (void)f_norm(h, w, 0.25, 0.0);
    FAIL("expected missing_sample");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::missing_sample);
  }
}

TEST_CASE("product rule for the generator") {
  std::mt19937_64 rng(21);
  const double d = 0.1;
  for (int trial = 0; trial < 20; ++trial) {
    const auto f = random_state(rng, 4, 12, 2, 5, d);
    const auto g = random_state(rng, 4, 12, 2, 5, d);
    SpectralState fg(4, 12, d);
    for (int k = -4; k <= 4; ++k)
      for (int j = -12; j <= 12; ++j) {
        cplx s = 0.0;
        for (int l = -2; l <= 2; ++l)
          for (int i = -5; i <= 5; ++i) s += f.value(l, i) * g.value(k - l, j - i);
        fg.at(k, j) = s * d;
      }
    for (double sigma : {0.0, 1.0, 2.5}) {
      const auto w = params(sigma);
      const double z = 0.05 * trial;
      const double lhs = gen_norm(fg, w, z, 0).value;
      const double rhs = gen_norm(f, w, z, 0).value * gen_norm(g, w, z, 0).value;
      CHECK(lhs <= std::pow(2.0, sigma / 2.0) * rhs * (1.0 + 1e-12));
    }
  }
}

TEST_CASE("derivative in x is controlled by the z-derivative") {
  std::mt19937_64 rng(33);
  const double d = 0.1;
  for (int trial = 0; trial < 20; ++trial) {
    const auto g = random_state(rng, 5, 40, 5, 40, d);
    SpectralState dx(5, 40, d);
    for (int k = -5; k <= 5; ++k)
      for (int j = -40; j <= 40; ++j) dx.at(k, j) = cplx(0.0, k) * g.at(k, j);
    const auto w = params(1.0);
    const double z = 0.1 + 0.02 * trial;
    const double h = 1e-4;
    for (int a : {0, 1}) {
      const double dz = (gen_norm(g, w, z + h, a).value - gen_norm(g, w, z - h, a).value) / (2 * h);
      CHECK(gen_norm(dx, w, z, a).value <= dz * (1.0 + 1e-9));
    }
  }
}

TEST_CASE("weight overflow is reported") {
  SpectralState g(8, 100, 0.1);
  try {
    (void)gen_norm(g, params(1.0), 100.0);
    FAIL("expected overflow");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::overflow);
  }
}

TEST_CASE("parallel generator norm matches the serial reference") {
  std::mt19937_64 rng(77);
  const auto g = random_state(rng, 6, 200, 6, 200, 0.05);
  for (double z : {0.0, 0.1, 0.3}) {
    const auto w = params(1.5);
    const double a = gen_norm(g, w, z).value;
    const double b = gen_norm_reference(g, w, z).value;
    CHECK(std::abs(a - b) <= 1e-12 * b);
  }
}

TEST_CASE("Gronwall check") {
  const std::vector<double> ts{0.0, 0.5, 1.0, 1.5, 2.0};
  const std::vector<double> zs{0.0, 0.1, 0.2, 0.3};
  SUBCASE("constant generator with no field passes") {
    std::vector<GeneratorSample> s;
    std::vector<double> f;
    for (double t : ts)
      for (double z : zs) {
        s.push_back({t, z, 1.0 + z, {}});
        f.push_back(0.0);
      }
    const auto r = check_gronwall(s, f, 2.0, 1e-12);
    CHECK(r.pass);
    CHECK(r.worst <= 1e-12);
    CHECK(r.residual.size() == ts.size());
  }
  SUBCASE("exponential growth without a field is flagged") {
    std::vector<GeneratorSample> s;
    std::vector<double> f;
    for (double t : ts)
      for (double z : zs) {
        s.push_back({t, z, std::exp(t), {}});
        f.push_back(0.0);
      }
    const auto r = check_gronwall(s, f, 2.0);
    CHECK(!r.pass);
    CHECK(r.worst > 0.9);
  }
  SUBCASE("growth paid for by the field term passes") {
    std::vector<GeneratorSample> s;
    std::vector<double> f;
    for (double t : ts)
      for (double z : zs) {
        s.push_back({t, z, 0.5 * t, {}});
        f.push_back(0.5);
      }
    CHECK(check_gronwall(s, f, 1.0, 1e-12).pass);
    CHECK(!check_gronwall(s, f, 0.5, 1e-12).pass);
  }
  SUBCASE("coarse or ragged grids are rejected") {
    std::vector<GeneratorSample> s{{0.0, 0.0, 1.0, {}}, {1.0, 0.0, 1.0, {}}, {2.0, 0.0, 1.0, {}}};
    std::vector<double> f(3, 0.0);
    try {
      (void)check_gronwall(s, f, 1.0);
      FAIL("expected grid_too_coarse");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::grid_too_coarse);
    }
    std::vector<GeneratorSample> r;
    for (double t : ts)
      for (double z : zs) r.push_back({t, z, 1.0, {}});
    r.pop_back();
    std::vector<double> g(r.size(), 0.0);
    CHECK_THROWS_AS((void)check_gronwall(r, g, 1.0), Error);
  }
}
