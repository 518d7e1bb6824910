#include "landau/norms.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <string>

#include "landau/error.hpp"

namespace landau {

void WeightParams::validate() const {
  if (!(sigma >= 0.0)) throw Error(ErrorKind::invalid_argument, "norms.sigma must be >= 0");
  if (!(lambda0 > 0.0)) throw Error(ErrorKind::invalid_argument, "norms.lambda0 must be > 0");
  if (!(delta > 0.0 && delta < 0.5)) {
    throw Error(ErrorKind::invalid_argument, "norms.delta must lie in (0, 1/2)");
  }
  if (!(theta1 > 0.0)) throw Error(ErrorKind::invalid_argument, "norms.theta1 must be > 0");
  if (!(theta2 >= theta1)) {
    throw Error(ErrorKind::invalid_argument, "norms.theta1 must not exceed norms.theta2");
  }
}

double bracket(double k, double eta) noexcept { return std::sqrt(1.0 + k * k + eta * eta); }

double weight(const WeightParams& params, double z, double k, double eta) noexcept {
  return std::exp(z * bracket(k, eta)) * std::pow(std::sqrt(1.0 + eta * eta), params.sigma);
}

double radius(const WeightParams& params, double t) noexcept {
  return params.lambda0 * (1.0 + std::pow(1.0 + t, -params.delta));
}

double radius_rate(const WeightParams& params, double t) noexcept {
  return -params.lambda0 * params.delta * std::pow(1.0 + t, -params.delta - 1.0);
}

namespace {

constexpr double kMaxExponent = 700.0;

void check_overflow(const SpectralState& s, double z) {
  const double edge = s.max_eta_index() * s.d_eta();
  const int K = s.max_mode();
  if (z * bracket(K, edge) > kMaxExponent) {
    throw Error(ErrorKind::overflow, "weight exp(z <k,eta>) overflows at (k, eta) = (" +
                                         std::to_string(K) + ", " + std::to_string(edge) +
                                         ") for z = " + std::to_string(z));
  }
}

void check_alpha(int max_alpha) {
  if (max_alpha < 0 || max_alpha > 1) {
    throw Error(ErrorKind::invalid_argument, "max_alpha must be 0 or 1 in one dimension");
  }
}

cplx eta_derivative(std::span<const cplx> row, std::size_t j, double h) noexcept {
  const std::size_t n = row.size();
  if (n < 3) return {};
  if (j == 0) return (-3.0 * row[0] + 4.0 * row[1] - row[2]) / (2.0 * h);
  if (j == n - 1) return (3.0 * row[n - 1] - 4.0 * row[n - 2] + row[n - 3]) / (2.0 * h);
  return (row[j + 1] - row[j - 1]) / (2.0 * h);
}

// Trapezoidal contributions of one k-row to the alpha = 0 and alpha = 1 parts.
void row_sums(const SpectralState& s, const WeightParams& params, double z, int k, int max_alpha,
              double& a0, double& a1) {
  const auto row = s.row(k);
  const double h = s.d_eta();
  const int J = s.max_eta_index();
  double s0 = 0.0;
  double s1 = 0.0;
  for (int j = -J; j <= J; ++j) {
    const std::size_t idx = static_cast<std::size_t>(j + J);
    const double w = (j == -J || j == J) ? 0.5 : 1.0;
    const bool zero0 = row[idx] == cplx{};
    const cplx d = max_alpha >= 1 ? eta_derivative(row, idx, h) : cplx{};
    if (zero0 && d == cplx{}) continue;
    const double a = weight(params, z, k, s.eta(j)) * w * h;
    s0 += a * std::abs(row[idx]);
    s1 += a * std::abs(d);
  }
  a0 = s0;
  a1 = s1;
}

}  // namespace

GeneratorSample gen_norm(const SpectralState& state, const WeightParams& params, double z,
                         int max_alpha) {
  check_alpha(max_alpha);
  if (z < 0.0) throw Error(ErrorKind::invalid_argument, "generator radius z must be >= 0");
  check_overflow(state, z);
  const int K = state.max_mode();
  const std::size_t rows = state.modes();
  std::vector<double> part0(rows, 0.0);
  std::vector<double> part1(rows, 0.0);
#pragma omp parallel for schedule(static)
  for (int r = 0; r < static_cast<int>(rows); ++r) {
    row_sums(state, params, z, r - K, max_alpha, part0[static_cast<std::size_t>(r)],
             part1[static_cast<std::size_t>(r)]);
  }
  GeneratorSample out;
  out.time = state.time();
  out.z = z;
  double s0 = 0.0;
  double s1 = 0.0;
  for (std::size_t r = 0; r < rows; ++r) {
    s0 += part0[r];
    s1 += part1[r];
  }
  out.breakdown.push_back(s0);
  if (max_alpha >= 1) out.breakdown.push_back(s1);
  out.value = s0 + (max_alpha >= 1 ? s1 : 0.0);
  return out;
}

GeneratorSample gen_norm_reference(const SpectralState& state, const WeightParams& params, double z,
                                   int max_alpha) {
  check_alpha(max_alpha);
  if (z < 0.0) throw Error(ErrorKind::invalid_argument, "generator radius z must be >= 0");
  check_overflow(state, z);
  const int K = state.max_mode();
  const int J = state.max_eta_index();
  const double h = state.d_eta();
  double s0 = 0.0;
  double s1 = 0.0;
  for (int k = -K; k <= K; ++k) {
    const auto row = state.row(k);
    for (int j = -J; j <= J; ++j) {
      const std::size_t idx = static_cast<std::size_t>(j + J);
      const double w = (j == -J || j == J) ? 0.5 : 1.0;
      const double a = weight(params, z, k, state.eta(j)) * w * h;
      s0 += a * std::abs(row[idx]);
      if (max_alpha >= 1) s1 += a * std::abs(eta_derivative(row, idx, h));
    }
  }
  GeneratorSample out;
  out.time = state.time();
  out.z = z;
  out.breakdown.push_back(s0);
  if (max_alpha >= 1) out.breakdown.push_back(s1);
  out.value = s0 + s1;
  return out;
}

double f_norm(std::span<const cplx> modes, int max_mode, const WeightParams& params, double t,
              double z) noexcept {
  double s = 0.0;
  for (int k = -max_mode; k <= max_mode; ++k) {
    if (k == 0) continue;
    s += weight(params, z, k, k * t) * std::abs(modes[static_cast<std::size_t>(k + max_mode)]);
  }
  return s;
}

double f_norm(const FieldHistory& field, const WeightParams& params, double t, double z) {
  const std::size_t n = field.index_of(t);
  return f_norm(field.modes(n), field.max_mode(), params, t, z);
}

namespace {

// Second-order derivative of samples y on a possibly nonuniform axis x.
std::vector<double> gradient(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = x.size();
  std::vector<double> d(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t a, b, c;
    if (i == 0) {
      a = 0, b = 1, c = 2;
    } else if (i == n - 1) {
      a = n - 3, b = n - 2, c = n - 1;
    } else {
      a = i - 1, b = i, c = i + 1;
    }
    // derivative of the Lagrange parabola through (a, b, c) at x[i]
    const double xa = x[a], xb = x[b], xc = x[c], xi = x[i];
    d[i] = y[a] * ((xi - xb) + (xi - xc)) / ((xa - xb) * (xa - xc)) +
           y[b] * ((xi - xa) + (xi - xc)) / ((xb - xa) * (xb - xc)) +
           y[c] * ((xi - xa) + (xi - xb)) / ((xc - xa) * (xc - xb));
  }
  return d;
}

}  // namespace

GronwallReport check_gronwall(std::span<const GeneratorSample> samples,
                              std::span<const double> field_norms, double c0, double tolerance) {
  if (samples.size() != field_norms.size()) {
    throw Error(ErrorKind::invalid_argument, "check_gronwall needs one F value per sample");
  }
  std::map<double, std::size_t> tpos;
  std::map<double, std::size_t> zpos;
  for (const auto& s : samples) {
    tpos.emplace(s.time, 0);
    zpos.emplace(s.z, 0);
  }
  if (tpos.size() < 3 || zpos.size() < 3) {
    throw Error(ErrorKind::grid_too_coarse,
                "Gronwall check needs at least 3 samples per axis (got " +
                    std::to_string(tpos.size()) + " times, " + std::to_string(zpos.size()) +
                    " radii)");
  }
  if (tpos.size() * zpos.size() != samples.size()) {
    throw Error(ErrorKind::grid_too_coarse, "generator samples do not form a rectangular (t, z) grid");
  }
  std::vector<double> ts, zs;
  for (auto& [t, i] : tpos) {
    i = ts.size();
    ts.push_back(t);
  }
  for (auto& [z, j] : zpos) {
    j = zs.size();
    zs.push_back(z);
  }
  const std::size_t nt = ts.size();
  const std::size_t nz = zs.size();
  std::vector<double> gen(nt * nz, std::numeric_limits<double>::quiet_NaN());
  std::vector<double> fn(nt * nz, 0.0);
  for (std::size_t m = 0; m < samples.size(); ++m) {
    const std::size_t i = tpos.at(samples[m].time);
    const std::size_t j = zpos.at(samples[m].z);
    gen[i * nz + j] = samples[m].value;
    fn[i * nz + j] = field_norms[m];
  }
  for (double g : gen) {
    if (std::isnan(g)) {
      throw Error(ErrorKind::grid_too_coarse, "generator samples do not cover the (t, z) grid");
    }
  }

  GronwallReport report;
  report.times = ts;
  report.residual.assign(nt, -std::numeric_limits<double>::infinity());
  std::vector<double> column(nt);
  std::vector<std::vector<double>> dgdt(nz);
  for (std::size_t j = 0; j < nz; ++j) {
    for (std::size_t i = 0; i < nt; ++i) column[i] = gen[i * nz + j];
    dgdt[j] = gradient(ts, column);
  }
  for (std::size_t i = 0; i < nt; ++i) {
    const std::span<const double> row(gen.data() + i * nz, nz);
    const auto dgdz = gradient(zs, row);
    for (std::size_t j = 0; j < nz; ++j) {
      const double f = fn[i * nz + j];
      const double r = dgdt[j][i] - c0 * f - (1.0 + ts[i]) * f * dgdz[j];
      report.residual[i] = std::max(report.residual[i], r);
    }
  }
  report.worst = *std::max_element(report.residual.begin(), report.residual.end());
  report.pass = report.worst <= tolerance;
  return report;
}

}  // namespace landau
