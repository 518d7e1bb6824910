#include "landau/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "landau/error.hpp"
#include "landau/linear.hpp"

namespace landau {

std::string_view to_string(Coupling c) noexcept {
  switch (c) {
    case Coupling::full: return "full";
    case Coupling::linear: return "linear";
    case Coupling::free: return "free";
    case Coupling::nonlinear_only: return "nonlinear-only";
  }
  return "?";
}

std::string_view to_string(Scheme s) noexcept {
  return s == Scheme::ab3 ? "ab3" : "rk4-interp";
}

Coupling coupling_from_string(std::string_view name) {
  if (name == "full") return Coupling::full;
  if (name == "linear") return Coupling::linear;
  if (name == "free") return Coupling::free;
  if (name == "nonlinear-only") return Coupling::nonlinear_only;
  throw Error(ErrorKind::invalid_argument, "unknown coupling '" + std::string(name) +
                                               "' (expected full, linear, free, nonlinear-only)");
}

Scheme scheme_from_string(std::string_view name) {
  if (name == "ab3") return Scheme::ab3;
  if (name == "rk4-interp") return Scheme::rk4_interp;
  throw Error(ErrorKind::invalid_argument,
              "unknown scheme '" + std::string(name) + "' (expected ab3, rk4-interp)");
}

namespace {

// exp(-x^2 / 2) < 1e-16 beyond x = 8.6
constexpr double kGaussCut = 8.6;

bool has_mu_term(Coupling c) { return c == Coupling::full || c == Coupling::linear; }
bool has_convolution(Coupling c) { return c == Coupling::full || c == Coupling::nonlinear_only; }

double field_factor(int k, double alpha) {
  return static_cast<double>(k) * std::pow(std::abs(static_cast<double>(k)), -alpha);
}

// g_{k, m2 / 2}: grid value, or the mean of the two neighbours for odd m2.
inline cplx half_lookup(const SpectralState& g, int k, long m2) {
  if ((m2 & 1) == 0) return g.value(k, static_cast<int>(m2 / 2));
  const long lo = (m2 - 1) / 2;
  const long hi = (m2 + 1) / 2;
  return 0.5 * (g.value(k, static_cast<int>(lo)) + g.value(k, static_cast<int>(hi)));
}

double mu_support(const EquilibriumProfile& p) {
  if (!p.is_entire()) return p.eta_limit();
  return kGaussCut / p.width;
}

}  // namespace

double InitialData::eta_support() const {
  double s = 0.0;
  if (closed_form) s = std::max(s, kGaussCut / closed_form->width);
  for (const auto& m : modes) {
    s = std::max(s, std::abs(m.eta) + (m.width > 0.0 ? kGaussCut / m.width : 0.0));
  }
  return s;
}

long GridSpec::steps() const { return std::lround(T / dt); }

int required_eta_index(const DynamicsConfig& c) {
  const double support = std::max(c.data.eta_support(), mu_support(c.profile));
  return static_cast<int>(std::ceil((c.grid.K * c.grid.T + support) / c.grid.dt)) + 10;
}

SpectralState init_state(const DynamicsConfig& c) {
  const int K = c.grid.K;
  const double h = c.grid.dt;
  const int need = required_eta_index(c);
  int J = c.grid.J;
  if (J == 0) J = need;
  if (J < need) {
    throw Error(ErrorKind::grid_too_small, "grid.J = " + std::to_string(J) +
                                               " leaves no support margin; need J >= " +
                                               std::to_string(need));
  }
  SpectralState g(K, J, h);
  if (const auto& cf = c.data.closed_form) {
    if (cf->k == 0 || std::abs(cf->k) > K) {
      throw Error(ErrorKind::invalid_argument, "closed-form mode must satisfy 0 < |k| <= K");
    }
    for (int j = -J; j <= J; ++j) {
      const double eta = g.eta(j);
      const double v = 0.5 * cf->epsilon * std::exp(-0.5 * cf->width * cf->width * eta * eta);
      g.at(cf->k, j) += v;
      g.at(-cf->k, j) += v;
    }
  }
  for (const auto& m : c.data.modes) {
    if (m.k == 0) throw Error(ErrorKind::invalid_argument, "perturbation modes must carry zero charge (k != 0)");
    if (std::abs(m.k) > K) {
      throw Error(ErrorKind::invalid_argument, "data mode k = " + std::to_string(m.k) + " exceeds K");
    }
    if (m.width < 0.0) throw Error(ErrorKind::invalid_argument, "packet width must be >= 0");
    if (m.width == 0.0) {
      const long j0 = std::lround(m.eta / h);
      if (std::abs(m.eta - static_cast<double>(j0) * h) > 1e-9 * std::max(1.0, std::abs(m.eta))) {
        throw Error(ErrorKind::alignment, "spike at eta = " + std::to_string(m.eta) +
                                              " is not on the eta grid");
      }
      g.at(m.k, static_cast<int>(j0)) += m.amplitude;
      g.at(-m.k, static_cast<int>(-j0)) += std::conj(m.amplitude);
      continue;
    }
    for (int j = -J; j <= J; ++j) {
      const double d = m.width * (g.eta(j) - m.eta);
      if (std::abs(d) > 40.0) continue;
      const cplx v = m.amplitude * std::exp(-0.5 * d * d);
      g.at(m.k, j) += v;
      g.at(-m.k, -j) += std::conj(v);
    }
  }
  return g;
}

cplx free_density(const InitialData& data, int k, double t, double d_eta) {
  if (k == 0) throw Error(ErrorKind::zero_mode, "free_density needs k != 0");
  const double eta = k * t;
  cplx rho = 0.0;
  if (const auto& cf = data.closed_form) {
    if (std::abs(k) == std::abs(cf->k)) {
      rho += 0.5 * cf->epsilon * std::exp(-0.5 * cf->width * cf->width * eta * eta);
    }
  }
  for (const auto& m : data.modes) {
    for (int sign : {1, -1}) {
      if (sign * m.k != k) continue;
      const cplx a = sign > 0 ? m.amplitude : std::conj(m.amplitude);
      const double off = eta - sign * m.eta;
      if (m.width > 0.0) {
        rho += a * std::exp(-0.5 * m.width * m.width * off * off);
      } else if (d_eta > 0.0) {
        rho += a * std::max(0.0, 1.0 - std::abs(off) / d_eta);
      } else if (std::abs(off) < 1e-12 * std::max(1.0, std::abs(eta))) {
        rho += a;
      }
    }
  }
  return rho;
}

std::vector<cplx> field_closure(const SpectralState& g, double alpha) {
  const int K = g.max_mode();
  std::vector<cplx> E(g.modes());
  const long n = g.step();
  for (int k = -K; k <= K; ++k) {
    if (k == 0) continue;
    const cplx rho = g.value(k, static_cast<int>(k * n));
    E[static_cast<std::size_t>(k + K)] = cplx(0.0, -field_factor(k, alpha)) * rho;
  }
  return E;
}

std::vector<cplx> field_closure(const SpectralState& g, double alpha, double t) {
  const int K = g.max_mode();
  std::vector<cplx> E(g.modes());
  for (int k = -K; k <= K; ++k) {
    if (k == 0) continue;
    const double pos = k * t / g.d_eta();
    const long j = std::lround(pos);
    if (std::abs(pos - static_cast<double>(j)) > 1e-9 * std::max(1.0, std::abs(pos))) {
      throw Error(ErrorKind::alignment, "k t = " + std::to_string(k * t) + " for k = " + std::to_string(k) +
                                            " is not on the eta grid");
    }
    E[static_cast<std::size_t>(k + K)] = cplx(0.0, -field_factor(k, alpha)) * g.value(k, static_cast<int>(j));
  }
  return E;
}

Model::Model(EquilibriumProfile profile, double alpha, Coupling coupling, int K, int J, double d_eta,
             long max_steps)
    : profile_(std::move(profile)), alpha_(alpha), coupling_(coupling), K_(K), J_(J), h_(d_eta) {
  if (!(alpha >= 0.0 && alpha <= 2.0)) {
    throw Error(ErrorKind::invalid_argument, "riesz.alpha must lie in [0,2]");
  }
  if (has_mu_term(coupling_)) {
    mu_offset_ = 2L * J + 2L * K * (max_steps + 1);
    mu_table_.resize(static_cast<std::size_t>(2 * mu_offset_ + 1));
    const double lim = profile_.eta_limit();
    for (long m2 = -mu_offset_; m2 <= mu_offset_; ++m2) {
      const double eta = 0.5 * static_cast<double>(m2) * h_;
      mu_table_[static_cast<std::size_t>(m2 + mu_offset_)] =
          std::abs(eta) <= lim ? mu_hat(profile_, eta) : cplx{};
    }
  }
}

cplx Model::mu_at(long m2) const {
  if (m2 < -mu_offset_ || m2 > mu_offset_) {
    const double eta = 0.5 * static_cast<double>(m2) * h_;
    return std::abs(eta) <= profile_.eta_limit() ? mu_hat(profile_, eta) : cplx{};
  }
  return mu_table_[static_cast<std::size_t>(m2 + mu_offset_)];
}

std::vector<cplx> Model::field(const SpectralState& g, long n2) const {
  std::vector<cplx> E(g.modes());
  for (int k = -K_; k <= K_; ++k) {
    if (k == 0) continue;
    E[static_cast<std::size_t>(k + K_)] =
        cplx(0.0, -field_factor(k, alpha_)) * half_lookup(g, k, static_cast<long>(k) * n2);
  }
  return E;
}

void Model::rhs(const SpectralState& g, std::span<const cplx> E, long n2, std::span<cplx> out) const {
  const bool lin = has_mu_term(coupling_);
  const bool conv = has_convolution(coupling_);
  const long rows = 2L * K_ + 1;
  const long cols = 2L * J_ + 1;
  const double half_h = 0.5 * h_;
#pragma omp parallel for schedule(static)
  for (long c = 0; c < rows * cols; ++c) {
    const int k = static_cast<int>(c / cols) - K_;
    const int j = static_cast<int>(c % cols) - J_;
    const long xi2 = 2L * j - static_cast<long>(k) * n2;  // twice the index of eta - k t
    const cplx pref(0.0, -static_cast<double>(xi2) * half_h);
    cplx acc = 0.0;
    if (lin && k != 0) acc += E[static_cast<std::size_t>(k + K_)] * mu_at(xi2);
    if (conv) {
      const int lo = std::max(-K_, k - K_);
      const int hi = std::min(K_, k + K_);
      for (int l = lo; l <= hi; ++l) {
        if (l == 0) continue;
        acc += E[static_cast<std::size_t>(l + K_)] * half_lookup(g, k - l, 2L * j - static_cast<long>(l) * n2);
      }
    }
    out[static_cast<std::size_t>(c)] = pref * acc;
  }
}

void Model::rhs_reference(const SpectralState& g, std::span<const cplx> E, long n2,
                          std::span<cplx> out) const {
  const double t = 0.5 * static_cast<double>(n2) * h_;
  for (int k = -K_; k <= K_; ++k) {
    for (int j = -J_; j <= J_; ++j) {
      const double shifted = g.eta(j) - k * t;
      cplx acc = 0.0;
      if (has_mu_term(coupling_) && k != 0) {
        const cplx mu = std::abs(shifted) <= profile_.eta_limit() ? mu_hat(profile_, shifted) : cplx{};
        acc += E[static_cast<std::size_t>(k + K_)] * mu;
      }
      if (has_convolution(coupling_)) {
        for (int l = -K_; l <= K_; ++l) {
          if (l == 0 || std::abs(k - l) > K_) continue;
          acc += E[static_cast<std::size_t>(l + K_)] * half_lookup(g, k - l, 2L * j - static_cast<long>(l) * n2);
        }
      }
      out[g.index(k, j)] = cplx(0.0, -shifted) * acc;
    }
  }
}

Stepper::Stepper(const Model& model, SpectralState initial, Scheme scheme, bool parallel)
    : model_(model), state_(std::move(initial)), scheme_(scheme), parallel_(parallel) {
  if (state_.max_mode() != model.max_mode() || state_.max_eta_index() != model.max_eta_index() ||
      state_.d_eta() != model.d_eta()) {
    throw Error(ErrorKind::grid_mismatch, "state and model grids differ");
  }
}

void Stepper::evaluate(const SpectralState& g, std::span<const cplx> E, long n2,
                       std::vector<cplx>& out) const {
  out.resize(g.size());
  if (parallel_) {
    model_.rhs(g, E, n2, out);
  } else {
    model_.rhs_reference(g, E, n2, out);
  }
}

void Stepper::rk4_step() {
  const double dt = state_.d_eta();
  const long n2 = 2 * state_.step();
  const auto& k1 = history_.front();
  const auto y0 = state_.data();
  SpectralState tmp = state_;
  std::vector<cplx> k2, k3, k4;
  auto stage = [&](const std::vector<cplx>& slope, double frac) {
    auto d = tmp.data();
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = y0[i] + frac * dt * slope[i];
  };
  stage(k1, 0.5);
  evaluate(tmp, model_.field(tmp, n2 + 1), n2 + 1, k2);
  stage(k2, 0.5);
  evaluate(tmp, model_.field(tmp, n2 + 1), n2 + 1, k3);
  stage(k3, 1.0);
  evaluate(tmp, model_.field(tmp, n2 + 2), n2 + 2, k4);
  auto y = state_.data();
  for (std::size_t i = 0; i < y.size(); ++i) {
    y[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
  }
}

void Stepper::advance() {
  const long n = state_.step();
  std::vector<cplx> f;
  evaluate(state_, model_.field(state_, 2 * n), 2 * n, f);
  history_.push_front(std::move(f));
  if (history_.size() > 3) history_.pop_back();
  if (scheme_ == Scheme::ab3 && history_.size() == 3) {
    const double c = state_.d_eta() / 12.0;
    const auto& f0 = history_[0];
    const auto& f1 = history_[1];
    const auto& f2 = history_[2];
    auto y = state_.data();
    for (std::size_t i = 0; i < y.size(); ++i) y[i] += c * (23.0 * f0[i] - 16.0 * f1[i] + 5.0 * f2[i]);
  } else {
    rk4_step();
  }
  state_.set_step(n + 1);
  check_finite();
}

void Stepper::check_finite() const {
  const int K = state_.max_mode();
  const int J = state_.max_eta_index();
  for (int k = -K; k <= K; ++k) {
    for (int j = -J; j <= J; ++j) {
      const cplx v = state_.at(k, j);
      if (!std::isfinite(v.real()) || !std::isfinite(v.imag()) || std::abs(v) > 1e150) {
        throw BlowUp(state_.time(), k, state_.eta(j));
      }
    }
  }
}

BlowUp::BlowUp(double t, int k, double eta)
    : Error(ErrorKind::blow_up, "coefficients blew up at t = " + std::to_string(t) + " in mode k = " +
                                    std::to_string(k) + ", eta = " + std::to_string(eta)),
      t_(t),
      k_(k),
      eta_(eta) {}

InteractionTensor::InteractionTensor(int K, long N, double dt) : K_(K), N_(N), dt_(dt) {
  tri_size_ = static_cast<std::size_t>(N + 1) * static_cast<std::size_t>(N + 2) / 2;
  pair_offset_.assign(static_cast<std::size_t>(K) * static_cast<std::size_t>(2 * K + 1),
                      std::numeric_limits<std::size_t>::max());
  std::size_t next = 0;
  for (int k = 1; k <= K; ++k) {
    for (int l = k - K; l <= K; ++l) {
      if (l == 0) continue;
      pair_offset_[static_cast<std::size_t>(k - 1) * static_cast<std::size_t>(2 * K + 1) +
                   static_cast<std::size_t>(l + K)] = next;
      next += tri_size_;
    }
  }
  data_.assign(next, cplx{});
}

std::size_t InteractionTensor::bytes_required(int K, long N) {
  std::size_t pairs = 0;
  for (int k = 1; k <= K; ++k) pairs += static_cast<std::size_t>(2 * K - k);
  return pairs * static_cast<std::size_t>(N + 1) * static_cast<std::size_t>(N + 2) / 2 * sizeof(cplx);
}

std::size_t InteractionTensor::offset(int k, int l) const noexcept {
  return pair_offset_[static_cast<std::size_t>(k - 1) * static_cast<std::size_t>(2 * K_ + 1) +
                      static_cast<std::size_t>(l + K_)];
}

void InteractionTensor::gather(const SpectralState& g) {
  const long n = g.step();
  if (n < 0 || n > N_) throw Error(ErrorKind::out_of_range, "interaction gather beyond the run length");
#pragma omp parallel for schedule(dynamic)
  for (int k = 1; k <= K_; ++k) {
    for (int l = k - K_; l <= K_; ++l) {
      if (l == 0) continue;
      const std::size_t base = offset(k, l);
      for (long m = n; m <= N_; ++m) {
        const long j = static_cast<long>(k) * m - static_cast<long>(l) * n;
        data_[base + tri(m, n)] = static_cast<double>(m - n) * dt_ * g.value(k - l, static_cast<int>(j));
      }
    }
  }
}

double background_constant(const EquilibriumProfile& profile, const WeightParams& params, int J,
                           double d_eta) {
  SpectralState s(0, J, d_eta);
  const double lim = profile.eta_limit();
  for (int j = -J; j <= J; ++j) {
    const double eta = s.eta(j);
    if (std::abs(eta) <= lim) s.at(0, j) = grad_mu_hat(profile, eta);
  }
  return gen_norm(s, params, 2.0 * params.lambda0, 1).value;
}

RunOutput simulate(const DynamicsConfig& c, const SimulateOptions& opt) {
  c.norms.validate();
  RunOutput out;
  SpectralState g0 = init_state(c);
  const int K = c.grid.K;
  const int J = g0.max_eta_index();
  const double h = c.grid.dt;
  const long N = c.grid.steps();
  if (std::abs(static_cast<double>(N) * h - c.grid.T) > 1e-9 * std::max(1.0, c.grid.T)) {
    throw Error(ErrorKind::alignment, "grid.T must be an integer multiple of grid.dt");
  }
  Model model(c.profile, c.alpha, c.coupling, K, J, h, N);
  const auto& p = c.norms;
  if (c.gather_interactions) {
    const std::size_t need = InteractionTensor::bytes_required(K, N);
    if (need > c.interaction_budget) {
      throw Error(ErrorKind::out_of_range, "interaction tensor needs " + std::to_string(need >> 20) +
                                               " MiB, above the configured budget");
    }
    out.interactions.emplace(K, N, h);
  }
  out.field = FieldHistory(K, h);
  out.field.reserve(static_cast<std::size_t>(N + 1));
  out.initial = g0;
  if (opt.diagnostics) {
    out.c0 = background_constant(c.profile, p, J, h);
    out.eps0 = gen_norm(g0, p, 2.0 * p.lambda0, 1).value;
    for (int i = 0; i <= 4; ++i) out.gronwall_radii.push_back(p.lambda0 * (1.0 + 0.25 * i));
  }
  const cplx mass0 = g0.at(0, 0);
  double gen_start = 0.0;
  double int_F = 0.0;
  double prev_F = 0.0;
  out.worst_cond_lambda = -std::numeric_limits<double>::infinity();
  out.worst_gen_excess = -std::numeric_limits<double>::infinity();

  Stepper stepper(model, std::move(g0), c.grid.scheme, opt.parallel);
  const int every = std::max(1, c.checkpoint_every);
  for (long n = 0; n <= N; ++n) {
    const SpectralState& g = stepper.state();
    const double t = g.time();
    auto E = stepper.field();
    StepRecord rec;
    rec.t = t;
    rec.lambda_t = radius(p, t);
    for (const cplx& e : E) rec.sup_E += std::abs(e);
    rec.F = f_norm(E, K, p, t, rec.lambda_t);
    rec.cond_lambda = radius_rate(p, t) + (1.0 + t) * rec.F;
    out.worst_cond_lambda = std::max(out.worst_cond_lambda, rec.cond_lambda);
    if (n > 0) int_F += 0.5 * h * (prev_F + rec.F);
    prev_F = rec.F;
    out.zero_mode_drift = std::max(out.zero_mode_drift, std::abs(g.at(0, 0) - mass0));
    out.steps.push_back(rec);
    out.field.push(t, std::move(E));

    if (opt.diagnostics && (n % every == 0 || n == N)) {
      CheckpointRecord cp;
      cp.t = t;
      const auto s = gen_norm(g, p, rec.lambda_t, 1);
      cp.gen_alpha0 = s.breakdown[0];
      cp.gen_alpha1 = s.breakdown[1];
      if (n == 0) gen_start = s.value;
      cp.gen_excess = s.value - gen_start - out.c0 * int_F;
      out.worst_gen_excess = std::max(out.worst_gen_excess, cp.gen_excess);
      const double total = g.l1_norm();
      cp.tail_ratio = total > 0.0 ? g.tail_norm() / total : 0.0;
      out.worst_tail_ratio = std::max(out.worst_tail_ratio, cp.tail_ratio);
      const auto modes = out.field.modes(out.field.samples() - 1);
      for (double z : out.gronwall_radii) {
        out.gen_samples.push_back(gen_norm(g, p, z, 1));
        out.gen_field_norms.push_back(f_norm(modes, K, p, t, z));
      }
      out.checkpoints.push_back(cp);
    }
    if (out.interactions) out.interactions->gather(g);
    if (n == N / 2) out.half = g;
    if (n < N) stepper.advance();
  }
  out.final = stepper.state();
  out.max_hermitian_defect = out.final.hermitian_defect();
  double dist = 0.0;
  for (std::size_t i = 0; i < out.final.size(); ++i) dist += std::abs(out.final.data()[i] - out.half.data()[i]);
  out.scattering_distance = dist;
  if (opt.diagnostics && out.checkpoints.size() >= 3) {
    out.gronwall = check_gronwall(out.gen_samples, out.gen_field_norms, out.c0, 0.0);
    for (std::size_t i = 0; i < out.checkpoints.size(); ++i) {
      out.checkpoints[i].gronwall_residual = out.gronwall->residual[i];
    }
  }
  return out;
}

FixedPointResult fixed_point_field_solve(const DynamicsConfig& c, const InteractionTensor& w,
                                         const FixedPointOptions& opt) {
  const int K = c.grid.K;
  const long N = c.grid.steps();
  const double h = c.grid.dt;
  if (w.max_mode() != K || w.steps() != N || std::abs(w.dt() - h) > 1e-15 * h) {
    throw Error(ErrorKind::grid_mismatch, "interaction tensor does not match the configured grid");
  }
  const bool green = has_mu_term(c.coupling);
  const bool remainder = has_convolution(c.coupling) && !opt.drop_remainder;
  const SpectralState g0 = init_state(c);
  const auto n_t = static_cast<std::size_t>(N + 1);

  std::vector<GreenKernel> kernels;
  std::vector<std::vector<cplx>> e0(static_cast<std::size_t>(K + 1));
  for (int k = 1; k <= K; ++k) {
    if (green) kernels.push_back(green_kernel(c.profile, c.alpha, k, h, n_t));
    auto& v = e0[static_cast<std::size_t>(k)];
    v.resize(n_t);
    const cplx f(0.0, -field_factor(k, c.alpha));
    for (long m = 0; m <= N; ++m) v[static_cast<std::size_t>(m)] = f * g0.value(k, static_cast<int>(k * m));
  }
  // E[k][m] for k = 1..K; negative modes by conjugation
  auto apply_green = [&](int k, const std::vector<cplx>& src) {
    return green ? convolve_green(kernels[static_cast<std::size_t>(k - 1)], src, h) : src;
  };
  std::vector<std::vector<cplx>> E(static_cast<std::size_t>(K + 1));
  for (int k = 1; k <= K; ++k) E[static_cast<std::size_t>(k)] = apply_green(k, e0[static_cast<std::size_t>(k)]);

  FixedPointResult res;
  auto mode = [&](const std::vector<std::vector<cplx>>& e, int l, long n) {
    const cplx v = e[static_cast<std::size_t>(std::abs(l))][static_cast<std::size_t>(n)];
    return l > 0 ? v : std::conj(v);
  };
  res.iterations = 1;
  if (remainder) {
    bool converged = false;
    for (int it = 1; it <= opt.max_iterations; ++it) {
      std::vector<std::vector<cplx>> next(static_cast<std::size_t>(K + 1));
#pragma omp parallel for schedule(dynamic)
      for (int k = 1; k <= K; ++k) {
        const double coef = -static_cast<double>(k) * static_cast<double>(k) *
                            std::pow(static_cast<double>(k), -c.alpha) * h;
        std::vector<cplx> src = e0[static_cast<std::size_t>(k)];
        for (long m = 1; m <= N; ++m) {
          cplx acc = 0.0;
          for (long n = 0; n < m; ++n) {
            cplx inner = 0.0;
            for (int l = k - K; l <= K; ++l) {
              if (l == 0) continue;
              inner += mode(E, l, n) * w.at(k, l, m, n);
            }
            acc += (n == 0 ? 0.5 : 1.0) * inner;
          }
          src[static_cast<std::size_t>(m)] += coef * acc;
        }
        next[static_cast<std::size_t>(k)] = apply_green(k, src);
      }
      double diff = 0.0;
      double size = 0.0;
      for (std::size_t m = 0; m < n_t; ++m) {
        double d = 0.0;
        double s = 0.0;
        for (int k = 1; k <= K; ++k) {
          d += 2.0 * std::abs(next[static_cast<std::size_t>(k)][m] - E[static_cast<std::size_t>(k)][m]);
          s += 2.0 * std::abs(next[static_cast<std::size_t>(k)][m]);
        }
        diff = std::max(diff, d);
        size = std::max(size, s);
      }
      E = std::move(next);
      const double rel = size > 0.0 ? diff / size : diff;
      res.trace.push_back(rel);
      res.iterations = it;
      if (!std::isfinite(rel)) break;
      if (rel < opt.tolerance) {
        converged = true;
        break;
      }
    }
    if (!converged) {
      throw Error(ErrorKind::divergence,
                  "fixed-point field iteration did not converge in " + std::to_string(opt.max_iterations) +
                      " iterations (last relative change " +
                      (res.trace.empty() ? std::string("n/a") : std::to_string(res.trace.back())) + ")");
    }
  }
  res.field = FieldHistory(K, h);
  res.field.reserve(n_t);
  for (long m = 0; m <= N; ++m) {
    std::vector<cplx> modes(static_cast<std::size_t>(2 * K + 1));
    for (int k = 1; k <= K; ++k) {
      const cplx v = E[static_cast<std::size_t>(k)][static_cast<std::size_t>(m)];
      modes[static_cast<std::size_t>(K + k)] = v;
      modes[static_cast<std::size_t>(K - k)] = std::conj(v);
    }
    res.field.push(static_cast<double>(m) * h, std::move(modes));
  }
  return res;
}

}  // namespace landau
