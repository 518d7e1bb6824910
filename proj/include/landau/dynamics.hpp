#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "landau/equilibria.hpp"
#include "landau/error.hpp"
#include "landau/norms.hpp"
#include "landau/spectral_state.hpp"

namespace landau {

/// Which terms of the glide-frame equation are active.
///   full            mu-term and E.grad g convolution
///   linear          mu-term only
///   free            neither (pure free transport)
///   nonlinear_only  convolution only (no response of the background)
enum class Coupling { full, linear, free, nonlinear_only };
enum class Scheme { ab3, rk4_interp };

std::string_view to_string(Coupling c) noexcept;
std::string_view to_string(Scheme s) noexcept;
Coupling coupling_from_string(std::string_view name);
Scheme scheme_from_string(std::string_view name);

/// A wave packet a exp(-w^2 (eta - eta0)^2 / 2) in mode k. width = 0 puts
/// the whole amplitude on the single grid point eta0. The conjugate packet
/// at (-k, -eta0) is added automatically.
struct ModeSpec {
  int k = 1;
  double eta = 0.0;
  cplx amplitude = 0.0;
  double width = 1.0;
};

/// f0 = epsilon cos(k x) G_w(v), i.e. g_{+-k, eta} = (epsilon / 2) exp(-w^2 eta^2 / 2).
struct ClosedForm {
  double epsilon = 0.0;
  int k = 1;
  double width = 1.0;
};

struct InitialData {
  std::vector<ModeSpec> modes;
  std::optional<ClosedForm> closed_form;

  /// Largest |eta| at which the data exceed double precision noise.
  double eta_support() const;
};

struct GridSpec {
  int K = 8;
  double T = 10.0;
  double dt = 0.05;
  int J = 0;  // 0 selects the smallest admissible value
  Scheme scheme = Scheme::ab3;

  long steps() const;
};

struct DynamicsConfig {
  EquilibriumProfile profile;
  double alpha = 2.0;
  Coupling coupling = Coupling::full;
  GridSpec grid;
  InitialData data;
  WeightParams norms;
  int checkpoint_every = 10;
  /// Record the interaction tensor needed by fixed_point_field_solve.
  bool gather_interactions = false;
  /// Memory guard for the interaction tensor, in bytes.
  std::size_t interaction_budget = std::size_t{1} << 30;
};

/// Smallest J with J d_eta >= K T + support + 10 d_eta.
int required_eta_index(const DynamicsConfig& config);

/// Populated initial grid; throws Error(grid_too_small) naming the required J
/// when an explicit grid.J is too small.
SpectralState init_state(const DynamicsConfig& config);

/// rho_k^0(t) = f0hat_{k, kt}; closed form when available, otherwise the sum of
/// packets (linear interpolation between grid points for width 0 spikes).
cplx free_density(const InitialData& data, int k, double t, double d_eta = 0.0);

/// E_k = -i k |k|^-alpha g_{k, k t} at the state's own time (index k + K).
std::vector<cplx> field_closure(const SpectralState& state, double alpha);
/// Same at an explicit time; throws Error(alignment) when k t is off the eta grid.
std::vector<cplx> field_closure(const SpectralState& state, double alpha, double t);

/// Right-hand side of the glide-frame equation on a fixed grid. Time is passed
/// as a half-step index n2 (t = n2 d_eta / 2): odd k n2 lookups are averaged
/// over the two neighbouring grid points.
class Model {
 public:
  Model(EquilibriumProfile profile, double alpha, Coupling coupling, int K, int J, double d_eta,
        long max_steps);

  int max_mode() const noexcept { return K_; }
  int max_eta_index() const noexcept { return J_; }
  double d_eta() const noexcept { return h_; }
  double alpha() const noexcept { return alpha_; }
  Coupling coupling() const noexcept { return coupling_; }
  const EquilibriumProfile& profile() const noexcept { return profile_; }

  /// Field modes at half-step time n2.
  std::vector<cplx> field(const SpectralState& g, long n2) const;

  /// OpenMP over (k, j) cells; each cell sums l in ascending order.
  void rhs(const SpectralState& g, std::span<const cplx> E, long n2, std::span<cplx> out) const;
  /// Straightforward serial evaluation of the same formula.
  void rhs_reference(const SpectralState& g, std::span<const cplx> E, long n2,
                     std::span<cplx> out) const;

 private:
  cplx mu_at(long m2) const;  // muhat(m2 d_eta / 2)

  EquilibriumProfile profile_;
  double alpha_;
  Coupling coupling_;
  int K_;
  int J_;
  double h_;
  long mu_offset_ = 0;
  std::vector<cplx> mu_table_;
};

/// Error(blow_up) with the location of the first offending coefficient.
class BlowUp : public Error {
 public:
  BlowUp(double t, int k, double eta);
  double time() const noexcept { return t_; }
  int mode() const noexcept { return k_; }
  double eta() const noexcept { return eta_; }

 private:
  double t_;
  int k_;
  double eta_;
};

/// Time stepper. AB3 is bootstrapped by two RK4-interp steps.
class Stepper {
 public:
  Stepper(const Model& model, SpectralState initial, Scheme scheme, bool parallel = true);

  /// Advances n -> n + 1. Throws BlowUp on non-finite or huge values.
  void advance();

  const SpectralState& state() const noexcept { return state_; }
  long step() const noexcept { return state_.step(); }
  std::vector<cplx> field() const { return model_.field(state_, 2 * state_.step()); }

 private:
  void evaluate(const SpectralState& g, std::span<const cplx> E, long n2, std::vector<cplx>& out) const;
  void rk4_step();
  void check_finite() const;

  const Model& model_;
  SpectralState state_;
  Scheme scheme_;
  bool parallel_;
  std::deque<std::vector<cplx>> history_;  // rhs at n, n-1, n-2 (front is newest)
};

/// W_{k,l}(m, n) = (t_m - s_n) g_{k-l, k m - l n}(s_n) for k = 1..K,
/// l in [k - K, K] \ {0}, 0 <= n <= m <= N.
class InteractionTensor {
 public:
  InteractionTensor() = default;
  InteractionTensor(int K, long N, double dt);

  static std::size_t bytes_required(int K, long N);

  int max_mode() const noexcept { return K_; }
  long steps() const noexcept { return N_; }
  double dt() const noexcept { return dt_; }

  /// Records the column s_n from the state at step n.
  void gather(const SpectralState& g);

  cplx at(int k, int l, long m, long n) const noexcept { return data_[offset(k, l) + tri(m, n)]; }

 private:
  std::size_t offset(int k, int l) const noexcept;
  std::size_t tri(long m, long n) const noexcept {
    return static_cast<std::size_t>(m) * static_cast<std::size_t>(m + 1) / 2 +
           static_cast<std::size_t>(n);
  }

  int K_ = 0;
  long N_ = 0;
  double dt_ = 0.0;
  std::size_t tri_size_ = 0;
  std::vector<std::size_t> pair_offset_;
  std::vector<cplx> data_;
};

struct StepRecord {
  double t = 0.0;
  double lambda_t = 0.0;
  double F = 0.0;            // F[E](t, lambda(t))
  double sup_E = 0.0;        // sum_k |E_k|
  double cond_lambda = 0.0;  // lambda'(t) + (1 + t) F
};

struct CheckpointRecord {
  double t = 0.0;
  double gen_alpha0 = 0.0;  // at z = lambda(t)
  double gen_alpha1 = 0.0;
  double gen_excess = 0.0;  // Gen(t) - Gen(0) - C0 int_0^t F
  double tail_ratio = 0.0;  // sum_{|k| = K} |g| / sum |g|
  double gronwall_residual = 0.0;
};

struct RunOutput {
  FieldHistory field;
  std::vector<StepRecord> steps;
  std::vector<CheckpointRecord> checkpoints;
  std::vector<GeneratorSample> gen_samples;  // checkpoint times x gronwall_radii
  std::vector<double> gen_field_norms;
  std::vector<double> gronwall_radii;
  std::optional<GronwallReport> gronwall;
  double c0 = 0.0;
  double eps0 = 0.0;
  double worst_cond_lambda = 0.0;
  double worst_gen_excess = 0.0;
  double worst_tail_ratio = 0.0;
  double max_hermitian_defect = 0.0;
  double zero_mode_drift = 0.0;
  double scattering_distance = 0.0;  // || g(T) - g(T/2) ||_1
  SpectralState initial;
  SpectralState half;
  SpectralState final;
  std::optional<InteractionTensor> interactions;
};

struct SimulateOptions {
  bool parallel = true;
  bool diagnostics = true;  // norms, checkpoints, Gronwall
};

/// C0 = discrete Gen of d mu / dv (as the k = 0 row) at z = 2 lambda0 on the solver grid.
double background_constant(const EquilibriumProfile& profile, const WeightParams& params, int J,
                           double d_eta);

RunOutput simulate(const DynamicsConfig& config, const SimulateOptions& options = {});

struct FixedPointResult {
  FieldHistory field;
  int iterations = 0;
  std::vector<double> trace;  // relative sup-norm change per iteration
};

struct FixedPointOptions {
  int max_iterations = 50;
  double tolerance = 1e-9;
  /// Drop E^R (g replaced by 0): the result is G * E^0.
  bool drop_remainder = false;
};

/// Picard iteration E <- G * (E^0 + E^R[E, g]) on the field alone, with g
/// entering through the interaction tensor of a completed run. Throws
/// Error(divergence) after max_iterations.
FixedPointResult fixed_point_field_solve(const DynamicsConfig& config, const InteractionTensor& w,
                                         const FixedPointOptions& options = {});

}  // namespace landau
