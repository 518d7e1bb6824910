#pragma once

#include <span>
#include <vector>

#include "landau/spectral_state.hpp"

namespace landau {

/// Parameters of the analytic-Sobolev weights A_{k,eta}(z) = exp(z <k,eta>) <eta>^sigma
/// and of the shrinking radius lambda(t) = lambda0 (1 + (1+t)^-delta).
struct WeightParams {
  double sigma = 1.0;
  double lambda0 = 0.1;
  double delta = 0.1;
  double theta1 = 0.01;
  double theta2 = 0.02;

  void validate() const;
};

/// Bracket <k, eta> = sqrt(1 + k^2 + eta^2).
double bracket(double k, double eta) noexcept;

double weight(const WeightParams& params, double z, double k, double eta) noexcept;

/// lambda(t); strictly decreasing from 2 lambda0 towards lambda0.
double radius(const WeightParams& params, double t) noexcept;
/// d lambda / dt
double radius_rate(const WeightParams& params, double t) noexcept;

struct GeneratorSample {
  double time = 0.0;
  double z = 0.0;
  double value = 0.0;
  /// breakdown[alpha] is the |alpha| = alpha contribution.
  std::vector<double> breakdown;
};

/// Gen[g](z): sum over k, trapezoidal in eta, with d/deta by second-order
/// central differences (one-sided at the grid edges). max_alpha is 0 or 1.
GeneratorSample gen_norm(const SpectralState& state, const WeightParams& params, double z,
                         int max_alpha = 1);
/// Serial reference with the same reduction order.
GeneratorSample gen_norm_reference(const SpectralState& state, const WeightParams& params, double z,
                                   int max_alpha = 1);

/// F[E](t, z) = sum_{k != 0} A_{k,kt}(z) |E_k(t)| at a stored sample time.
double f_norm(const FieldHistory& field, const WeightParams& params, double t, double z);
/// Same sum for a single set of modes at time t (index k + K).
double f_norm(std::span<const cplx> modes, int max_mode, const WeightParams& params, double t,
              double z) noexcept;

struct GronwallReport {
  std::vector<double> times;
  /// max over z of dGen/dt - C0 F - (1 + t) F dGen/dz at each time
  std::vector<double> residual;
  double worst = 0.0;
  bool pass = false;
};

/// Finite-difference check of dGen/dt <= C0 F + (1 + t) F dGen/dz on a
/// rectangular (t, z) grid. `field_norms[i]` is F at samples[i]'s (t, z).
GronwallReport check_gronwall(std::span<const GeneratorSample> samples,
                              std::span<const double> field_norms, double c0,
                              double tolerance = 0.0);

}  // namespace landau
