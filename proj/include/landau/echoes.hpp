#pragma once

#include <span>
#include <utility>
#include <vector>

#include "landau/dynamics.hpp"

namespace landau {

struct EchoTimes {
  double t1 = 0.0;
  double t2 = 0.0;
  double t3 = 0.0;
  bool causal = false;  // t3 > max(t1, t2) and all times >= 0
};

/// t_i = eta_i / k_i and t3 = (eta1 + eta2) / (k1 + k2). Throws
/// Error(no_echo) when k1 + k2 = 0 and Error(zero_mode) when a k vanishes.
EchoTimes predict_echo(int k1, double eta1, int k2, double eta2);

struct EchoPulse {
  int k = 1;
  double eta = 0.0;
  cplx amplitude = 0.0;
  double width = 1.0;  // eta width of the packet, 0 for a single grid point
};

struct EchoExperiment {
  EchoPulse first;
  EchoPulse second;
  EchoTimes predicted;
  int echo_mode = 0;
  double dt = 0.0;
  double peak_time = 0.0;
  double peak_amplitude = 0.0;
  double timing_error = 0.0;  // |t_peak - t3| / t3
  std::vector<double> times;
  std::vector<cplx> density;  // rho_{k1+k2}(t_n)
};

/// Runs the dynamics with the two packets (their conjugates are implied) and
/// locates the largest local maximum of |rho_{k1+k2}| over (max(t1, t2), T].
/// `base` supplies equilibrium, coupling, grid and norms; its data are
/// replaced. Either pulse may have zero amplitude. Throws Error(no_echo) when
/// no local maximum exists in the window.
EchoExperiment run_echo(const DynamicsConfig& base, const EchoPulse& first, const EchoPulse& second,
                        bool parallel = true);

/// Parabolic refinement of the largest interior local maximum of |values|
/// with times[n] > after. Returns (time, amplitude); throws Error(no_echo).
std::pair<double, double> locate_peak(std::span<const double> times, std::span<const cplx> values,
                                      double after);

}  // namespace landau
