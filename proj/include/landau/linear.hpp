#pragma once

#include <complex>
#include <optional>
#include <span>
#include <vector>

#include "landau/equilibria.hpp"

namespace landau {

/// Linear response kernel K_k(tau) = |k|^(2 - alpha) tau muhat(k tau) of the
/// density Volterra equation rho = rho0 - K * rho. Throws Error(zero_mode) at k = 0.
cplx volterra_kernel(const EquilibriumProfile& profile, double alpha, double k, double tau);

/// Most negative Re(lambda) at which the Laplace integral is still evaluated.
/// Tabulated profiles use -theta0 |k|. Gaussian-type transforms are entire, so
/// the limit is set by cancellation instead: the integrand peak
/// exp(gamma^2 / 2 k^2 w^2) must stay below 1e6.
double dispersion_abscissa(const EquilibriumProfile& profile, double k);

struct DispersionValue {
  cplx value;       // D(k, lambda)
  cplx derivative;  // dD / dlambda
};

/// D(k, lambda) = 1 + int_0^inf exp(-lambda tau) K_k(tau) d tau by adaptive
/// Gauss-Kronrod quadrature to relative tolerance 1e-10.
cplx dispersion(const EquilibriumProfile& profile, double alpha, double k, cplx lambda);
DispersionValue dispersion_with_derivative(const EquilibriumProfile& profile, double alpha, double k,
                                           cplx lambda);

struct SearchBox {
  double re_min = -0.5;
  double re_max = 0.5;
  double im_min = -2.0;
  double im_max = 2.0;
};

struct DispersionRoot {
  double k = 0.0;
  cplx lambda;  // gamma + i Im; the oscillation frequency is omega = -Im(lambda)
  double residual = 0.0;
  int iterations = 0;
};

/// Newton iteration on D(k, .) starting at `guess`.
DispersionRoot newton_root(const EquilibriumProfile& profile, double alpha, double k, cplx guess,
                           int max_iterations = 60);

/// Number of zeros of D(k, .) inside the box (argument principle on its boundary).
int box_winding(const EquilibriumProfile& profile, double alpha, double k, const SearchBox& box);

/// All zeros inside the box: winding count, bisection until each sub-box
/// holds a single zero, then Newton polish to |D| < 1e-8.
std::vector<DispersionRoot> find_roots(const EquilibriumProfile& profile, double alpha, double k,
                                       const SearchBox& box);

struct NyquistResult {
  double k = 0.0;
  double xi_max = 0.0;        // contour runs over lambda = i xi, |xi| <= xi_max
  int unstable_count = 0;     // zeros in Re(lambda) > 0
  double min_abs = 0.0;       // min |D| along the contour
  std::size_t evaluations = 0;
};

NyquistResult nyquist(const EquilibriumProfile& profile, double alpha, double k);

struct PenroseVerdict {
  bool stable = true;
  std::vector<NyquistResult> contours;
  std::optional<double> unstable_k;
  std::optional<DispersionRoot> unstable_root;
};

/// Stable iff the Nyquist winding vanishes for every k; otherwise reports the
/// first unstable k and its fastest-growing root.
PenroseVerdict penrose_verdict(const EquilibriumProfile& profile, double alpha,
                               std::span<const double> ks);

/// |k|^-2 dmu/dv(1 / |k|), a small-|k| order-of-magnitude estimate of Re(lambda).
double landau_rate_asymptotic(const EquilibriumProfile& profile, double k);

/// Resolvent of the density Volterra equation on a uniform grid t_n = n dt:
/// R(t) = -K(t) - int_0^t K(t - s) R(s) ds, solved with the product
/// trapezoidal rule. Throws Error(step_size) when dt max|K| >= 1.
std::vector<cplx> volterra_resolvent(std::span<const cplx> kernel, double dt);

/// max_n |R_n + K_n + (K * R)_n| with the same discrete convolution.
double resolvent_residual(std::span<const cplx> kernel, std::span<const cplx> resolvent, double dt);

struct GreenKernel {
  double k = 0.0;
  double dt = 0.0;
  std::vector<double> times;
  std::vector<cplx> values;  // G^r_k(t_n)
  double residual = 0.0;     // re-substitution residual
  double kernel_max = 0.0;   // max |K_k|
  // envelope |G^r_k(t)| <= fit_c exp(-fit_theta |k| t)
  double fit_c = 0.0;
  double fit_theta = 0.0;
  double fit_rate() const noexcept { return fit_theta * std::abs(k); }
  double envelope(double t) const noexcept;
};

GreenKernel green_kernel(const EquilibriumProfile& profile, double alpha, double k, double dt,
                         std::size_t samples);

/// Envelope fit of an exponentially damped oscillation: log-linear least
/// squares through the local maxima of |values| above the noise floor.
/// Returns (C, rate) with |values[n]| <= C exp(-rate t_n).
std::pair<double, double> fit_envelope(std::span<const double> times, std::span<const cplx> values);

/// S(t) + int_0^t G^r(t - s) S(s) ds with the trapezoidal rule. The source
/// must share the kernel's step and may not be longer than it.
std::vector<cplx> convolve_green(const GreenKernel& kernel, std::span<const cplx> source,
                                 double source_dt);

}  // namespace landau
