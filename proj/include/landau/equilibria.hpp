#pragma once

#include <complex>
#include <string>
#include <string_view>
#include <vector>

namespace landau {

using cplx = std::complex<double>;

enum class Family { gaussian, two_stream, tabulated };

std::string_view to_string(Family family) noexcept;
Family family_from_string(std::string_view name);

/// Spatially homogeneous background mu(v) together with its velocity
/// transform muhat(eta) = int mu(v) exp(-i eta v) dv.
///
/// The analytic families are
///   gaussian:   mu(v) = mass / (sqrt(2 pi) w) exp(-v^2 / 2w^2)
///   two_stream: mu(v) = mass / 2 [G_w(v - v0) + G_w(v + v0)]
/// Tabulated profiles carry muhat on an increasing eta grid and are linearly
/// interpolated; they have no real-space representation.
///
/// theta0 is an effective exponential decay rate of |muhat| used by bound
/// checks only. Gaussian transforms decay faster than any exponential, so for
/// those families it is a free choice (default 1).
struct EquilibriumProfile {
  Family family = Family::gaussian;
  double v0 = 0.0;
  double width = 1.0;
  double mass = 1.0;
  double theta0 = 1.0;
  std::vector<double> table_eta;
  std::vector<cplx> table_values;

  static EquilibriumProfile gaussian(double width = 1.0, double mass = 1.0);
  static EquilibriumProfile two_stream(double v0, double width = 1.0, double mass = 1.0);
  static EquilibriumProfile tabulated(std::vector<double> eta, std::vector<cplx> values,
                                      double theta0 = 1.0);

  /// Throws Error(invalid_argument) when an invariant is broken.
  void validate() const;

  /// True when muhat extends to an entire function (gaussian, two_stream).
  bool is_entire() const noexcept { return family != Family::tabulated; }

  /// Largest |eta| at which muhat is defined (infinity for analytic families).
  double eta_limit() const noexcept;

  /// Bound on sup_{|eta'| >= |eta|} |muhat(eta')|.
  double envelope(double eta) const;
};

cplx mu_hat(const EquilibriumProfile& profile, double eta);

/// Transform of d mu / dv, equal to i eta muhat(eta).
cplx grad_mu_hat(const EquilibriumProfile& profile, double eta);

/// Real-space density and its derivative; analytic families only.
double mu(const EquilibriumProfile& profile, double v);
double grad_mu(const EquilibriumProfile& profile, double v);

}  // namespace landau
