#include "landau/equilibria.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "landau/error.hpp"

namespace landau {

std::string_view to_string(Family family) noexcept {
  switch (family) {
    case Family::gaussian: return "gaussian";
    case Family::two_stream: return "two-stream";
    case Family::tabulated: return "custom-tabulated";
  }
  return "unknown";
}

Family family_from_string(std::string_view name) {
  if (name == "gaussian") return Family::gaussian;
  if (name == "two-stream" || name == "two_stream") return Family::two_stream;
  if (name == "custom-tabulated" || name == "tabulated") return Family::tabulated;
  throw Error(ErrorKind::invalid_argument, "unknown equilibrium family '" + std::string(name) + "'");
}

EquilibriumProfile EquilibriumProfile::gaussian(double width, double mass) {
  EquilibriumProfile p;
  p.family = Family::gaussian;
  p.width = width;
  p.mass = mass;
  p.validate();
  return p;
}

EquilibriumProfile EquilibriumProfile::two_stream(double v0, double width, double mass) {
  EquilibriumProfile p;
  p.family = Family::two_stream;
  p.v0 = v0;
  p.width = width;
  p.mass = mass;
  p.validate();
  return p;
}

EquilibriumProfile EquilibriumProfile::tabulated(std::vector<double> eta, std::vector<cplx> values,
                                                 double theta0) {
  EquilibriumProfile p;
  p.family = Family::tabulated;
  p.table_eta = std::move(eta);
  p.table_values = std::move(values);
  p.theta0 = theta0;
  if (p.table_eta.size() >= 2 && p.table_eta.front() <= 0.0 && p.table_eta.back() >= 0.0) {
    p.mass = mu_hat(p, 0.0).real();
  }
  p.validate();
  return p;
}

void EquilibriumProfile::validate() const {
  if (!(width > 0.0) || !std::isfinite(width)) {
    throw Error(ErrorKind::invalid_argument, "equilibrium width must be positive");
  }
  if (!(mass > 0.0) || !std::isfinite(mass)) {
    throw Error(ErrorKind::invalid_argument, "equilibrium mass must be positive");
  }
  if (!(theta0 > 0.0)) {
    throw Error(ErrorKind::invalid_argument, "equilibrium theta0 must be positive");
  }
  if (!std::isfinite(v0)) throw Error(ErrorKind::invalid_argument, "equilibrium v0 must be finite");
  if (family == Family::tabulated) {
    if (table_eta.size() < 2 || table_eta.size() != table_values.size()) {
      throw Error(ErrorKind::invalid_argument,
                  "tabulated profile needs matching eta/value arrays with at least two entries");
    }
    if (!std::is_sorted(table_eta.begin(), table_eta.end(), std::less_equal<>{})) {
      throw Error(ErrorKind::invalid_argument, "tabulated eta grid must be strictly increasing");
    }
    if (table_eta.front() > 0.0 || table_eta.back() < 0.0) {
      throw Error(ErrorKind::invalid_argument, "tabulated eta grid must contain eta = 0");
    }
  }
}

double EquilibriumProfile::eta_limit() const noexcept {
  if (family != Family::tabulated) return std::numeric_limits<double>::infinity();
  return std::min(-table_eta.front(), table_eta.back());
}

double EquilibriumProfile::envelope(double eta) const {
  const double a = std::abs(eta);
  switch (family) {
    case Family::gaussian:
    case Family::two_stream:
      return mass * std::exp(-0.5 * width * width * a * a);
    case Family::tabulated: {
      double m = 0.0;
      for (std::size_t i = 0; i < table_eta.size(); ++i) {
        if (std::abs(table_eta[i]) >= a) m = std::max(m, std::abs(table_values[i]));
      }
      // the bracketing interval may contribute through interpolation
      return m > 0.0 ? m : std::abs(table_values.back()) + std::abs(table_values.front());
    }
  }
  return 0.0;
}

namespace {

cplx interpolate_table(const EquilibriumProfile& p, double eta) {
  const auto& x = p.table_eta;
  if (eta < x.front() || eta > x.back()) {
    throw Error(ErrorKind::out_of_range, "eta = " + std::to_string(eta) +
                                             " outside tabulated range [" +
                                             std::to_string(x.front()) + ", " +
                                             std::to_string(x.back()) + "]");
  }
  auto it = std::upper_bound(x.begin(), x.end(), eta);
  std::size_t hi = static_cast<std::size_t>(it - x.begin());
  if (hi == x.size()) hi = x.size() - 1;
  const std::size_t lo = hi - 1;
  const double w = (eta - x[lo]) / (x[hi] - x[lo]);
  return (1.0 - w) * p.table_values[lo] + w * p.table_values[hi];
}

double gaussian_density(double v, double w) {
  return std::exp(-0.5 * v * v / (w * w)) / (std::sqrt(2.0 * std::numbers::pi) * w);
}

}  // namespace

cplx mu_hat(const EquilibriumProfile& p, double eta) {
  switch (p.family) {
    case Family::gaussian:
      return {p.mass * std::exp(-0.5 * p.width * p.width * eta * eta), 0.0};
    case Family::two_stream:
      return {p.mass * std::cos(p.v0 * eta) * std::exp(-0.5 * p.width * p.width * eta * eta), 0.0};
    case Family::tabulated:
      return interpolate_table(p, eta);
  }
  return {};
}

cplx grad_mu_hat(const EquilibriumProfile& p, double eta) {
  return cplx(0.0, eta) * mu_hat(p, eta);
}

double mu(const EquilibriumProfile& p, double v) {
  switch (p.family) {
    case Family::gaussian:
      return p.mass * gaussian_density(v, p.width);
    case Family::two_stream:
      return 0.5 * p.mass * (gaussian_density(v - p.v0, p.width) + gaussian_density(v + p.v0, p.width));
    case Family::tabulated:
      break;
  }
  throw Error(ErrorKind::invalid_argument, "tabulated profiles have no real-space density");
}

double grad_mu(const EquilibriumProfile& p, double v) {
  const double w2 = p.width * p.width;
  switch (p.family) {
    case Family::gaussian:
      return -v / w2 * p.mass * gaussian_density(v, p.width);
    case Family::two_stream:
      return -0.5 * p.mass *
             ((v - p.v0) / w2 * gaussian_density(v - p.v0, p.width) +
              (v + p.v0) / w2 * gaussian_density(v + p.v0, p.width));
    case Family::tabulated:
      break;
  }
  throw Error(ErrorKind::invalid_argument, "tabulated profiles have no real-space density");
}

}  // namespace landau
