#include "landau/spectral_state.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "landau/error.hpp"

namespace landau {

SpectralState::SpectralState(int max_mode, int max_eta_index, double d_eta, long step)
    : K_(max_mode), J_(max_eta_index), d_eta_(d_eta), step_(step) {
  if (max_mode < 0 || max_eta_index < 0 || !(d_eta > 0.0)) {
    throw Error(ErrorKind::invalid_argument, "spectral grid needs K >= 0, J >= 0, d_eta > 0");
  }
  coeffs_.assign(modes() * row_size(), cplx{});
}

double SpectralState::hermitian_defect() const noexcept {
  double worst = 0.0;
  for (int k = -K_; k <= K_; ++k) {
    for (int j = -J_; j <= J_; ++j) {
      worst = std::max(worst, std::abs(at(-k, -j) - std::conj(at(k, j))));
    }
  }
  return worst;
}

double SpectralState::tail_norm() const noexcept {
  if (K_ == 0) return 0.0;
  double s = 0.0;
  for (int k : {-K_, K_}) {
    for (const cplx& c : row(k)) s += std::abs(c);
  }
  return s;
}

double SpectralState::l1_norm() const noexcept {
  double s = 0.0;
  for (const cplx& c : coeffs_) s += std::abs(c);
  return s;
}

void FieldHistory::push(double t, std::vector<cplx> modes) {
  if (modes.size() != static_cast<std::size_t>(2 * K_ + 1)) {
    throw Error(ErrorKind::invalid_argument, "field sample has wrong number of modes");
  }
  times_.push_back(t);
  modes_.push_back(std::move(modes));
}

void FieldHistory::reserve(std::size_t n) {
  times_.reserve(n);
  modes_.reserve(n);
}

std::size_t FieldHistory::index_of(double t) const {
  const double tol = 1e-9 * std::max(1.0, std::abs(t));
  if (dt_ > 0.0 && !times_.empty()) {
    const double guess = (t - times_.front()) / dt_;
    const long n = std::lround(guess);
    if (n >= 0 && static_cast<std::size_t>(n) < times_.size() &&
        std::abs(times_[static_cast<std::size_t>(n)] - t) <= tol) {
      return static_cast<std::size_t>(n);
    }
  }
  for (std::size_t n = 0; n < times_.size(); ++n) {
    if (std::abs(times_[n] - t) <= tol) return n;
  }
  throw Error(ErrorKind::missing_sample, "no field sample at t = " + std::to_string(t));
}

std::vector<cplx> FieldHistory::series(int k) const {
  std::vector<cplx> out;
  out.reserve(times_.size());
  for (std::size_t n = 0; n < times_.size(); ++n) out.push_back(at(n, k));
  return out;
}

double FieldHistory::sup_norm(std::size_t n) const noexcept {
  double s = 0.0;
  for (const cplx& e : modes_[n]) s += std::abs(e);
  return s;
}

}  // namespace landau
