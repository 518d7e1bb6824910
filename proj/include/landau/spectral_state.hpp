#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace landau {

using cplx = std::complex<double>;

/// Glide-frame Fourier coefficients g_{k, eta_j}(t) on the truncated grid
/// k in [-K, K], j in [-J, J], eta_j = j * d_eta, stored row-major over
/// (k, j). The time step equals d_eta, so t_n = n * d_eta.
class SpectralState {
 public:
  SpectralState() = default;
  SpectralState(int max_mode, int max_eta_index, double d_eta, long step = 0);

  int max_mode() const noexcept { return K_; }
  int max_eta_index() const noexcept { return J_; }
  double d_eta() const noexcept { return d_eta_; }
  long step() const noexcept { return step_; }
  void set_step(long n) noexcept { step_ = n; }
  double time() const noexcept { return static_cast<double>(step_) * d_eta_; }

  std::size_t modes() const noexcept { return static_cast<std::size_t>(2 * K_ + 1); }
  std::size_t row_size() const noexcept { return static_cast<std::size_t>(2 * J_ + 1); }
  std::size_t size() const noexcept { return coeffs_.size(); }

  double eta(int j) const noexcept { return j * d_eta_; }

  bool contains(int k, int j) const noexcept { return k >= -K_ && k <= K_ && j >= -J_ && j <= J_; }
  std::size_t index(int k, int j) const noexcept {
    return static_cast<std::size_t>(k + K_) * row_size() + static_cast<std::size_t>(j + J_);
  }

  cplx& at(int k, int j) noexcept { return coeffs_[index(k, j)]; }
  const cplx& at(int k, int j) const noexcept { return coeffs_[index(k, j)]; }
  /// Zero outside the grid.
  cplx value(int k, int j) const noexcept { return contains(k, j) ? at(k, j) : cplx{}; }

  std::span<cplx> row(int k) noexcept { return {coeffs_.data() + index(k, -J_), row_size()}; }
  std::span<const cplx> row(int k) const noexcept { return {coeffs_.data() + index(k, -J_), row_size()}; }

  std::span<cplx> data() noexcept { return coeffs_; }
  std::span<const cplx> data() const noexcept { return coeffs_; }

  /// max |g_{-k,-eta} - conj(g_{k,eta})|
  double hermitian_defect() const noexcept;

  /// sum_j |g_{k, eta_j}| over the outermost modes |k| = K.
  double tail_norm() const noexcept;
  double l1_norm() const noexcept;

 private:
  int K_ = 0;
  int J_ = 0;
  double d_eta_ = 1.0;
  long step_ = 0;
  std::vector<cplx> coeffs_;
};

/// Field modes E_k(t_n) for k in [-K, K] (E_0 = 0) with per-sample norms.
class FieldHistory {
 public:
  FieldHistory() = default;
  FieldHistory(int max_mode, double dt) : K_(max_mode), dt_(dt) {}

  int max_mode() const noexcept { return K_; }
  double dt() const noexcept { return dt_; }
  std::size_t samples() const noexcept { return times_.size(); }
  std::span<const double> times() const noexcept { return times_; }

  void push(double t, std::vector<cplx> modes);
  void reserve(std::size_t n);

  /// Index of the sample at time t; throws Error(missing_sample).
  std::size_t index_of(double t) const;

  std::span<const cplx> modes(std::size_t n) const noexcept { return modes_[n]; }
  cplx at(std::size_t n, int k) const noexcept { return modes_[n][static_cast<std::size_t>(k + K_)]; }
  std::vector<cplx> series(int k) const;

  /// sup_x |E(t_n, x)| bounded by sum_k |E_k|.
  double sup_norm(std::size_t n) const noexcept;

 private:
  int K_ = 0;
  double dt_ = 0.0;
  std::vector<double> times_;
  std::vector<std::vector<cplx>> modes_;
};

}  // namespace landau
