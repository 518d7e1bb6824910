#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace landau {

enum class ErrorKind {
  invalid_argument,
  out_of_range,       // tabulated profile queried outside its table
  overflow,           // weight exponent overflows double
  missing_sample,     // requested time not stored in a history
  grid_too_coarse,
  zero_mode,          // field quantity requested at k = 0
  abscissa,           // Laplace integral outside its convergence half-plane
  bisection_failure,  // root count could not be isolated
  marginal_stability, // Nyquist contour passes too close to the origin
  step_size,
  grid_too_small,     // glide-frame support margin violated
  alignment,          // k t off the eta grid
  blow_up,
  grid_mismatch,
  no_echo,
  divergence,
  refinement_failure,
  config,
  io,
};

std::string_view to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace landau
