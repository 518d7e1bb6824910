#include "landau/error.hpp"

namespace landau {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::invalid_argument: return "invalid argument";
    case ErrorKind::out_of_range: return "out of range";
    case ErrorKind::overflow: return "overflow";
    case ErrorKind::missing_sample: return "missing sample";
    case ErrorKind::grid_too_coarse: return "grid too coarse";
    case ErrorKind::zero_mode: return "zero mode";
    case ErrorKind::abscissa: return "abscissa";
    case ErrorKind::bisection_failure: return "bisection failure";
    case ErrorKind::marginal_stability: return "marginal stability";
    case ErrorKind::step_size: return "step size";
    case ErrorKind::grid_too_small: return "grid too small";
    case ErrorKind::alignment: return "alignment";
    case ErrorKind::blow_up: return "blow-up";
    case ErrorKind::grid_mismatch: return "grid mismatch";
    case ErrorKind::no_echo: return "no echo detected";
    case ErrorKind::divergence: return "divergence";
    case ErrorKind::refinement_failure: return "refinement failure";
    case ErrorKind::config: return "config";
    case ErrorKind::io: return "io";
  }
  return "error";
}

}  // namespace landau
