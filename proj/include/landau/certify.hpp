#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "landau/norms.hpp"

namespace landau {

/// C_{k,l}(t, s) = (t - s) A_{k,kt}(lambda(t)) / (A_{l,ls}(lambda(s)) A_{k-l,kt-ls}(lambda(s))),
/// evaluated in log space.
double c_ratio(const WeightParams& params, int k, int l, double t, double s);

/// Rate for which lambda(s) - lambda(t) >= 2 theta2 (t - s) / <t>^(1 + delta)
/// holds for the configured radius: lambda0 delta 2^(-(1 + delta) / 2) / 2.
double derived_theta2(const WeightParams& params);

/// 2^sigma (t - s) exp(-2 theta2 |k| (t - s) / <t>^delta) min(<kt - ls>, <ls>)^-sigma
/// with theta2 = derived_theta2(params); an upper bound for c_ratio.
double c_ratio_bound(const WeightParams& params, int k, int l, double t, double s);

enum class BoundId { cr1, cr1_riesz, cr2, exp_bd };

std::string_view to_string(BoundId id) noexcept;
BoundId bound_from_string(std::string_view name);

/// Integrand (CR1, CR1-Riesz) or supremand (CR2, exp-bd) of each bound.
///   CR1        (t-s) e^{-theta2 |k|(t-s)/<t>^delta} min(<kt-ls>, <ls>)^-sigma
///   CR1-Riesz  k^2 (t-s) e^{-theta2 |k|(t-s)/(2<t>^delta)} min(<l,ls>, <k-l,kt-ls>)^-sigma
///   CR2        <t>^{2 delta} e^{-theta2 |k|(t-s)/(4<t>^delta)} min(<l,ls>, <k-l,kt-ls>)^-sigma
///   exp-bd     e^{theta1 <t>^{1-delta} - theta2 |t-s|/<t>^delta - theta1 <s>^{1-delta}}
double bound_kernel(BoundId id, const WeightParams& params, int k, int l, double t, double s);

/// Regions of the s-integral, following the proof:
///   early        s <= t/2
///   nonresonant  s > t/2, |kt - ls| > t/4
///   resonant     s > t/2, |kt - ls| <= t/4, k != l
///   diagonal     s > t/2, |kt - ls| <= t/4, k == l
enum class Region { early = 0, nonresonant = 1, resonant = 2, diagonal = 3 };
constexpr int kRegions = 4;
std::string_view to_string(Region r) noexcept;
Region classify(int k, int l, double t, double s) noexcept;

/// Kinks and region boundaries of the kernel in s on [0, t], sorted, including 0 and t.
std::vector<double> breakpoints(BoundId id, int k, int l, double t);

struct RegionValues {
  double total = 0.0;
  double region[kRegions] = {0.0, 0.0, 0.0, 0.0};
  double error = 0.0;
  bool converged = true;
};

/// int_0^t of the CR1 / CR1-Riesz kernel, split by region.
RegionValues bound_integral(BoundId id, const WeightParams& params, int k, int l, double t,
                            double rel_tol = 1e-8);

/// sup over s in [0, t] of the CR2 / exp-bd kernel: grid over each
/// breakpoint interval followed by golden-section refinement.
RegionValues bound_supremum(BoundId id, const WeightParams& params, int k, int l, double t,
                            int s_points = 64);

struct Sweep {
  int k_max = 32;
  int l_max = 32;
  double t_min = 0.1;
  double t_max = 1000.0;
  int t_points = 40;  // geometric grid t_min .. t_max
  int s_points = 64;  // per breakpoint interval, sup-type bounds only
  int random_points = 0;  // extra random (k, l, t) tuples
  std::uint64_t seed = 0;
  double rel_tol = 1e-8;

  void validate() const;
  std::vector<double> times() const;
};

struct Tuple {
  int k = 0;
  int l = 0;
  double t = 0.0;
};

struct BoundCertificate {
  BoundId id = BoundId::cr1;
  Sweep sweep;
  WeightParams params;
  double sup = 0.0;
  Tuple arg;
  double region_sup[kRegions] = {0.0, 0.0, 0.0, 0.0};
  Tuple region_arg[kRegions];
  std::vector<double> times;        // sweep times in ascending order
  std::vector<double> sup_by_time;  // sup over (k, l) at each sweep time
  std::size_t tuples = 0;
  bool finite = false;
};

/// Evaluates the bound over all (k, l, t) of the sweep with k > 0 (the
/// kernels are even under (k, l) -> (-k, -l)). exp-bd ignores k and l.
/// Tuples are evaluated in parallel into an index-ordered array and merged
/// serially; ties keep the lexicographically smallest (k, l, t). Throws
/// Error(refinement_failure) naming the worst tuple when a quadrature fails.
BoundCertificate certify_bound(BoundId id, const WeightParams& params, const Sweep& sweep,
                               bool parallel = true);

}  // namespace landau
