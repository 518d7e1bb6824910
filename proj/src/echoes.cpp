#include "landau/echoes.hpp"

#include <cmath>
#include <string>

#include "landau/error.hpp"

namespace landau {

EchoTimes predict_echo(int k1, double eta1, int k2, double eta2) {
  if (k1 == 0 || k2 == 0) throw Error(ErrorKind::zero_mode, "echo pulses need k1, k2 != 0");
  if (k1 + k2 == 0) {
    throw Error(ErrorKind::no_echo, "k1 + k2 = 0: the echo would sit in the zero mode, which carries no field");
  }
  EchoTimes e;
  e.t1 = eta1 / k1;
  e.t2 = eta2 / k2;
  e.t3 = (eta1 + eta2) / (k1 + k2);
  e.causal = e.t1 >= 0.0 && e.t2 >= 0.0 && e.t3 > std::max(e.t1, e.t2);
  return e;
}

std::pair<double, double> locate_peak(std::span<const double> times, std::span<const cplx> values,
                                      double after) {
  const std::size_t n = std::min(times.size(), values.size());
  std::size_t best = n;
  for (std::size_t i = 1; i + 1 < n; ++i) {
    if (times[i] <= after) continue;
    const double a = std::abs(values[i]);
    if (a > 0.0 && a >= std::abs(values[i - 1]) && a > std::abs(values[i + 1]) &&
        (best == n || a > std::abs(values[best]))) {
      best = i;
    }
  }
  if (best == n) {
    throw Error(ErrorKind::no_echo, "no local maximum of the echo-mode density after t = " +
                                        std::to_string(after));
  }
  const double ym = std::abs(values[best - 1]);
  const double y0 = std::abs(values[best]);
  const double yp = std::abs(values[best + 1]);
  const double den = ym - 2.0 * y0 + yp;
  double off = 0.0;
  if (den < 0.0) off = 0.5 * (ym - yp) / den;
  const double h = times[best + 1] - times[best];
  return {times[best] + off * h, y0 - 0.25 * (ym - yp) * off};
}

EchoExperiment run_echo(const DynamicsConfig& base, const EchoPulse& first, const EchoPulse& second,
                        bool parallel) {
  EchoExperiment ex;
  ex.first = first;
  ex.second = second;
  ex.predicted = predict_echo(first.k, first.eta, second.k, second.eta);
  if (!ex.predicted.causal) {
    throw Error(ErrorKind::invalid_argument,
                "non-causal echo setup: need t3 > max(t1, t2) >= 0 (t1 = " + std::to_string(ex.predicted.t1) +
                    ", t2 = " + std::to_string(ex.predicted.t2) + ", t3 = " + std::to_string(ex.predicted.t3) + ")");
  }
  ex.echo_mode = first.k + second.k;
  if (std::abs(ex.echo_mode) > base.grid.K) {
    throw Error(ErrorKind::out_of_range, "echo mode k1 + k2 exceeds the retained modes");
  }
  DynamicsConfig c = base;
  c.data = InitialData{};
  c.gather_interactions = false;
  for (const auto* p : {&first, &second}) {
    if (p->amplitude != cplx{}) c.data.modes.push_back({p->k, p->eta, p->amplitude, p->width});
  }
  const auto run = simulate(c, {parallel, false});
  ex.dt = c.grid.dt;
  const int k = ex.echo_mode;
  const double factor = k * std::pow(std::abs(static_cast<double>(k)), -c.alpha);
  const auto t = run.field.times();
  ex.times.assign(t.begin(), t.end());
  ex.density.reserve(ex.times.size());
  for (std::size_t n = 0; n < ex.times.size(); ++n) {
    // E_k = -i k |k|^-alpha rho_k
    ex.density.push_back(run.field.at(n, k) / cplx(0.0, -factor));
  }
  const auto [tp, amp] = locate_peak(ex.times, ex.density, std::max(ex.predicted.t1, ex.predicted.t2));
  ex.peak_time = tp;
  ex.peak_amplitude = amp;
  ex.timing_error = std::abs(tp - ex.predicted.t3) / std::abs(ex.predicted.t3);
  return ex;
}

}  // namespace landau
