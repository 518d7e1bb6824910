// Serial reference vs OpenMP kernels. Usage: landau_bench [K] [T] [repeats]
#include <omp.h>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <vector>

#include "landau/certify.hpp"
#include "landau/dynamics.hpp"

using namespace landau;

namespace {

template <class F>
double best_of(int repeats, F&& f) {
  double best = 1e300;
  for (int r = 0; r < repeats; ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    f();
    best = std::min(best, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  }
  return best;
}

void row(const char* name, double serial, double parallel) {
  std::printf("%-22s serial %10.4f s   openmp %10.4f s   speedup %6.2fx\n", name, serial, parallel,
              serial / parallel);
}

}  // namespace

int main(int argc, char** argv) {
  const int K = argc > 1 ? std::atoi(argv[1]) : 8;
  const double T = argc > 2 ? std::atof(argv[2]) : 50.0;
  const int repeats = argc > 3 ? std::atoi(argv[3]) : 3;
  std::printf("threads %d, K = %d, T = %g\n", omp_get_max_threads(), K, T);

  DynamicsConfig c;
  c.grid.K = K;
  c.grid.T = T;
  c.grid.dt = 0.05;
  c.data.closed_form = ClosedForm{1e-3, 1, 1.0};
  const auto g = init_state(c);
  const long n2 = static_cast<long>(T / c.grid.dt);  // mid-run time
  Model model(c.profile, c.alpha, c.coupling, K, g.max_eta_index(), c.grid.dt, c.grid.steps());
  const auto E = model.field(g, n2);
  std::vector<cplx> out(g.size());
  std::printf("grid %d x %zu coefficients\n", 2 * K + 1, g.row_size());

  const double rs = best_of(repeats, [&] { model.rhs_reference(g, E, n2, out); });
  const double rp = best_of(repeats, [&] { model.rhs(g, E, n2, out); });
  row("rhs", rs, rp);

  const double gs = best_of(repeats, [&] { (void)gen_norm_reference(g, c.norms, 0.15, 1); });
  const double gp = best_of(repeats, [&] { (void)gen_norm(g, c.norms, 0.15, 1); });
  row("gen_norm", gs, gp);

  Sweep sweep;
  sweep.t_points = 20;
  const double cs = best_of(1, [&] { (void)certify_bound(BoundId::cr1, c.norms, sweep, false); });
  const double cp = best_of(1, [&] { (void)certify_bound(BoundId::cr1, c.norms, sweep, true); });
  row("certify CR1", cs, cp);

  DynamicsConfig short_run = c;
  short_run.grid.T = 5.0;
  const double ss = best_of(1, [&] { (void)simulate(short_run, {false, false}); });
  const double sp = best_of(1, [&] { (void)simulate(short_run, {true, false}); });
  row("simulate T=5", ss, sp);
  return 0;
}
