#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <type_traits>
#include <utility>
#include <vector>

namespace landau::quad {

// Gauss-Kronrod 7/15 nodes on [-1, 1] (QUADPACK qk15).
inline constexpr std::array<double, 8> kronrod_x = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> kronrod_w = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> gauss_w = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

template <class T>
struct Estimate {
  T value{};
  double error = 0.0;
};

/// One G7/K15 panel on [a, b]; the error estimate is |K15 - G7|.
template <class F>
auto gk15(F&& f, double a, double b) {
  using T = std::decay_t<decltype(f(a))>;
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  const T fc = f(c);
  T kron = fc * kronrod_w[7];
  T gauss = fc * gauss_w[3];
  for (int j = 0; j < 7; ++j) {
    const double dx = h * kronrod_x[j];
    const T s = f(c - dx) + f(c + dx);
    kron += s * kronrod_w[j];
    if (j % 2 == 1) gauss += s * gauss_w[j / 2];
  }
  return Estimate<T>{kron * h, std::abs((kron - gauss) * h)};
}

/// Globally adaptive G7/K15 bisection. Stops when the summed error estimate
/// falls below max(abs_tol, rel_tol * |I|) or the panel budget is spent;
/// `converged` reports which.
template <class T>
struct Result {
  T value{};
  double error = 0.0;
  std::size_t panels = 0;
  bool converged = false;
};

/// Globally adaptive integration over consecutive breakpoints: every
/// interval starts as one panel and the panel with the largest error is
/// bisected until the summed error meets max(abs_tol, rel_tol * |I|).
template <class F>
auto integrate_pieces(F&& f, const std::vector<double>& breaks, double rel_tol, double abs_tol = 0.0,
                      std::size_t max_panels = 4000) {
  using T = std::decay_t<decltype(f(0.0))>;
  struct Panel {
    double a, b;
    Estimate<T> est;
    bool operator<(const Panel& o) const { return est.error < o.est.error; }
  };
  std::vector<Panel> heap;
  heap.reserve(breaks.size() + 64);
  T total{};
  double err = 0.0;
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
    if (!(breaks[i + 1] > breaks[i])) continue;
    Panel p{breaks[i], breaks[i + 1], gk15(f, breaks[i], breaks[i + 1])};
    total += p.est.value;
    err += p.est.error;
    heap.push_back(p);
  }
  std::make_heap(heap.begin(), heap.end());
  const std::size_t budget = std::max(max_panels, 4 * heap.size());
  while (!heap.empty()) {
    const double target = std::max(abs_tol, rel_tol * std::abs(total));
    if (err <= target) return Result<T>{total, err, heap.size(), true};
    if (heap.size() >= budget) break;
    std::pop_heap(heap.begin(), heap.end());
    const Panel p = heap.back();
    heap.pop_back();
    const double mid = 0.5 * (p.a + p.b);
    if (!(mid > p.a && mid < p.b)) {
      heap.push_back(p);
      std::push_heap(heap.begin(), heap.end());
      break;
    }
    Panel left{p.a, mid, gk15(f, p.a, mid)};
    Panel right{mid, p.b, gk15(f, mid, p.b)};
    total += left.est.value + right.est.value - p.est.value;
    err += left.est.error + right.est.error - p.est.error;
    heap.push_back(left);
    std::push_heap(heap.begin(), heap.end());
    heap.push_back(right);
    std::push_heap(heap.begin(), heap.end());
  }
  return Result<T>{total, err, heap.size(), heap.empty()};
}

template <class F>
auto integrate(F&& f, double a, double b, double rel_tol, double abs_tol = 0.0,
               std::size_t max_panels = 4000) {
  return integrate_pieces(std::forward<F>(f), std::vector<double>{a, b}, rel_tol, abs_tol, max_panels);
}

}  // namespace landau::quad
