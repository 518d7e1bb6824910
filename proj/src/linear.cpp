#include "landau/linear.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <string>

#include "landau/error.hpp"
#include "landau/quadrature.hpp"

namespace landau {

namespace {

constexpr double kPi = std::numbers::pi;

void require_nonzero(double k) {
  if (k == 0.0) throw Error(ErrorKind::zero_mode, "the k = 0 mode carries no field");
}

double coupling(double alpha, double k) { return std::pow(std::abs(k), 2.0 - alpha); }

// Characteristic velocity spread of the profile, sets the natural lambda scale.
double velocity_scale(const EquilibriumProfile& p) {
  if (p.family == Family::tabulated) return 1.0 / p.theta0;
  return p.width + std::abs(p.v0);
}

std::string fmt(cplx z) {
  return "(" + std::to_string(z.real()) + (z.imag() < 0 ? " - " : " + ") +
         std::to_string(std::abs(z.imag())) + "i)";
}

struct LaplaceSetup {
  double tau_max = 0.0;
  std::vector<double> breaks;
};

LaplaceSetup laplace_setup(const EquilibriumProfile& p, double alpha, double k, cplx lambda) {
  const double ak = std::abs(k);
  const double c = coupling(alpha, k);
  const double gamma = lambda.real();
  LaplaceSetup s;
  if (p.is_entire()) {
    const double a = p.width * p.width * ak * ak;
    const double peak = std::max(-gamma / a, 1.0 / (ak * p.width));
    auto bound = [&](double tau) {
      return c * p.mass * tau * tau * std::exp(-gamma * tau - 0.5 * a * tau * tau);
    };
    const double ref = std::max(1.0, bound(peak));
    double tau = peak;
    while (bound(tau) > 1e-18 * ref) tau *= 1.25;
    s.tau_max = tau;
  } else {
    s.tau_max = p.eta_limit() / ak;
  }
  double piece = s.tau_max;
  const double im = std::abs(lambda.imag());
  if (im > 0.0) piece = std::min(piece, 4.0 * kPi / im);
  if (p.is_entire()) piece = std::min(piece, 2.0 / (ak * p.width));
  const double pieces = std::ceil(s.tau_max / piece);
  if (!(pieces < 1e6)) {
    throw Error(ErrorKind::out_of_range, "Laplace integral at |Im lambda| = " + std::to_string(im) +
                                             " needs too many oscillation panels");
  }
  const auto n = static_cast<std::size_t>(pieces);
  s.breaks.resize(n + 1);
  for (std::size_t i = 0; i <= n; ++i) s.breaks[i] = s.tau_max * static_cast<double>(i) / n;
  return s;
}

void check_abscissa(const EquilibriumProfile& p, double k, cplx lambda) {
  const double a = dispersion_abscissa(p, k);
  if (!(lambda.real() > a)) {
    throw Error(ErrorKind::abscissa, "Re(lambda) = " + std::to_string(lambda.real()) +
                                         " is below the abscissa " + std::to_string(a) +
                                         " at k = " + std::to_string(k));
  }
}

}  // namespace

cplx volterra_kernel(const EquilibriumProfile& profile, double alpha, double k, double tau) {
  require_nonzero(k);
  return coupling(alpha, k) * tau * mu_hat(profile, k * tau);
}

double dispersion_abscissa(const EquilibriumProfile& profile, double k) {
  require_nonzero(k);
  const double ak = std::abs(k);
  if (profile.is_entire()) return -ak * profile.width * std::sqrt(2.0 * std::log(1e6));
  return -profile.theta0 * ak;
}

DispersionValue dispersion_with_derivative(const EquilibriumProfile& profile, double alpha, double k,
                                           cplx lambda) {
  require_nonzero(k);
  check_abscissa(profile, k, lambda);
  const double c = coupling(alpha, k);
  const auto setup = laplace_setup(profile, alpha, k, lambda);
  const double abs_tol = 1e-12;
  auto f = [&](double tau) { return c * tau * std::exp(-lambda * tau) * mu_hat(profile, k * tau); };
  auto df = [&](double tau) { return -tau * f(tau); };
  const auto r = quad::integrate_pieces(f, setup.breaks, 1e-10, abs_tol);
  const auto dr = quad::integrate_pieces(df, setup.breaks, 1e-10, abs_tol);
  return {1.0 + r.value, dr.value};
}

cplx dispersion(const EquilibriumProfile& profile, double alpha, double k, cplx lambda) {
  require_nonzero(k);
  check_abscissa(profile, k, lambda);
  const double c = coupling(alpha, k);
  const auto setup = laplace_setup(profile, alpha, k, lambda);
  const double abs_tol = 1e-12;
  auto f = [&](double tau) { return c * tau * std::exp(-lambda * tau) * mu_hat(profile, k * tau); };
  return 1.0 + quad::integrate_pieces(f, setup.breaks, 1e-10, abs_tol).value;
}

DispersionRoot newton_root(const EquilibriumProfile& profile, double alpha, double k, cplx guess,
                           int max_iterations) {
  DispersionRoot root;
  root.k = k;
  cplx z = guess;
  const double floor = dispersion_abscissa(profile, k);
  for (int it = 1; it <= max_iterations; ++it) {
    const auto dv = dispersion_with_derivative(profile, alpha, k, z);
    root.iterations = it;
    root.lambda = z;
    root.residual = std::abs(dv.value);
    if (root.residual < 1e-13) break;
    if (dv.derivative == cplx{}) break;
    cplx step = dv.value / dv.derivative;
    // damp steps that would leave the convergence half-plane
    while ((z - step).real() <= floor && std::abs(step) > 1e-300) step *= 0.5;
    z -= step;
    if (std::abs(z - guess) > 50.0 * (1.0 + std::abs(guess))) break;  // diverging
    if (std::abs(step) < 1e-15 * std::max(1.0, std::abs(z))) {
      root.lambda = z;
      root.residual = std::abs(dispersion(profile, alpha, k, z));
      break;
    }
  }
  return root;
}

namespace {

struct NearZero {};

struct PathAccumulator {
  double arg = 0.0;
  double min_abs = std::numeric_limits<double>::infinity();
  std::size_t evaluations = 0;
};

// Accumulates the argument change of D along the polyline through `nodes`,
// refining any segment whose endpoint values differ by more than a quarter of
// their modulus.
template <class Eval>
void trace_path(Eval&& eval, const std::vector<cplx>& nodes, double zero_floor, PathAccumulator& acc) {
  struct Seg {
    cplx a, b;
    cplx da, db;
    int depth;
  };
  std::vector<cplx> vals(nodes.size());
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    vals[i] = eval(nodes[i]);
    ++acc.evaluations;
    acc.min_abs = std::min(acc.min_abs, std::abs(vals[i]));
  }
  std::vector<Seg> stack;
  for (std::size_t i = nodes.size() - 1; i-- > 0;) {
    stack.push_back({nodes[i], nodes[i + 1], vals[i], vals[i + 1], 0});
  }
  while (!stack.empty()) {
    Seg s = stack.back();
    stack.pop_back();
    const double m = std::min(std::abs(s.da), std::abs(s.db));
    if (m < zero_floor) throw NearZero{};
    if (std::abs(s.db - s.da) <= 0.25 * m || s.depth > 48) {
      acc.arg += std::arg(s.db / s.da);
      continue;
    }
    const cplx mid = 0.5 * (s.a + s.b);
    const cplx dm = eval(mid);
    ++acc.evaluations;
    acc.min_abs = std::min(acc.min_abs, std::abs(dm));
    stack.push_back({mid, s.b, dm, s.db, s.depth + 1});
    stack.push_back({s.a, mid, s.da, dm, s.depth + 1});
  }
}

std::vector<cplx> segment_nodes(cplx a, cplx b, double max_spacing) {
  const double len = std::abs(b - a);
  const auto n = std::clamp<std::size_t>(static_cast<std::size_t>(std::ceil(len / max_spacing)), 16, 256);
  std::vector<cplx> out(n + 1);
  for (std::size_t i = 0; i <= n; ++i) out[i] = a + (b - a) * (static_cast<double>(i) / n);
  return out;
}

double box_spacing(const EquilibriumProfile& p, double k) {
  return 0.1 * std::abs(k) * velocity_scale(p);
}

int winding_or_throw(const EquilibriumProfile& profile, double alpha, double k, const SearchBox& b,
                     double zero_floor) {
  const double h = box_spacing(profile, k);
  const cplx c00(b.re_min, b.im_min), c10(b.re_max, b.im_min);
  const cplx c11(b.re_max, b.im_max), c01(b.re_min, b.im_max);
  auto eval = [&](cplx z) { return dispersion(profile, alpha, k, z); };
  PathAccumulator acc;
  for (auto [a, e] : std::array<std::pair<cplx, cplx>, 4>{{{c00, c10}, {c10, c11}, {c11, c01}, {c01, c00}}}) {
    trace_path(eval, segment_nodes(a, e, h), zero_floor, acc);
  }
  return static_cast<int>(std::lround(acc.arg / (2.0 * kPi)));
}

void validate_box(const EquilibriumProfile& profile, double k, const SearchBox& box) {
  if (!(box.re_max > box.re_min && box.im_max > box.im_min)) {
    throw Error(ErrorKind::invalid_argument, "search box must have positive extent");
  }
  const double a = dispersion_abscissa(profile, k);
  if (!(box.re_min > a)) {
    throw Error(ErrorKind::abscissa, "search box reaches Re(lambda) = " + std::to_string(box.re_min) +
                                         " below the abscissa " + std::to_string(a));
  }
}

bool inside(const SearchBox& b, cplx z, double margin) {
  return z.real() >= b.re_min - margin && z.real() <= b.re_max + margin &&
         z.imag() >= b.im_min - margin && z.imag() <= b.im_max + margin;
}

void isolate(const EquilibriumProfile& profile, double alpha, double k, const SearchBox& box, int count,
             int depth, std::vector<DispersionRoot>& out) {
  if (count <= 0) return;
  const double size = std::max(box.re_max - box.re_min, box.im_max - box.im_min);
  if (count == 1) {
    const cplx center(0.5 * (box.re_min + box.re_max), 0.5 * (box.im_min + box.im_max));
    try {
      auto r = newton_root(profile, alpha, k, center);
      if (r.residual < 1e-8 && inside(box, r.lambda, 1e-6 * size)) {
        out.push_back(r);
        return;
      }
    } catch (const Error&) {
      // Newton left the half-plane; fall through to bisection
    }
  }
  if (depth > 40) {
    throw Error(ErrorKind::bisection_failure,
                "could not isolate " + std::to_string(count) + " root(s) in box Re[" +
                    std::to_string(box.re_min) + ", " + std::to_string(box.re_max) + "] Im[" +
                    std::to_string(box.im_min) + ", " + std::to_string(box.im_max) + "]");
  }
  const bool split_re = (box.re_max - box.re_min) >= (box.im_max - box.im_min);
  for (double frac : {0.5, 0.53, 0.47, 0.57, 0.43, 0.61, 0.39}) {
    SearchBox lo = box, hi = box;
    if (split_re) {
      const double cut = box.re_min + frac * (box.re_max - box.re_min);
      lo.re_max = cut;
      hi.re_min = cut;
    } else {
      const double cut = box.im_min + frac * (box.im_max - box.im_min);
      lo.im_max = cut;
      hi.im_min = cut;
    }
    try {
      const int n_lo = winding_or_throw(profile, alpha, k, lo, 1e-10);
      const int n_hi = winding_or_throw(profile, alpha, k, hi, 1e-10);
      if (n_lo + n_hi != count || n_lo < 0 || n_hi < 0) continue;
      isolate(profile, alpha, k, lo, n_lo, depth + 1, out);
      isolate(profile, alpha, k, hi, n_hi, depth + 1, out);
      return;
    } catch (const NearZero&) {
      continue;
    }
  }
  throw Error(ErrorKind::bisection_failure,
              "winding count mismatch while splitting box Re[" + std::to_string(box.re_min) + ", " +
                  std::to_string(box.re_max) + "] Im[" + std::to_string(box.im_min) + ", " +
                  std::to_string(box.im_max) + "]");
}

}  // namespace

int box_winding(const EquilibriumProfile& profile, double alpha, double k, const SearchBox& box) {
  require_nonzero(k);
  validate_box(profile, k, box);
  try {
    return winding_or_throw(profile, alpha, k, box, 1e-12);
  } catch (const NearZero&) {
    throw Error(ErrorKind::bisection_failure, "a root lies on the search box boundary");
  }
}

std::vector<DispersionRoot> find_roots(const EquilibriumProfile& profile, double alpha, double k,
                                       const SearchBox& box) {
  const int count = box_winding(profile, alpha, k, box);
  if (count < 0) {
    throw Error(ErrorKind::bisection_failure, "negative winding number: D has a pole in the box");
  }
  std::vector<DispersionRoot> roots;
  isolate(profile, alpha, k, box, count, 0, roots);
  std::sort(roots.begin(), roots.end(), [](const DispersionRoot& a, const DispersionRoot& b) {
    if (a.lambda.real() != b.lambda.real()) return a.lambda.real() > b.lambda.real();
    return a.lambda.imag() > b.lambda.imag();
  });
  if (static_cast<int>(roots.size()) != count) {
    throw Error(ErrorKind::bisection_failure, "isolated " + std::to_string(roots.size()) +
                                                  " roots but the winding number is " +
                                                  std::to_string(count));
  }
  for (std::size_t i = 1; i < roots.size(); ++i) {
    if (std::abs(roots[i].lambda - roots[i - 1].lambda) < 1e-7) {
      throw Error(ErrorKind::bisection_failure, "duplicate root " + fmt(roots[i].lambda));
    }
  }
  return roots;
}

NyquistResult nyquist(const EquilibriumProfile& profile, double alpha, double k) {
  require_nonzero(k);
  NyquistResult res;
  res.k = k;
  auto eval = [&](cplx z) { return dispersion(profile, alpha, k, z); };
  double xi = 4.0;
  while (std::abs(eval(cplx(0.0, xi)) - 1.0) >= 1e-6 || std::abs(eval(cplx(0.0, -xi)) - 1.0) >= 1e-6) {
    xi *= 2.0;
    if (xi > 1e8) throw Error(ErrorKind::marginal_stability, "Nyquist contour does not close");
  }
  res.xi_max = xi;
  // sinh-spaced nodes resolve |xi| ~ O(1) while reaching xi_max
  const double s = 0.1 * std::max(1.0, std::abs(k) * velocity_scale(profile));
  const double umax = std::asinh(xi / s);
  const int n = 800;
  std::vector<cplx> nodes(n + 1);
  for (int i = 0; i <= n; ++i) {
    const double u = -umax + 2.0 * umax * i / n;
    nodes[static_cast<std::size_t>(i)] = cplx(0.0, s * std::sinh(u));
  }
  nodes.front() = cplx(0.0, -xi);
  nodes.back() = cplx(0.0, xi);
  PathAccumulator acc;
  try {
    trace_path(eval, nodes, 1e-8, acc);
  } catch (const NearZero&) {
    throw Error(ErrorKind::marginal_stability,
                "Nyquist contour passes within 1e-8 of the origin at k = " + std::to_string(k));
  }
  if (acc.min_abs < 1e-8) {
    throw Error(ErrorKind::marginal_stability,
                "Nyquist contour passes within 1e-8 of the origin at k = " + std::to_string(k));
  }
  // close through the right half-plane where D is within 1e-6 of 1
  const double closing = std::arg(eval(cplx(0.0, -xi)) / eval(cplx(0.0, xi)));
  // the imaginary axis is traversed upward, i.e. clockwise around Re > 0
  res.unstable_count = -static_cast<int>(std::lround((acc.arg + closing) / (2.0 * kPi)));
  res.min_abs = acc.min_abs;
  res.evaluations = acc.evaluations + 2;
  return res;
}

PenroseVerdict penrose_verdict(const EquilibriumProfile& profile, double alpha,
                               std::span<const double> ks) {
  if (ks.empty()) throw Error(ErrorKind::invalid_argument, "penrose_verdict needs at least one k");
  for (double k : ks) require_nonzero(k);
  PenroseVerdict v;
  for (double k : ks) {
    v.contours.push_back(nyquist(profile, alpha, k));
    const auto& c = v.contours.back();
    if (c.unstable_count != 0 && v.stable) {
      v.stable = false;
      v.unstable_k = k;
      // growing roots have |D - 1| = 1, so they sit where |D(i xi) - 1| is not small
      double r = 1.0;
      auto far = [&](double x) {
        return std::abs(dispersion(profile, alpha, k, cplx(x, 0.0)) - 1.0) < 0.05 &&
               std::abs(dispersion(profile, alpha, k, cplx(1e-8, x)) - 1.0) < 0.05 &&
               std::abs(dispersion(profile, alpha, k, cplx(1e-8, -x)) - 1.0) < 0.05;
      };
      while (!far(r) && r < c.xi_max) r *= 2.0;
      const SearchBox box{1e-8, r, -r, r};
      auto roots = find_roots(profile, alpha, k, box);
      if (!roots.empty()) v.unstable_root = roots.front();
    }
  }
  return v;
}

double landau_rate_asymptotic(const EquilibriumProfile& profile, double k) {
  require_nonzero(k);
  const double ak = std::abs(k);
  return grad_mu(profile, 1.0 / ak) / (ak * ak);
}

std::vector<cplx> volterra_resolvent(std::span<const cplx> kernel, double dt) {
  const std::size_t n = kernel.size();
  std::vector<cplx> r(n);
  if (n == 0) return r;
  double kmax = 0.0;
  for (const cplx& v : kernel) kmax = std::max(kmax, std::abs(v));
  if (dt * kmax >= 1.0) {
    throw Error(ErrorKind::step_size, "dt * max|K| = " + std::to_string(dt * kmax) +
                                          " >= 1; reduce the time step");
  }
  const cplx diag = 1.0 + 0.5 * dt * kernel[0];
  r[0] = -kernel[0] / diag;
  for (std::size_t m = 1; m < n; ++m) {
    cplx acc = 0.5 * kernel[m] * r[0];
    for (std::size_t j = 1; j < m; ++j) acc += kernel[m - j] * r[j];
    r[m] = (-kernel[m] - dt * acc) / diag;
  }
  return r;
}

double resolvent_residual(std::span<const cplx> kernel, std::span<const cplx> resolvent, double dt) {
  const std::size_t n = std::min(kernel.size(), resolvent.size());
  double worst = 0.0;
  for (std::size_t m = 0; m < n; ++m) {
    cplx conv = 0.0;
    if (m > 0) {
      conv = 0.5 * (kernel[m] * resolvent[0] + kernel[0] * resolvent[m]);
      for (std::size_t j = 1; j < m; ++j) conv += kernel[m - j] * resolvent[j];
    } else {
      conv = 0.5 * kernel[0] * resolvent[0];
    }
    worst = std::max(worst, std::abs(resolvent[m] + kernel[m] + dt * conv));
  }
  return worst;
}

double GreenKernel::envelope(double t) const noexcept {
  return fit_c * std::exp(-fit_rate() * t);
}

std::pair<double, double> fit_envelope(std::span<const double> times, std::span<const cplx> values) {
  const std::size_t n = std::min(times.size(), values.size());
  std::vector<double> mag(n);
  double top = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mag[i] = std::abs(values[i]);
    top = std::max(top, mag[i]);
  }
  if (n < 3 || top == 0.0) return {0.0, 0.0};
  const double floor = 1e-10 * top;
  std::vector<double> pt, pl;
  for (std::size_t i = 1; i + 1 < n; ++i) {
    if (mag[i] > floor && mag[i] >= mag[i - 1] && mag[i] > mag[i + 1]) {
      // parabolic refinement of the peak in log magnitude
      const double a = std::log(std::max(mag[i - 1], 1e-300));
      const double b = std::log(mag[i]);
      const double c = std::log(std::max(mag[i + 1], 1e-300));
      const double den = a - 2.0 * b + c;
      const double off = den < 0.0 ? 0.5 * (a - c) / den : 0.0;
      const double h = times[i + 1] - times[i];
      pt.push_back(times[i] + off * h);
      pl.push_back(b - 0.25 * (a - c) * off);
    }
  }
  std::size_t first = 0;
  if (pt.size() >= 6) first = pt.size() / 3;
  if (pt.size() - first < 3) {
    // too few oscillations: regress log|v| over the decaying tail
    pt.clear();
    pl.clear();
    const std::size_t peak = static_cast<std::size_t>(std::max_element(mag.begin(), mag.end()) - mag.begin());
    for (std::size_t i = peak; i < n; ++i) {
      if (mag[i] > floor) {
        pt.push_back(times[i]);
        pl.push_back(std::log(mag[i]));
      }
    }
    first = 0;
  }
  const std::size_t m = pt.size() - first;
  double rate = 0.0;
  if (m >= 2) {
    double st = 0, sl = 0, stt = 0, stl = 0;
    for (std::size_t i = first; i < pt.size(); ++i) {
      st += pt[i];
      sl += pl[i];
      stt += pt[i] * pt[i];
      stl += pt[i] * pl[i];
    }
    const double dm = static_cast<double>(m);
    const double den = dm * stt - st * st;
    if (den > 0.0) rate = -(dm * stl - st * sl) / den;
  }
  double c = 0.0;
  for (std::size_t i = 0; i < n; ++i) c = std::max(c, mag[i] * std::exp(rate * times[i]));
  return {c, rate};
}

GreenKernel green_kernel(const EquilibriumProfile& profile, double alpha, double k, double dt,
                         std::size_t samples) {
  require_nonzero(k);
  if (!(dt > 0.0) || samples < 2) {
    throw Error(ErrorKind::invalid_argument, "green_kernel needs dt > 0 and at least two samples");
  }
  GreenKernel g;
  g.k = k;
  g.dt = dt;
  g.times.resize(samples);
  std::vector<cplx> kern(samples);
  for (std::size_t n = 0; n < samples; ++n) {
    g.times[n] = static_cast<double>(n) * dt;
    kern[n] = volterra_kernel(profile, alpha, k, g.times[n]);
    g.kernel_max = std::max(g.kernel_max, std::abs(kern[n]));
  }
  g.values = volterra_resolvent(kern, dt);
  g.residual = resolvent_residual(kern, g.values, dt);
  const auto [c, rate] = fit_envelope(g.times, g.values);
  g.fit_c = c;
  g.fit_theta = rate / std::abs(k);
  return g;
}

std::vector<cplx> convolve_green(const GreenKernel& kernel, std::span<const cplx> source,
                                 double source_dt) {
  if (std::abs(source_dt - kernel.dt) > 1e-12 * kernel.dt || source.size() > kernel.values.size()) {
    throw Error(ErrorKind::grid_mismatch, "source and Green kernel time grids differ");
  }
  const auto& r = kernel.values;
  const double dt = kernel.dt;
  std::vector<cplx> out(source.size());
  for (std::size_t m = 0; m < source.size(); ++m) {
    cplx acc = 0.0;
    if (m > 0) {
      acc = 0.5 * (r[m] * source[0] + r[0] * source[m]);
      for (std::size_t j = 1; j < m; ++j) acc += r[m - j] * source[j];
    }
    out[m] = source[m] + dt * acc;
  }
  return out;
}

}  // namespace landau
