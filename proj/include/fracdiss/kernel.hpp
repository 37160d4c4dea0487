#pragma once

// Continuum evaluation of the semigroup kernel
//   K_t(x) = (2 pi)^{-n/2} int e^{i x.xi} e^{-t|xi|^{2 alpha}} d xi,
// its fractional derivatives K^nu = (-Lap)^{nu/2} K and its radial gradient,
// by radial reduction: a cosine transform in 1D and a Hankel (J0) transform
// in 2D, integrated panel by panel between zeros of the oscillatory factor.

#include "fracdiss/error.hpp"
#include "fracdiss/fit.hpp"

#include <gsl/gsl_errno.h>
#include <gsl/gsl_integration.h>
#include <gsl/gsl_sf_bessel.h>

#include <cmath>
#include <limits>
#include <memory>
#include <numbers>
#include <string>
#include <vector>

namespace fracdiss {

struct KernelQuery {
  double alpha = 1.0;
  int n = 1;
  double nu = 0.0;        // 0 gives K itself
  double x = 0.0;         // radius |x|
  double t = 1.0;
  bool gradient = false;  // radial derivative d/dr of K_t (nu must be 0)
};

struct KernelValue {
  double value = 0.0;
  double abs_err = 0.0;
};

namespace detail {

struct GslWorkspace {
  static constexpr std::size_t limit = 4000;
  GslWorkspace() : w(gsl_integration_workspace_alloc(limit)) {
    static const bool handler_off = [] {
      gsl_set_error_handler_off();
      return true;
    }();
    (void)handler_off;
  }
  ~GslWorkspace() { gsl_integration_workspace_free(w); }
  GslWorkspace(const GslWorkspace&) = delete;
  GslWorkspace& operator=(const GslWorkspace&) = delete;
  gsl_integration_workspace* w;
};

// One workspace per nesting depth: integrands may themselves integrate.
inline gsl_integration_workspace* workspace(std::size_t depth) {
  thread_local std::vector<std::unique_ptr<GslWorkspace>> pool;
  while (pool.size() <= depth) pool.push_back(std::make_unique<GslWorkspace>());
  return pool[depth]->w;
}

inline std::size_t& integration_depth() {
  thread_local std::size_t depth = 0;
  return depth;
}

template <class F>
double gsl_thunk(double x, void* p) {
  return (*static_cast<F*>(p))(x);
}

/// Adaptive integral of f over [a, b]. `singular` selects the extrapolating
/// integrator for endpoint singularities.
template <class F>
KernelValue integrate(F& f, double a, double b, bool singular, double epsabs, double epsrel) {
  gsl_function fn{&gsl_thunk<F>, &f};
  KernelValue r;
  int status = 0;
  auto& depth = integration_depth();
  gsl_integration_workspace* w = workspace(depth);
  ++depth;
  struct Restore {
    std::size_t& d;
    ~Restore() { --d; }
  } restore{depth};
  if (singular)
    status = gsl_integration_qags(&fn, a, b, epsabs, epsrel, GslWorkspace::limit, w, &r.value, &r.abs_err);
  else
    status = gsl_integration_qag(&fn, a, b, epsabs, epsrel, GslWorkspace::limit, GSL_INTEG_GAUSS21, w, &r.value,
                                 &r.abs_err);
  // Roundoff-limited exits are acceptable when the estimate is still small.
  if (status != GSL_SUCCESS && !(r.abs_err <= 1e3 * epsabs + 1e-9 * std::abs(r.value)))
    fail(ErrorKind::numerical, std::string("quadrature did not converge (") + gsl_strerror(status) +
                                   "), achieved error estimate " + std::to_string(r.abs_err));
  return r;
}

/// Radius beyond which rho^m e^{-t rho^{2a}} < 1e-20 relative to its scale.
inline double frequency_cutoff(double alpha, double t, double m) {
  double rho = std::pow(50.0 / t, 1.0 / (2 * alpha));
  for (int i = 0; i < 8; ++i) rho = std::pow((50.0 + std::max(0.0, m) * std::log(std::max(rho, 1.0))) / t, 1.0 / (2 * alpha));
  return rho;
}

/// k-th positive zero (k >= 1) of the oscillatory factor in rho for radius x.
inline double oscillation_zero(int n, bool gradient, int k, double x) {
  if (n == 1) {
    const double phase = gradient ? k * std::numbers::pi : (k - 0.5) * std::numbers::pi;
    return phase / x;
  }
  return (gradient ? gsl_sf_bessel_zero_J1(k) : gsl_sf_bessel_zero_J0(k)) / x;
}

} // namespace detail

inline void validate(const KernelQuery& q) {
  require(q.alpha > 0.0 && std::isfinite(q.alpha), "alpha must be positive");
  if (q.n != 1 && q.n != 2) fail(ErrorKind::unsupported, "kernel supports n = 1 or 2 only");
  require(q.nu >= 0.0 && q.nu <= 4.0, "derivative order nu must lie in [0, 4]");
  require(q.x >= 0.0 && std::isfinite(q.x), "radius must be finite and nonnegative");
  require(q.t > 0.0 && std::isfinite(q.t), "time must be positive");
  require(!(q.gradient && q.nu != 0.0), "gradient mode takes nu = 0");
}

/// General evaluation: K^nu_t(x), or d/dr K_t(x) in gradient mode.
inline KernelValue kernel_eval(const KernelQuery& q) {
  validate(q);
  const double a2 = 2.0 * q.alpha;
  const double x = q.x;
  // Radial weight: 1D uses sqrt(2/pi) * cos; 2D uses J0 * rho. Gradient adds a
  // factor -rho and switches cos -> sin, J0 -> J1.
  const double power = q.nu + (q.n == 2 ? 1.0 : 0.0) + (q.gradient ? 1.0 : 0.0);
  const double pref = (q.n == 1 ? std::sqrt(2.0 / std::numbers::pi) : 1.0) * (q.gradient ? -1.0 : 1.0);
  auto envelope = [&](double rho) {
    return rho == 0.0 ? (power == 0.0 ? 1.0 : 0.0) : std::pow(rho, power) * std::exp(-q.t * std::pow(rho, a2));
  };
  auto integrand = [&](double rho) {
    double osc;
    if (q.n == 1)
      osc = q.gradient ? std::sin(x * rho) : std::cos(x * rho);
    else
      osc = q.gradient ? gsl_sf_bessel_J1(x * rho) : gsl_sf_bessel_J0(x * rho);
    return envelope(rho) * osc;
  };

  const double rho_max = detail::frequency_cutoff(q.alpha, q.t, power);
  constexpr double epsabs = 1e-16;
  constexpr double epsrel = 1e-12;
  KernelValue total;
  double lo = 0.0;
  double hi = x > 0.0 ? detail::oscillation_zero(q.n, q.gradient, 1, x) : rho_max;
  bool first = true;
  for (int k = 1; lo < rho_max; ++k) {
    hi = std::min(hi, rho_max);
    const auto part = detail::integrate(integrand, lo, hi, first, epsabs, epsrel);
    total.value += part.value;
    total.abs_err += part.abs_err;
    first = false;
    lo = hi;
    if (x > 0.0) hi = detail::oscillation_zero(q.n, q.gradient, k + 1, x);
  }
  total.value *= pref;
  total.abs_err *= std::abs(pref);
  return total;
}

inline double kernel_value(KernelQuery q) {
  require(q.nu == 0.0 && !q.gradient, "kernel_value evaluates K itself (nu = 0)");
  return kernel_eval(q).value;
}

inline double kernel_derivative_value(KernelQuery q) {
  require(q.nu > 0.0 || q.gradient, "kernel_derivative_value needs nu > 0 or gradient mode");
  return kernel_eval(q).value;
}

struct DecayReport {
  double envelope_exponent = 0.0;
  double sup_envelope = 0.0;
  std::vector<double> radii;
  std::vector<double> values;
  std::vector<double> envelope;
  double fitted_slope = std::numeric_limits<double>::quiet_NaN();
  double predicted_slope = 0.0;
  bool slope_skipped = false;  // smooth symbol: decay is faster than any power
  double r2 = 0.0;
};

/// Envelope |K^nu(x)|(1+|x|)^{m} over the radii, m = n+2a (nu = 0), n+nu
/// (nu > 0) or n+1 (gradient), and the log-log slope on the largest decade.
inline DecayReport kernel_decay_check(double alpha, int n, double nu, const std::vector<double>& radii,
                                      bool gradient = false) {
  require(radii.size() >= 2, "decay check needs radii");
  double rmin = radii.front(), rmax = radii.front();
  for (double r : radii) {
    require(r >= 1.0 && r <= 200.0, "decay radii must lie in [1, 200]");
    rmin = std::min(rmin, r);
    rmax = std::max(rmax, r);
  }
  DecayReport rep;
  rep.envelope_exponent = gradient ? n + 1.0 : (nu == 0.0 ? n + 2.0 * alpha : n + nu);
  rep.predicted_slope = -rep.envelope_exponent;
  rep.radii = radii;
  for (double r : radii) {
    const double v = kernel_eval(KernelQuery{alpha, n, nu, r, 1.0, gradient}).value;
    rep.values.push_back(v);
    const double e = std::abs(v) * std::pow(1.0 + r, rep.envelope_exponent);
    rep.envelope.push_back(e);
    rep.sup_envelope = std::max(rep.sup_envelope, e);
  }
  // The symbol rho^nu e^{-rho^{2a}} is smooth when 2a and nu are even integers.
  auto even_int = [](double v) { return std::abs(v / 2 - std::round(v / 2)) < 1e-12; };
  if (!gradient && even_int(2 * alpha) && even_int(nu)) {
    rep.slope_skipped = true;
    return rep;
  }
  require(rmax >= 10.0 * rmin * (1 - 1e-12), "decay radii must span at least one decade for a slope fit");
  std::vector<double> fx, fy;
  for (std::size_t i = 0; i < radii.size(); ++i)
    if (radii[i] >= rmax / 10.0 * (1 - 1e-12)) {
      fx.push_back(radii[i]);
      fy.push_back(rep.values[i]);
    }
  const auto fit = fit_loglog(fx, fy);
  rep.fitted_slope = fit.slope;
  rep.r2 = fit.r2;
  return rep;
}

/// |K_t(x) - t^{-n/2a} K(x t^{-1/2a})| from two independent quadratures.
inline double kernel_scaling_check(double alpha, int n, double t, double x, double nu = 0.0) {
  require(t > 0.0, "time must be positive");
  const double direct = kernel_eval(KernelQuery{alpha, n, nu, x, t}).value;
  const double s = std::pow(t, -1.0 / (2 * alpha));
  const double scaled = std::pow(t, -(n + nu) / (2 * alpha)) * kernel_eval(KernelQuery{alpha, n, nu, x * s, 1.0}).value;
  return std::abs(direct - scaled);
}

/// ||K^nu||_{L^p(R^n)} by composite Gauss-Legendre quadrature on dyadic
/// radial panels over [0, R], each split into 2^level pieces, plus a
/// power-law tail beyond R.
inline double kernel_lp_norm(double alpha, int n, double nu, double p, int level = 2, double R = 256.0) {
  require(p >= 1.0, "Lebesgue exponent must be >= 1");
  require(level >= 0 && level <= 8, "refinement level must lie in [0, 8]");
  auto K = [&](double r) { return kernel_eval(KernelQuery{alpha, n, nu, r, 1.0}).value; };
  if (std::isinf(p)) {
    double m = std::abs(K(0.0));
    for (double r : logspace(1e-3, R, 400)) m = std::max(m, std::abs(K(r)));
    return m;
  }
  const double surface = n == 1 ? 2.0 : 2.0 * std::numbers::pi;
  auto integrand = [&](double r) { return surface * std::pow(r, n - 1) * std::pow(std::abs(K(r)), p); };
  std::unique_ptr<gsl_integration_glfixed_table, decltype(&gsl_integration_glfixed_table_free)> table(
      gsl_integration_glfixed_table_alloc(20), &gsl_integration_glfixed_table_free);
  const int pieces = 1 << level;
  double total = 0.0;
  double lo = 0.0;
  for (double hi = 0.25; lo < R; hi *= 2.0) {
    hi = std::min(hi, R);
    const double h = (hi - lo) / pieces;
    for (int k = 0; k < pieces; ++k) {
      const double a = lo + k * h;
      for (std::size_t i = 0; i < 20; ++i) {
        double xi = 0.0, wi = 0.0;
        gsl_integration_glfixed_point(a, a + h, i, &xi, &wi, table.get());
        total += wi * integrand(xi);
      }
    }
    lo = hi;
  }
  // Tail: |K| ~ A r^{-beta} from the last two radii, skipped once the kernel
  // is at the quadrature noise level (faster than any power).
  const auto k1 = kernel_eval(KernelQuery{alpha, n, nu, R / 2, 1.0});
  const auto k2 = kernel_eval(KernelQuery{alpha, n, nu, R, 1.0});
  const double noise = 1e-14 * std::abs(K(0.0)) + 10.0 * (k1.abs_err + k2.abs_err);
  if (std::abs(k2.value) > noise && std::abs(k1.value) > noise) {
    const double beta = std::log(std::abs(k1.value / k2.value)) / std::log(2.0);
    const double decay = p * beta - n;  // integrand ~ r^{-decay-1}
    if (decay <= 0.0) fail(ErrorKind::numerical, "kernel tail does not decay fast enough for L^p");
    total += surface * std::pow(std::abs(k2.value), p) * std::pow(R, n) / decay;
  }
  return std::pow(total, 1.0 / p);
}

} // namespace fracdiss
