#pragma once

// The dissipative semigroup S(t) = exp(-t(-Lap)^alpha) on grid fields, the
// L^r -> L^p smoothing fits, and space-time norms of norm series.

#include "fracdiss/error.hpp"
#include "fracdiss/fit.hpp"
#include "fracdiss/spectral.hpp"

#include <gsl/gsl_sf_zeta.h>

#include <cmath>
#include <limits>
#include <string>
#include <vector>

namespace fracdiss {

inline SpectralField apply_semigroup(const SpectralField& f, double t, double alpha) {
  require(alpha > 0.0, "alpha must be positive");
  require(t >= 0.0, "semigroup time must be nonnegative");
  if (t == 0.0) return f;
  return apply_multiplier(f, multipliers::semigroup(t, alpha));
}

/// |xi|^{2 alpha} on the stored lattice; the semigroup symbol is exp(-t * table).
inline std::vector<double> dissipation_table(const Grid& g, double alpha) {
  std::vector<double> lam(g.spectral_size());
  detail::for_each_mode(g, [&](std::size_t i, const Wavevector& xi, int, std::size_t) {
    lam[i] = std::pow(xi.norm(), 2.0 * alpha);
  });
  return lam;
}

/// 1D samples of |x|^{-gamma} (0 < gamma < 1). The origin carries the value
/// -2 zeta(gamma) dx^{-gamma}, which makes the grid sum of |x|^{-gamma} g(x)
/// match the integral to high order for smooth g.
inline SpectralField homogeneous_profile(const Grid& g, double gamma) {
  if (g.dim != 1) fail(ErrorKind::unsupported, "homogeneous_profile is one-dimensional");
  require(gamma > 0.0 && gamma < 1.0, "profile exponent must lie in (0, 1)");
  const double dx = g.spacing();
  return SpectralField::sample(g, [&](double x) {
    if (std::abs(x) < 0.5 * dx) return -2.0 * gsl_sf_zeta(gamma) * std::pow(dx, -gamma);
    return std::pow(std::abs(x), -gamma);
  });
}

struct SmoothingReport {
  double r = 1.0;
  double p = 2.0;
  double nu = 0.0;
  double alpha = 1.0;
  int n = 1;
  double fitted_slope = 0.0;
  double predicted_slope = 0.0;
  double residual_r2 = 0.0;
  double t_min = 0.0;
  double t_max = 0.0;
  double t_threshold = 0.0;  // 0.1 (L/5)^{2 alpha}
  bool within_threshold = true;
  bool degenerate = false;   // all norms equal (r = p, nu = 0 style data)
  std::vector<double> times;
  std::vector<double> norms;

  [[nodiscard]] double relative_error() const {
    return predicted_slope == 0.0 ? std::abs(fitted_slope)
                                  : std::abs(fitted_slope - predicted_slope) / std::abs(predicted_slope);
  }
};

inline double predicted_smoothing_slope(int n, double alpha, double r, double p, double nu = 0.0) {
  const double inv_p = std::isinf(p) ? 0.0 : 1.0 / p;
  return -nu / (2 * alpha) - n / (2 * alpha) * (1.0 / r - inv_p);
}

/// Fits log ||(-Lap)^{nu/2} S(t) phi||_p against log t over t_grid.
inline SmoothingReport derivative_smoothing_fit(const SpectralField& phi, double nu, double r, double p, double alpha,
                                                const std::vector<double>& t_grid) {
  require(alpha > 0.0, "alpha must be positive");
  require(nu >= 0.0, "derivative order must be nonnegative");
  require(r >= 1.0 && p >= r, "need 1 <= r <= p");
  require(t_grid.size() >= 2, "time grid needs at least two points");
  const auto [tmin, tmax] = std::minmax_element(t_grid.begin(), t_grid.end());
  require(*tmin > 0.0 && *tmax >= 10.0 * *tmin * (1 - 1e-12), "time grid must span at least one decade");
  require(phi.is_finite(), "initial field must be finite");

  SmoothingReport rep;
  rep.r = r;
  rep.p = p;
  rep.nu = nu;
  rep.alpha = alpha;
  rep.n = phi.grid().dim;
  rep.predicted_slope = predicted_smoothing_slope(rep.n, alpha, r, p, nu);
  rep.t_min = *tmin;
  rep.t_max = *tmax;
  rep.t_threshold = 0.1 * std::pow(phi.grid().L / 5.0, 2 * alpha);
  rep.within_threshold = rep.t_max <= rep.t_threshold * (1 + 1e-12);

  const Spectrum base = [&] {
    if (nu == 0.0) return Spectrum(phi.coeffs().begin(), phi.coeffs().end());
    const auto tab = symbol_table(phi.grid(), multipliers::power(nu));
    Spectrum c(phi.coeffs().begin(), phi.coeffs().end());
    for (std::size_t i = 0; i < c.size(); ++i) c[i] *= tab[i];
    return c;
  }();
  const auto lam = dissipation_table(phi.grid(), alpha);
  Spectrum work(base.size());
  for (double t : t_grid) {
    for (std::size_t i = 0; i < work.size(); ++i) work[i] = base[i] * std::exp(-t * lam[i]);
    const auto vals = inverse_transform(phi.grid(), work);
    rep.times.push_back(t);
    rep.norms.push_back(lebesgue_norm(vals, phi.grid().cell_measure(), p));
  }
  const double first = rep.norms.front();
  rep.degenerate = std::all_of(rep.norms.begin(), rep.norms.end(),
                               [&](double v) { return std::abs(v - first) <= 1e-14 * std::abs(first); });
  if (rep.degenerate) {
    rep.fitted_slope = 0.0;
    rep.residual_r2 = 1.0;
    return rep;
  }
  const auto fit = fit_loglog(rep.times, rep.norms);
  rep.fitted_slope = fit.slope;
  rep.residual_r2 = fit.r2;
  return rep;
}

inline SmoothingReport smoothing_exponent_fit(const SpectralField& phi, double r, double p, double alpha,
                                              const std::vector<double>& t_grid) {
  return derivative_smoothing_fit(phi, 0.0, r, p, alpha, t_grid);
}

/// Time-stamped norm records ||u(t)||_p.
struct NormSeries {
  double p = 2.0;
  std::vector<double> times;
  std::vector<double> values;

  void push(double t, double v) {
    require(times.empty() || t > times.back(), "norm series times must increase");
    times.push_back(t);
    values.push_back(v);
  }
  [[nodiscard]] std::size_t size() const noexcept { return times.size(); }
  /// t^{1/q} ||u(t)||_p at each record.
  [[nodiscard]] std::vector<double> weighted(double q) const {
    std::vector<double> w(values.size());
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = (std::isinf(q) ? 1.0 : std::pow(times[i], 1.0 / q)) * values[i];
    return w;
  }
};

enum class SpacetimeMode { integral, weighted_sup };

/// integral: (int ||u||_p^q dt)^{1/q} by the trapezoid rule over the series
/// (sup when q = inf); weighted_sup: sup_t t^{1/q} ||u(t)||_p.
inline double spacetime_norm(const NormSeries& s, double q, SpacetimeMode mode) {
  require(q >= 1.0, "time exponent q must be >= 1");
  require(s.size() >= 1, "norm series is empty");
  if (mode == SpacetimeMode::weighted_sup) {
    double m = 0.0;
    for (double v : s.weighted(q)) m = std::max(m, std::abs(v));
    return m;
  }
  if (std::isinf(q)) {
    double m = 0.0;
    for (double v : s.values) m = std::max(m, std::abs(v));
    return m;
  }
  require(s.size() >= 2, "integral mode needs at least two records");
  // Normalize by the peak so large q does not overflow.
  double peak = 0.0;
  for (double v : s.values) peak = std::max(peak, std::abs(v));
  if (peak == 0.0) return 0.0;
  double acc = 0.0;
  for (std::size_t i = 1; i < s.size(); ++i) {
    const double a = std::pow(std::abs(s.values[i - 1]) / peak, q);
    const double b = std::pow(std::abs(s.values[i]) / peak, q);
    acc += 0.5 * (a + b) * (s.times[i] - s.times[i - 1]);
  }
  return peak * std::pow(acc, 1.0 / q);
}

/// ||S(t) phi||_p sampled at the given times.
inline NormSeries semigroup_norm_series(const SpectralField& phi, double alpha, double p,
                                        const std::vector<double>& times) {
  NormSeries s;
  s.p = p;
  const auto lam = dissipation_table(phi.grid(), alpha);
  Spectrum work(phi.coeffs().size());
  for (double t : times) {
    for (std::size_t i = 0; i < work.size(); ++i) work[i] = phi.coeffs()[i] * std::exp(-t * lam[i]);
    s.push(t, lebesgue_norm(inverse_transform(phi.grid(), work), phi.grid().cell_measure(), p));
  }
  return s;
}

} // namespace fracdiss
