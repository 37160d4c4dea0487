#pragma once

// Littlewood-Paley blocks, homogeneous Besov norms and their semigroup
// characterization for negative regularity.
//
// Both norms act on the mean-free part of a field: on the periodic box the
// xi = 0 mode is invariant under the semigroup and would dominate the
// large-t weights.

#include "fracdiss/error.hpp"
#include "fracdiss/fit.hpp"
#include "fracdiss/semigroup.hpp"
#include "fracdiss/spectral.hpp"

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace fracdiss {

enum class TransitionProfile {
  exp_glue,     // e^{-1/x} glue
  exp_sq_glue,  // e^{-1/x^2} glue
};

/// Radial bump: 1 on |xi| <= 1, 0 on |xi| >= 2, smooth and monotone between.
inline double psi_hat(double r, TransitionProfile profile = TransitionProfile::exp_glue) {
  if (r <= 1.0) return 1.0;
  if (r >= 2.0) return 0.0;
  auto f = [&](double x) {
    if (x <= 0.0) return 0.0;
    return profile == TransitionProfile::exp_glue ? std::exp(-1.0 / x) : std::exp(-1.0 / (x * x));
  };
  const double a = f(2.0 - r);
  const double b = f(r - 1.0);
  return a / (a + b);
}

/// phi_hat(xi) = psi_hat(xi) - psi_hat(2 xi), supported in 1/2 <= |xi| <= 2.
inline double phi_hat(double r, TransitionProfile profile = TransitionProfile::exp_glue) {
  return psi_hat(r, profile) - psi_hat(2.0 * r, profile);
}

struct LPFamily {
  Grid grid;
  int j_min = 0;
  int j_max = 0;
  TransitionProfile profile = TransitionProfile::exp_glue;
  std::vector<std::vector<double>> bands;  // symbol tables, index j - j_min

  [[nodiscard]] int count() const noexcept { return j_max - j_min + 1; }
  [[nodiscard]] const std::vector<double>& band(int j) const {
    require(j >= j_min && j <= j_max, "band index " + std::to_string(j) + " outside family range");
    return bands[static_cast<std::size_t>(j - j_min)];
  }
  /// phi_hat_j at an arbitrary frequency radius.
  [[nodiscard]] double symbol(int j, double r) const { return phi_hat(std::ldexp(r, -j), profile); }
};

inline LPFamily build_lp_family(const Grid& g, int j_min, int j_max,
                                TransitionProfile profile = TransitionProfile::exp_glue) {
  require(j_max - j_min >= 4, "Littlewood-Paley range must contain at least five bands");
  if (std::ldexp(1.0, j_max + 1) > g.nyquist() * (1 + 1e-12))
    fail(ErrorKind::invalid_argument, "band overflow: 2^(j_max+1) = " + std::to_string(std::ldexp(1.0, j_max + 1)) +
                                          " exceeds the grid's largest frequency " + std::to_string(g.nyquist()));
  LPFamily fam;
  fam.grid = g;
  fam.j_min = j_min;
  fam.j_max = j_max;
  fam.profile = profile;
  for (int j = j_min; j <= j_max; ++j) {
    std::vector<double> tab(g.spectral_size());
    detail::for_each_mode(g, [&](std::size_t i, const Wavevector& xi, int, std::size_t) {
      tab[i] = fam.symbol(j, xi.norm());
    });
    fam.bands.push_back(std::move(tab));
  }
  return fam;
}

/// Band range reaching from the lowest nonzero lattice frequency to the top
/// band that still fits below the Nyquist frequency.
inline LPFamily default_lp_family(const Grid& g, TransitionProfile profile = TransitionProfile::exp_glue) {
  const int j_min = static_cast<int>(std::floor(std::log2(g.wavenumber_unit())));
  const int j_max = static_cast<int>(std::floor(std::log2(g.nyquist()))) - 1;
  return build_lp_family(g, j_min, j_max, profile);
}

inline SpectralField dyadic_block(const SpectralField& f, int j, const LPFamily& fam) {
  require(f.grid() == fam.grid, "field and family live on different grids");
  const auto& tab = fam.band(j);
  Spectrum c(f.coeffs().begin(), f.coeffs().end());
  for (std::size_t i = 0; i < c.size(); ++i) c[i] *= tab[i];
  return SpectralField::from_coeffs(f.grid(), std::move(c));
}

struct BesovParams {
  double s = -0.5;
  double p = 4.0;
  double q = std::numeric_limits<double>::infinity();
  double alpha = 1.0;
};

inline void validate(const BesovParams& bp) {
  require(bp.p >= 1.0 && bp.q >= 1.0, "Besov exponents p, q must be >= 1");
  require(std::isfinite(bp.s), "Besov regularity must be finite");
}

/// Fraction of the mean-free energy carried by 2^{j_min} <= |xi| <= 2^{j_max}.
inline double band_coverage(const SpectralField& f, const LPFamily& fam) {
  double total = 0.0, covered = 0.0;
  const double lo = std::ldexp(1.0, fam.j_min), hi = std::ldexp(1.0, fam.j_max);
  detail::for_each_mode(f.grid(), [&](std::size_t i, const Wavevector& xi, int mult, std::size_t) {
    if (xi.is_zero()) return;
    const double e = mult * std::norm(f.coeffs()[i]);
    total += e;
    const double r = xi.norm();
    if (r >= lo * (1 - 1e-12) && r <= hi * (1 + 1e-12)) covered += e;
  });
  return total == 0.0 ? 1.0 : covered / total;
}

/// Dyadic band norms 2^{js} ||Delta_j f||_p, index j - j_min.
inline std::vector<double> band_norms(const SpectralField& f, const BesovParams& bp, const LPFamily& fam) {
  std::vector<double> out;
  for (int j = fam.j_min; j <= fam.j_max; ++j)
    out.push_back(std::pow(2.0, j * bp.s) * lebesgue_norm(dyadic_block(f, j, fam), bp.p));
  return out;
}

inline double besov_norm_dyadic(const SpectralField& f, const BesovParams& bp, const LPFamily& fam) {
  validate(bp);
  const double cov = band_coverage(f, fam);
  if (cov < 1.0 - 1e-8)
    fail(ErrorKind::invalid_argument,
         "insufficient band coverage: family carries " + std::to_string(cov) + " of the field energy");
  const auto b = band_norms(f, bp, fam);
  if (std::isinf(bp.q)) return *std::max_element(b.begin(), b.end());
  double acc = 0.0;
  for (double v : b) acc += std::pow(v, bp.q);
  return std::pow(acc, 1.0 / bp.q);
}

/// Log-spaced times [2^{-2a(j_max+2)}, 2^{-2a(j_min-2)}], 16 per decade.
inline std::vector<double> semigroup_time_grid(const LPFamily& fam, double alpha, int per_decade = 16) {
  return log_grid(std::pow(2.0, -2 * alpha * (fam.j_max + 2)), std::pow(2.0, -2 * alpha * (fam.j_min - 2)),
                  per_decade);
}

/// t^{-s/2a} ||S(t) f||_p along the time grid (mean-free part of f).
inline std::vector<double> semigroup_weighted_norms(const SpectralField& f, const BesovParams& bp,
                                                    const std::vector<double>& t_grid) {
  const auto lam = dissipation_table(f.grid(), bp.alpha);
  Spectrum work(f.coeffs().size());
  std::vector<double> out;
  for (double t : t_grid) {
    for (std::size_t i = 0; i < work.size(); ++i) work[i] = f.coeffs()[i] * std::exp(-t * lam[i]);
    work[0] = 0.0;  // drop the mean
    const double v = lebesgue_norm(inverse_transform(f.grid(), work), f.grid().cell_measure(), bp.p);
    out.push_back(std::pow(t, -bp.s / (2 * bp.alpha)) * v);
  }
  return out;
}

inline double besov_norm_semigroup(const SpectralField& f, const BesovParams& bp, const std::vector<double>& t_grid) {
  validate(bp);
  require(bp.s < 0.0, "semigroup characterization holds for s < 0 only");
  require(bp.alpha > 0.0, "alpha must be positive");
  require(t_grid.size() >= 2, "time grid too short");
  const auto [tmin, tmax] = std::minmax_element(t_grid.begin(), t_grid.end());
  require(*tmin > 0.0 && *tmax >= 1e3 * *tmin * (1 - 1e-12), "semigroup time grid must span at least three decades");
  const auto w = semigroup_weighted_norms(f, bp, t_grid);
  if (std::isinf(bp.q)) return *std::max_element(w.begin(), w.end());
  // (int w^q dt/t)^{1/q}, trapezoid in log t.
  double peak = *std::max_element(w.begin(), w.end());
  if (peak == 0.0) return 0.0;
  double acc = 0.0;
  for (std::size_t i = 1; i < w.size(); ++i) {
    const double a = std::pow(w[i - 1] / peak, bp.q), b = std::pow(w[i] / peak, bp.q);
    acc += 0.5 * (a + b) * std::log(t_grid[i] / t_grid[i - 1]);
  }
  return peak * std::pow(acc, 1.0 / bp.q);
}

inline double equivalence_ratio(const SpectralField& f, const BesovParams& bp, const LPFamily& fam,
                                const std::vector<double>& t_grid) {
  const double den = besov_norm_semigroup(f, bp, t_grid);
  if (den == 0.0) fail(ErrorKind::numerical, "equivalence ratio undefined: semigroup norm is zero");
  return besov_norm_dyadic(f, bp, fam) / den;
}

/// Random field with Gaussian coefficients on lo <= |xi| <= hi.
inline SpectralField random_band_limited(const Grid& g, double lo, double hi, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  Spectrum c(g.spectral_size());
  detail::for_each_mode(g, [&](std::size_t i, const Wavevector& xi, int, std::size_t mirror) {
    const double r = xi.norm();
    if (r < lo || r > hi) return;
    c[i] = mirror == detail::npos ? cplx{nd(rng), nd(rng)} : cplx{nd(rng), 0.0};
  });
  // Self-conjugate entries must pair with their mirror.
  detail::for_each_mode(g, [&](std::size_t i, const Wavevector&, int, std::size_t mirror) {
    if (mirror != detail::npos && mirror > i) c[mirror] = std::conj(c[i]);
  });
  return SpectralField::from_coeffs(g, std::move(c));
}

/// Ten 1D test fields: three Gaussians, three modulated Gaussians, two
/// single-band cosines and two random band-limited fields. The cosines need
/// 2 and 8 on the lattice (L a multiple of pi/2).
inline std::vector<SpectralField> besov_corpus(const Grid& g, std::uint64_t seed) {
  require(g.dim == 1, "the Besov corpus is one-dimensional");
  std::vector<SpectralField> c;
  c.push_back(SpectralField::sample(g, [](double x) { return std::exp(-x * x / 4); }));
  c.push_back(SpectralField::sample(g, [](double x) { return std::exp(-x * x); }));
  c.push_back(SpectralField::sample(g, [](double x) { return std::exp(-4 * x * x); }));
  c.push_back(SpectralField::sample(g, [](double x) { return std::exp(-x * x / 4) * std::cos(3 * x); }));
  c.push_back(SpectralField::sample(g, [](double x) { return std::exp(-x * x) * std::cos(8 * x); }));
  c.push_back(SpectralField::sample(g, [](double x) { return std::exp(-x * x / 16) * std::sin(2 * x); }));
  c.push_back(SpectralField::sample(g, [](double x) { return std::cos(2 * x); }));
  c.push_back(SpectralField::sample(g, [](double x) { return std::cos(8 * x); }));
  c.push_back(random_band_limited(g, 0.5, 4.0, seed));
  c.push_back(random_band_limited(g, 2.0, 16.0, seed + 1));
  return c;
}

} // namespace fracdiss
