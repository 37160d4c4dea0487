#pragma once

// Mild solutions of u_t + kappa (-Lap)^alpha u = F(u): the Duhamel operator,
// Picard iteration on a graded mesh, exponential time differencing, blow-up
// detection and scaling checks.

#include "fracdiss/besov.hpp"
#include "fracdiss/error.hpp"
#include "fracdiss/fit.hpp"
#include "fracdiss/nonlinearity.hpp"
#include "fracdiss/semigroup.hpp"
#include "fracdiss/spectral.hpp"

#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace fracdiss {

struct ProblemSpec {
  Grid grid;
  double alpha = 1.0;
  double kappa = 1.0;
  std::vector<NonlinearTerm> terms;
};

inline void validate(const ProblemSpec& ps) {
  if (ps.grid.dim != 1 && ps.grid.dim != 2) fail(ErrorKind::unsupported, "only n = 1 and n = 2 are supported");
  require(ps.grid.N >= 4 && ps.grid.N % 2 == 0, "grid size must be even and >= 4");
  require(ps.grid.L > 0.0, "box half-width must be positive");
  require(ps.alpha > 0.0 && std::isfinite(ps.alpha), "alpha must be positive");
  require(ps.kappa >= 0.0 && std::isfinite(ps.kappa), "kappa must be nonnegative");
  for (const auto& t : ps.terms) validate(t, ps.alpha, ps.grid.dim);
}

/// kappa |xi|^{2 alpha} on the stored lattice.
inline std::vector<double> linear_rates(const ProblemSpec& ps) {
  auto lam = dissipation_table(ps.grid, ps.alpha);
  for (double& v : lam) v *= ps.kappa;
  return lam;
}

namespace detail {

/// (1 - e^{-z})/z
inline double phi1(double z) {
  if (std::abs(z) < 1e-3) return 1.0 - z / 2 + z * z / 6 - z * z * z / 24 + z * z * z * z / 120;
  return -std::expm1(-z) / z;
}

/// (z - 1 + e^{-z})/z^2
inline double phi2(double z) {
  if (std::abs(z) < 1e-3) return 0.5 - z / 6 + z * z / 24 - z * z * z / 120 + z * z * z * z / 720;
  return (z + std::expm1(-z)) / (z * z);
}

/// Weights of the exact integral of e^{-lam(h-s)} times the linear
/// interpolant between F0 (s = 0) and F1 (s = h).
struct ProductWeights {
  double decay, w0, w1;
};

inline ProductWeights product_weights(double lam, double h) {
  const double z = lam * h;
  const double p1 = phi1(z), p2 = phi2(z);
  return {std::exp(-z), h * (p1 - p2), h * p2};
}

} // namespace detail

/// tau_j = T (j/M)^gamma, j = 0..M.
inline std::vector<double> graded_mesh(double T, int M, double gamma) {
  require(T > 0.0 && std::isfinite(T), "horizon T must be positive");
  require(M >= 1, "mesh needs at least one interval");
  require(gamma >= 1.0, "grading exponent must be >= 1");
  std::vector<double> t(static_cast<std::size_t>(M) + 1);
  for (int j = 0; j <= M; ++j) t[j] = T * std::pow(static_cast<double>(j) / M, gamma);
  t[M] = T;
  return t;
}

/// q/(q - (b+1)) when q > b + 1, else 1.
inline double default_grading(double q, double b) {
  if (std::isinf(q) || q <= b + 1.0) return 1.0;
  return std::max(1.0, q / (q - (b + 1.0)));
}

/// Duhamel integral D(t_j) = int_0^{t_j} S(t_j - s) F(s) ds at every mesh node,
/// with F interpolated linearly between nodes and integrated exactly.
inline std::vector<Spectrum> duhamel_series(const std::vector<double>& lam, const std::vector<double>& mesh,
                                            const std::vector<Spectrum>& F) {
  require(mesh.size() == F.size() && !mesh.empty(), "forcing history must match the mesh");
  std::vector<Spectrum> D(mesh.size(), Spectrum(lam.size(), cplx{}));
  for (std::size_t m = 0; m + 1 < mesh.size(); ++m) {
    const double h = mesh[m + 1] - mesh[m];
    require(h > 0.0, "mesh times must increase");
    for (std::size_t i = 0; i < lam.size(); ++i) {
      const auto w = detail::product_weights(lam[i], h);
      D[m + 1][i] = w.decay * D[m][i] + w.w0 * F[m][i] + w.w1 * F[m + 1][i];
    }
  }
  return D;
}

/// Duhamel term at time t from a history of (tau, F(tau)) pairs that starts at
/// 0 and ends at t.
inline SpectralField duhamel_term(const std::vector<std::pair<double, SpectralField>>& history, double t,
                                  double alpha, double kappa = 1.0) {
  require(alpha > 0.0, "alpha must be positive");
  require(!history.empty(), "forcing history is empty");
  const Grid& g = history.front().second.grid();
  if (history.front().first != 0.0)
    fail(ErrorKind::invalid_argument, "mesh-coverage gap: forcing history must start at 0");
  if (std::abs(history.back().first - t) > 1e-12 * std::max(1.0, std::abs(t)))
    fail(ErrorKind::invalid_argument, "mesh-coverage gap: forcing history ends at " +
                                          std::to_string(history.back().first) + ", not at t = " + std::to_string(t));
  std::vector<double> mesh;
  std::vector<Spectrum> F;
  for (const auto& [tau, f] : history) {
    require(f.grid() == g, "forcing history mixes grids");
    require(f.is_finite(), "forcing history has non-finite values");
    mesh.push_back(tau);
    F.emplace_back(f.coeffs().begin(), f.coeffs().end());
  }
  if (mesh.size() == 1) return SpectralField::zeros(g);
  ProblemSpec ps{g, alpha, kappa, {}};
  const auto D = duhamel_series(linear_rates(ps), mesh, F);
  return SpectralField::from_coeffs(g, D.back());
}

enum class Method { picard, etd };

struct SolveConfig {
  double T = 1.0;
  int M = 64;                 // mesh intervals
  double grading = 1.0;       // gamma in tau_j = T (j/M)^gamma
  int max_iterations = 40;
  double tol = 1e-10;
  double blowup_threshold = 0.0;  // 0 selects 1e6 ||phi||_inf
  Method method = Method::picard;
  int max_halvings = 6;
  // exponents of the contraction norm sup_t ||.||_r + ||.||_{L^q L^p}
  double r = 2.0;
  double p = 4.0;
  double q = 8.0;
  // ETD options
  int substeps = 1;           // steps per mesh interval
  bool adaptive = false;      // h = cfl / (b ||u||_inf^b), records every step
  double cfl = 0.02;
  long max_steps = 2000000;
  double tail_limit = 1e-6;   // resolution guard on the spectral tail fraction
  int snapshot_stride = 1;    // adaptive runs keep every stride-th field
  bool store_fields = true;
};

inline void validate(const SolveConfig& c, int dim) {
  require(c.T > 0.0 && std::isfinite(c.T), "T must be positive");
  require(c.M >= 16, "M must be >= 16");
  require(c.M <= (dim == 1 ? 512 : 256), "M exceeds the memory cap (512 in 1D, 256 in 2D)");
  require(c.grading >= 1.0, "grading exponent must be >= 1");
  require(c.max_iterations >= 1, "max_iterations must be >= 1");
  require(c.tol > 0.0, "tol must be positive");
  require(c.blowup_threshold >= 0.0, "blowup_threshold must be nonnegative");
  require(c.r >= 1.0 && c.p >= 1.0 && c.q >= 1.0, "norm exponents must be >= 1");
  require(c.substeps >= 1, "substeps must be >= 1");
  require(c.cfl > 0.0, "cfl must be positive");
  require(c.snapshot_stride >= 1, "snapshot_stride must be >= 1");
}

struct Trajectory {
  Grid grid;
  double alpha = 1.0;
  ProblemSpec problem;
  double T = 0.0;  // horizon actually covered (after any halving)
  std::vector<double> times;
  std::vector<double> field_times;
  std::vector<Spectrum> fields;
  NormSeries l2, linf, lr, lp;
  double q = 8.0;
  std::vector<double> picard_ratios;
  std::vector<double> picard_changes;  // relative sup change per iteration
  int iterations = 0;
  int halvings = 0;
  bool converged = true;
  std::string stop_reason = "horizon";
  std::optional<double> blowup_estimate;

  [[nodiscard]] SpectralField field(std::size_t i) const { return SpectralField::from_coeffs(grid, fields.at(i)); }
  [[nodiscard]] std::vector<double> weighted_lp() const { return lp.weighted(q); }
};

namespace detail {

inline double effective_threshold(const SolveConfig& cfg, const SpectralField& phi) {
  if (cfg.blowup_threshold > 0.0) return cfg.blowup_threshold;
  const double m = phi.max_abs();
  return m > 0.0 ? 1e6 * m : std::numeric_limits<double>::infinity();
}

inline void record_norms(Trajectory& tr, const SolveConfig& cfg, double t, std::span<const cplx> c) {
  const auto v = inverse_transform(tr.grid, c);
  const double cell = tr.grid.cell_measure();
  tr.times.push_back(t);
  tr.l2.push(t, lebesgue_norm(v, cell, 2.0));
  tr.linf.push(t, lebesgue_norm(v, cell, std::numeric_limits<double>::infinity()));
  tr.lr.push(t, lebesgue_norm(v, cell, cfg.r));
  tr.lp.push(t, lebesgue_norm(v, cell, cfg.p));
}

inline Trajectory empty_trajectory(const ProblemSpec& ps, const SolveConfig& cfg) {
  Trajectory tr;
  tr.grid = ps.grid;
  tr.alpha = ps.alpha;
  tr.problem = ps;
  tr.q = cfg.q;
  tr.l2.p = 2.0;
  tr.linf.p = std::numeric_limits<double>::infinity();
  tr.lr.p = cfg.r;
  tr.lp.p = cfg.p;
  return tr;
}

inline double largest_growth_exponent(const ProblemSpec& ps) {
  double b = 0.0;
  for (const auto& t : ps.terms)
    if (t.amplitude != 0.0) b = std::max(b, t.kind == TermKind::qg ? 1.0 : t.b);
  return b;
}

} // namespace detail

/// Picard iteration u <- S(t) phi + D[F(u)] on the graded mesh. When the
/// iteration fails to contract the horizon is halved (up to max_halvings).
inline Trajectory picard_solve(const ProblemSpec& ps, const SpectralField& phi, const SolveConfig& cfg) {
  validate(ps);
  validate(cfg, ps.grid.dim);
  require(phi.grid() == ps.grid, "initial data lives on a different grid");
  require(phi.is_finite(), "initial data has non-finite values");
  const NonlinearOperator F(ps.grid, ps.alpha, ps.terms);
  const auto lam = linear_rates(ps);
  const double threshold = detail::effective_threshold(cfg, phi);
  const Grid& g = ps.grid;
  const double cell = g.cell_measure();
  const std::size_t S = g.spectral_size();

  double T = cfg.T;
  for (int halving = 0; halving <= cfg.max_halvings; ++halving, T *= 0.5) {
    const auto mesh = graded_mesh(T, cfg.M, cfg.grading);
    const std::size_t nodes = mesh.size();
    auto free_part = [&](std::size_t j, std::size_t i) { return phi.coeffs()[i] * std::exp(-mesh[j] * lam[i]); };
    std::vector<Spectrum> u(nodes, Spectrum(S));
    for (std::size_t j = 0; j < nodes; ++j)
      for (std::size_t i = 0; i < S; ++i) u[j][i] = free_part(j, i);

    Trajectory tr = detail::empty_trajectory(ps, cfg);
    tr.T = T;
    tr.halvings = halving;
    bool failed = false;
    bool done = !F.active();
    double prev_x = 0.0;
    for (int it = 0; it < cfg.max_iterations && !done; ++it) {
      std::vector<Spectrum> next(nodes, Spectrum(S));
      Spectrum D(S, cplx{});
      Spectrum F_prev;
      double sup_r = 0.0, sup_change = 0.0, sup_u = 0.0;
      std::vector<double> lp_series(nodes);
      try {
        for (std::size_t j = 0; j < nodes; ++j) {
          Spectrum Fj = F(u[j], threshold);
          if (j > 0) {
            const double h = mesh[j] - mesh[j - 1];
            for (std::size_t i = 0; i < S; ++i) {
              const auto w = detail::product_weights(lam[i], h);
              D[i] = w.decay * D[i] + w.w0 * F_prev[i] + w.w1 * Fj[i];
            }
          }
          for (std::size_t i = 0; i < S; ++i) next[j][i] = free_part(j, i) + D[i];
          Spectrum diff(S);
          for (std::size_t i = 0; i < S; ++i) diff[i] = next[j][i] - u[j][i];
          const auto dv = inverse_transform(g, diff);
          const auto nv = inverse_transform(g, next[j]);
          for (double v : nv)
            if (!std::isfinite(v)) throw OverflowError(std::numeric_limits<double>::infinity(), threshold);
          sup_r = std::max(sup_r, lebesgue_norm(dv, cell, cfg.r));
          sup_change = std::max(sup_change, lebesgue_norm(dv, cell, std::numeric_limits<double>::infinity()));
          sup_u = std::max(sup_u, lebesgue_norm(nv, cell, std::numeric_limits<double>::infinity()));
          lp_series[j] = lebesgue_norm(dv, cell, cfg.p);
          F_prev = std::move(Fj);
        }
      } catch (const OverflowError&) {
        failed = true;
        break;
      }
      NormSeries s;
      s.p = cfg.p;
      for (std::size_t j = 0; j < nodes; ++j) s.push(mesh[j], lp_series[j]);
      const double x = sup_r + spacetime_norm(s, cfg.q, SpacetimeMode::integral);
      if (it > 0) tr.picard_ratios.push_back(prev_x > 0.0 ? x / prev_x : 0.0);
      prev_x = x;
      const double change = sup_u > 0.0 ? sup_change / sup_u : sup_change;
      tr.picard_changes.push_back(change);
      u = std::move(next);
      tr.iterations = it + 1;
      if (!tr.picard_ratios.empty() && tr.iterations >= 3 && tr.picard_ratios.back() >= 1.0 && change > cfg.tol) {
        failed = true;
        break;
      }
      if (change <= cfg.tol) done = true;
    }
    if (failed) continue;
    tr.converged = done;
    if (!done) tr.stop_reason = "max_iterations";
    for (std::size_t j = 0; j < nodes; ++j) {
      detail::record_norms(tr, cfg, mesh[j], u[j]);
      if (cfg.store_fields) {
        tr.field_times.push_back(mesh[j]);
        tr.fields.push_back(std::move(u[j]));
      }
    }
    return tr;
  }
  fail(ErrorKind::numerical, "no contraction: Picard iteration failed after " + std::to_string(cfg.max_halvings) +
                                 " halvings of T");
}

namespace detail {

/// One ETD2RK step of size h from c with F(c) = Fc.
inline Spectrum etd2rk_step(const NonlinearOperator& F, const std::vector<double>& lam, const Spectrum& c,
                            const Spectrum& Fc, double h, double threshold) {
  const std::size_t S = c.size();
  Spectrum a(S), out(S);
  if (!F.active()) {
    for (std::size_t i = 0; i < S; ++i) out[i] = std::exp(-lam[i] * h) * c[i];
    return out;
  }
  std::vector<double> p2(S);
  for (std::size_t i = 0; i < S; ++i) {
    const double z = lam[i] * h;
    a[i] = std::exp(-z) * c[i] + h * phi1(z) * Fc[i];
    p2[i] = phi2(z);
  }
  const Spectrum Fa = F(a, threshold);
  for (std::size_t i = 0; i < S; ++i) out[i] = a[i] + h * p2[i] * (Fa[i] - Fc[i]);
  return out;
}

inline bool spectrum_finite(const Spectrum& c) {
  for (const auto& v : c)
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return false;
  return true;
}

} // namespace detail

/// Second-order exponential time differencing (ETD2RK). Fixed steps follow the
/// graded mesh with `substeps` per interval; adaptive runs use
/// h = min(T/M, cfl/(b ||u||_inf^b)) and stop at the horizon, at overflow
/// past the blow-up threshold, or when the spectral tail exceeds tail_limit.
inline Trajectory etd_solve(const ProblemSpec& ps, const SpectralField& phi, const SolveConfig& cfg) {
  validate(ps);
  validate(cfg, ps.grid.dim);
  require(phi.grid() == ps.grid, "initial data lives on a different grid");
  require(phi.is_finite(), "initial data has non-finite values");
  const NonlinearOperator F(ps.grid, ps.alpha, ps.terms);
  const auto lam = linear_rates(ps);
  const double threshold = detail::effective_threshold(cfg, phi);
  Trajectory tr = detail::empty_trajectory(ps, cfg);
  tr.T = cfg.T;
  tr.iterations = 0;

  Spectrum c(phi.coeffs().begin(), phi.coeffs().end());
  Spectrum Fc = F(c, threshold);
  auto keep = [&](double t, const Spectrum& s, bool field) {
    detail::record_norms(tr, cfg, t, s);
    if (cfg.store_fields && field) {
      tr.field_times.push_back(t);
      tr.fields.push_back(s);
    }
  };
  keep(0.0, c, true);

  if (!cfg.adaptive) {
    const auto mesh = graded_mesh(cfg.T, cfg.M, cfg.grading);
    for (std::size_t j = 0; j + 1 < mesh.size(); ++j) {
      const double h = (mesh[j + 1] - mesh[j]) / cfg.substeps;
      for (int s = 0; s < cfg.substeps; ++s) {
        c = detail::etd2rk_step(F, lam, c, Fc, h, threshold);
        if (!detail::spectrum_finite(c)) fail(ErrorKind::numerical, "non-finite state in ETD step");
        Fc = F(c, threshold);
        ++tr.iterations;
      }
      keep(mesh[j + 1], c, true);
    }
    return tr;
  }

  const double b = detail::largest_growth_exponent(ps);
  const double h_max = cfg.T / cfg.M;
  double t = 0.0;
  long step = 0;
  while (t < cfg.T * (1 - 1e-14)) {
    if (step >= cfg.max_steps) {
      tr.stop_reason = "max_steps";
      break;
    }
    const double m = tr.linf.values.back();
    double h = h_max;
    if (b > 0.0 && m > 0.0) h = std::min(h, cfg.cfl / (b * std::pow(m, b)));
    h = std::min(h, cfg.T - t);
    if (!(t + h > t)) {
      tr.stop_reason = "step_underflow";
      break;
    }
    Spectrum next;
    bool overflow = false;
    int rejections = 0;
    for (;;) {
      try {
        next = detail::etd2rk_step(F, lam, c, Fc, h, threshold);
      } catch (const OverflowError&) {
        overflow = true;
        break;
      }
      if (detail::spectrum_finite(next)) break;
      if (++rejections > 10) fail(ErrorKind::numerical, "step-rejection cascade at t = " + std::to_string(t));
      h *= 0.5;
    }
    if (overflow) {
      tr.stop_reason = "overflow";
      break;
    }
    try {
      Fc = F(next, threshold);
    } catch (const OverflowError&) {
      t += h;
      c = std::move(next);
      keep(t, c, true);
      tr.stop_reason = "overflow";
      break;
    }
    t += h;
    c = std::move(next);
    ++step;
    keep(t, c, step % cfg.snapshot_stride == 0);
    tr.iterations = static_cast<int>(std::min<long>(step, std::numeric_limits<int>::max()));
    if (spectral_tail_fraction(ps.grid, c) > cfg.tail_limit) {
      tr.stop_reason = "resolution";
      break;
    }
  }
  tr.T = t;
  return tr;
}

inline Trajectory solve(const ProblemSpec& ps, const SpectralField& phi, const SolveConfig& cfg) {
  return cfg.method == Method::picard ? picard_solve(ps, phi, cfg) : etd_solve(ps, phi, cfg);
}

struct BlowupEstimate {
  double t_star = 0.0;
  double slope = 0.0;      // d log ||u||_r / d log(T* - s), negative for blow-up
  double rate = 0.0;       // -slope
  double r2 = 0.0;
  std::size_t points = 0;
  double final_linf = 0.0;
};

/// Extrapolates T* from the last ten records of ||u||_inf^{-b} (linear in t
/// for ODE-type growth) and fits log ||u||_r against log(T* - s) over the last
/// decade of sup-norm growth, trimmed to its middle 80%.
inline BlowupEstimate detect_blowup(const Trajectory& tr, double b,
                                    double r = std::numeric_limits<double>::quiet_NaN()) {
  require(b > 0.0, "growth exponent b must be positive");
  const NormSeries& series = std::isnan(r) || r == tr.lr.p ? tr.lr : tr.linf;
  require(std::isnan(r) || r == tr.lr.p || std::isinf(r), "trajectory does not record the L^r norm asked for");
  const auto& t = tr.linf.times;
  const auto& m = tr.linf.values;
  const std::size_t n = m.size();
  if (n < 12 || m.front() <= 0.0)
    fail(ErrorKind::insufficient_growth, "insufficient growth: run too short for blow-up analysis");
  const double growth = m.back() / m.front();
  bool increasing = true;
  for (std::size_t i = n - 10; i < n; ++i) increasing = increasing && m[i] > m[i - 1];
  if (growth < 10.0 || !increasing)
    fail(ErrorKind::insufficient_growth,
         "insufficient growth: sup norm grew by a factor " + std::to_string(growth) + " (need >= 10, increasing)");
  // Records with T* - s below 1e-8 T* sit at the rounding level of t; the
  // extrapolation and the rate fit use only the resolvable part of the run.
  auto extrapolate = [&](std::size_t end) {
    std::vector<double> tt, yy;
    for (std::size_t i = end - 10; i < end; ++i) {
      tt.push_back(t[i]);
      yy.push_back(std::pow(m[i], -b));
    }
    const auto lf = fit_line(tt, yy);
    if (!(lf.slope < 0.0)) fail(ErrorKind::insufficient_growth, "insufficient growth: no finite-time extrapolation");
    return -lf.intercept / lf.slope;
  };
  BlowupEstimate est;
  est.t_star = extrapolate(n);
  std::size_t end = n;
  while (end > 0 && !(est.t_star - t[end - 1] >= 1e-8 * est.t_star)) --end;
  if (end < 12) fail(ErrorKind::insufficient_growth, "insufficient growth: too few resolvable records");
  if (end < n) est.t_star = extrapolate(end);
  while (end > 0 && !(est.t_star - t[end - 1] >= 1e-8 * est.t_star)) --end;
  if (end < 12) fail(ErrorKind::insufficient_growth, "insufficient growth: too few resolvable records");
  est.final_linf = m[end - 1];
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < end; ++i) {
    if (m[i] < est.final_linf / 10.0) continue;
    xs.push_back(est.t_star - t[i]);
    ys.push_back(series.values[i]);
  }
  if (xs.size() < 8) fail(ErrorKind::insufficient_growth, "insufficient growth: too few records near T*");
  const auto [lo, hi] = middle_range(xs.size(), 0.8);
  std::vector<double> fx(xs.begin() + lo, xs.begin() + hi), fy(ys.begin() + lo, ys.begin() + hi);
  const auto fit = fit_loglog(fx, fy);
  est.slope = fit.slope;
  est.rate = -fit.slope;
  est.r2 = fit.r2;
  est.points = fx.size();
  return est;
}

/// (|x|^2 + eps^2)^{-alpha/b}
inline double self_similar_profile(double r, double eps, double alpha, double b) {
  return std::pow(r * r + eps * eps, -alpha / b);
}

/// Regularized self-similar profile normalized to unit homogeneous Besov
/// norm of index n/p - 2 alpha/b (semigroup characterization, q = inf).
inline SpectralField self_similar_data(const Grid& g, double alpha, double b, double eps, double p) {
  require(alpha > 0.0 && b > 0.0, "alpha and b must be positive");
  require(eps > 0.0, "regularization eps must be positive");
  if (2.0 * alpha / b >= g.dim)
    fail(ErrorKind::invalid_argument, "non-integrable profile: 2 alpha / b = " + std::to_string(2.0 * alpha / b) +
                                          " must be < n = " + std::to_string(g.dim));
  const double s = g.dim / p - 2.0 * alpha / b;
  require(s < 0.0, "normalization needs p > n b / (2 alpha)");
  auto raw = g.dim == 1 ? SpectralField::sample(g, [&](double x) { return self_similar_profile(x, eps, alpha, b); })
                        : SpectralField::sample(g, [&](double x, double y) {
                            return self_similar_profile(std::hypot(x, y), eps, alpha, b);
                          });
  const auto fam = default_lp_family(g);
  const double norm = besov_norm_semigroup(raw, BesovParams{s, p, std::numeric_limits<double>::infinity(), alpha},
                                           semigroup_time_grid(fam, alpha));
  if (!(norm > 0.0)) fail(ErrorKind::numerical, "self-similar profile has zero Besov norm");
  return SpectralField::combine(1.0 / norm, raw, 0.0, raw);
}

/// Exponent a with F(lambda^a u(lambda .)) = lambda^{2 alpha + a} F(u)(lambda .),
/// i.e. (2 alpha - d)/b shared by all active terms; 0 for linear problems.
inline double scaling_exponent(const ProblemSpec& ps) {
  std::optional<double> a;
  for (const auto& t : ps.terms) {
    if (t.amplitude == 0.0) continue;
    double e = 0.0;
    if (t.kind == TermKind::qg) {
      e = 2.0 * ps.alpha - 1.0;
    } else {
      if (t.kind == TermKind::polynomial) fail(ErrorKind::unsupported, "polynomial terms are not scale-invariant");
      if (t.op && t.op->kind == MultiplierKind::custom)
        fail(ErrorKind::unsupported, "custom operators carry no scaling guarantee");
      e = (2.0 * ps.alpha - t.order()) / t.b;
    }
    if (a && std::abs(*a - e) > 1e-14) fail(ErrorKind::unsupported, "terms have different scaling exponents");
    a = e;
  }
  return a.value_or(0.0);
}

/// Solves from phi on (N, L) up to T and from lambda^a phi(lambda x) on
/// (N, L/lambda) up to T/lambda^{2 alpha}, and returns the largest relative
/// sup difference between u_lambda and lambda^a u(lambda^{2 alpha} t, lambda x)
/// over the shared nodes.
inline double scaling_orbit_check(const ProblemSpec& ps, const SpectralField& phi, const SolveConfig& cfg,
                                  double lambda) {
  require(lambda > 0.0 && std::isfinite(lambda), "lambda must be positive");
  const double a = scaling_exponent(ps);
  const auto base = solve(ps, phi, cfg);
  if (lambda == 1.0) return 0.0;
  ProblemSpec scaled = ps;
  scaled.grid.L = ps.grid.L / lambda;
  const double amp = std::pow(lambda, a);
  std::vector<double> vals(phi.values().begin(), phi.values().end());
  for (double& v : vals) v *= amp;
  SolveConfig sc = cfg;
  sc.T = cfg.T / std::pow(lambda, 2 * ps.alpha);
  if (cfg.blowup_threshold > 0.0) sc.blowup_threshold = cfg.blowup_threshold * amp;
  const auto other = solve(scaled, SpectralField::from_values(scaled.grid, std::move(vals)), sc);
  require(base.fields.size() == other.fields.size(), "scaled run produced a different mesh");
  double diff = 0.0, peak = 0.0;
  for (std::size_t j = 0; j < base.fields.size(); ++j) {
    const auto u = inverse_transform(ps.grid, base.fields[j]);
    const auto w = inverse_transform(scaled.grid, other.fields[j]);
    for (std::size_t i = 0; i < u.size(); ++i) {
      diff = std::max(diff, std::abs(w[i] - amp * u[i]));
      peak = std::max(peak, std::abs(amp * u[i]));
    }
  }
  return peak == 0.0 ? diff : diff / peak;
}

/// || (-Lap)^{alpha/2} u ||_2^2
inline double dissipation_functional(const Grid& g, std::span<const cplx> c, double alpha) {
  double e = 0.0;
  detail::for_each_mode(g, [&](std::size_t idx, const Wavevector& xi, int mult, std::size_t) {
    e += mult * std::norm(c[idx]) * std::pow(xi.norm(), 2.0 * alpha);
  });
  return e * g.box_measure();
}

} // namespace fracdiss
