#pragma once

// Nonlinear terms F(u) and their dealiased spectral evaluation.

#include "fracdiss/error.hpp"
#include "fracdiss/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace fracdiss {

/// Raised when |u| exceeds the blow-up threshold during evaluation.
class OverflowError : public Error {
public:
  OverflowError(double level, double threshold)
      : Error(ErrorKind::numerical, "overflow: |u| = " + std::to_string(level) + " exceeds threshold " +
                                        std::to_string(threshold)),
        level_(level) {}
  [[nodiscard]] double level() const noexcept { return level_; }

private:
  double level_;
};

enum class TermKind {
  power,       // sign |u|^b u
  abs_power,   // sign |u|^{b+1}
  polynomial,  // sign sum_k c_k u^k
  qg,          // -v . grad(theta), v = grad_perp psi, (-Lap)^{1/2} psi = theta
};

struct NonlinearTerm {
  TermKind kind = TermKind::power;
  double sign = 1.0;       // +1 focusing, -1 defocusing
  double b = 2.0;
  double amplitude = 1.0;  // an amplitude of exactly 0 switches the term off
  std::vector<double> coefficients;
  std::optional<Multiplier> op;  // homogeneous operator applied after the pointwise map

  [[nodiscard]] double order() const { return op ? op->order.value_or(0.0) : 0.0; }

  static NonlinearTerm power(double b, double sign, std::optional<Multiplier> op = std::nullopt) {
    NonlinearTerm t;
    t.kind = TermKind::power;
    t.b = b;
    t.sign = sign;
    t.op = std::move(op);
    return t;
  }
  static NonlinearTerm abs_power(double b, double sign, std::optional<Multiplier> op = std::nullopt) {
    NonlinearTerm t = power(b, sign, std::move(op));
    t.kind = TermKind::abs_power;
    return t;
  }
  static NonlinearTerm polynomial(std::vector<double> coeffs, double sign = 1.0,
                                  std::optional<Multiplier> op = std::nullopt) {
    NonlinearTerm t;
    t.kind = TermKind::polynomial;
    t.sign = sign;
    t.coefficients = std::move(coeffs);
    t.b = std::max<double>(1.0, static_cast<double>(t.coefficients.size()) - 2.0);
    t.op = std::move(op);
    return t;
  }
  static NonlinearTerm qg() {
    NonlinearTerm t;
    t.kind = TermKind::qg;
    t.sign = -1.0;
    return t;
  }
};

inline void validate(const NonlinearTerm& t, double alpha, int dim) {
  require(t.sign == 1.0 || t.sign == -1.0, "term sign must be +1 or -1");
  require(std::isfinite(t.amplitude) && t.amplitude >= 0.0, "term amplitude must be finite and nonnegative");
  if (t.kind == TermKind::qg) {
    if (dim != 2) fail(ErrorKind::unsupported, "the quasi-geostrophic term needs a 2D grid");
    return;
  }
  require(t.b > 0.0 && std::isfinite(t.b), "growth exponent b must be positive");
  if (t.kind == TermKind::polynomial) require(!t.coefficients.empty(), "polynomial term needs coefficients");
  if (t.op) {
    require(t.op->order.has_value(), "operator '" + t.op->name + "' must declare its homogeneity order");
    const double d = *t.op->order;
    require(d >= 0.0 && d < 2.0 * alpha,
            "operator order d = " + std::to_string(d) + " must lie in [0, 2 alpha)");
  }
}

namespace detail {

inline double pointwise(const NonlinearTerm& t, double u) {
  switch (t.kind) {
    case TermKind::power: return t.sign * std::pow(std::abs(u), t.b) * u;
    case TermKind::abs_power: return t.sign * std::pow(std::abs(u), t.b + 1.0);
    case TermKind::polynomial: {
      double acc = 0.0;
      for (auto it = t.coefficients.rbegin(); it != t.coefficients.rend(); ++it) acc = acc * u + *it;
      return t.sign * acc;
    }
    case TermKind::qg: break;
  }
  return 0.0;
}

} // namespace detail

/// Evaluates sum of the active terms on coefficients c. Pointwise maps are
/// formed on a grid padded by `pad` and truncated back; operators act after.
class NonlinearOperator {
public:
  NonlinearOperator(const Grid& g, double alpha, std::vector<NonlinearTerm> terms, int pad = 2)
      : grid_(g), fine_(refined(g, pad)), pad_(pad), terms_(std::move(terms)) {
    require(pad >= 1, "padding factor must be >= 1");
    for (const auto& t : terms_) {
      validate(t, alpha, g.dim);
      op_tables_.push_back(t.op ? std::optional<Spectrum>(symbol_table(g, *t.op)) : std::nullopt);
    }
    if (std::any_of(terms_.begin(), terms_.end(), [](const auto& t) { return t.kind == TermKind::qg; })) {
      // grad_perp (-Lap)^{-1/2}: v1 = -d2 psi, v2 = d1 psi, psi_hat = theta_hat/|xi|.
      auto vel1 = multipliers::custom([](const Wavevector& xi) { return cplx{0.0, -xi.y / xi.norm()}; }, 0.0,
                                      cplx{0.0, 0.0}, "qg_v1");
      auto vel2 = multipliers::custom([](const Wavevector& xi) { return cplx{0.0, xi.x / xi.norm()}; }, 0.0,
                                      cplx{0.0, 0.0}, "qg_v2");
      qg_tables_ = {symbol_table(g, vel1), symbol_table(g, vel2), symbol_table(g, multipliers::gradient(1.0, 0.0)),
                    symbol_table(g, multipliers::gradient(0.0, 1.0))};
    }
  }

  [[nodiscard]] const Grid& grid() const noexcept { return grid_; }
  [[nodiscard]] const std::vector<NonlinearTerm>& terms() const noexcept { return terms_; }
  [[nodiscard]] bool active() const {
    return std::any_of(terms_.begin(), terms_.end(), [](const auto& t) { return t.amplitude != 0.0; });
  }

  /// F(u) in coefficient space. Throws OverflowError when max |u| on the padded
  /// grid exceeds `threshold`.
  [[nodiscard]] Spectrum operator()(std::span<const cplx> c,
                                    double threshold = std::numeric_limits<double>::infinity()) const {
    Spectrum out(grid_.spectral_size(), cplx{});
    if (!active()) return out;
    const auto u = inverse_transform(fine_, pad_spectrum(grid_, c, pad_));
    double peak = 0.0;
    for (double v : u) {
      if (!std::isfinite(v)) throw OverflowError(std::numeric_limits<double>::infinity(), threshold);
      peak = std::max(peak, std::abs(v));
    }
    if (peak > threshold) throw OverflowError(peak, threshold);
    std::vector<double> w(u.size());
    for (std::size_t k = 0; k < terms_.size(); ++k) {
      const auto& t = terms_[k];
      if (t.amplitude == 0.0) continue;
      Spectrum part;
      if (t.kind == TermKind::qg) {
        part = qg_advection(c);
      } else {
        for (std::size_t i = 0; i < u.size(); ++i) w[i] = detail::pointwise(t, u[i]);
        part = truncate_spectrum(grid_, forward_transform(fine_, w), pad_);
      }
      if (op_tables_[k]) {
        const auto& tab = *op_tables_[k];
        for (std::size_t i = 0; i < part.size(); ++i) part[i] *= tab[i];
      }
      for (std::size_t i = 0; i < out.size(); ++i) out[i] += t.amplitude * part[i];
    }
    return out;
  }

  /// int |u|^{b+2} over the padded grid, the quantity -<u, F(u)> for a
  /// defocusing power term under this dealiasing.
  [[nodiscard]] double padded_power_integral(std::span<const cplx> c, double exponent) const {
    const auto u = inverse_transform(fine_, pad_spectrum(grid_, c, pad_));
    double acc = 0.0;
    for (double v : u) acc += std::pow(std::abs(v), exponent);
    return acc * fine_.cell_measure();
  }

private:
  Spectrum qg_advection(std::span<const cplx> c) const {
    auto fine_field = [&](const Spectrum& tab) {
      Spectrum s(c.begin(), c.end());
      for (std::size_t i = 0; i < s.size(); ++i) s[i] *= tab[i];
      return inverse_transform(fine_, pad_spectrum(grid_, s, pad_));
    };
    const auto v1 = fine_field(qg_tables_[0]);
    const auto v2 = fine_field(qg_tables_[1]);
    const auto d1 = fine_field(qg_tables_[2]);
    const auto d2 = fine_field(qg_tables_[3]);
    std::vector<double> w(v1.size());
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = -(v1[i] * d1[i] + v2[i] * d2[i]);
    return truncate_spectrum(grid_, forward_transform(fine_, w), pad_);
  }

  Grid grid_;
  Grid fine_;
  int pad_;
  std::vector<NonlinearTerm> terms_;
  std::vector<std::optional<Spectrum>> op_tables_;
  std::vector<Spectrum> qg_tables_;
};

inline SpectralField eval_nonlinearity(const NonlinearTerm& term, const SpectralField& u, double alpha,
                                       double threshold = std::numeric_limits<double>::infinity()) {
  require(u.is_finite(), "field has non-finite values");
  const NonlinearOperator op(u.grid(), alpha, {term});
  return SpectralField::from_coeffs(u.grid(), op(u.coeffs(), threshold));
}

/// Relative sup difference between F evaluated with 2x and 4x padding.
inline double aliasing_diagnostic(const std::vector<NonlinearTerm>& terms, const SpectralField& u, double alpha) {
  const NonlinearOperator two(u.grid(), alpha, terms, 2);
  const NonlinearOperator four(u.grid(), alpha, terms, 4);
  const auto a = inverse_transform(u.grid(), two(u.coeffs()));
  const auto b = inverse_transform(u.grid(), four(u.coeffs()));
  double diff = 0.0, peak = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    diff = std::max(diff, std::abs(a[i] - b[i]));
    peak = std::max(peak, std::abs(b[i]));
  }
  return peak == 0.0 ? 0.0 : diff / peak;
}

} // namespace fracdiss
