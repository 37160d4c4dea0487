#pragma once

// Periodic-grid fields, the discrete Fourier transform contract, Fourier
// multipliers and Lebesgue norms.
//
// Conventions
//   * Grid points x_j = -L + j*dx, dx = 2L/N, on each axis.
//   * Frequency lattice xi_k = pi*k/L, k in [-N/2, N/2).
//   * Coefficients are Fourier-series coefficients c_k = DFT(values)_k / N^n,
//     stored in real-to-complex layout: in 1D the modes k = 0..N/2; in 2D an
//     N x (N/2+1) array with the second axis halved. Values are row-major with
//     the second axis fastest.
//   * A multiplier m acts as c_k -> m(xi_k) c_k, so the semigroup is exactly the
//     multiplier exp(-t|xi|^{2 alpha}).

#include "fracdiss/error.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace fracdiss {

using cplx = std::complex<double>;
using Spectrum = std::vector<cplx>;

struct Grid {
  int dim = 1;     // 1 or 2
  int N = 0;       // points per axis
  double L = 0.0;  // half-length of [-L, L)^n

  [[nodiscard]] std::size_t size() const noexcept {
    return dim == 1 ? static_cast<std::size_t>(N) : static_cast<std::size_t>(N) * N;
  }
  /// Number of stored (r2c) Fourier modes.
  [[nodiscard]] std::size_t spectral_size() const noexcept {
    const auto half = static_cast<std::size_t>(N / 2 + 1);
    return dim == 1 ? half : static_cast<std::size_t>(N) * half;
  }
  [[nodiscard]] double spacing() const noexcept { return 2.0 * L / N; }
  [[nodiscard]] double cell_measure() const noexcept {
    return std::pow(spacing(), dim);
  }
  [[nodiscard]] double box_measure() const noexcept { return std::pow(2.0 * L, dim); }
  [[nodiscard]] double coord(int j) const noexcept { return -L + j * spacing(); }
  [[nodiscard]] double wavenumber_unit() const noexcept { return std::numbers::pi / L; }
  /// Signed integer frequency of FFT index i along a full axis.
  [[nodiscard]] int signed_index(int i) const noexcept { return i < N / 2 ? i : i - N; }
  /// Largest representable |xi| along one axis (the Nyquist frequency).
  [[nodiscard]] double nyquist() const noexcept { return wavenumber_unit() * (N / 2); }

  friend bool operator==(const Grid&, const Grid&) = default;
};

inline Grid make_grid(int dim, int N, double L) {
  if (dim != 1 && dim != 2)
    fail(ErrorKind::unsupported, "unsupported dimension " + std::to_string(dim) + " (only 1 and 2)");
  require(N >= 8 && N % 2 == 0, "invalid resolution N=" + std::to_string(N) + " (need even N >= 8)");
  require(L > 0.0 && std::isfinite(L), "half-length L must be positive");
  return Grid{dim, N, L};
}

/// Wavevector at a stored spectral index.
struct Wavevector {
  double x = 0.0;
  double y = 0.0;
  [[nodiscard]] double norm() const noexcept { return std::hypot(x, y); }
  [[nodiscard]] bool is_zero() const noexcept { return x == 0.0 && y == 0.0; }
};

namespace detail {

// Visits every stored spectral mode with (linear index, wavevector, multiplicity,
// mirror index) where multiplicity counts how many full-lattice modes the stored
// entry represents (1 or 2) and mirror is the stored index of -k when -k is also
// stored (self-conjugate columns), or npos otherwise.
inline constexpr std::size_t npos = static_cast<std::size_t>(-1);

template <class Fn>
void for_each_mode(const Grid& g, Fn&& fn) {
  const double unit = g.wavenumber_unit();
  const int half = g.N / 2;
  if (g.dim == 1) {
    for (int k = 0; k <= half; ++k) {
      // The Nyquist entry stands for k = -N/2 on the lattice.
      const int sk = (k == half) ? -half : k;
      const int mult = (k == 0 || k == half) ? 1 : 2;
      const std::size_t mirror = (k == 0 || k == half) ? static_cast<std::size_t>(k) : npos;
      fn(static_cast<std::size_t>(k), Wavevector{unit * sk, 0.0}, mult, mirror);
    }
    return;
  }
  const int cols = half + 1;
  for (int i = 0; i < g.N; ++i) {
    const int kx = g.signed_index(i);
    for (int j = 0; j < cols; ++j) {
      const int ky = (j == half) ? -half : j;
      const bool self = (j == 0 || j == half);
      const int mult = self ? 1 : 2;
      std::size_t mirror = npos;
      if (self) {
        const int mi = (g.N - i) % g.N;
        mirror = static_cast<std::size_t>(mi) * cols + j;
      }
      fn(static_cast<std::size_t>(i) * cols + j, Wavevector{unit * kx, unit * ky}, mult, mirror);
    }
  }
}

class FftPlan {
public:
  FftPlan(int dim, int N) : dim_(dim), N_(N) {
    static std::mutex planner_mutex;  // the FFTW planner is not thread-safe
    std::lock_guard lock(planner_mutex);
    const std::size_t real_n = dim == 1 ? N : static_cast<std::size_t>(N) * N;
    const std::size_t spec_n = dim == 1 ? N / 2 + 1 : static_cast<std::size_t>(N) * (N / 2 + 1);
    auto* r = fftw_alloc_real(real_n);
    auto* c = fftw_alloc_complex(spec_n);
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    if (dim == 1) {
      fwd_ = fftw_plan_dft_r2c_1d(N, r, c, flags);
      inv_ = fftw_plan_dft_c2r_1d(N, c, r, flags);
    } else {
      fwd_ = fftw_plan_dft_r2c_2d(N, N, r, c, flags);
      inv_ = fftw_plan_dft_c2r_2d(N, N, c, r, flags);
    }
    fftw_free(r);
    fftw_free(c);
    if (fwd_ == nullptr || inv_ == nullptr) fail(ErrorKind::numerical, "FFTW planning failed");
  }
  FftPlan(const FftPlan&) = delete;
  FftPlan& operator=(const FftPlan&) = delete;
  ~FftPlan() {
    fftw_destroy_plan(fwd_);
    fftw_destroy_plan(inv_);
  }

  /// values -> normalized Fourier-series coefficients.
  void forward(std::span<const double> values, std::span<cplx> coeffs) const {
    std::vector<double> in(values.begin(), values.end());
    fftw_execute_dft_r2c(fwd_, in.data(), reinterpret_cast<fftw_complex*>(coeffs.data()));
    const double scale = 1.0 / static_cast<double>(values.size());
    for (auto& c : coeffs) c *= scale;
  }
  /// coefficients -> values (the input is copied; c2r destroys its input).
  void inverse(std::span<const cplx> coeffs, std::span<double> values) const {
    Spectrum in(coeffs.begin(), coeffs.end());
    fftw_execute_dft_c2r(inv_, reinterpret_cast<fftw_complex*>(in.data()), values.data());
  }

private:
  int dim_;
  int N_;
  fftw_plan fwd_ = nullptr;
  fftw_plan inv_ = nullptr;
};

/// Per-thread plan cache keyed by (dim, N).
inline const FftPlan& plan_for(const Grid& g) {
  thread_local std::map<std::pair<int, int>, std::unique_ptr<FftPlan>> cache;
  auto& slot = cache[{g.dim, g.N}];
  if (!slot) slot = std::make_unique<FftPlan>(g.dim, g.N);
  return *slot;
}

} // namespace detail

inline Spectrum forward_transform(const Grid& g, std::span<const double> values) {
  require(values.size() == g.size(), "value array does not match grid");
  Spectrum c(g.spectral_size());
  detail::plan_for(g).forward(values, c);
  return c;
}

inline std::vector<double> inverse_transform(const Grid& g, std::span<const cplx> coeffs) {
  require(coeffs.size() == g.spectral_size(), "coefficient array does not match grid");
  std::vector<double> v(g.size());
  detail::plan_for(g).inverse(coeffs, v);
  return v;
}

/// Real scalar field sampled on a periodic grid, with its Fourier coefficients.
/// Immutable: every operation returns a new field.
class SpectralField {
public:
  SpectralField() = default;

  static SpectralField from_values(const Grid& g, std::vector<double> values) {
    require(values.size() == g.size(), "value array does not match grid");
    SpectralField f;
    f.grid_ = g;
    f.coeffs_ = forward_transform(g, values);
    f.values_ = std::move(values);
    return f;
  }

  /// Coefficients are assumed to describe a real field (Hermitian on the lattice).
  static SpectralField from_coeffs(const Grid& g, Spectrum coeffs) {
    require(coeffs.size() == g.spectral_size(), "coefficient array does not match grid");
    SpectralField f;
    f.grid_ = g;
    f.values_ = inverse_transform(g, coeffs);
    f.coeffs_ = std::move(coeffs);
    return f;
  }

  static SpectralField zeros(const Grid& g) {
    SpectralField f;
    f.grid_ = g;
    f.values_.assign(g.size(), 0.0);
    f.coeffs_.assign(g.spectral_size(), cplx{});
    return f;
  }

  /// Samples fn(x) (1D) or fn(x, y) (2D) at the grid points.
  template <class Fn>
  static SpectralField sample(const Grid& g, Fn&& fn) {
    std::vector<double> v(g.size());
    if (g.dim == 1) {
      if constexpr (std::is_invocable_v<Fn, double>) {
        for (int i = 0; i < g.N; ++i) v[i] = fn(g.coord(i));
      } else {
        fail(ErrorKind::invalid_argument, "1D grid needs a function of one variable");
      }
    } else {
      if constexpr (std::is_invocable_v<Fn, double, double>) {
        for (int i = 0; i < g.N; ++i)
          for (int j = 0; j < g.N; ++j)
            v[static_cast<std::size_t>(i) * g.N + j] = fn(g.coord(i), g.coord(j));
      } else {
        fail(ErrorKind::invalid_argument, "2D grid needs a function of two variables");
      }
    }
    return from_values(g, std::move(v));
  }

  [[nodiscard]] const Grid& grid() const noexcept { return grid_; }
  [[nodiscard]] std::span<const double> values() const noexcept { return values_; }
  [[nodiscard]] std::span<const cplx> coeffs() const noexcept { return coeffs_; }

  [[nodiscard]] double max_abs() const noexcept {
    double m = 0.0;
    for (double v : values_) m = std::max(m, std::abs(v));
    return m;
  }
  [[nodiscard]] bool is_finite() const noexcept {
    return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
  }

  friend SpectralField operator+(const SpectralField& a, const SpectralField& b) {
    return combine(1.0, a, 1.0, b);
  }
  friend SpectralField operator-(const SpectralField& a, const SpectralField& b) {
    return combine(1.0, a, -1.0, b);
  }
  friend SpectralField operator*(double s, const SpectralField& a) {
    SpectralField r = a;
    for (auto& v : r.values_) v *= s;
    for (auto& c : r.coeffs_) c *= s;
    return r;
  }

  /// a*f + b*g, formed in both representations (the transform is linear).
  static SpectralField combine(double a, const SpectralField& f, double b, const SpectralField& g) {
    require(f.grid_ == g.grid_, "fields live on different grids");
    SpectralField r;
    r.grid_ = f.grid_;
    r.values_.resize(f.values_.size());
    r.coeffs_.resize(f.coeffs_.size());
    for (std::size_t i = 0; i < r.values_.size(); ++i) r.values_[i] = a * f.values_[i] + b * g.values_[i];
    for (std::size_t i = 0; i < r.coeffs_.size(); ++i) r.coeffs_[i] = a * f.coeffs_[i] + b * g.coeffs_[i];
    return r;
  }

private:
  Grid grid_{};
  std::vector<double> values_;
  Spectrum coeffs_;
};

// ---------------------------------------------------------------------------
// Multipliers

enum class MultiplierKind { identity, semigroup, riesz, gradient, laplacian, power, custom };

/// Fourier multiplier xi -> symbol(xi). `order` is the homogeneity degree when
/// the symbol is homogeneous. `zero_value` is the value used at xi = 0.
struct Multiplier {
  std::function<cplx(const Wavevector&)> symbol;
  MultiplierKind kind = MultiplierKind::custom;
  std::optional<double> order;
  std::optional<cplx> zero_value;
  std::string name;

  [[nodiscard]] cplx at(const Wavevector& xi) const {
    if (xi.is_zero()) {
      if (zero_value) return *zero_value;
      if (order && *order > 0.0) return cplx{0.0, 0.0};
      fail(ErrorKind::invalid_argument,
           "multiplier '" + name + "' has no defined value at xi = 0 (supply zero_value)");
    }
    return symbol(xi);
  }
};

namespace multipliers {

inline Multiplier identity() {
  return {[](const Wavevector&) { return cplx{1.0, 0.0}; }, MultiplierKind::identity, 0.0,
          cplx{1.0, 0.0}, "identity"};
}

/// exp(-t*kappa*|xi|^{2 alpha}).
inline Multiplier semigroup(double t, double alpha, double kappa = 1.0) {
  require(alpha > 0.0, "semigroup order alpha must be positive");
  require(t >= 0.0, "semigroup time must be nonnegative");
  return {[=](const Wavevector& xi) { return cplx{std::exp(-t * kappa * std::pow(xi.norm(), 2.0 * alpha)), 0.0}; },
          MultiplierKind::semigroup, std::nullopt, cplx{1.0, 0.0}, "semigroup"};
}

/// |xi|^s. For s <= 0 the value at the origin must be given explicitly.
inline Multiplier power(double s, std::optional<double> zero_value = std::nullopt) {
  Multiplier m{[=](const Wavevector& xi) { return cplx{std::pow(xi.norm(), s), 0.0}; },
               MultiplierKind::power, s, std::nullopt, "power"};
  if (s == 0.0) m.zero_value = cplx{1.0, 0.0};
  if (zero_value) m.zero_value = cplx{*zero_value, 0.0};
  return m;
}

/// Riesz transform R_j with symbol -i xi_j / |xi| (j = 1 or 2), zero at the origin.
inline Multiplier riesz(int j) {
  require(j == 1 || j == 2, "Riesz index must be 1 or 2");
  return {[=](const Wavevector& xi) {
            const double c = (j == 1 ? xi.x : xi.y) / xi.norm();
            return cplx{0.0, -c};
          },
          MultiplierKind::riesz, 0.0, cplx{0.0, 0.0}, "riesz"};
}

/// Directional derivative a . grad, symbol i a.xi.
inline Multiplier gradient(double ax, double ay = 0.0) {
  require(std::isfinite(ax) && std::isfinite(ay), "direction vector must be finite");
  return {[=](const Wavevector& xi) { return cplx{0.0, ax * xi.x + ay * xi.y}; },
          MultiplierKind::gradient, 1.0, cplx{0.0, 0.0}, "gradient"};
}

/// Laplacian, symbol -|xi|^2.
inline Multiplier laplacian() {
  return {[](const Wavevector& xi) { return cplx{-(xi.x * xi.x + xi.y * xi.y), 0.0}; },
          MultiplierKind::laplacian, 2.0, cplx{0.0, 0.0}, "laplacian"};
}

inline Multiplier custom(std::function<cplx(const Wavevector&)> symbol, std::optional<double> order,
                         std::optional<cplx> zero_value, std::string name = "custom") {
  return {std::move(symbol), MultiplierKind::custom, order, zero_value, std::move(name)};
}

} // namespace multipliers

/// Symbol values on the stored lattice. Self-conjugate entries use the
/// Hermitian part (m(k) + conj(m(-k)))/2 so the output stays a real field.
inline Spectrum symbol_table(const Grid& g, const Multiplier& m) {
  Spectrum table(g.spectral_size());
  detail::for_each_mode(g, [&](std::size_t idx, const Wavevector& xi, int, std::size_t mirror) {
    cplx s = m.at(xi);
    if (mirror != detail::npos) {
      Wavevector neg{-xi.x, -xi.y};
      // On the Nyquist line -k aliases back onto the lattice, so use the
      // symbol value at the lattice representative of -k.
      const double nyq = g.nyquist();
      if (std::abs(neg.x) >= nyq) neg.x = -nyq;
      if (std::abs(neg.y) >= nyq) neg.y = -nyq;
      s = 0.5 * (s + std::conj(m.at(neg)));
    }
    if (!std::isfinite(s.real()) || !std::isfinite(s.imag()))
      fail(ErrorKind::numerical, "multiplier '" + m.name + "' is not finite on the lattice");
    table[idx] = s;
  });
  return table;
}

inline SpectralField apply_table(const SpectralField& f, std::span<const cplx> table) {
  require(table.size() == f.coeffs().size(), "symbol table does not match field");
  Spectrum c(f.coeffs().begin(), f.coeffs().end());
  for (std::size_t i = 0; i < c.size(); ++i) c[i] *= table[i];
  return SpectralField::from_coeffs(f.grid(), std::move(c));
}

inline SpectralField apply_multiplier(const SpectralField& f, const Multiplier& m) {
  require(f.is_finite(), "field has non-finite values");
  const Spectrum table = symbol_table(f.grid(), m);
  return apply_table(f, table);
}

/// (-Laplacian)^s, the multiplier |xi|^{2s}.
inline SpectralField fractional_laplacian(const SpectralField& f, double s,
                                          std::optional<double> zero_value = std::nullopt) {
  require(s > -0.5 * f.grid().dim, "fractional order must exceed -n/2");
  return apply_multiplier(f, multipliers::power(2.0 * s, zero_value));
}

/// Rectangle-rule L^p norm on the grid; p = infinity gives the sample maximum.
inline double lebesgue_norm(std::span<const double> values, double cell_measure, double p) {
  require(p >= 1.0, "Lebesgue exponent must be >= 1");
  if (std::isinf(p)) {
    double m = 0.0;
    for (double v : values) m = std::max(m, std::abs(v));
    return m;
  }
  double peak = 0.0;
  for (double v : values) peak = std::max(peak, std::abs(v));
  if (peak == 0.0) return 0.0;
  double acc = 0.0;
  if (p == 2.0) {
    for (double v : values) acc += (v / peak) * (v / peak);
    return peak * std::sqrt(cell_measure * acc);
  }
  for (double v : values) acc += std::pow(std::abs(v) / peak, p);
  return peak * std::pow(cell_measure * acc, 1.0 / p);
}

inline double lebesgue_norm(const SpectralField& f, double p) {
  return lebesgue_norm(f.values(), f.grid().cell_measure(), p);
}

/// (2L)^n * sum over the full lattice of |c_k|^2; equals the grid L^2 norm squared.
inline double coefficient_energy(const Grid& g, std::span<const cplx> coeffs) {
  double e = 0.0;
  detail::for_each_mode(g, [&](std::size_t idx, const Wavevector&, int mult, std::size_t) {
    e += mult * std::norm(coeffs[idx]);
  });
  return e * g.box_measure();
}

/// Largest |value| in the outer 5% band of cells on each axis, relative to the peak.
inline double boundary_diagnostic(const SpectralField& f) {
  const Grid& g = f.grid();
  const int band = std::max(1, g.N / 20);
  auto on_edge = [&](int i) { return i < band || i >= g.N - band; };
  double edge = 0.0;
  const auto v = f.values();
  if (g.dim == 1) {
    for (int i = 0; i < g.N; ++i)
      if (on_edge(i)) edge = std::max(edge, std::abs(v[i]));
  } else {
    for (int i = 0; i < g.N; ++i)
      for (int j = 0; j < g.N; ++j)
        if (on_edge(i) || on_edge(j)) edge = std::max(edge, std::abs(v[static_cast<std::size_t>(i) * g.N + j]));
  }
  const double peak = f.max_abs();
  return peak == 0.0 ? 0.0 : edge / peak;
}

/// Grid refined by an integer factor with the same box.
inline Grid refined(const Grid& g, int factor) { return Grid{g.dim, g.N * factor, g.L}; }

/// Spectral interpolation onto a grid with `factor` times more points per axis
/// (zero padding). The Nyquist entry is split evenly between +-N/2.
inline Spectrum pad_spectrum(const Grid& g, std::span<const cplx> c, int factor) {
  const Grid fine = refined(g, factor);
  Spectrum out(fine.spectral_size(), cplx{});
  const int half = g.N / 2;
  if (g.dim == 1) {
    for (int k = 0; k < half; ++k) out[k] = c[k];
    out[half] = 0.5 * c[half];  // +N/2 half; -N/2 half is its conjugate image
    return out;
  }
  const int cols = half + 1;
  const int fcols = fine.N / 2 + 1;
  for (int i = 0; i < g.N; ++i) {
    const int kx = g.signed_index(i);
    for (int j = 0; j <= half; ++j) {
      cplx v = c[static_cast<std::size_t>(i) * cols + j];
      double w = 1.0;
      if (j == half) w *= 0.5;
      auto put = [&](int kxx, double ww) {
        const int fi = kxx >= 0 ? kxx : kxx + fine.N;
        out[static_cast<std::size_t>(fi) * fcols + j] += ww * v;
      };
      if (kx == -half) {
        put(-half, 0.5 * w);
        put(half, 0.5 * w);
      } else {
        put(kx, w);
      }
    }
  }
  return out;
}

/// Inverse of pad_spectrum on band-limited data: keeps |k| <= N/2, folding the
/// +-N/2 pair back onto the lattice representative -N/2.
inline Spectrum truncate_spectrum(const Grid& g, std::span<const cplx> fine_c, int factor) {
  const Grid fine = refined(g, factor);
  Spectrum out(g.spectral_size(), cplx{});
  const int half = g.N / 2;
  if (g.dim == 1) {
    for (int k = 0; k < half; ++k) out[k] = fine_c[k];
    // fine modes +N/2 and -N/2 (conjugate of +N/2) fold together; keep a real value.
    out[half] = 2.0 * fine_c[half].real();
    return out;
  }
  const int cols = half + 1;
  const int fcols = fine.N / 2 + 1;
  auto fine_at = [&](int kx, int ky) -> cplx {
    // ky may be negative: use conjugate symmetry.
    if (ky < 0) {
      kx = -kx;
      ky = -ky;
      const int fi = kx >= 0 ? kx : kx + fine.N;
      return std::conj(fine_c[static_cast<std::size_t>(fi) * fcols + ky]);
    }
    const int fi = kx >= 0 ? kx : kx + fine.N;
    return fine_c[static_cast<std::size_t>(fi) * fcols + ky];
  };
  for (int i = 0; i < g.N; ++i) {
    const int kx = g.signed_index(i);
    for (int j = 0; j <= half; ++j) {
      cplx v{};
      const bool nyq_x = (kx == -half);
      const bool nyq_y = (j == half);
      const int xs[2] = {kx, half};
      const int ys[2] = {j, -half};
      for (int a = 0; a < (nyq_x ? 2 : 1); ++a)
        for (int b = 0; b < (nyq_y ? 2 : 1); ++b) v += fine_at(xs[a], ys[b]);
      out[static_cast<std::size_t>(i) * cols + j] = v;
    }
  }
  // Self-conjugate columns must stay Hermitian.
  for (int jj : {0, half}) {
    for (int i = 0; i < g.N; ++i) {
      const int mi = (g.N - i) % g.N;
      if (mi < i) continue;
      auto& a = out[static_cast<std::size_t>(i) * cols + jj];
      auto& b = out[static_cast<std::size_t>(mi) * cols + jj];
      const cplx h = 0.5 * (a + std::conj(b));
      a = h;
      b = std::conj(h);
    }
  }
  return out;
}

/// Energy fraction in the outer quarter of the resolved band (|k| > 3N/8 on some axis).
inline double spectral_tail_fraction(const Grid& g, std::span<const cplx> c) {
  double total = 0.0;
  double tail = 0.0;
  const double cut = 0.75 * g.nyquist();
  detail::for_each_mode(g, [&](std::size_t idx, const Wavevector& xi, int mult, std::size_t) {
    const double e = mult * std::norm(c[idx]);
    total += e;
    if (std::abs(xi.x) > cut || std::abs(xi.y) > cut) tail += e;
  });
  return total == 0.0 ? 0.0 : tail / total;
}

} // namespace fracdiss
