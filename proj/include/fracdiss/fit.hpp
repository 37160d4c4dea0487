#pragma once

#include "fracdiss/error.hpp"

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

namespace fracdiss {

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
  std::size_t points = 0;
};

/// Ordinary least squares y = slope*x + intercept.
inline LinearFit fit_line(std::span<const double> x, std::span<const double> y) {
  require(x.size() == y.size(), "fit arrays differ in length");
  require(x.size() >= 2, "fit needs at least two points");
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  require(sxx > 0.0, "fit abscissae are all equal", ErrorKind::numerical);
  LinearFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  f.r2 = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;
  f.points = x.size();
  return f;
}

/// Least-squares slope of log|y| against log x. Nonpositive entries are rejected.
inline LinearFit fit_loglog(std::span<const double> x, std::span<const double> y) {
  std::vector<double> lx(x.size()), ly(y.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    require(x[i] > 0.0 && std::abs(y[i]) > 0.0, "log-log fit needs positive data", ErrorKind::numerical);
    lx[i] = std::log(x[i]);
    ly[i] = std::log(std::abs(y[i]));
  }
  return fit_line(lx, ly);
}

/// Index range [first, last) keeping the middle `keep` fraction of n points.
inline std::pair<std::size_t, std::size_t> middle_range(std::size_t n, double keep = 0.8) {
  const auto drop = static_cast<std::size_t>(std::floor(0.5 * (1.0 - keep) * static_cast<double>(n)));
  return {drop, n - drop};
}

/// Log-spaced points from a to b inclusive.
inline std::vector<double> logspace(double a, double b, std::size_t count) {
  require(a > 0.0 && b > a && count >= 2, "logspace needs 0 < a < b and count >= 2");
  std::vector<double> out(count);
  const double la = std::log(a), lb = std::log(b);
  for (std::size_t i = 0; i < count; ++i)
    out[i] = std::exp(la + (lb - la) * static_cast<double>(i) / static_cast<double>(count - 1));
  out.front() = a;
  out.back() = b;
  return out;
}

/// Log-spaced points with the given density per decade.
inline std::vector<double> log_grid(double a, double b, int per_decade) {
  const auto count = static_cast<std::size_t>(std::ceil(per_decade * std::log10(b / a))) + 1;
  return logspace(a, b, std::max<std::size_t>(count, 2));
}

} // namespace fracdiss
