#pragma once

#include "fracdiss/error.hpp"

#include <compare>
#include <cstdint>
#include <limits>
#include <numeric>
#include <ostream>
#include <string>
#include <string_view>

namespace fracdiss {

/// Exact rational number on 64-bit integers. Arithmetic is carried out in
/// 128-bit intermediates and throws when a normalized result no longer fits.
class Rational {
public:
  constexpr Rational() = default;
  Rational(std::int64_t num, std::int64_t den = 1) { assign(num, den); }

  [[nodiscard]] std::int64_t num() const noexcept { return num_; }
  [[nodiscard]] std::int64_t den() const noexcept { return den_; }
  [[nodiscard]] double to_double() const noexcept {
    return static_cast<double>(num_) / static_cast<double>(den_);
  }
  [[nodiscard]] bool is_zero() const noexcept { return num_ == 0; }
  [[nodiscard]] bool is_integer() const noexcept { return den_ == 1; }

  /// Parses "3", "-3/4", "0.75", "1e-2" exactly.
  static Rational parse(std::string_view text);

  friend Rational operator+(const Rational& a, const Rational& b) {
    return make(static_cast<__int128>(a.num_) * b.den_ + static_cast<__int128>(b.num_) * a.den_,
                static_cast<__int128>(a.den_) * b.den_);
  }
  friend Rational operator-(const Rational& a, const Rational& b) {
    return make(static_cast<__int128>(a.num_) * b.den_ - static_cast<__int128>(b.num_) * a.den_,
                static_cast<__int128>(a.den_) * b.den_);
  }
  friend Rational operator*(const Rational& a, const Rational& b) {
    return make(static_cast<__int128>(a.num_) * b.num_, static_cast<__int128>(a.den_) * b.den_);
  }
  friend Rational operator/(const Rational& a, const Rational& b) {
    require(b.num_ != 0, "rational division by zero");
    return make(static_cast<__int128>(a.num_) * b.den_, static_cast<__int128>(a.den_) * b.num_);
  }
  Rational operator-() const { return make(-static_cast<__int128>(num_), den_); }
  Rational& operator+=(const Rational& o) { return *this = *this + o; }
  Rational& operator-=(const Rational& o) { return *this = *this - o; }
  Rational& operator*=(const Rational& o) { return *this = *this * o; }
  Rational& operator/=(const Rational& o) { return *this = *this / o; }

  friend bool operator==(const Rational& a, const Rational& b) noexcept {
    return a.num_ == b.num_ && a.den_ == b.den_;
  }
  friend std::strong_ordering operator<=>(const Rational& a, const Rational& b) noexcept {
    const __int128 l = static_cast<__int128>(a.num_) * b.den_;
    const __int128 r = static_cast<__int128>(b.num_) * a.den_;
    return l <=> r;
  }

  [[nodiscard]] Rational reciprocal() const { return Rational(1) / *this; }

  [[nodiscard]] std::string str() const {
    return den_ == 1 ? std::to_string(num_) : std::to_string(num_) + "/" + std::to_string(den_);
  }
  friend std::ostream& operator<<(std::ostream& os, const Rational& r) { return os << r.str(); }

private:
  static Rational make(__int128 num, __int128 den) {
    require(den != 0, "rational with zero denominator");
    if (den < 0) {
      num = -num;
      den = -den;
    }
    __int128 a = num < 0 ? -num : num;
    __int128 b = den;
    while (b != 0) {
      const __int128 t = a % b;
      a = b;
      b = t;
    }
    const __int128 g = a == 0 ? 1 : a;
    num /= g;
    den /= g;
    constexpr __int128 lim = INT64_MAX;
    if (num > lim || num < -lim || den > lim)
      fail(ErrorKind::numerical, "rational overflow");
    Rational r;
    r.num_ = static_cast<std::int64_t>(num);
    r.den_ = static_cast<std::int64_t>(den);
    return r;
  }
  void assign(std::int64_t num, std::int64_t den) { *this = make(num, den); }

  std::int64_t num_ = 0;
  std::int64_t den_ = 1;
};

inline Rational Rational::parse(std::string_view text) {
  auto trim = [](std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
    return s;
  };
  text = trim(text);
  require(!text.empty(), "empty rational literal");
  if (auto slash = text.find('/'); slash != std::string_view::npos) {
    const Rational a = parse(text.substr(0, slash));
    const Rational b = parse(text.substr(slash + 1));
    return a / b;
  }
  bool neg = false;
  std::size_t i = 0;
  if (text[i] == '+' || text[i] == '-') {
    neg = text[i] == '-';
    ++i;
  }
  __int128 mant = 0;
  int frac_digits = 0;
  bool seen_dot = false;
  bool any_digit = false;
  for (; i < text.size(); ++i) {
    const char c = text[i];
    if (c >= '0' && c <= '9') {
      mant = mant * 10 + (c - '0');
      require(mant < (static_cast<__int128>(1) << 100), "rational literal too long");
      if (seen_dot) ++frac_digits;
      any_digit = true;
    } else if (c == '.' && !seen_dot) {
      seen_dot = true;
    } else {
      break;
    }
  }
  require(any_digit, "malformed rational literal '" + std::string(text) + "'");
  int exp10 = -frac_digits;
  if (i < text.size()) {
    require(text[i] == 'e' || text[i] == 'E', "malformed rational literal '" + std::string(text) + "'");
    const std::string rest(text.substr(i + 1));
    require(!rest.empty(), "malformed exponent in '" + std::string(text) + "'");
    std::size_t used = 0;
    int e = 0;
    try {
      e = std::stoi(rest, &used);
    } catch (const std::exception&) {
      fail(ErrorKind::invalid_argument, "malformed exponent in '" + std::string(text) + "'");
    }
    require(used == rest.size(), "malformed exponent in '" + std::string(text) + "'");
    exp10 += e;
  }
  __int128 den = 1;
  for (; exp10 > 0; --exp10) mant *= 10;
  for (; exp10 < 0; ++exp10) den *= 10;
  return make(neg ? -mant : mant, den);
}

/// Extended nonnegative-exponent value: a rational or +infinity.
/// Used for Lebesgue/time exponents where infinity is a legitimate value.
class Exponent {
public:
  Exponent() = default;
  Exponent(Rational v) : value_(v) {}
  Exponent(std::int64_t v) : value_(v) {}
  static Exponent infinity() {
    Exponent e;
    e.infinite_ = true;
    return e;
  }
  static Exponent parse(std::string_view text) {
    if (text == "inf" || text == "infinity" || text == "Inf") return infinity();
    return Exponent(Rational::parse(text));
  }

  [[nodiscard]] bool is_infinite() const noexcept { return infinite_; }
  [[nodiscard]] const Rational& value() const {
    require(!infinite_, "finite value requested from infinite exponent");
    return value_;
  }
  /// 1/e with 1/inf = 0; 1/0 is rejected.
  [[nodiscard]] Rational reciprocal() const {
    return infinite_ ? Rational(0) : value_.reciprocal();
  }
  [[nodiscard]] double to_double() const noexcept {
    return infinite_ ? std::numeric_limits<double>::infinity() : value_.to_double();
  }

  friend bool operator==(const Exponent& a, const Exponent& b) noexcept {
    return a.infinite_ == b.infinite_ && (a.infinite_ || a.value_ == b.value_);
  }
  friend std::strong_ordering operator<=>(const Exponent& a, const Exponent& b) noexcept {
    if (a.infinite_ || b.infinite_) return a.infinite_ <=> b.infinite_;
    return a.value_ <=> b.value_;
  }

  [[nodiscard]] std::string str() const { return infinite_ ? "inf" : value_.str(); }
  friend std::ostream& operator<<(std::ostream& os, const Exponent& e) { return os << e.str(); }

private:
  Rational value_{0};
  bool infinite_ = false;
};

/// Reciprocal-space constructor: 1/x = recip, with recip = 0 mapping to infinity.
inline Exponent exponent_from_reciprocal(const Rational& recip) {
  if (recip.is_zero()) return Exponent::infinity();
  return Exponent(recip.reciprocal());
}

} // namespace fracdiss
