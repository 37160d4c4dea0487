#pragma once

// Admissible triplets, critical exponents and the small-data window, in exact
// rational arithmetic.

#include "fracdiss/error.hpp"
#include "fracdiss/rational.hpp"

#include <algorithm>
#include <optional>
#include <string>
#include <vector>

namespace fracdiss {

struct ExponentContext {
  int n = 1;
  Rational alpha{1};
};

struct Triplet {
  Exponent q;
  Exponent p;
  Exponent r;
  std::optional<ExponentContext> context;
};

namespace detail {

inline const ExponentContext& context_of(const Triplet& t) {
  if (!t.context) fail(ErrorKind::invalid_argument, "triplet has no (n, alpha) context");
  require(t.context->n >= 1, "dimension must be positive");
  require(t.context->alpha > Rational(0), "alpha must be positive");
  return *t.context;
}

/// Shared part of both admissibility predicates: ranges and the scaling relation.
inline bool triplet_relation_holds(const Triplet& t, const ExponentContext& c) {
  if (!t.r.is_infinite() && t.r.value() == Rational(1))
    fail(ErrorKind::invalid_argument, "endpoint r = 1 is excluded from admissible triplets");
  if (t.r.is_infinite() || t.p.is_infinite()) return false;
  if (t.r < Exponent(1) || t.q <= Exponent(0)) return false;
  if (t.p < t.r) return false;
  const Rational lhs = t.q.reciprocal();
  const Rational rhs = Rational(c.n) / (Rational(2) * c.alpha) * (t.r.reciprocal() - t.p.reciprocal());
  return lhs == rhs;
}

} // namespace detail

/// 1/q = (n/2a)(1/r - 1/p), 1 < r <= p, and p < nr/(n - 2a) when n > 2a.
inline bool is_admissible(const Triplet& t) {
  const auto& c = detail::context_of(t);
  if (!detail::triplet_relation_holds(t, c)) return false;
  const Rational n(c.n);
  const Rational two_a = Rational(2) * c.alpha;
  if (n > two_a) return t.p.value() < n * t.r.value() / (n - two_a);
  return true;
}

/// Same relation with the weaker bound p < nr/(n - 2ar) when n > 2ar.
inline bool is_generalized_admissible(const Triplet& t) {
  const auto& c = detail::context_of(t);
  if (!detail::triplet_relation_holds(t, c)) return false;
  const Rational n(c.n);
  const Rational r = t.r.value();
  const Rational two_ar = Rational(2) * c.alpha * r;
  if (n > two_ar) return t.p.value() < n * r / (n - two_ar);
  return true;
}

/// Notes on triplets sitting on or near an endpoint of the admissible range.
inline std::vector<std::string> triplet_advisory(const Triplet& t) {
  std::vector<std::string> notes;
  if (t.p.is_infinite()) notes.emplace_back("p = inf is rejected by the predicates");
  if (!t.r.is_infinite() && t.r.value() == Rational(1)) notes.emplace_back("r = 1 endpoint");
  if (t.context && !t.p.is_infinite() && !t.r.is_infinite()) {
    const Rational n(t.context->n);
    const Rational two_a = Rational(2) * t.context->alpha;
    if (n > two_a) {
      const Rational bound = n * t.r.value() / (n - two_a);
      const Rational gap = (bound - t.p.value()) / bound;
      if (gap >= Rational(0) && gap < Rational(1, 100)) notes.emplace_back("p within 1% of nr/(n-2a)");
    }
  }
  return notes;
}

/// q from 1/q = (n/2a)(1/r - 1/p); infinity when p = r.
inline Exponent q_from(const Exponent& p, const Exponent& r, int n, const Rational& alpha) {
  require(n >= 1 && alpha > Rational(0), "q_from needs n >= 1 and alpha > 0");
  require(!(p < r), "q_from requires p >= r");
  const Rational recip = Rational(n) / (Rational(2) * alpha) * (r.reciprocal() - p.reciprocal());
  return exponent_from_reciprocal(recip);
}

struct CriticalExponents {
  std::optional<Rational> r0;           // nb/(2a)
  std::optional<Rational> r1;           // nb/(2a - 1), needs 2a > 1
  std::optional<Rational> rd;           // nb/(2a - d)
  std::optional<Rational> sigma;        // 2a/b - n/p, needs p
  std::optional<Rational> blowup_rate;  // 1/b - d/(2ba) - n/(2ra), needs r
  std::vector<std::string> undefined;   // names of fields left empty, with reason
};

inline CriticalExponents critical_exponents(int n, const Rational& alpha, const Rational& b,
                                            const Rational& d, std::optional<Exponent> p = std::nullopt,
                                            std::optional<Exponent> r = std::nullopt) {
  require(n >= 1, "dimension must be positive");
  require(alpha > Rational(0), "alpha must be positive");
  require(b > Rational(0), "b must be positive");
  require(d >= Rational(0), "d must be nonnegative");
  const Rational two_a = Rational(2) * alpha;
  require(d < two_a, "derivative order d must satisfy d < 2 alpha (got d = " + d.str() + ")");
  const Rational nb = Rational(n) * b;
  CriticalExponents ce;
  ce.r0 = nb / two_a;
  if (two_a > Rational(1))
    ce.r1 = nb / (two_a - Rational(1));
  else
    ce.undefined.emplace_back("r1: 2 alpha - 1 <= 0");
  ce.rd = nb / (two_a - d);
  if (p) {
    require(*p >= Exponent(1), "p must be >= 1");
    ce.sigma = two_a / b - Rational(n) * p->reciprocal();
  } else {
    ce.undefined.emplace_back("sigma: p not given");
  }
  if (r) {
    require(*r >= Exponent(1), "r must be >= 1");
    ce.blowup_rate = b.reciprocal() - d / (b * two_a) - Rational(n) * r->reciprocal() / two_a;
  } else {
    ce.undefined.emplace_back("blowup_rate: r not given");
  }
  return ce;
}

struct Window {
  Rational lo{0};
  Rational hi{0};
  bool lo_inclusive = false;  // hi is always exclusive
  bool empty = true;
  std::string reason;

  [[nodiscard]] bool contains(const Rational& p) const {
    if (empty) return false;
    const bool above = lo_inclusive ? p >= lo : p > lo;
    return above && p < hi;
  }
};

/// p-interval max(r_d, b+1) (<) p < r_d (b+1) for the small-data global theory.
inline Window smallness_window(int n, const Rational& alpha, const Rational& b, const Rational& d) {
  const auto ce = critical_exponents(n, alpha, b, d);
  const Rational rd = *ce.rd;
  const Rational b1 = b + Rational(1);
  Window w;
  if (rd <= Rational(1)) {
    w.reason = "r_d = " + rd.str() + " <= 1: no admissible r above the critical index";
    return w;
  }
  w.lo = std::max(rd, b1);
  w.lo_inclusive = rd > b1;  // r_d <= p is closed, p > b+1 is open
  w.hi = rd * b1;
  if (w.lo >= w.hi) {
    w.reason = "window endpoints cross";
    return w;
  }
  w.empty = false;
  return w;
}

/// A few admissible (or generalized admissible) triplets with the given r,
/// taking p at evenly spaced fractions of the allowed range.
inline std::vector<Triplet> sample_triplets(int n, const Rational& alpha, const Rational& r, bool generalized,
                                            int count = 4) {
  require(r > Rational(1), "sample_triplets needs r > 1");
  const Rational nn(n);
  const Rational bound_den = generalized ? nn - Rational(2) * alpha * r : nn - Rational(2) * alpha;
  std::optional<Rational> hi;
  if (bound_den > Rational(0)) hi = nn * r / bound_den;
  std::vector<Triplet> out;
  for (int k = 0; k < count; ++k) {
    Rational p = hi ? r + (*hi - r) * Rational(k, count) : r + Rational(k) * r / Rational(2);
    Triplet t{q_from(p, r, n, alpha), p, r, ExponentContext{n, alpha}};
    out.push_back(t);
  }
  return out;
}

} // namespace fracdiss
