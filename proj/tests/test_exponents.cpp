#include "fracdiss/exponents.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace fracdiss;

namespace {
Triplet T(Exponent q, Exponent p, Exponent r, int n, Rational a) { return {q, p, r, ExponentContext{n, a}}; }
const Exponent inf = Exponent::infinity();
} // namespace

TEST(Triplets, AdmissibleTable) {
  EXPECT_TRUE(is_admissible(T(4, 4, 2, 2, 1)));
  EXPECT_TRUE(is_admissible(T(inf, 2, 2, 3, 1)));
  EXPECT_FALSE(is_admissible(T(Rational(4, 3), 4, 2, 3, Rational(1, 2))));
}

TEST(Triplets, GeneralizedTable) {
  EXPECT_TRUE(is_generalized_admissible(T(Rational(4, 3), 4, 2, 3, Rational(1, 2))));
  EXPECT_FALSE(is_generalized_admissible(T(3, 3, 3, 1, 1)));
}

TEST(Triplets, EndpointsAndContext) {
  EXPECT_THROW(is_admissible(T(2, 2, 1, 1, 1)), Error);
  Triplet nocontext{4, 4, 2, std::nullopt};
  EXPECT_THROW(is_admissible(nocontext), Error);
  // p = infinity is never admissible, even when the relation holds.
  EXPECT_FALSE(is_admissible(T(2, inf, 2, 1, 1)));
  EXPECT_FALSE(is_admissible(T(inf, inf, inf, 1, 1)));
  EXPECT_FALSE(triplet_advisory(T(2, inf, 2, 1, 1)).empty());
}

TEST(Triplets, QFrom) {
  EXPECT_EQ(q_from(4, 2, 2, 1), Exponent(4));
  EXPECT_EQ(q_from(3, 3, 2, 1), inf);
  EXPECT_EQ(q_from(4, 2, 3, Rational(1, 2)), Exponent(Rational(4, 3)));
  EXPECT_THROW(q_from(2, 4, 1, 1), Error);
}

TEST(Triplets, RandomizedInclusionAndRoundTrip) {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> small(1, 12);
  int admissible = 0;
  for (int i = 0; i < 10000; ++i) {
    const int n = 1 + (small(rng) % 2);
    const Rational alpha(small(rng), small(rng));
    const Rational r = Rational(1) + Rational(small(rng), small(rng));
    const Rational p = r + Rational(small(rng) - 1, small(rng));
    Triplet t{q_from(p, r, n, alpha), p, r, ExponentContext{n, alpha}};
    if (is_admissible(t)) {
      ++admissible;
      EXPECT_TRUE(is_generalized_admissible(t));
    }
    // Round trip: q_from lands on an admissible triplet whenever p is inside the bound.
    const Rational nn(n);
    const Rational two_a = Rational(2) * alpha;
    const bool inside = !(nn > two_a) || p < nn * r / (nn - two_a);
    EXPECT_EQ(is_admissible(t), inside);
  }
  EXPECT_GT(admissible, 1000);
}

TEST(Critical, Examples) {
  EXPECT_EQ(*critical_exponents(2, Rational(1, 2), 1, 0).r0, Rational(2));
  EXPECT_EQ(*critical_exponents(1, 1, 2, 1).r1, Rational(2));
  EXPECT_EQ(*critical_exponents(1, 1, 2, 0, Exponent(4)).sigma, Rational(3, 4));
  EXPECT_THROW(critical_exponents(1, 1, 2, 2), Error);
  const auto half = critical_exponents(1, Rational(1, 2), 2, 0);
  EXPECT_FALSE(half.r1.has_value());
}

TEST(Critical, BlowupRateIdentity) {
  for (int n : {1, 2})
    for (Rational a : {Rational(1, 2), Rational(3, 4), Rational(1), Rational(13, 10)})
      for (Rational b : {Rational(1), Rational(2), Rational(7, 3)})
        for (Rational d : {Rational(0), Rational(1, 3)})
          for (Rational r : {Rational(3, 2), Rational(4)}) {
            if (d >= Rational(2) * a) continue;
            const auto ce = critical_exponents(n, a, b, d, std::nullopt, Exponent(r));
            EXPECT_EQ(*ce.blowup_rate + Rational(n) / (Rational(2) * r * a) + d / (Rational(2) * b * a),
                      b.reciprocal());
          }
}

TEST(Window, Examples) {
  const auto w0 = smallness_window(1, 1, 2, 0);
  EXPECT_TRUE(w0.empty);
  EXPECT_FALSE(w0.reason.empty());
  const auto w1 = smallness_window(2, 1, 2, 0);
  EXPECT_FALSE(w1.empty);
  EXPECT_EQ(w1.lo, Rational(3));
  EXPECT_EQ(w1.hi, Rational(6));
  EXPECT_FALSE(w1.contains(3));
  EXPECT_TRUE(w1.contains(Rational(7, 2)));
  const auto w2 = smallness_window(2, Rational(3, 5), 1, 1);
  EXPECT_EQ(w2.lo, Rational(10));
  EXPECT_EQ(w2.hi, Rational(20));
  EXPECT_TRUE(w2.contains(10));
  EXPECT_THROW(smallness_window(1, Rational(1, 2), 1, 1), Error);
}
