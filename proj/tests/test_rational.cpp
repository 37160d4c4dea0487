#include "fracdiss/rational.hpp"

#include <gtest/gtest.h>

using fracdiss::Exponent;
using fracdiss::Rational;

TEST(Rational, NormalizesSignAndGcd) {
  const Rational r(6, -8);
  EXPECT_EQ(r.num(), -3);
  EXPECT_EQ(r.den(), 4);
  EXPECT_EQ(Rational(0, 5), Rational(0));
}

TEST(Rational, Arithmetic) {
  EXPECT_EQ(Rational(1, 2) + Rational(1, 3), Rational(5, 6));
  EXPECT_EQ(Rational(1, 2) - Rational(1, 3), Rational(1, 6));
  EXPECT_EQ(Rational(2, 3) * Rational(9, 4), Rational(3, 2));
  EXPECT_EQ(Rational(2, 3) / Rational(4, 9), Rational(3, 2));
  EXPECT_THROW(Rational(1) / Rational(0), fracdiss::Error);
}

TEST(Rational, Ordering) {
  EXPECT_LT(Rational(1, 3), Rational(1, 2));
  EXPECT_GT(Rational(-1, 3), Rational(-1, 2));
}

TEST(Rational, ParsesLiterals) {
  EXPECT_EQ(Rational::parse("3"), Rational(3));
  EXPECT_EQ(Rational::parse("-3/4"), Rational(-3, 4));
  EXPECT_EQ(Rational::parse("0.75"), Rational(3, 4));
  EXPECT_EQ(Rational::parse("1e-2"), Rational(1, 100));
  EXPECT_EQ(Rational::parse("2.5E1"), Rational(25));
  EXPECT_THROW(Rational::parse("abc"), fracdiss::Error);
  EXPECT_THROW(Rational::parse("1/0"), fracdiss::Error);
  EXPECT_THROW(Rational::parse("1.2.3"), fracdiss::Error);
}

TEST(Rational, OverflowIsReported) {
  const Rational big(INT64_MAX / 2);
  EXPECT_THROW(big * big, fracdiss::Error);
}

TEST(Exponent, InfinityBehaves) {
  const auto inf = Exponent::infinity();
  EXPECT_TRUE(inf.is_infinite());
  EXPECT_EQ(inf.reciprocal(), Rational(0));
  EXPECT_GT(inf, Exponent(1000000));
  EXPECT_EQ(Exponent::parse("inf"), inf);
  EXPECT_EQ(fracdiss::exponent_from_reciprocal(Rational(0)), inf);
  EXPECT_EQ(fracdiss::exponent_from_reciprocal(Rational(1, 4)), Exponent(4));
  EXPECT_THROW((void)inf.value(), fracdiss::Error);
}
