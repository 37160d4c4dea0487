#include "fracdiss/verify.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace fracdiss;

namespace {

double gauss_profile(double, double x, double) { return std::exp(-x * x); }

Triplet triplet(int q, int p, int r, Rational alpha) { return Triplet{q, p, r, ExponentContext{1, alpha}}; }

} // namespace

TEST(Theta, DefiningRelationHoldsExactly) {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<int> small(1, 9);
  for (int i = 0; i < 2000; ++i) {
    const Rational r(small(rng) + 1, small(rng));
    const Rational p = r + Rational(small(rng), small(rng));
    const Rational b(small(rng), small(rng));
    const Rational th = interpolation_theta(p, r, b);
    EXPECT_EQ(Rational(1) / (r * (b + Rational(1))), th / r + (Rational(1) - th) / p);
  }
  EXPECT_EQ(interpolation_theta(4, 2, 1), Rational(0));
  EXPECT_EQ(interpolation_theta(8, 2, 1), Rational(1, 3));
  const auto [t1, t2] = interpolation_thetas(12, 2, 4, 2);
  EXPECT_EQ(t1, Rational(1, 25));
  EXPECT_EQ(t2, Rational(1, 5));
}

TEST(Theta, TIndexComparisonIsAnEqualityOnAdmissibleTriplets) {
  // For admissible (q, p, r), 1 - (b+1)(1-theta)/q and 1 - nb/(2 a r) coincide
  // identically: (b+1)(1-theta)/q = (b+1)/q - (b+1) theta/q and theta/q =
  // (n/2a) theta (1/r - 1/p) = (n/2a)(1/(r(b+1)) - 1/p).
  int checked = 0;
  for (const Rational alpha : {Rational(1, 2), Rational(3, 4), Rational(1), Rational(3, 2)})
    for (const Rational b : {Rational(1), Rational(2), Rational(4, 3)})
      for (const Rational r : {Rational(3, 2), Rational(2), Rational(3)})
        for (const auto& t : sample_triplets(1, alpha, r, true, 5)) {
          if (t.q.is_infinite() || t.p.value() <= r) continue;
          const auto gap = tindex_gap(t, b);
          ASSERT_TRUE(gap.has_value());
          EXPECT_EQ(*gap, Rational(0));
          ++checked;
        }
  EXPECT_GT(checked, 100);
  EXPECT_FALSE(tindex_gap(Triplet{Exponent::infinity(), 2, 2, ExponentContext{1, 1}}, 2).has_value());
}

TEST(DuhamelScaling, BaseCaseExponentHalf) {
  const auto T = log_grid(0.01, 1.0, 16);
  const auto checks = check_duhamel_scaling(gauss_profile, triplet(8, 4, 2, 1), 2, 0, T, DuhamelBranch::below);
  ASSERT_EQ(checks.size(), 2u);
  for (const auto& c : checks) {
    EXPECT_DOUBLE_EQ(c.predicted_exponent, 0.5);
    EXPECT_TRUE(c.pass) << c.name << " fitted " << c.fitted_exponent;
    EXPECT_TRUE(std::isfinite(c.ratio_sup));
  }
}

TEST(DuhamelScaling, ConvectiveAndSecondOrderVariants) {
  const auto T = log_grid(0.01, 1.0, 8);
  const auto d1 = check_duhamel_scaling(gauss_profile, triplet(12, 4, 2, Rational(3, 2)), 2, 1, T, DuhamelBranch::below);
  for (const auto& c : d1) {
    EXPECT_NEAR(c.predicted_exponent, 1.0 / 3, 1e-15);
    EXPECT_TRUE(c.pass) << c.fitted_exponent;
  }
  const auto d2 = check_duhamel_scaling(gauss_profile, triplet(16, 4, 2, 2), 1, 2, T, DuhamelBranch::above);
  for (const auto& c : d2) {
    EXPECT_NEAR(c.predicted_exponent, 3.0 / 8, 1e-15);
    EXPECT_TRUE(c.pass) << c.fitted_exponent;
    ASSERT_TRUE(c.theta.has_value());
    EXPECT_EQ(*c.theta, Rational(0));
  }
}

TEST(DuhamelScaling, TimeDependentProfile) {
  auto f = [](double s, double x, double) { return (1 + s) * std::exp(-x * x) * std::cos(x); };
  const auto checks = check_duhamel_scaling(f, triplet(8, 4, 2, 1), 2, 0, log_grid(0.01, 1.0, 8), DuhamelBranch::below);
  for (const auto& c : checks) EXPECT_TRUE(c.pass) << c.fitted_exponent;
}

TEST(DuhamelScaling, BranchMismatchAndPreconditions) {
  const auto T = log_grid(0.01, 1.0, 8);
  EXPECT_THROW(check_duhamel_scaling(gauss_profile, triplet(8, 4, 2, 1), 2, 0, T, DuhamelBranch::above), Error);
  EXPECT_THROW(check_duhamel_scaling(gauss_profile, triplet(8, 4, 2, 1), 2, 0, {0.1, 0.2, 0.3, 0.4},
                                     DuhamelBranch::below),
               Error);
  EXPECT_THROW(check_duhamel_scaling(gauss_profile, triplet(8, 5, 2, 1), 2, 0, T, DuhamelBranch::below), Error);
}

TEST(DuhamelScaling, NormsVanishAsTShrinks) {
  const auto checks =
      check_duhamel_scaling(gauss_profile, triplet(8, 4, 2, 1), 2, 0, log_grid(1e-4, 1e-2, 4), DuhamelBranch::below);
  for (const auto& c : checks) EXPECT_LT(c.lhs_values.front(), 1e-2 * c.lhs_values.back());
}

TEST(DuhamelScaling, EmpiricalConstantStableUnderRefinement) {
  const auto T = log_grid(0.01, 1.0, 4);
  FrozenForcingSetup coarse, fine;
  coarse.grid = make_grid(1, 2048, 40.0);
  fine.grid = make_grid(1, 4096, 40.0);
  const auto a = check_duhamel_scaling(gauss_profile, triplet(8, 4, 2, 1), 2, 0, T, DuhamelBranch::below, coarse);
  const auto b = check_duhamel_scaling(gauss_profile, triplet(8, 4, 2, 1), 2, 0, T, DuhamelBranch::below, fine);
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double q = a[i].ratio_sup / b[i].ratio_sup;
    EXPECT_LT(std::max(q, 1 / q), 2.0);
  }
}

TEST(BlowupCheck, PredictedRates) {
  EXPECT_DOUBLE_EQ(predicted_blowup_rate(1, 1.0, 4.0, 0.0, 4.0), 1.0 / 8);
  EXPECT_DOUBLE_EQ(predicted_blowup_rate(1, 1.0, 2.0, 1.0, std::numeric_limits<double>::infinity()), 0.25);
}

TEST(BlowupCheck, OdeSanity) {
  const Grid g = make_grid(1, 16, 1.0);
  const double u0 = 2.0;
  SolveConfig c;
  c.method = Method::etd;
  c.adaptive = true;
  c.T = 10;
  c.M = 16;
  c.cfl = 0.01;
  const auto tr = etd_solve({g, 1.0, 1.0, {NonlinearTerm::power(3, 1)}},
                            SpectralField::sample(g, [&](double) { return u0; }), c);
  for (const auto& ck : check_ode_blowup(tr, 3.0, u0)) EXPECT_TRUE(ck.pass) << ck.name << " " << ck.fitted_exponent;
}

TEST(EnergyCheck, DefocusingRunAndRejections) {
  const Grid g = make_grid(1, 512, 20.0);
  const auto phi = SpectralField::sample(g, [](double x) { return std::exp(-x * x); });
  SolveConfig c;
  c.method = Method::etd;
  c.T = 1.0;
  c.M = 256;
  const auto tr = etd_solve({g, 0.6, 1.0, {NonlinearTerm::power(1, -1)}}, phi, c);
  const auto rep = check_energy_identity(tr, 0.6, 1.0);
  EXPECT_LT(rep.max_residual, 1e-3);
  EXPECT_TRUE(rep.l2_nonincreasing);
  const auto foc = etd_solve({g, 0.6, 1.0, {NonlinearTerm::power(1, 1)}}, phi, c);
  EXPECT_THROW(check_energy_identity(foc, 0.6, 1.0), Error);
  c.M = 32;
  const auto sparse = etd_solve({g, 0.6, 1.0, {NonlinearTerm::power(1, -1)}}, phi, c);
  EXPECT_THROW(check_energy_identity(sparse, 0.6, 1.0), Error);
}

TEST(EnergyCheck, LinearAndZeroRuns) {
  const Grid g = make_grid(1, 256, 20.0);
  SolveConfig c;
  c.method = Method::etd;
  c.T = 0.25;
  c.M = 512;
  const auto phi = SpectralField::sample(g, [](double x) { return std::exp(-x * x / 4); });
  const auto lin = etd_solve({g, 0.6, 1.0, {}}, phi, c);
  EXPECT_LT(check_energy_identity(lin, 0.6, 1.0).max_residual, 1e-6);
  const auto zero = etd_solve({g, 0.6, 1.0, {NonlinearTerm::power(1, -1)}}, SpectralField::zeros(g), c);
  EXPECT_EQ(check_energy_identity(zero, 0.6, 1.0).max_residual, 0.0);
}

TEST(SmallData, CriticalFocusingRunStaysSmall) {
  const Grid g = make_grid(1, 1024, 100.0);
  const auto profile = SpectralField::sample(g, [](double x) { return std::exp(-x * x); });
  SolveConfig c;
  c.T = 10.0;
  c.M = 256;
  c.r = 4.0 / 3;
  c.p = 3.5;
  c.q = 42.0 / 13;
  c.grading = default_grading(c.q, 2.0);
  const auto rep = check_smalldata_global({g, 0.75, 1.0, {NonlinearTerm::power(2, 1)}}, profile, {0.0, 0.05}, c);
  ASSERT_EQ(rep.entries.size(), 2u);
  EXPECT_TRUE(rep.entries[0].bounded);
  EXPECT_TRUE(rep.entries[1].completed);
  EXPECT_TRUE(rep.entries[1].bounded);
  EXPECT_TRUE(rep.entries[1].early_monotone);
  ASSERT_TRUE(rep.largest_global_amplitude.has_value());
  EXPECT_DOUBLE_EQ(*rep.largest_global_amplitude, 0.05);
}

TEST(SmallData, TwoTermRun) {
  const Grid g = make_grid(1, 1024, 100.0);
  const auto profile = SpectralField::sample(g, [](double x) { return std::exp(-x * x); });
  SolveConfig c;
  c.T = 10.0;
  c.M = 256;
  c.r = 2;
  c.p = 6;
  c.q = 6;
  c.grading = default_grading(c.q, 4.0);
  const ProblemSpec ps{g, 1.0, 1.0, {NonlinearTerm::power(4, 1), NonlinearTerm::power(2, 1)}};
  const auto rep = check_smalldata_global(ps, profile, {0.05}, c);
  EXPECT_TRUE(rep.entries[0].completed);
  EXPECT_TRUE(rep.entries[0].bounded);
}

TEST(HighFrequency, BesovNormDecaysWhileLebesgueNormIsFixed) {
  const Grid g = make_grid(1, 2048, 16 * std::numbers::pi);
  const auto rep = check_besov_vs_lebesgue_smallness(g, HighFrequencyParams{});
  EXPECT_DOUBLE_EQ(rep.sigma, 0.75);
  EXPECT_LT(rep.lr0_spread, 1e-8);
  for (double r : rep.doubling_ratios) EXPECT_NEAR(r / std::pow(2.0, -0.75), 1.0, 0.1);
  EXPECT_TRUE(rep.check.pass);
}

TEST(HighFrequency, BaselineAndRejection) {
  const Grid g = make_grid(1, 512, 4 * std::numbers::pi);
  HighFrequencyParams hp;
  hp.ks = {0, 0};
  const auto rep = check_besov_vs_lebesgue_smallness(g, hp);
  EXPECT_DOUBLE_EQ(rep.doubling_ratios.at(0), 1.0);
  hp.p = 2.0;  // sigma = 1 - 1/2 > 0 still fine
  EXPECT_NO_THROW(check_besov_vs_lebesgue_smallness(g, hp));
  hp.b = 4.0;  // sigma = 1/2 - 1/2 = 0
  EXPECT_THROW(check_besov_vs_lebesgue_smallness(g, hp), Error);
}
