#include "fracdiss/besov.hpp"

#include <gsl/gsl_integration.h>
#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace fracdiss;

namespace {
const double pi = std::numbers::pi;
const double inf = std::numeric_limits<double>::infinity();

// Continuum band Delta_j of e^{-x^2/4}: (1/pi) int phi_j(xi) 2 sqrt(pi) e^{-xi^2} cos(x xi) d xi.
double continuum_band(const LPFamily& fam, int j, double x) {
  struct P { const LPFamily* fam; int j; double x; } prm{&fam, j, x};
  gsl_function fn;
  fn.function = [](double xi, void* vp) {
    auto* q = static_cast<P*>(vp);
    return q->fam->symbol(q->j, xi) * 2 * std::sqrt(pi) * std::exp(-xi * xi) * std::cos(q->x * xi);
  };
  fn.params = &prm;
  gsl_integration_workspace* w = gsl_integration_workspace_alloc(500);
  double res = 0.0, err = 0.0;
  gsl_integration_qag(&fn, std::ldexp(0.5, j), std::ldexp(2.0, j), 1e-14, 1e-10, 500, GSL_INTEG_GAUSS41, w, &res, &err);
  gsl_integration_workspace_free(w);
  return res / pi;
}
} // namespace

TEST(LittlewoodPaley, BumpProperties) {
  for (auto prof : {TransitionProfile::exp_glue, TransitionProfile::exp_sq_glue}) {
    for (double r = 0.0; r < 3.0; r += 0.01) {
      const double v = psi_hat(r, prof);
      EXPECT_GE(v, 0.0);
      EXPECT_LE(v, 1.0);
      if (r <= 1.0) { EXPECT_EQ(v, 1.0); }
      if (r >= 2.0) { EXPECT_EQ(v, 0.0); }
      if (r < 0.5 || r > 2.0) { EXPECT_EQ(phi_hat(r, prof), 0.0); }
    }
    EXPECT_EQ(phi_hat(1.0, prof), 1.0);
  }
}

TEST(LittlewoodPaley, FamilyConstruction) {
  const Grid g = make_grid(1, 512, 4 * pi);
  const auto fam = build_lp_family(g, -3, 5);
  EXPECT_EQ(fam.count(), 9);
  detail::for_each_mode(g, [&](std::size_t i, const Wavevector& xi, int, std::size_t) {
    for (int j = fam.j_min; j <= fam.j_max; ++j) {
      const double r = xi.norm();
      if (r < std::ldexp(0.5, j) || r > std::ldexp(2.0, j)) { EXPECT_EQ(fam.band(j)[i], 0.0); }
    }
  });
  EXPECT_THROW(build_lp_family(make_grid(1, 32, 4 * pi), 0, 10), Error);
  EXPECT_THROW(build_lp_family(g, 0, 3), Error);
}

TEST(LittlewoodPaley, PartitionOfUnityAtRandomLatticePoints) {
  const Grid g = make_grid(1, 4096, 64 * pi);
  const auto fam = default_lp_family(g);
  std::mt19937_64 rng(9);
  std::uniform_int_distribution<std::size_t> pick(1, g.spectral_size() - 1);
  int tested = 0;
  while (tested < 64) {
    const std::size_t i = pick(rng);
    const double r = i * g.wavenumber_unit();
    if (r < std::ldexp(1.0, fam.j_min) || r > std::ldexp(1.0, fam.j_max)) continue;
    double sum = 0.0;
    for (int j = fam.j_min; j <= fam.j_max; ++j) sum += fam.band(j)[i];
    EXPECT_NEAR(sum, 1.0, 1e-12);
    ++tested;
  }
}

TEST(LittlewoodPaley, BlocksOfSingleBandField) {
  const Grid g = make_grid(1, 1024, 8 * pi);
  const auto fam = default_lp_family(g);
  const int j0 = 2;
  const auto f = SpectralField::sample(g, [](double x) { return std::cos(4 * x); });
  for (int j = fam.j_min; j <= fam.j_max; ++j) {
    const auto b = dyadic_block(f, j, fam);
    if (j == j0) {
      for (std::size_t k = 0; k < g.size(); ++k) EXPECT_NEAR(b.values()[k], f.values()[k], 1e-12);
    } else if (std::abs(j - j0) >= 2) {
      EXPECT_LT(b.max_abs(), 1e-12);
    }
  }
  EXPECT_THROW(dyadic_block(f, fam.j_max + 1, fam), Error);
}

TEST(LittlewoodPaley, BlocksSumToField) {
  const Grid g = make_grid(1, 2048, 16 * pi);
  const auto fam = default_lp_family(g);
  const auto f = random_band_limited(g, 0.2, 30.0, 4);
  auto sum = SpectralField::zeros(g);
  for (int j = fam.j_min; j <= fam.j_max; ++j) sum = sum + dyadic_block(f, j, fam);
  for (std::size_t k = 0; k < g.size(); ++k) EXPECT_NEAR(sum.values()[k], f.values()[k], 1e-10);
}

TEST(LittlewoodPaley, WhiteNoiseBlocksStayInAnnulus) {
  const Grid g = make_grid(2, 64, 2 * pi);
  const auto fam = default_lp_family(g);
  std::mt19937_64 rng(1);
  std::normal_distribution<double> nd;
  std::vector<double> v(g.size());
  for (auto& x : v) x = nd(rng);
  const auto f = SpectralField::from_values(g, v);
  for (int j = fam.j_min; j <= fam.j_max; ++j) {
    const auto b = dyadic_block(f, j, fam);
    detail::for_each_mode(g, [&](std::size_t i, const Wavevector& xi, int, std::size_t) {
      if (xi.norm() < std::ldexp(0.5, j) * (1 - 1e-12) || xi.norm() > std::ldexp(2.0, j) * (1 + 1e-12)) {
        EXPECT_LT(std::abs(b.coeffs()[i]), 1e-14);
      }
    });
  }
}

TEST(LittlewoodPaley, AlmostOrthogonality) {
  const Grid g = make_grid(1, 2048, 16 * pi);
  const auto fam = default_lp_family(g);
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const auto f = random_band_limited(g, 0.3, 20.0, seed);
    double sum = 0.0;
    for (int j = fam.j_min; j <= fam.j_max; ++j) sum += std::pow(lebesgue_norm(dyadic_block(f, j, fam), 2.0), 2);
    const double ratio = sum / std::pow(lebesgue_norm(f, 2.0), 2);
    EXPECT_GE(ratio, 0.5);
    EXPECT_LE(ratio, 1.5);
  }
}

TEST(BesovDyadic, SingleBandAndZero) {
  const Grid g = make_grid(1, 1024, 8 * pi);
  const auto fam = default_lp_family(g);
  const BesovParams bp{-0.5, 4, inf, 1.0};
  const auto f = SpectralField::sample(g, [](double x) { return std::cos(4 * x); });
  EXPECT_NEAR(besov_norm_dyadic(f, bp, fam), std::pow(2.0, 2 * -0.5) * lebesgue_norm(f, 4), 1e-10);
  EXPECT_EQ(besov_norm_dyadic(SpectralField::zeros(g), bp, fam), 0.0);
}

TEST(BesovDyadic, InsufficientCoverageRejected) {
  const Grid g = make_grid(1, 1024, 8 * pi);
  const auto fam = build_lp_family(g, -1, 4);
  const auto f = SpectralField::sample(g, [](double x) { return std::cos(60 * x); });
  EXPECT_THROW(besov_norm_dyadic(f, BesovParams{}, fam), Error);
}

TEST(BesovDyadic, GaussianMatchesContinuumOracle) {
  const Grid g = make_grid(1, 4096, 64 * pi);
  const auto fam = default_lp_family(g);
  const BesovParams bp{-0.5, 4, inf, 1.0};
  const auto f = SpectralField::sample(g, [](double x) { return std::exp(-x * x / 4); });
  const auto bands = band_norms(f, bp, fam);
  double oracle_sup = 0.0;
  for (int j = -2; j <= 2; ++j) {
    // Band j lives on spatial scale 2^{-j}; sample its |.|^4 on a window wide enough for it.
    const double width = 40.0 * std::ldexp(1.0, -j) + 20.0;
    const double h = 0.05;
    double acc = 0.0;
    for (double x = -width; x <= width; x += h) acc += std::pow(std::abs(continuum_band(fam, j, x)), 4) * h;
    const double oracle = std::pow(2.0, j * bp.s) * std::pow(acc, 0.25);
    EXPECT_NEAR(bands[j - fam.j_min] / oracle, 1.0, 1e-4) << "j=" << j;
    oracle_sup = std::max(oracle_sup, oracle);
  }
  EXPECT_NEAR(besov_norm_dyadic(f, bp, fam) / oracle_sup, 1.0, 1e-4);
}

TEST(BesovSemigroup, BasicContract) {
  const Grid g = make_grid(1, 1024, 8 * pi);
  const auto fam = default_lp_family(g);
  const auto tg = semigroup_time_grid(fam, 1.0);
  EXPECT_EQ(besov_norm_semigroup(SpectralField::zeros(g), BesovParams{}, tg), 0.0);
  const auto f = SpectralField::sample(g, [](double x) { return std::exp(-x * x); });
  EXPECT_THROW(besov_norm_semigroup(f, BesovParams{0.0, 4, inf, 1.0}, tg), Error);
  EXPECT_THROW(besov_norm_semigroup(f, BesovParams{}, log_grid(0.1, 1.0, 16)), Error);
  EXPECT_THROW(equivalence_ratio(SpectralField::zeros(g), BesovParams{}, fam, tg), Error);
}

TEST(BesovSemigroup, SingleBandPeakTime) {
  const Grid g = make_grid(1, 1024, 8 * pi);
  const auto fam = default_lp_family(g);
  const BesovParams bp{-0.5, 4, inf, 1.0};
  const int j0 = 2;
  const auto f = SpectralField::sample(g, [](double x) { return std::cos(4 * x); });
  const auto tg = semigroup_time_grid(fam, bp.alpha, 64);
  const auto w = semigroup_weighted_norms(f, bp, tg);
  const auto imax = std::max_element(w.begin(), w.end()) - w.begin();
  const double t_peak = tg[imax];
  const double t_scale = std::pow(2.0, -2 * bp.alpha * j0);
  EXPECT_GT(t_peak, t_scale / 10);
  EXPECT_LT(t_peak, t_scale * 10);
  // Closed form: sup_t t^{1/4} e^{-16 t} = (1/64)^{1/4} e^{-1/4}.
  EXPECT_NEAR(*std::max_element(w.begin(), w.end()) / lebesgue_norm(f, 4),
              std::pow(1.0 / 64, 0.25) * std::exp(-0.25), 1e-3);
  const double ratio = besov_norm_dyadic(f, bp, fam) / besov_norm_semigroup(f, bp, tg);
  EXPECT_GT(ratio, 0.25);
  EXPECT_LT(ratio, 4.0);
}

TEST(BesovSemigroup, DilationLaw) {
  // ||f(lambda .)|| = lambda^{s - n/p} ||f|| for the homogeneous norm.
  const Grid g = make_grid(1, 4096, 64 * pi);
  const auto fam = default_lp_family(g);
  const BesovParams bp{-0.5, 4, inf, 1.0};
  const auto tg = semigroup_time_grid(fam, bp.alpha);
  double base = 0.0;
  for (double lam : {1.0, 2.0, 4.0}) {
    const auto f = SpectralField::sample(g, [&](double x) { return std::exp(-lam * lam * x * x / 4); });
    const double v = besov_norm_semigroup(f, bp, tg);
    if (lam == 1.0) base = v;
    EXPECT_NEAR(v / base / std::pow(lam, bp.s - 1.0 / bp.p), 1.0, 0.05) << lam;
  }
}

TEST(BesovEquivalence, CorpusRatios) {
  const Grid g = make_grid(1, 4096, 64 * pi);
  const auto corpus = besov_corpus(g, 42);
  ASSERT_EQ(corpus.size(), 10u);
  for (double alpha : {0.75, 1.0}) {
    const BesovParams bp{-0.5, 4, inf, alpha};
    std::vector<double> first;
    for (auto prof : {TransitionProfile::exp_glue, TransitionProfile::exp_sq_glue}) {
      const auto fam = default_lp_family(g, prof);
      const auto tg = semigroup_time_grid(fam, alpha);
      std::vector<double> ratios;
      for (const auto& f : corpus) ratios.push_back(equivalence_ratio(f, bp, fam, tg));
      const auto [lo, hi] = std::minmax_element(ratios.begin(), ratios.end());
      EXPECT_GE(*lo, 0.1);
      EXPECT_LE(*hi, 10.0);
      EXPECT_LT(*hi / *lo, 8.0);
      if (first.empty()) {
        first = ratios;
      } else {
        for (std::size_t i = 0; i < ratios.size(); ++i) {
          EXPECT_LT(ratios[i] / first[i], 2.0);
          EXPECT_GT(ratios[i] / first[i], 0.5);
        }
      }
    }
  }
}

TEST(BesovEquivalence, Homogeneity) {
  const Grid g = make_grid(1, 1024, 16 * pi);
  const auto fam = default_lp_family(g);
  const auto tg = semigroup_time_grid(fam, 1.0);
  const BesovParams bp{-0.5, 4, inf, 1.0};
  const auto f = SpectralField::sample(g, [](double x) { return std::exp(-x * x) * std::cos(3 * x); });
  const auto f2 = -2.0 * f;
  EXPECT_NEAR(besov_norm_dyadic(f2, bp, fam), 2 * besov_norm_dyadic(f, bp, fam), 1e-12);
  EXPECT_NEAR(besov_norm_semigroup(f2, bp, tg), 2 * besov_norm_semigroup(f, bp, tg), 1e-12);
  EXPECT_NEAR(equivalence_ratio(f2, bp, fam, tg), equivalence_ratio(f, bp, fam, tg), 1e-12);
  // The q < inf path is finite and homogeneous too.
  const BesovParams bq{-0.5, 4, 2, 1.0};
  EXPECT_NEAR(besov_norm_semigroup(f2, bq, tg), 2 * besov_norm_semigroup(f, bq, tg), 1e-12);
  EXPECT_NEAR(besov_norm_dyadic(f2, bq, fam), 2 * besov_norm_dyadic(f, bq, fam), 1e-12);
}
