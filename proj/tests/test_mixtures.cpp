#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "fdrexp/mixtures.hpp"
#include "fdrexp/numerics.hpp"
#include "oracles.hpp"

using namespace fdrexp;

namespace {

MixingDistribution from_raw(const oracle::RawMixture& m) { return {m.support, m.weights}; }

}  // namespace

TEST(MixingDistribution, RejectsInvalidInput) {
  EXPECT_THROW(MixingDistribution({}, {}), DomainError);
  EXPECT_THROW(MixingDistribution({0.5}, {1.0}), DomainError);
  EXPECT_THROW(MixingDistribution({1.0, 2.0}, {0.5, 0.6}), DomainError);
  EXPECT_THROW(MixingDistribution({1.0, 2.0}, {1.5, -0.5}), DomainError);
  EXPECT_THROW(MixingDistribution({2e12}, {1.0}), DomainError);
}

TEST(MixingDistribution, SortsMergesAndDropsZeros) {
  const MixingDistribution f({5.0, 1.0, 5.0, 3.0}, {0.2, 0.5, 0.3, 0.0});
  ASSERT_EQ(f.size(), 2u);
  EXPECT_EQ(f.support()[0], 1.0);
  EXPECT_EQ(f.support()[1], 5.0);
  EXPECT_DOUBLE_EQ(f.weights()[1], 0.5);
}

TEST(MakeTwoPoint, Examples) {
  const auto a = make_two_point(0.0, 10.0);
  EXPECT_TRUE(a.is_null());
  const auto b = make_two_point(0.01, 10.0);
  ASSERT_EQ(b.size(), 2u);
  EXPECT_EQ(b.support()[1], 10.0);
  EXPECT_DOUBLE_EQ(b.weights()[0], 0.99);
  EXPECT_DOUBLE_EQ(b.weights()[1], 0.01);
  const auto c = make_two_point(0.5, 1.0);
  EXPECT_TRUE(c.is_null());
  EXPECT_EQ(c.weights()[0], 1.0);
  EXPECT_EQ(make_two_point(1.0, 4.0), MixingDistribution::point_mass(4.0));
  EXPECT_THROW(make_two_point(-0.1, 2.0), DomainError);
  EXPECT_THROW(make_two_point(0.1, 0.9), DomainError);
}

TEST(CalibratedTwoPoint, Examples) {
  EXPECT_NEAR(calibrated_two_point(SparsityBall(1.0, 1e-3), 10.0).weights()[1],
              1e-3 / std::log(10.0), 1e-18);
  EXPECT_NEAR(calibrated_two_point(SparsityBall(1.0, 1e-3), std::exp(1.0)).weights()[1], 1e-3, 1e-16);
  EXPECT_NEAR(calibrated_two_point(SparsityBall(0.5, 1e-2), std::exp(4.0)).weights()[1], 0.05, 1e-15);
  EXPECT_THROW(calibrated_two_point(SparsityBall(1.0, 0.5), 1.1), DomainError);
}

TEST(SparsityBall, Validation) {
  EXPECT_THROW(SparsityBall(0.0, 0.1), DomainError);
  EXPECT_THROW(SparsityBall(2.0, 0.1), DomainError);
  EXPECT_THROW(SparsityBall(1.0, 0.0), DomainError);
  EXPECT_DOUBLE_EQ(SparsityBall(0.5, 0.04).budget(), 0.2);
}

TEST(Survival, Examples) {
  EXPECT_NEAR(mixture_survival(ExpScaleMixture(MixingDistribution::point_mass(1.0)), 5.0),
              std::exp(-5.0), 1e-17);
  const ExpScaleMixture g(make_two_point(0.01, 10.0));
  EXPECT_NEAR(g.survival(5.0), 0.99 * std::exp(-5.0) + 0.01 * std::exp(-0.5), 1e-16);
  EXPECT_NEAR(g.survival(5.0), 1.27359e-2, 1e-6);
  EXPECT_EQ(g.survival(0.0), 1.0);
  EXPECT_THROW(g.survival(-1.0), DomainError);
  EXPECT_NEAR(g.cdf(5.0) + g.survival(5.0), 1.0, 1e-15);
}

TEST(Survival, SandwichedBetweenExtremeComponents) {
  std::mt19937_64 gen(5);
  for (int rep = 0; rep < 100; ++rep) {
    const auto f = from_raw(oracle::random_mixture(gen));
    const ExpScaleMixture g(f);
    for (double t : {0.1, 1.0, 3.0, 10.0, 50.0}) {
      const double s = g.survival(t);
      EXPECT_GE(s, std::exp(-t));
      EXPECT_LE(s, std::exp(-t / f.max_mean()));
    }
  }
}

TEST(Density, Examples) {
  EXPECT_NEAR(mixture_density(ExpScaleMixture(MixingDistribution::point_mass(1.0)), 1.0),
              std::exp(-1.0), 1e-16);
  const ExpScaleMixture g(MixingDistribution({1.0, 2.0}, {0.5, 0.5}));
  EXPECT_NEAR(g.density(1e-12), 0.75, 1e-11);
  EXPECT_THROW(g.density(0.0), DomainError);
  boost::math::quadrature::exp_sinh<double> integrator;
  EXPECT_NEAR(integrator.integrate([&](double x) { return x > 0.0 ? g.density(x) : 0.75; }), 1.0,
              1e-10);
}

TEST(Sampling, DeterministicAndDegenerate) {
  const auto f = make_two_point(0.3, 4.0);
  const auto a = sample_mixture(f, 1000, 99);
  const auto b = sample_mixture(f, 1000, 99);
  EXPECT_EQ(a.x, b.x);
  EXPECT_EQ(a.mu, b.mu);
  const auto null = sample_mixture(MixingDistribution::point_mass(1.0), 500, 3);
  for (double m : null.mu) EXPECT_EQ(m, 1.0);
  EXPECT_THROW(sample_mixture(f, 0, 1), DomainError);
}

TEST(Sampling, SignalFractionWithinFourSe) {
  const auto batch = sample_mixture(make_two_point(0.01, 10.0), 1000000, 2024);
  const auto hits = std::count(batch.mu.begin(), batch.mu.end(), 10.0);
  EXPECT_NEAR(static_cast<double>(hits) / 1e6, 0.01, 4e-4);
}

TEST(Sampling, EmpiricalSurvivalWithinMassartBudget) {
  // sup |Ḡ_n - Ḡ| ≤ 5/√n in at least 99% of 200 runs at n = 10^5.
  const auto f = MixingDistribution({1.0, 3.0, 20.0}, {0.9, 0.07, 0.03});
  const ExpScaleMixture g(f);
  const std::size_t n = 100000;
  int within = 0;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const auto batch = sample_mixture(f, n, derive_seed(77, seed));
    within += empirical_ks_distance(batch, g) <= 5.0 / std::sqrt(static_cast<double>(n));
  }
  EXPECT_GE(within, 198);
}

TEST(KsDistance, ClosedFormExample) {
  const auto f = make_two_point(0.01, 10.0);
  EXPECT_NEAR(ks_argmax(f), 10.0 * std::log(10.0) / 9.0, 1e-12);
  EXPECT_NEAR(ks_distance_to_exp(f), 6.968e-3, 1e-6);
  EXPECT_EQ(ks_distance_to_exp(MixingDistribution::point_mass(1.0)), 0.0);
  EXPECT_GT(ks_distance_to_exp(MixingDistribution::point_mass(1e9)), 0.999);
}

TEST(KsDistance, MatchesDenseGridOnRandomMixtures) {
  std::mt19937_64 gen(17);
  for (int rep = 0; rep < 100; ++rep) {
    const auto raw = oracle::random_mixture(gen);
    const double ks = ks_distance_to_exp(from_raw(raw));
    EXPECT_GT(ks, 0.0);
    EXPECT_NEAR(ks, oracle::ks_distance_grid(raw.support, raw.weights, 20000), 1e-6);
    EXPECT_GE(ks, oracle::ks_distance_grid(raw.support, raw.weights, 20000) - 1e-15);
  }
}

TEST(LogMoment, Examples) {
  EXPECT_EQ(log_moment(MixingDistribution::point_mass(1.0), 0.7), 0.0);
  const SparsityBall ball(1.3, 1e-2);
  EXPECT_NEAR(log_moment(calibrated_two_point(ball, 6.0), 1.3), ball.budget(), 1e-15);
  EXPECT_NEAR(log_moment(MixingDistribution({1.0, std::exp(2.0)}, {0.5, 0.5}), 2.0), 2.0, 1e-14);
}

TEST(LogMoment, LinearInWeights) {
  std::mt19937_64 gen(23);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int rep = 0; rep < 50; ++rep) {
    const auto f1 = from_raw(oracle::random_mixture(gen));
    const auto f2 = from_raw(oracle::random_mixture(gen));
    const double alpha = unit(gen);
    const double p = 0.2 + 1.7 * unit(gen);
    EXPECT_NEAR(log_moment(blend(alpha, f1, f2), p),
                alpha * log_moment(f1, p) + (1.0 - alpha) * log_moment(f2, p), 1e-12);
  }
}

TEST(EmpiricalSurvival, Examples) {
  SampleBatch batch;
  batch.x = {3.0, 1.0, 0.5, 0.2};
  EXPECT_EQ(empirical_survival(batch, 0.0), 1.0);
  EXPECT_EQ(empirical_survival(batch, 1.0), 0.5);
  EXPECT_EQ(empirical_survival(batch, 10.0), 0.0);
  EXPECT_THROW(empirical_survival(SampleBatch{}, 1.0), DomainError);
}
