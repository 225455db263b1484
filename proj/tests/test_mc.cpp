#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "fdrexp/mc.hpp"

using namespace fdrexp;

TEST(Trial, DeterministicPerSeed) {
  const auto f = make_two_point(0.02, 8.0);
  const FdrConfig cfg(0.25);
  EXPECT_EQ(run_trial(f, 2000, cfg, 11), run_trial(f, 2000, cfg, 11));
  EXPECT_NE(run_trial(f, 2000, cfg, 11).loss, run_trial(f, 2000, cfg, 12).loss);
}

TEST(Trial, SmallestCase) {
  const auto r = run_trial(make_two_point(0.1, 10.0), 10, FdrConfig(0.5), 1);
  EXPECT_GE(r.loss, 0.0);
  EXPECT_TRUE(std::isfinite(r.threshold.value()));
  EXPECT_GE(r.fdp, 0.0);
  EXPECT_LE(r.fdp, 1.0);
}

TEST(Trial, NoNullsMeansNoFalseDiscoveries) {
  const std::vector<double> mu(500, 50.0);
  const auto r = frequentist_trial(mu, FdrConfig(0.5), 3);
  EXPECT_GT(r.k_fdr, 0u);
  EXPECT_EQ(r.fdp, 0.0);
  EXPECT_THROW(frequentist_trial({}, FdrConfig(0.5), 3), DomainError);
  EXPECT_THROW(frequentist_trial({0.5}, FdrConfig(0.5), 3), DomainError);
}

TEST(Trial, PureNullIsCappedOrHasOnlyFalseDiscoveries) {
  const std::vector<double> mu(1000, 1.0);
  for (std::uint64_t s = 0; s < 20; ++s) {
    const auto r = frequentist_trial(mu, FdrConfig(0.1), s);
    EXPECT_TRUE(r.k_fdr == 0 || r.fdp == 1.0);
    if (r.capped) EXPECT_DOUBLE_EQ(r.threshold.value(), std::log(1000.0 / 0.1));
  }
}

TEST(Trial, NullFdpControlled) {
  // Under the global null mean FDP equals P(any discovery) ≤ q.
  const FdrConfig cfg(0.2);
  const auto f = MixingDistribution::point_mass(1.0);
  std::vector<double> fdp;
  for (std::uint64_t s = 0; s < 400; ++s) fdp.push_back(run_trial(f, 500, cfg, derive_seed(5, s)).fdp);
  const auto m = detail::mean_and_error(fdp);
  EXPECT_LE(m.mean, cfg.q() + 3.0 * m.se);
}

TEST(Trial, FrequentistAgreesWithBayesianOnMatchedCounts) {
  const double eps = 0.02, mu = 15.0;
  const std::size_t n = 5000;
  const FdrConfig cfg(0.25);
  std::vector<double> means(n, 1.0);
  for (std::size_t i = 0; i < static_cast<std::size_t>(eps * n); ++i) means[i] = mu;
  std::vector<double> freq, bayes;
  for (std::uint64_t s = 0; s < 200; ++s) {
    freq.push_back(frequentist_trial(means, cfg, derive_seed(1, s)).loss);
    bayes.push_back(run_trial(make_two_point(eps, mu), n, cfg, derive_seed(2, s)).loss);
  }
  const auto a = detail::mean_and_error(freq);
  const auto b = detail::mean_and_error(bayes);
  EXPECT_NEAR(a.mean, b.mean, 3.0 * std::hypot(a.se, b.se));
}

TEST(FixedThresholdLoss, MatchesThresholdBayesRisk) {
  const auto f = make_two_point(0.05, 12.0);
  for (double t : {2.0, 6.0}) {
    std::vector<double> losses;
    for (std::uint64_t s = 0; s < 200; ++s) losses.push_back(fixed_threshold_loss(f, 5000, t, s));
    const auto m = detail::mean_and_error(losses);
    EXPECT_NEAR(m.mean, threshold_bayes_risk(t, f).total, 5.0 * m.se) << "t=" << t;
  }
}

TEST(Helpers, MeanErrorAndMedian) {
  const auto m = detail::mean_and_error({1.0, 2.0, 3.0, 4.0});
  EXPECT_DOUBLE_EQ(m.mean, 2.5);
  EXPECT_NEAR(m.se, std::sqrt(5.0 / 3.0 / 4.0), 1e-15);
  EXPECT_EQ(detail::mean_and_error({7.0}).se, 0.0);
  EXPECT_EQ(detail::median({3.0, 1.0, 2.0}), 2.0);
  EXPECT_EQ(detail::median({4.0, 1.0, 2.0, 3.0}), 2.5);
}

TEST(ParallelFor, PropagatesErrors) {
  EXPECT_THROW(parallel_for(10, 4, [](std::size_t i) {
                 if (i == 7) throw NumericalError("boom");
               }),
               NumericalError);
}

TEST(RiskCurve, ParallelMatchesSerialAndShape) {
  const SparsityBall ball(1.0, 0.1);
  const std::vector<double> qs{0.1, 0.5};
  const std::vector<double> mus{1.05, 3.0, 10.0};
  const auto serial = risk_curve(ball, qs, mus, 400, 4, 99, 1);
  const auto parallel = risk_curve(ball, qs, mus, 400, 4, 99, 3);
  ASSERT_EQ(serial.size(), 6u);
  for (std::size_t i = 0; i < serial.size(); ++i) {
    EXPECT_EQ(serial[i].q, qs[i / 3]);
    EXPECT_EQ(serial[i].mu, mus[i % 3]);
    if (std::isnan(serial[i].mean_loss)) {
      EXPECT_TRUE(std::isnan(parallel[i].mean_loss));
    } else {
      EXPECT_EQ(serial[i].mean_loss, parallel[i].mean_loss);
      EXPECT_EQ(serial[i].mean_fdp, parallel[i].mean_fdp);
    }
  }
  // μ = 1.05 needs ε > 1 at this η: reported as NaN.
  EXPECT_TRUE(std::isnan(serial[0].mean_loss));
  EXPECT_FALSE(std::isnan(serial[1].mean_loss));
  EXPECT_THROW(risk_curve(ball, qs, mus, 400, 0, 1), DomainError);
  EXPECT_THROW(risk_curve(ball, {1.5}, mus, 400, 1, 1), DomainError);
}

TEST(Convergence, ShrinksWithN) {
  const auto f = make_two_point(0.05, 10.0);
  const auto r = convergence_experiment(f, FdrConfig(0.5), {500, 5000, 50000}, 40, 7, 2);
  ASSERT_EQ(r.rows.size(), 3u);
  EXPECT_GT(r.rows[0].median_abs_dev, r.rows[2].median_abs_dev);
  EXPECT_LT(r.slope, -0.2);
  EXPECT_NEAR(r.target, fdr_functional(ExpScaleMixture(f), FdrConfig(0.5)), 0.0);
  const auto again = convergence_experiment(f, FdrConfig(0.5), {500, 5000, 50000}, 40, 7, 1);
  EXPECT_EQ(again.slope, r.slope);
}

TEST(Convergence, RejectsBadInput) {
  const auto f = make_two_point(0.05, 10.0);
  EXPECT_THROW(convergence_experiment(MixingDistribution::point_mass(1.0), FdrConfig(0.5), {1, 2, 3}, 2, 1),
               DegenerateMixtureError);
  EXPECT_THROW(convergence_experiment(f, FdrConfig(0.5), {100, 1000}, 2, 1), DomainError);
  EXPECT_THROW(convergence_experiment(f, FdrConfig(0.5), {100, 100, 1000}, 2, 1), DomainError);
}
