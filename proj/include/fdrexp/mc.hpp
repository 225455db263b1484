#pragma once

// Seeded Monte Carlo harness. Every trial draws from its own substream
// derive_seed(master, index), so results depend only on (master, index) and
// never on execution order; aggregation folds trials in index order.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <functional>
#include <thread>
#include <vector>

#include "fdrexp/errors.hpp"
#include "fdrexp/fdr.hpp"
#include "fdrexp/mixtures.hpp"
#include "fdrexp/numerics.hpp"
#include "fdrexp/risk.hpp"
#include "fdrexp/rng.hpp"

namespace fdrexp {

struct TrialReport {
  double loss = 0.0;
  Threshold threshold = Threshold::infinite();
  std::size_t k_fdr = 0;
  double fdp = 0.0;
  bool capped = false;
  std::uint64_t seed = 0;

  friend bool operator==(const TrialReport&, const TrialReport&) = default;
};

struct CurvePoint {
  double q = 0.0;
  double mu = 1.0;
  double eps = 0.0;
  double mean_loss = 0.0;
  double se_loss = 0.0;
  double mean_fdp = 0.0;
  double se_fdp = 0.0;
  std::size_t reps = 0;
  std::size_t n = 0;
  std::uint64_t seed = 0;
};

struct ConvergenceRow {
  std::size_t n = 0;
  double median_abs_dev = 0.0;
  std::size_t reps = 0;
  std::uint64_t seed = 0;
};

struct ConvergenceResult {
  double slope = 0.0;
  double target = 0.0;  // T_q(G)
  std::vector<ConvergenceRow> rows;
};

/// Runs body(i) for i in [0, count) on up to `threads` workers. Callers write
/// into slot i only, so the outcome is independent of scheduling.
inline void parallel_for(std::size_t count, unsigned threads,
                         const std::function<void(std::size_t)>& body) {
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(count, 1))));
  if (threads == 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::vector<std::exception_ptr> errors(threads);
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < threads; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = w; i < count; i += threads) body(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

/// Capped FDR threshold, log-MSE loss and FDP on an already drawn batch.
inline TrialReport evaluate_batch(const SampleBatch& batch, const FdrConfig& cfg) {
  const auto result = capped_threshold(batch, cfg);
  TrialReport report;
  report.loss = log_mse_loss(result.estimate, batch.mu);
  report.threshold = result.threshold;
  report.k_fdr = result.k_fdr;
  report.capped = result.capped;
  report.seed = batch.seed;
  if (result.k_fdr > 0) {
    const auto false_hits = std::count_if(result.discoveries.begin(), result.discoveries.end(),
                                          [&](std::size_t i) { return batch.mu[i] == 1.0; });
    report.fdp = static_cast<double>(false_hits) / static_cast<double>(result.k_fdr);
  }
  return report;
}

/// Bayesian trial: μ_i ~ F, X_i ~ Exp(μ_i), thresholded at T̂_{q,n}.
inline TrialReport run_trial(const MixingDistribution& f, std::size_t n, const FdrConfig& cfg,
                             std::uint64_t seed) {
  return evaluate_batch(sample_mixture(f, n, seed), cfg);
}

/// Frequentist trial on a fixed mean vector.
inline TrialReport frequentist_trial(const std::vector<double>& mu, const FdrConfig& cfg,
                                     std::uint64_t seed) {
  if (mu.empty()) throw DomainError("frequentist_trial: empty mean vector");
  SampleBatch batch;
  batch.seed = seed;
  batch.mu = mu;
  batch.x.resize(mu.size());
  RandomStream rng(seed);
  for (std::size_t i = 0; i < mu.size(); ++i) {
    if (!(mu[i] >= 1.0)) throw DomainError("frequentist_trial: means must be >= 1");
    batch.x[i] = rng.exponential(mu[i]);
  }
  return evaluate_batch(batch, cfg);
}

/// Loss of hard thresholding at a fixed t; its mean is the threshold Bayes risk.
inline double fixed_threshold_loss(const MixingDistribution& f, std::size_t n, double t,
                                   std::uint64_t seed) {
  const auto batch = sample_mixture(f, n, seed);
  std::vector<double> estimate(batch.size(), 1.0);
  for (std::size_t i = 0; i < batch.size(); ++i) {
    if (batch.x[i] >= t) estimate[i] = batch.x[i];
  }
  return log_mse_loss(estimate, batch.mu);
}

namespace detail {

struct MeanAndError {
  double mean;
  double se;
};

inline MeanAndError mean_and_error(const std::vector<double>& values) {
  const auto m = static_cast<double>(values.size());
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= m;
  if (values.size() < 2) return {mean, 0.0};
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return {mean, std::sqrt(ss / (m - 1.0) / m)};
}

inline double median(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  const std::size_t k = values.size();
  return k % 2 == 1 ? values[k / 2] : 0.5 * (values[k / 2 - 1] + values[k / 2]);
}

}  // namespace detail

/// Empirical risk curves over (q, μ). At each μ the ε is calibrated to the
/// ball; trial r at grid position j uses substream j·reps + r, shared by all
/// q values so the curves see common samples. Output is q-major, μ-minor.
/// μ values that cannot be calibrated (ε > 1) produce NaN rows.
inline std::vector<CurvePoint> risk_curve(const SparsityBall& ball, const std::vector<double>& qs,
                                          const std::vector<double>& mu_grid, std::size_t n,
                                          std::size_t reps, std::uint64_t seed,
                                          unsigned threads = 1) {
  if (reps == 0) throw DomainError("risk_curve: reps must be >= 1");
  if (n == 0) throw DomainError("risk_curve: n must be >= 1");
  if (qs.empty() || mu_grid.empty()) throw DomainError("risk_curve: empty q list or mu grid");
  std::vector<FdrConfig> cfgs;
  for (double q : qs) cfgs.emplace_back(q);

  const std::size_t cells = mu_grid.size() * reps;
  std::vector<std::vector<TrialReport>> reports(cells);
  std::vector<double> eps(mu_grid.size(), std::nan(""));
  for (std::size_t j = 0; j < mu_grid.size(); ++j) {
    if (mu_grid[j] > 1.0 && std::pow(ball.eta() / std::log(mu_grid[j]), ball.p()) <= 1.0) {
      eps[j] = calibrated_two_point(ball, mu_grid[j]).weights().back();
    }
  }
  parallel_for(cells, threads, [&](std::size_t cell) {
    const std::size_t j = cell / reps;
    if (std::isnan(eps[j])) return;
    const auto batch = sample_mixture(make_two_point(eps[j], mu_grid[j]), n,
                                      derive_seed(seed, cell));
    for (const auto& cfg : cfgs) reports[cell].push_back(evaluate_batch(batch, cfg));
  });

  std::vector<CurvePoint> curve;
  for (std::size_t a = 0; a < qs.size(); ++a) {
    for (std::size_t j = 0; j < mu_grid.size(); ++j) {
      CurvePoint point{qs[a], mu_grid[j], eps[j], std::nan(""), std::nan(""), std::nan(""),
                       std::nan(""), reps, n, seed};
      if (!std::isnan(eps[j])) {
        std::vector<double> losses, fdps;
        for (std::size_t r = 0; r < reps; ++r) {
          losses.push_back(reports[j * reps + r][a].loss);
          fdps.push_back(reports[j * reps + r][a].fdp);
        }
        const auto loss = detail::mean_and_error(losses);
        const auto fdp = detail::mean_and_error(fdps);
        point.mean_loss = loss.mean;
        point.se_loss = loss.se;
        point.mean_fdp = fdp.mean;
        point.se_fdp = fdp.se;
      }
      curve.push_back(point);
    }
  }
  return curve;
}

/// Median over reps of |T̂_{q,n} - T_q(G)| for each n, and the least-squares
/// slope of log median against log n. Trial r at list position i uses
/// substream i·reps + r.
inline ConvergenceResult convergence_experiment(const MixingDistribution& f, const FdrConfig& cfg,
                                                const std::vector<std::size_t>& n_list,
                                                std::size_t reps, std::uint64_t seed,
                                                unsigned threads = 1) {
  if (f.is_null()) throw DegenerateMixtureError("convergence_experiment: degenerate mixture G = E");
  if (n_list.size() < 3) throw DomainError("convergence_experiment: need at least 3 sample sizes");
  if (reps == 0) throw DomainError("convergence_experiment: reps must be >= 1");
  for (std::size_t i = 0; i < n_list.size(); ++i) {
    if (n_list[i] == 0 || (i > 0 && n_list[i] <= n_list[i - 1])) {
      throw DomainError("convergence_experiment: n list must be positive and increasing");
    }
  }
  ConvergenceResult result;
  result.target = fdr_functional(ExpScaleMixture(f), cfg);
  std::vector<double> deviations(n_list.size() * reps);
  parallel_for(deviations.size(), threads, [&](std::size_t cell) {
    const auto batch = sample_mixture(f, n_list[cell / reps], derive_seed(seed, cell));
    deviations[cell] = std::abs(capped_threshold(batch, cfg).threshold.value() - result.target);
  });

  std::vector<double> log_n, log_median;
  for (std::size_t i = 0; i < n_list.size(); ++i) {
    const std::vector<double> slice(deviations.begin() + static_cast<std::ptrdiff_t>(i * reps),
                                    deviations.begin() + static_cast<std::ptrdiff_t>((i + 1) * reps));
    const double med = detail::median(slice);
    result.rows.push_back({n_list[i], med, reps, seed});
    log_n.push_back(std::log(static_cast<double>(n_list[i])));
    log_median.push_back(std::log(med));
  }
  result.slope = numerics::ols_slope(log_n, log_median);
  return result;
}

}  // namespace fdrexp
