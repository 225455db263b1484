#pragma once

// Exponential scale mixtures G = E#F with a finite discrete mixing law F on
// means μ ≥ 1: construction, evaluation, sampling, log-moments and the
// Kolmogorov distance to the standard exponential E.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fdrexp/errors.hpp"
#include "fdrexp/numerics.hpp"
#include "fdrexp/rng.hpp"

namespace fdrexp {

/// Largest accepted mean. exp(-t/μ) bookkeeping stays well conditioned below it.
inline constexpr double kMaxMean = 1e12;

/// Finite discrete mixing distribution on [1, kMaxMean].
/// Support is kept strictly increasing; duplicate points are merged, zero
/// weights dropped and the weights renormalized to sum to one.
class MixingDistribution {
public:
  MixingDistribution(std::vector<double> support, std::vector<double> weights) {
    if (support.empty() || support.size() != weights.size()) {
      throw DomainError("mixing distribution: support and weights must be non-empty and parallel");
    }
    double total = 0.0;
    for (std::size_t j = 0; j < support.size(); ++j) {
      const double mu = support[j];
      const double w = weights[j];
      if (!std::isfinite(mu) || mu < 1.0 || mu > kMaxMean) {
        throw DomainError("mixing distribution: support point " + std::to_string(mu) +
                          " outside [1, 1e12]");
      }
      if (!std::isfinite(w) || w < 0.0) {
        throw DomainError("mixing distribution: negative or non-finite weight");
      }
      total += w;
    }
    if (std::abs(total - 1.0) > 1e-9) {
      throw DomainError("mixing distribution: weights sum to " + std::to_string(total));
    }

    std::vector<std::size_t> order(support.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return support[a] < support[b]; });
    for (std::size_t idx : order) {
      if (weights[idx] == 0.0) continue;
      if (!support_.empty() && support_.back() == support[idx]) {
        weights_.back() += weights[idx];
      } else {
        support_.push_back(support[idx]);
        weights_.push_back(weights[idx]);
      }
    }
    const double kept = std::accumulate(weights_.begin(), weights_.end(), 0.0);
    for (double& w : weights_) w /= kept;
  }

  static MixingDistribution point_mass(double mu) { return MixingDistribution({mu}, {1.0}); }

  std::span<const double> support() const { return support_; }
  std::span<const double> weights() const { return weights_; }
  std::size_t size() const { return support_.size(); }
  double max_mean() const { return support_.back(); }

  /// True for δ_1, the pure-noise law (G = E).
  bool is_null() const { return support_.size() == 1 && support_.front() == 1.0; }

  /// Weight placed on μ = 1.
  double null_weight() const { return support_.front() == 1.0 ? weights_.front() : 0.0; }

  friend bool operator==(const MixingDistribution&, const MixingDistribution&) = default;

private:
  std::vector<double> support_;
  std::vector<double> weights_;
};

/// α·a + (1-α)·b as a single mixing distribution.
inline MixingDistribution blend(double alpha, const MixingDistribution& a,
                                const MixingDistribution& b) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw DomainError("blend: alpha outside [0, 1]");
  std::vector<double> support(a.support().begin(), a.support().end());
  std::vector<double> weights;
  for (double w : a.weights()) weights.push_back(alpha * w);
  support.insert(support.end(), b.support().begin(), b.support().end());
  for (double w : b.weights()) weights.push_back((1.0 - alpha) * w);
  return {std::move(support), std::move(weights)};
}

/// Moment-constraint radius: p-th log-moment at most η^p, 0 < p < 2.
class SparsityBall {
public:
  SparsityBall(double p, double eta) : p_(p), eta_(eta) {
    if (!(p > 0.0 && p < 2.0)) throw DomainError("sparsity ball: p must lie in (0, 2)");
    if (!(eta > 0.0) || !std::isfinite(eta)) throw DomainError("sparsity ball: eta must be > 0");
  }

  double p() const { return p_; }
  double eta() const { return eta_; }
  /// η^p, the log-moment budget.
  double budget() const { return std::pow(eta_, p_); }

private:
  double p_;
  double eta_;
};

/// Observations X_i with the means μ_i that generated them.
struct SampleBatch {
  std::vector<double> x;
  std::vector<double> mu;
  std::uint64_t seed = 0;

  std::size_t size() const { return x.size(); }

  void validate() const {
    if (x.empty()) throw DomainError("sample batch is empty");
    if (!mu.empty() && mu.size() != x.size()) {
      throw DomainError("sample batch: x and mu lengths differ");
    }
    for (double v : x) {
      if (!(v >= 0.0) || !std::isfinite(v)) throw DomainError("sample batch: X_i must be >= 0");
    }
    for (double m : mu) {
      if (!(m >= 1.0)) throw DomainError("sample batch: mu_i must be >= 1");
    }
  }
};

/// G = E#F.
class ExpScaleMixture {
public:
  explicit ExpScaleMixture(MixingDistribution mixing) : mixing_(std::move(mixing)) {}

  const MixingDistribution& mixing() const { return mixing_; }

  double survival(double t) const {
    if (!(t >= 0.0)) throw DomainError("mixture survival: t must be >= 0");
    double acc = 0.0;
    const auto mu = mixing_.support();
    const auto w = mixing_.weights();
    for (std::size_t j = 0; j < mu.size(); ++j) acc += w[j] * std::exp(-t / mu[j]);
    return acc;
  }

  double cdf(double t) const {
    double acc = 0.0;
    const auto mu = mixing_.support();
    const auto w = mixing_.weights();
    for (std::size_t j = 0; j < mu.size(); ++j) acc += w[j] * -std::expm1(-t / mu[j]);
    return acc;
  }

  double density(double x) const {
    if (!(x > 0.0)) throw DomainError("mixture density: x must be > 0");
    double acc = 0.0;
    const auto mu = mixing_.support();
    const auto w = mixing_.weights();
    for (std::size_t j = 0; j < mu.size(); ++j) acc += w[j] * std::exp(-x / mu[j]) / mu[j];
    return acc;
  }

private:
  MixingDistribution mixing_;
};

/// (1-ε)δ_1 + εδ_μ.
inline MixingDistribution make_two_point(double eps, double mu) {
  if (!(eps >= 0.0 && eps <= 1.0)) throw DomainError("two-point mixture: eps outside [0, 1]");
  if (!(mu >= 1.0) || mu > kMaxMean) throw DomainError("two-point mixture: mu outside [1, 1e12]");
  return MixingDistribution({1.0, mu}, {1.0 - eps, eps});
}

/// Two-point mixture on the boundary of the ball: ε·log^p(μ) = η^p.
inline MixingDistribution calibrated_two_point(const SparsityBall& ball, double mu) {
  if (!(mu > 1.0)) throw DomainError("calibrated two-point mixture: mu must exceed 1");
  const double eps = std::pow(ball.eta() / std::log(mu), ball.p());
  if (eps > 1.0) {
    throw DomainError("calibrated two-point mixture: eps = " + std::to_string(eps) +
                      " > 1; mu too close to 1 for this ball");
  }
  return make_two_point(eps, mu);
}

inline double mixture_survival(const ExpScaleMixture& g, double t) { return g.survival(t); }

inline double mixture_density(const ExpScaleMixture& g, double x) { return g.density(x); }

/// n i.i.d. pairs μ_i ~ F, X_i | μ_i ~ Exp(μ_i), deterministic in (F, n, seed).
inline SampleBatch sample_mixture(const MixingDistribution& f, std::size_t n, std::uint64_t seed) {
  if (n == 0) throw DomainError("sample_mixture: n must be >= 1");
  const auto support = f.support();
  std::vector<double> cumulative(f.weights().begin(), f.weights().end());
  std::partial_sum(cumulative.begin(), cumulative.end(), cumulative.begin());
  cumulative.back() = 1.0;

  RandomStream rng(seed);
  SampleBatch batch;
  batch.seed = seed;
  batch.x.resize(n);
  batch.mu.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double u = rng.uniform();
    const auto pos = std::upper_bound(cumulative.begin(), cumulative.end(), u);
    const auto j = std::min<std::size_t>(static_cast<std::size_t>(pos - cumulative.begin()),
                                         support.size() - 1);
    batch.mu[i] = support[j];
    batch.x[i] = rng.exponential(support[j]);
  }
  return batch;
}

/// ∫ log^p(μ) dF(μ).
inline double log_moment(const MixingDistribution& f, double p) {
  if (!(p > 0.0)) throw DomainError("log_moment: p must be > 0");
  double acc = 0.0;
  const auto mu = f.support();
  const auto w = f.weights();
  for (std::size_t j = 0; j < mu.size(); ++j) {
    if (mu[j] > 1.0) acc += w[j] * std::pow(std::log(mu[j]), p);
  }
  return acc;
}

/// Maximizer t̄ of Ḡ(t) - Ē(t). Stationarity reads Σ (w/μ) e^{t(1-1/μ)} = 1,
/// whose left side is increasing in t, so the root is bracketed and unique.
inline double ks_argmax(const MixingDistribution& f) {
  if (f.is_null()) return 0.0;
  const auto mu = f.support();
  const auto w = f.weights();
  // Closed form when every non-unit atom shares one mean.
  if (f.size() == 1 || (f.size() == 2 && mu[0] == 1.0)) {
    const double m = mu.back();
    return m * std::log(m) / (m - 1.0);
  }
  std::vector<double> terms(mu.size());
  auto stationarity = [&](double t) {
    for (std::size_t j = 0; j < mu.size(); ++j) {
      terms[j] = std::log(w[j] / mu[j]) + t * (1.0 - 1.0 / mu[j]);
    }
    return numerics::log_sum_exp(terms);
  };
  double hi = 1.0;
  while (stationarity(hi) < 0.0) {
    hi *= 2.0;
    if (hi > 1e15) throw NumericalError("ks_argmax: stationarity bracket not found");
  }
  return numerics::bisect(stationarity, 0.0, hi, 1e-13, 1e-15);
}

/// Kolmogorov distance ‖G - E‖ = sup_t (Ḡ(t) - Ē(t)), since G dominates E.
inline double ks_distance_to_exp(const MixingDistribution& f) {
  if (f.is_null()) return 0.0;
  const double t = ks_argmax(f);
  const auto mu = f.support();
  const auto w = f.weights();
  double acc = 0.0;
  for (std::size_t j = 0; j < mu.size(); ++j) {
    if (mu[j] > 1.0) acc += w[j] * (std::exp(-t / mu[j]) - std::exp(-t));
  }
  return acc;
}

/// Ḡ_n(t) = #{X_i ≥ t} / n.
inline double empirical_survival(const SampleBatch& batch, double t) {
  if (batch.x.empty()) throw DomainError("empirical_survival: empty batch");
  if (!(t >= 0.0)) throw DomainError("empirical_survival: t must be >= 0");
  const auto count = std::count_if(batch.x.begin(), batch.x.end(), [t](double v) { return v >= t; });
  return static_cast<double>(count) / static_cast<double>(batch.x.size());
}

/// sup_t |Ḡ_n(t) - Ḡ(t)|, evaluated at both one-sided limits of every sample point.
inline double empirical_ks_distance(const SampleBatch& batch, const ExpScaleMixture& g) {
  std::vector<double> sorted = batch.x;
  std::sort(sorted.begin(), sorted.end());
  const auto n = static_cast<double>(sorted.size());
  double worst = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const double s = g.survival(sorted[i]);
    // Just above X_(i) the empirical survival is (n-i-1)/n, at X_(i) it is (n-i)/n.
    worst = std::max(worst, std::abs((n - static_cast<double>(i)) / n - s));
    worst = std::max(worst, std::abs((n - static_cast<double>(i) - 1.0) / n - s));
  }
  return worst;
}

}  // namespace fdrexp
