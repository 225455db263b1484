#pragma once

// FDR thresholding in the exponential survival domain. The step-up rule on a
// sample, the population functional T_q(G) (unique crossing of Ḡ with Ē/q),
// its empirical counterpart T_q(G_n), the capped threshold used on the
// no-crossing event, and the boundedness / extremal / modulus diagnostics.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "fdrexp/errors.hpp"
#include "fdrexp/mixtures.hpp"
#include "fdrexp/numerics.hpp"

namespace fdrexp {

class FdrConfig {
public:
  explicit FdrConfig(double q) : q_(q) {
    if (!(q > 0.0 && q < 1.0)) throw DomainError("FDR control parameter q must lie in (0, 1)");
  }
  double q() const { return q_; }

private:
  double q_;
};

/// A threshold that is either a finite time or the +∞ sentinel. The
/// sentinel never enters arithmetic; only `selects` and comparisons see it.
class Threshold {
public:
  static Threshold finite(double value) { return Threshold(value); }
  static Threshold infinite() { return Threshold(); }

  bool is_finite() const { return value_.has_value(); }

  double value() const {
    if (!value_) throw DomainError("threshold is +inf");
    return *value_;
  }

  /// X ≥ threshold; never true for the sentinel.
  bool selects(double x) const { return value_ && x >= *value_; }

  friend bool operator==(const Threshold&, const Threshold&) = default;

private:
  Threshold() = default;
  explicit Threshold(double v) : value_(v) {}
  std::optional<double> value_;
};

struct ThresholdResult {
  std::size_t k_fdr = 0;
  Threshold threshold = Threshold::infinite();
  std::vector<std::size_t> discoveries;  // ascending original indices
  std::vector<double> estimate;          // μ̂_i ∈ {X_i, 1}
  bool capped = false;
};

/// Step-up boundary t_k = -log(q·k/n). Every routine comparing samples to
/// boundaries goes through this one expression so their thresholds agree bit-for-bit.
inline double step_boundary(double q, std::size_t k, std::size_t n) {
  return -std::log(q * static_cast<double>(k) / static_cast<double>(n));
}

namespace detail {

/// Indices ordering x descending, ties by ascending index.
inline std::vector<std::size_t> descending_order(const std::vector<double>& x) {
  std::vector<std::size_t> order(x.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return x[a] > x[b]; });
  return order;
}

inline ThresholdResult apply_threshold(const std::vector<double>& x, Threshold threshold,
                                       bool capped) {
  ThresholdResult result;
  result.threshold = threshold;
  result.capped = capped;
  result.estimate.resize(x.size(), 1.0);
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (threshold.selects(x[i])) {
      result.discoveries.push_back(i);
      result.estimate[i] = x[i];
    }
  }
  result.k_fdr = result.discoveries.size();
  return result;
}

}  // namespace detail

/// Simes / Benjamini-Hochberg step-up rule on exponential statistics: the
/// largest k with X_(k) ≥ t_k sets the threshold t_k; k = 0 gives the +∞ sentinel.
inline ThresholdResult step_up_threshold(const SampleBatch& batch, const FdrConfig& cfg) {
  if (batch.x.empty()) throw DomainError("step_up_threshold: empty batch");
  const auto n = batch.x.size();
  const auto order = detail::descending_order(batch.x);
  std::size_t k_fdr = 0;
  for (std::size_t k = n; k >= 1; --k) {
    if (batch.x[order[k - 1]] >= step_boundary(cfg.q(), k, n)) {
      k_fdr = k;
      break;
    }
  }
  if (k_fdr == 0) return detail::apply_threshold(batch.x, Threshold::infinite(), false);
  return detail::apply_threshold(batch.x, Threshold::finite(step_boundary(cfg.q(), k_fdr, n)),
                                 false);
}

/// T_q(G_n) = inf{t : Ḡ_n(t) ≥ Ē(t)/q}, exact over the step structure of Ḡ_n.
/// On the interval where Ḡ_n = k/n the feasible times start at
/// max(t_k, X_(k+1)); the first feasible interval met while scanning k
/// downward from n holds the infimum. Returns +∞ on the no-crossing event.
inline Threshold fdr_functional_empirical(const SampleBatch& batch, const FdrConfig& cfg) {
  if (batch.x.empty()) throw DomainError("fdr_functional_empirical: empty batch");
  const auto n = batch.x.size();
  const auto order = detail::descending_order(batch.x);
  for (std::size_t k = n; k >= 1; --k) {
    const double upper = batch.x[order[k - 1]];
    const double tk = step_boundary(cfg.q(), k, n);
    if (upper >= tk) {
      const double lower = k < n ? batch.x[order[k]] : 0.0;
      return Threshold::finite(std::max(tk, lower));
    }
  }
  return Threshold::infinite();
}

/// T̂_{q,n}: the empirical functional, or log(n/q) (= t_1) when it is +∞.
inline ThresholdResult capped_threshold(const SampleBatch& batch, const FdrConfig& cfg) {
  const Threshold empirical = fdr_functional_empirical(batch, cfg);
  if (empirical.is_finite()) return detail::apply_threshold(batch.x, empirical, false);
  const double cap = step_boundary(cfg.q(), 1, batch.x.size());
  return detail::apply_threshold(batch.x, Threshold::finite(cap), true);
}

/// s(t) = Ḡ(t) - e^{-t}/q.
inline double crossing_gap(const ExpScaleMixture& g, const FdrConfig& cfg, double t) {
  return g.survival(t) - std::exp(-t) / cfg.q();
}

struct FunctionalBounds {
  double lower;
  double upper;
};

/// Boundedness sandwich -log((q/(1-q))‖G-E‖) ≤ T_q(G) ≤ ((1-q)/q)/‖G-E‖.
inline FunctionalBounds functional_bounds(const ExpScaleMixture& g, const FdrConfig& cfg) {
  if (g.mixing().is_null()) throw DegenerateMixtureError("degenerate mixture: G = E");
  const double q = cfg.q();
  const double ks = ks_distance_to_exp(g.mixing());
  return {-std::log(q / (1.0 - q) * ks), (1.0 - q) / q / ks};
}

/// Population FDR functional: the unique t with Ḡ(t) = Ē(t)/q.
///
/// Roots are found on r(t) = log Σ w_j e^{t(1-1/μ_j)} - log(1/q), which
/// vanishes exactly where s(t) does and is strictly increasing, so
/// bisection on [0, U+1] (U the upper bound of the sandwich) converges to
/// the single crossing. One Newton step polishes the bisection midpoint.
inline double fdr_functional(const ExpScaleMixture& g, const FdrConfig& cfg) {
  const auto& f = g.mixing();
  if (f.is_null()) throw DegenerateMixtureError("degenerate mixture: G = E has no finite crossing");
  const auto mu = f.support();
  const auto w = f.weights();
  const double log_inv_q = -std::log(cfg.q());
  std::vector<double> terms(mu.size());
  auto r = [&](double t) {
    for (std::size_t j = 0; j < mu.size(); ++j) terms[j] = std::log(w[j]) + t * (1.0 - 1.0 / mu[j]);
    return numerics::log_sum_exp(terms) - log_inv_q;
  };
  const double upper = functional_bounds(g, cfg).upper + 1.0;
  double t = numerics::bisect(r, 0.0, upper, 1e-13, 1e-15);

  // Newton polish: r'(t) is the w·e^{t(1-1/μ)}-weighted mean of (1-1/μ).
  double num = 0.0, den = 0.0;
  for (std::size_t j = 0; j < mu.size(); ++j) terms[j] = std::log(w[j]) + t * (1.0 - 1.0 / mu[j]);
  const double peak = *std::max_element(terms.begin(), terms.end());
  for (std::size_t j = 0; j < mu.size(); ++j) {
    const double e = std::exp(terms[j] - peak);
    num += e * (1.0 - 1.0 / mu[j]);
    den += e;
  }
  if (num > 0.0) {
    const double polished = t - r(t) * den / num;
    if (polished > 0.0 && std::abs(r(polished)) <= std::abs(r(t))) t = polished;
  }

  if (std::abs(crossing_gap(g, cfg, t)) > 1e-12) {
    throw NumericalError("fdr_functional: root residual above 1e-12");
  }
  return t;
}

/// Ḡ*_{t0}(t) = e^{-t/μ*}, μ* = 1/(1 + log(q)/t0): among all G with
/// T_q(G) = t0, the steepest survival at t0.
inline double extremal_cdf_survival(double t0, const FdrConfig& cfg, double t) {
  if (!(t0 > -std::log(cfg.q()))) throw DomainError("extremal cdf: t0 must exceed log(1/q)");
  if (!(t >= 0.0)) throw DomainError("extremal cdf: t must be >= 0");
  const double mu_star = 1.0 / (1.0 + std::log(cfg.q()) / t0);
  return std::exp(-t / mu_star);
}

/// Leading-order modulus of continuity (q/log(1/q))·t0·e^{t0}·ε.
inline double modulus_bound(double t0, const FdrConfig& cfg, double eps) {
  const double log_inv_q = -std::log(cfg.q());
  if (!(t0 > log_inv_q)) throw DomainError("modulus bound: t0 must exceed log(1/q)");
  if (!(eps >= 0.0)) throw DomainError("modulus bound: eps must be >= 0");
  return cfg.q() / log_inv_q * t0 * std::exp(t0) * eps;
}

}  // namespace fdrexp
