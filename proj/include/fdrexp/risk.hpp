#pragma once

// Risk calculus for thresholding on the log scale: bias and variance
// proxies, univariate threshold Bayes risk, the two-point Bayes rule and its
// risk, ideal FDR risk and the closed-form asymptotic quantities.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "fdrexp/errors.hpp"
#include "fdrexp/fdr.hpp"
#include "fdrexp/mixtures.hpp"
#include "fdrexp/numerics.hpp"

namespace fdrexp {

struct RiskBreakdown {
  double bias = 0.0;
  double variance = 0.0;
  double total = 0.0;
};

inline RiskBreakdown make_breakdown(double bias, double variance) {
  return {bias, variance, bias + variance};
}

namespace detail {

inline constexpr numerics::QuadratureOptions kRiskQuadrature{1e-12, 1e-16, 4000};

// Beyond this many units past max(a, 1), x²e^{-x} drops under 1e-16 of the
// integrals' scale.
inline constexpr double kTailSpan = 45.0;

/// ∫_a^b log²(x) e^{-x} dx on [a, b] ⊂ [0, 1], via x = e^{-u}, which turns
/// the log singularity at 0 into the smooth, decaying u² e^{-u} e^{-e^{-u}}.
inline double log_square_exp_unit(double a, double b) {
  const double u_hi = a > 0.0 ? std::min(-std::log(a), 60.0) : 60.0;
  const double u_lo = -std::log(b);
  if (u_hi <= u_lo) return 0.0;
  auto f = [](double u) { return u * u * std::exp(-u - std::exp(-u)); };
  std::array<double, 7> breaks{};
  std::size_t count = 0;
  breaks[count++] = u_lo;
  for (double cut : {1.0, 4.0, 10.0, 20.0, 35.0}) {
    if (cut > u_lo && cut < u_hi) breaks[count++] = cut;
  }
  breaks[count++] = u_hi;
  return numerics::integrate_piecewise(f, std::span<const double>(breaks.data(), count),
                                       kRiskQuadrature);
}

/// ∫_a^b log²(x) e^{-x} dx for 1 ≤ a ≤ b ≤ ∞, computed as
/// e^{-a} ∫_0^{b-a} log²(a+y) e^{-y} dy so large a keeps relative accuracy.
inline double log_square_exp_above_one(double a, double b) {
  const double span = std::min(b - a, kTailSpan);
  if (span <= 0.0) return 0.0;
  auto f = [a](double y) {
    const double l = std::log(a + y);
    return l * l * std::exp(-y);
  };
  std::array<double, 6> breaks{};
  std::size_t count = 0;
  breaks[count++] = 0.0;
  for (double cut : {1.0, 5.0, 15.0, 30.0}) {
    if (cut < span) breaks[count++] = cut;
  }
  breaks[count++] = span;
  return std::exp(-a) * numerics::integrate_piecewise(
                            f, std::span<const double>(breaks.data(), count), kRiskQuadrature);
}

}  // namespace detail

/// ∫_a^b log²(x) e^{-x} dx for 0 ≤ a ≤ b (b may be +∞).
inline double log_square_exp_integral(double a, double b) {
  if (!(a >= 0.0) || !(b >= a)) throw DomainError("log_square_exp_integral: need 0 <= a <= b");
  double total = 0.0;
  if (a < 1.0) total += detail::log_square_exp_unit(a, std::min(b, 1.0));
  if (b > 1.0) total += detail::log_square_exp_above_one(std::max(a, 1.0), b);
  return total;
}

/// b(t, μ) = log²(μ)·(1 - e^{-t/μ}).
inline double bias_proxy(double t, double mu) {
  if (!(t >= 0.0) || !(mu >= 1.0)) throw DomainError("bias_proxy: need t >= 0, mu >= 1");
  if (mu == 1.0) return 0.0;
  const double l = std::log(mu);
  return l * l * -std::expm1(-t / mu);
}

/// v(t, μ) = ∫_{t/μ}^∞ log²(x) e^{-x} dx.
inline double variance_proxy(double t, double mu) {
  if (!(t >= 0.0) || !(mu >= 1.0)) throw DomainError("variance_proxy: need t >= 0, mu >= 1");
  return log_square_exp_integral(t / mu, std::numeric_limits<double>::infinity());
}

/// v(t, μ) - v(t, 1) = ∫_{t/μ}^{t} log²(x) e^{-x} dx, without cancellation.
inline double variance_increment(double t, double mu) {
  if (!(t >= 0.0) || !(mu >= 1.0)) throw DomainError("variance_increment: need t >= 0, mu >= 1");
  if (mu == 1.0 || t == 0.0) return 0.0;
  return log_square_exp_integral(t / mu, t);
}

/// ρ_T(t, F) = E(log δ_t(X) - log μ)², split into ∫b dF and ∫v dF.
inline RiskBreakdown threshold_bayes_risk(double t, const MixingDistribution& f) {
  if (!(t >= 0.0)) throw DomainError("threshold_bayes_risk: t must be >= 0");
  double bias = 0.0, variance = 0.0;
  const auto mu = f.support();
  const auto w = f.weights();
  for (std::size_t j = 0; j < mu.size(); ++j) {
    bias += w[j] * bias_proxy(t, mu[j]);
    variance += w[j] * variance_proxy(t, mu[j]);
  }
  return make_breakdown(bias, variance);
}

/// log δ_B(x) for the two-point prior (1-ε)δ_1 + εδ_μ: posterior weight of μ
/// times log μ, the weight being 1/(1 + exp(log((1-ε)μ/ε) - x(1-1/μ))).
inline double bayes_rule_log(double x, double eps, double mu) {
  if (!(x >= 0.0)) throw DomainError("bayes_rule_log: x must be >= 0");
  if (!(eps > 0.0 && eps < 1.0)) throw DomainError("bayes_rule_log: eps must lie in (0, 1)");
  if (!(mu > 1.0)) throw DomainError("bayes_rule_log: mu must exceed 1");
  const double exponent = std::log((1.0 - eps) * mu / eps) - x * (1.0 - 1.0 / mu);
  return std::log(mu) / (1.0 + std::exp(exponent));
}

/// ∫_0^1 (c + y^β)^{-1} dy for c ≥ 0, 0 < β < 1.
///
/// With y = u^{1/β} this is (1/β)∫_0^1 u^{1/β-1}/(c+u) du, integrated over
/// geometric panels that resolve the scale u ~ c.
inline double inverse_power_integral(double c, double beta) {
  if (!(c >= 0.0)) throw DomainError("inverse_power_integral: c must be >= 0");
  if (!(beta > 0.0 && beta < 1.0)) throw DomainError("inverse_power_integral: beta in (0, 1)");
  if (c == 0.0) return 1.0 / (1.0 - beta);
  const double m = 1.0 / beta - 1.0;
  auto g = [c, m](double u) { return std::pow(u, m) / (c + u); };
  // [0, u0]: integrand ≤ u^m/c there, contributing at most u0^{m+1}/((m+1)c).
  const double u0 = std::min(1.0, c * 1e-14);
  double total = std::pow(u0, m + 1.0) / ((m + 1.0) * c);
  double lo = u0;
  while (lo < 1.0) {
    const double hi = std::min(1.0, lo * 4.0);
    total += numerics::integrate(g, lo, hi, detail::kRiskQuadrature);
    lo = hi;
  }
  return total / beta;
}

/// Bayes risk of the two-point prior, second (unit-interval) form:
/// (ε log²μ/μ)·∫_0^1 (ε/((1-ε)μ) + y^{1-1/μ})^{-1} dy.
inline double two_point_bayes_risk(double eps, double mu) {
  if (!(eps >= 0.0 && eps < 1.0)) throw DomainError("two_point_bayes_risk: eps must lie in [0, 1)");
  if (!(mu >= 1.0)) throw DomainError("two_point_bayes_risk: mu must be >= 1");
  if (eps == 0.0 || mu == 1.0) return 0.0;
  const double l = std::log(mu);
  const double c = eps / ((1.0 - eps) * mu);
  return eps * l * l / mu * inverse_power_integral(c, 1.0 - 1.0 / mu);
}

/// Same Bayes risk from the first (half-line) form:
/// log²μ ∫_0^∞ a(x)b(x)/(a(x)+b(x)) dx with a = (1-ε)e^{-x}, b = (ε/μ)e^{-x/μ}.
inline double two_point_bayes_risk_direct(double eps, double mu) {
  if (!(eps >= 0.0 && eps < 1.0)) throw DomainError("two_point_bayes_risk: eps must lie in [0, 1)");
  if (!(mu >= 1.0)) throw DomainError("two_point_bayes_risk: mu must be >= 1");
  if (eps == 0.0 || mu == 1.0) return 0.0;
  const double log_null = std::log1p(-eps);
  const double log_alt = std::log(eps / mu);
  auto f = [&](double x) {
    const double a = log_null - x;
    const double b = log_alt - x / mu;
    const double hi = std::max(a, b);
    const double lo = std::min(a, b);
    return std::exp(lo - std::log1p(std::exp(lo - hi)));
  };
  // The two densities cross at x_c; beyond it the null term decays at rate 1.
  const double xc = std::max(0.0, (log_null - log_alt) * mu / (mu - 1.0));
  std::vector<double> breaks{0.0};
  for (double frac : {0.25, 0.5, 0.75, 1.0}) {
    if (xc * frac > breaks.back()) breaks.push_back(xc * frac);
  }
  for (double extra : {1.0, 5.0, 15.0, 40.0}) breaks.push_back(xc + extra);
  // Slow e^{-x/μ} decay of the alternative when x_c is small relative to μ.
  if (xc < 40.0 * mu) {
    for (double extra : {2.0 * mu, 10.0 * mu, 40.0 * mu}) {
      if (xc + extra > breaks.back()) breaks.push_back(xc + extra);
    }
  }
  const double l = std::log(mu);
  return l * l * numerics::integrate_piecewise(f, breaks, detail::kRiskQuadrature);
}

/// ∫_0^1 [(a/d) + y^{1-1/d}]^{-1} dy, the integral behind the lower bound.
inline double harmonic_power_integral(double a, double d) {
  if (!(a > 0.0) || !(d > 1.0)) throw DomainError("harmonic_power_integral: need a > 0, d > 1");
  return inverse_power_integral(a / d, 1.0 - 1.0 / d);
}

/// Relative error scale (a/d)^{1/(d-1)} of the lower-bound integral around d.
inline double harmonic_power_error_scale(double a, double d) {
  if (!(a > 0.0) || !(d > 1.0)) throw DomainError("harmonic_power_error_scale: need a > 0, d > 1");
  return std::pow(a / d, 1.0 / (d - 1.0));
}

/// Ideal FDR risk ρ_T(T_q(G), F): threshold at the population functional.
inline RiskBreakdown ideal_fdr_risk(const MixingDistribution& f, const FdrConfig& cfg) {
  const double t = fdr_functional(ExpScaleMixture(f), cfg);
  return threshold_bayes_risk(t, f);
}

namespace detail {

/// (log(1/η), log log(1/η)) with the domain check η < e^{-e}.
inline std::pair<double, double> log_scales(const SparsityBall& ball) {
  if (!(ball.eta() < std::exp(-std::exp(1.0)))) {
    throw DomainError("eta must be below e^{-e} for the asymptotic formulas");
  }
  const double l = -std::log(ball.eta());
  return {l, std::log(l)};
}

}  // namespace detail

/// t_0(p, η) = p log(1/η) + p log log(1/η) + sqrt(log log(1/η)).
inline double minimax_threshold(const SparsityBall& ball) {
  const auto [l, ll] = detail::log_scales(ball);
  return ball.p() * l + ball.p() * ll + std::sqrt(ll);
}

/// η^p (log log(1/η))^{2-p}.
inline double asymptotic_minimax_risk(const SparsityBall& ball) {
  const auto [l, ll] = detail::log_scales(ball);
  return ball.budget() * std::pow(ll, 2.0 - ball.p());
}

struct LeastFavorableMeans {
  double mu_b;
  double mu_v;
};

/// μ_b* = log(1/η)/log log(1/η), μ_v* = log(1/η)·log log(1/η).
inline LeastFavorableMeans least_favorable_mus(const SparsityBall& ball) {
  const auto [l, ll] = detail::log_scales(ball);
  return {l / ll, l * ll};
}

/// (1/n) Σ (log μ̂_i - log μ_i)².
inline double log_mse_loss(std::span<const double> estimate, std::span<const double> truth) {
  if (estimate.size() != truth.size()) throw DomainError("log_mse_loss: length mismatch");
  if (estimate.empty()) throw DomainError("log_mse_loss: empty vectors");
  double acc = 0.0;
  for (std::size_t i = 0; i < estimate.size(); ++i) {
    if (!(estimate[i] > 0.0) || !(truth[i] >= 1.0)) {
      throw DomainError("log_mse_loss: estimates must be > 0 and truths >= 1");
    }
    const double d = std::log(estimate[i]) - std::log(truth[i]);
    acc += d * d;
  }
  return acc / static_cast<double>(estimate.size());
}

}  // namespace fdrexp
