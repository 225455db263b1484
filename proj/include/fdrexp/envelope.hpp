#pragma once

// Maximization of linear functionals ∫ψ dF over mixing laws with a budget
// ∫φ dF ≤ z. Two shapes of the (φ, ψ) curve near μ = 1 are handled:
//
//   ratio-finite   ψ/φ has a finite limit at 1+. The optimum mixes δ_1 with
//                  a point mass at μ* = argmax ψ/φ, so Ψ(z) = Ψ*·z.
//   ratio-infinite ψ/φ blows up at 1+, the curve is concave up to μ̄ and the
//                  envelope follows the curve to a tangent point μ_*, then
//                  the chord from μ_* to μ*.
//
// Built on top: worst-case bias and variance proxies over the sparsity ball,
// the survival envelope h*(t), the minimal FDR threshold T_q* and the
// worst-case ideal-risk scan over calibrated two-point mixtures.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "fdrexp/errors.hpp"
#include "fdrexp/fdr.hpp"
#include "fdrexp/mixtures.hpp"
#include "fdrexp/numerics.hpp"
#include "fdrexp/risk.hpp"

namespace fdrexp {

enum class EnvelopeRegime { kRatioFinite, kRatioInfinite };

inline std::string_view to_string(EnvelopeRegime regime) {
  return regime == EnvelopeRegime::kRatioFinite ? "ratio-finite" : "ratio-infinite";
}

using RealFunction = std::function<double(double)>;

struct EnvelopeProblem {
  RealFunction psi;
  RealFunction phi;
  RealFunction dpsi;         // optional
  RealFunction dphi;         // optional
  RealFunction phi_inverse;  // optional
  EnvelopeRegime regime = EnvelopeRegime::kRatioFinite;
  double z = 0.0;
  /// Upper end of the μ search range.
  double mu_max = 1e6;
  /// End of the concave stretch (ratio-infinite only); located if absent.
  std::optional<double> mu_bar;
};

struct EnvelopeResult {
  EnvelopeRegime regime = EnvelopeRegime::kRatioFinite;
  double value = 0.0;
  double mu_star = 1.0;
  std::optional<double> mu_lower;
  /// Ψ* (ratio-finite) or Ψ**(μ_*) (ratio-infinite).
  double slope = 0.0;
  MixingDistribution attaining = MixingDistribution::point_mass(1.0);
  /// ∫φ dF and ∫ψ dF of the attaining mixture.
  double budget_used = 0.0;
  double attained = 0.0;
};

namespace detail {

inline constexpr std::size_t kEnvelopeGrid = 2048;
inline constexpr double kMinOffset = 1e-8;

/// μ = 1 + e^u; searches run in u = log(μ - 1).
inline double mu_from_log_offset(double u) { return 1.0 + std::exp(u); }

inline double ratio_derivative(const EnvelopeProblem& prob, double mu) {
  auto central = [mu](const RealFunction& f) {
    const double h = std::min(1e-6 * std::max(1.0, mu), 0.5 * (mu - 1.0));
    return (f(mu + h) - f(mu - h)) / (2.0 * h);
  };
  const double dpsi = prob.dpsi ? prob.dpsi(mu) : central(prob.psi);
  const double dphi = prob.dphi ? prob.dphi(mu) : central(prob.phi);
  return dpsi / dphi;
}

inline double phi_inverse(const EnvelopeProblem& prob, double z) {
  if (prob.phi_inverse) return prob.phi_inverse(z);
  if (z <= 0.0) return 1.0;
  const double u = numerics::bisect(
      [&](double v) { return prob.phi(mu_from_log_offset(v)) - z; }, std::log(1e-15),
      std::log(prob.mu_max - 1.0), 1e-14, 1e-15);
  return mu_from_log_offset(u);
}

/// Maximum of f(1 + e^u) over a log-spaced grid of offsets, refined by golden
/// section around the best few grid-local maxima.
struct GridMax {
  double mu;
  double value;
  std::size_t index;
};

template <typename F>
GridMax grid_maximize(F&& f, const std::vector<double>& offsets, const std::vector<double>& values,
                      std::size_t starts = 5) {
  std::vector<std::size_t> peaks;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const bool left_ok = i == 0 || values[i] >= values[i - 1];
    const bool right_ok = i + 1 == values.size() || values[i] >= values[i + 1];
    if (left_ok && right_ok) peaks.push_back(i);
  }
  std::sort(peaks.begin(), peaks.end(),
            [&](std::size_t a, std::size_t b) { return values[a] > values[b]; });
  if (peaks.size() > starts) peaks.resize(starts);

  GridMax best{1.0 + offsets.front(), -std::numeric_limits<double>::infinity(), 0};
  for (std::size_t i : peaks) {
    double mu = 1.0 + offsets[i];
    double value = values[i];
    if (values.size() > 2) {
      const std::size_t lo = i == 0 ? 0 : i - 1;
      const std::size_t hi = std::min(values.size() - 1, i + 1);
      const auto refined = numerics::golden_max(
          [&](double u) { return f(mu_from_log_offset(u)); }, std::log(offsets[lo]),
          std::log(offsets[hi]), 1e-12);
      if (refined.value > value) {
        mu = mu_from_log_offset(refined.x);
        value = refined.value;
      }
    }
    if (value > best.value) best = {mu, value, i};
  }
  return best;
}

inline EnvelopeResult finish(EnvelopeResult result, const EnvelopeProblem& prob) {
  const auto support = result.attaining.support();
  const auto weights = result.attaining.weights();
  for (std::size_t j = 0; j < support.size(); ++j) {
    result.budget_used += weights[j] * prob.phi(support[j]);
    result.attained += weights[j] * prob.psi(support[j]);
  }
  return result;
}

inline EnvelopeResult zero_result(const EnvelopeProblem& prob) {
  EnvelopeResult result;
  result.regime = prob.regime;
  return result;
}

inline EnvelopeResult single_point_result(const EnvelopeProblem& prob) {
  EnvelopeResult result;
  result.regime = prob.regime;
  const double mu_z = phi_inverse(prob, prob.z);
  result.mu_star = mu_z;
  result.value = prob.psi(mu_z);
  result.slope = ratio_derivative(prob, mu_z);
  result.attaining = MixingDistribution::point_mass(mu_z);
  return finish(std::move(result), prob);
}

inline EnvelopeResult solve_ratio_finite(const EnvelopeProblem& prob,
                                         const std::vector<double>& offsets) {
  auto ratio = [&](double mu) { return prob.psi(mu) / prob.phi(mu); };
  std::vector<double> values(offsets.size());
  for (std::size_t i = 0; i < offsets.size(); ++i) values[i] = ratio(1.0 + offsets[i]);
  const auto best = grid_maximize(ratio, offsets, values);

  // μ* is the largest maximizer; walk right across a flat top.
  const double tol = best.value * 1e-10;
  std::size_t last = best.index;
  while (last + 1 < values.size() && values[last + 1] >= best.value - tol) ++last;

  // Supremum approached only as μ → 1+ (up to rounding in ψ near μ = 1): the
  // premise of the chord solution fails. A curve that is concave throughout
  // is still solved by one point mass.
  if (last == 0 || values.front() >= best.value * (1.0 - 1e-7)) {
    bool concave = true;
    double previous = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < offsets.size(); i += 8) {
      const double d = ratio_derivative(prob, 1.0 + offsets[i]);
      if (d > previous * (1.0 + 1e-9)) {
        concave = false;
        break;
      }
      previous = d;
    }
    if (concave) return single_point_result(prob);
    throw OutOfRangeError("envelope: ratio psi/phi is maximized at mu -> 1+");
  }

  double mu_star = best.mu;
  if (last > best.index && last + 1 < values.size()) {
    const double u = numerics::bisect(
        [&](double v) { return best.value - tol - ratio(mu_from_log_offset(v)); },
        std::log(offsets[last]), std::log(offsets[last + 1]), 1e-13, 1e-15);
    mu_star = mu_from_log_offset(u);
  }

  const double phi_star = prob.phi(mu_star);
  if (prob.z > phi_star) {
    throw OutOfRangeError("envelope: budget z exceeds phi(mu*); outside the linear branch");
  }
  EnvelopeResult result;
  result.regime = prob.regime;
  result.slope = best.value;
  result.mu_star = mu_star;
  result.value = best.value * prob.z;
  result.attaining = make_two_point(prob.z / phi_star, mu_star);
  return finish(std::move(result), prob);
}

inline std::optional<double> locate_mu_bar(const EnvelopeProblem& prob,
                                           const std::vector<double>& offsets) {
  double previous = ratio_derivative(prob, 1.0 + offsets.front());
  for (std::size_t i = 1; i < offsets.size(); ++i) {
    const double d = ratio_derivative(prob, 1.0 + offsets[i]);
    if (d > previous) {
      const std::size_t lo = i >= 2 ? i - 2 : 0;
      const auto minimum = numerics::golden_max(
          [&](double u) { return -ratio_derivative(prob, mu_from_log_offset(u)); },
          std::log(offsets[lo]), std::log(offsets[i]), 1e-12);
      return mu_from_log_offset(minimum.x);
    }
    previous = d;
  }
  // ψ'/φ' decreasing throughout: ψ is concave in φ.
  return std::nullopt;
}

/// Ψ**(μ) = sup_{μ' > μ̄} (ψ(μ') - ψ(μ)) / (φ(μ') - φ(μ)) over a cached grid.
class ChordSlope {
public:
  ChordSlope(const EnvelopeProblem& prob, double mu_bar)
      : prob_(prob), offsets_(numerics::logspace(mu_bar - 1.0, prob.mu_max - 1.0, kEnvelopeGrid)) {
    psi_.resize(offsets_.size());
    phi_.resize(offsets_.size());
    for (std::size_t i = 0; i < offsets_.size(); ++i) {
      psi_[i] = prob.psi(1.0 + offsets_[i]);
      phi_[i] = prob.phi(1.0 + offsets_[i]);
    }
  }

  /// (Ψ**(μ), maximizing μ').
  std::pair<double, double> operator()(double mu) const {
    const double psi0 = prob_.psi(mu);
    const double phi0 = prob_.phi(mu);
    std::vector<double> chords(offsets_.size());
    for (std::size_t i = 0; i < offsets_.size(); ++i) {
      chords[i] = (psi_[i] - psi0) / (phi_[i] - phi0);
    }
    auto chord = [&](double m) { return (prob_.psi(m) - psi0) / (prob_.phi(m) - phi0); };
    const auto best = grid_maximize(chord, offsets_, chords, 3);
    return {best.value, best.mu};
  }

private:
  const EnvelopeProblem& prob_;
  std::vector<double> offsets_;
  std::vector<double> psi_;
  std::vector<double> phi_;
};

inline EnvelopeResult solve_ratio_infinite(const EnvelopeProblem& prob,
                                           const std::vector<double>& offsets) {
  const auto located = prob.mu_bar ? prob.mu_bar : locate_mu_bar(prob, offsets);
  if (!located) return single_point_result(prob);
  const double mu_bar = *located;
  if (!(mu_bar > 1.0 && mu_bar < prob.mu_max)) throw DomainError("envelope: mu_bar out of range");
  const ChordSlope chord_slope(prob, mu_bar);

  auto tangency = [&](double u) {
    const double mu = mu_from_log_offset(u);
    return chord_slope(mu).first - ratio_derivative(prob, mu);
  };
  const double u_top = std::log(mu_bar - 1.0);
  if (!(tangency(u_top) > 0.0)) {
    throw NumericalError("envelope: psi'/phi' at mu_bar is not below the chord slope");
  }
  // Walk toward μ = 1 until ψ'/φ' exceeds the chord slope.
  const double u_floor = std::log(1e-15);
  double u_lo = u_top;
  bool bracketed = false;
  while (u_lo > u_floor) {
    u_lo = std::max(u_floor, u_lo - 1.0);
    if (tangency(u_lo) < 0.0) {
      bracketed = true;
      break;
    }
  }

  EnvelopeResult result;
  result.regime = prob.regime;
  double mu_lower = 1.0;
  if (bracketed) {
    const double u = numerics::bisect(tangency, u_lo, std::min(u_lo + 1.0, u_top), 1e-12, 1e-14);
    mu_lower = mu_from_log_offset(u);
  }
  const auto [slope, mu_star] = chord_slope(mu_lower);
  const double phi_lower = mu_lower == 1.0 ? 0.0 : prob.phi(mu_lower);
  const double phi_upper = prob.phi(mu_star);
  result.slope = slope;
  result.mu_star = mu_star;
  result.mu_lower = mu_lower;

  if (prob.z > phi_upper) {
    throw OutOfRangeError("envelope: budget z exceeds phi(mu*); outside the linear branch");
  }
  if (prob.z <= phi_lower) {
    auto single = single_point_result(prob);
    single.mu_lower = mu_lower;
    single.slope = slope;
    return single;
  }
  const double psi_lower = mu_lower == 1.0 ? 0.0 : prob.psi(mu_lower);
  const double eps = (prob.z - phi_lower) / (phi_upper - phi_lower);
  result.value = psi_lower + slope * (prob.z - phi_lower);
  result.attaining = MixingDistribution({mu_lower, mu_star}, {1.0 - eps, eps});
  return finish(std::move(result), prob);
}

inline void validate_problem(const EnvelopeProblem& prob, const std::vector<double>& offsets) {
  if (!prob.psi || !prob.phi) throw DomainError("envelope: psi and phi are required");
  if (!(prob.z >= 0.0)) throw DomainError("envelope: budget z must be >= 0");
  if (!(prob.mu_max > 1.0 + kMinOffset)) throw DomainError("envelope: mu_max too small");
  if (std::abs(prob.phi(1.0)) > 1e-14 || std::abs(prob.psi(1.0)) > 1e-14) {
    throw DomainError("envelope: need phi(1) = psi(1) = 0");
  }
  double previous_phi = 0.0;
  for (std::size_t i = 0; i < offsets.size(); i += 32) {
    const double mu = 1.0 + offsets[i];
    const double phi = prob.phi(mu);
    if (!(phi > previous_phi)) throw DomainError("envelope: phi is not strictly increasing");
    if (prob.psi(mu) < -1e-14) throw DomainError("envelope: psi must be nonnegative");
    previous_phi = phi;
  }
}

/// ψ/φ at μ = 1 + 1e-8 over ψ/φ at μ = 1 + 1e-4; large when the ratio diverges.
inline double ratio_growth_near_one(const EnvelopeProblem& prob) {
  const double near = prob.psi(1.0 + 1e-8) / prob.phi(1.0 + 1e-8);
  const double far = prob.psi(1.0 + 1e-4) / prob.phi(1.0 + 1e-4);
  return near / far;
}

inline bool psi_vanishes(const EnvelopeProblem& prob, const std::vector<double>& offsets) {
  for (std::size_t i = 0; i < offsets.size(); i += 16) {
    if (prob.psi(1.0 + offsets[i]) > 0.0) return false;
  }
  return prob.psi(1.0 + offsets.back()) <= 0.0;
}

}  // namespace detail

/// Ψ(z) = sup{∫ψ dF : ∫φ dF ≤ z} with the attaining mixture.
inline EnvelopeResult envelope_value(const EnvelopeProblem& prob) {
  const auto offsets =
      numerics::logspace(detail::kMinOffset, prob.mu_max - 1.0, detail::kEnvelopeGrid);
  detail::validate_problem(prob, offsets);
  if (prob.z == 0.0 || detail::psi_vanishes(prob, offsets)) return detail::zero_result(prob);

  const double growth = detail::ratio_growth_near_one(prob);
  const bool looks_infinite = growth > 1.5;
  if (looks_infinite != (prob.regime == EnvelopeRegime::kRatioInfinite)) {
    throw DomainError(std::string("envelope: declared regime ") +
                      std::string(to_string(prob.regime)) +
                      " contradicts the ratio psi/phi near mu = 1");
  }
  if (prob.regime == EnvelopeRegime::kRatioFinite) return detail::solve_ratio_finite(prob, offsets);
  return detail::solve_ratio_infinite(prob, offsets);
}

/// Exhaustive two-point oracle: max over (1-ε)δ_{μ1} + εδ_{μ2} on a
/// log-spaced grid (μ - 1 from min_offset to mu_max - 1, plus μ = 1), with ε
/// spending the budget exactly, and over single atoms within budget.
inline double envelope_bruteforce(const EnvelopeProblem& prob, std::size_t grid_size,
                                  double min_offset = 1e-10) {
  if (grid_size < 100) throw DomainError("envelope_bruteforce: grid_size must be >= 100");
  if (prob.z <= 0.0) return 0.0;
  const auto offsets = numerics::logspace(min_offset, prob.mu_max - 1.0, grid_size);
  std::vector<double> psi{0.0};
  std::vector<double> phi{0.0};
  for (double d : offsets) {
    psi.push_back(prob.psi(1.0 + d));
    phi.push_back(prob.phi(1.0 + d));
  }
  const double z = prob.z;
  double best = 0.0;
  for (std::size_t i = 0; i < psi.size(); ++i) {
    if (phi[i] > z) break;
    best = std::max(best, psi[i]);
    for (std::size_t j = psi.size(); j-- > i + 1;) {
      if (phi[j] < z) break;
      const double eps = (z - phi[i]) / (phi[j] - phi[i]);
      best = std::max(best, (1.0 - eps) * psi[i] + eps * psi[j]);
    }
  }
  return best;
}

namespace detail {

inline double default_mu_max(const SparsityBall& ball, double t) {
  return std::min(kMaxMean, 1e4 * std::max({t, 1.0 / ball.eta(), 1.0}));
}

inline void attach_log_power(EnvelopeProblem& prob, const SparsityBall& ball) {
  const double p = ball.p();
  prob.phi = [p](double mu) { return mu <= 1.0 ? 0.0 : std::pow(std::log(mu), p); };
  prob.dphi = [p](double mu) { return p * std::pow(std::log(mu), p - 1.0) / mu; };
  prob.phi_inverse = [p](double z) { return z <= 0.0 ? 1.0 : std::exp(std::pow(z, 1.0 / p)); };
  prob.z = ball.budget();
}

/// Smaller root of (t/μ) log μ = p - 1 on (1, e].
inline double variance_mu_bar(double t, double p) {
  auto g = [t, p](double mu) { return t * std::log(mu) / mu - (p - 1.0); };
  if (!(g(std::exp(1.0)) > 0.0)) throw DomainError("variance envelope: t too small for p > 1");
  return numerics::bisect(g, 1.0, std::exp(1.0), 1e-15, 1e-15);
}

/// End of the concave stretch for ψ_t: the smaller root of
/// t/μ - 1 - (p-1)/log μ = 0, where log(ψ'/φ') turns from decreasing to
/// increasing. No root (e.g. t ≤ 1) means ψ'/φ' decreases throughout.
inline std::optional<double> hstar_mu_bar(double t, double p) {
  auto g = [t, p](double u) {
    const double mu = mu_from_log_offset(u);
    return t / mu - 1.0 - (p - 1.0) / std::log1p(std::exp(u));
  };
  if (!(t > 1.0)) return std::nullopt;
  const auto grid = numerics::logspace(1e-12, t - 1.0, 400);
  for (std::size_t i = 1; i < grid.size(); ++i) {
    if (g(std::log(grid[i])) > 0.0) {
      const double u = numerics::bisect(g, std::log(grid[i - 1]), std::log(grid[i]), 1e-14, 1e-15);
      return mu_from_log_offset(u);
    }
  }
  return std::nullopt;
}

}  // namespace detail

/// ψ = b(t, ·), φ = log^p, z = η^p.
inline EnvelopeProblem bias_problem(const SparsityBall& ball, double t) {
  if (!(t >= 0.0)) throw DomainError("bias problem: t must be >= 0");
  EnvelopeProblem prob;
  detail::attach_log_power(prob, ball);
  prob.psi = [t](double mu) { return bias_proxy(t, mu); };
  prob.dpsi = [t](double mu) {
    const double l = std::log(mu);
    return 2.0 * l / mu * -std::expm1(-t / mu) - l * l * std::exp(-t / mu) * t / (mu * mu);
  };
  prob.regime = EnvelopeRegime::kRatioFinite;
  prob.mu_max = detail::default_mu_max(ball, t);
  return prob;
}

/// ψ = v(t, ·) - v(t, 1), φ = log^p, z = η^p; ratio-infinite exactly when p > 1.
inline EnvelopeProblem variance_problem(const SparsityBall& ball, double t) {
  if (!(t > 0.0)) throw DomainError("variance problem: t must be > 0");
  EnvelopeProblem prob;
  detail::attach_log_power(prob, ball);
  prob.psi = [t](double mu) { return variance_increment(t, mu); };
  prob.dpsi = [t](double mu) {
    const double l = std::log(t / mu);
    return l * l * std::exp(-t / mu) * t / (mu * mu);
  };
  prob.mu_max = detail::default_mu_max(ball, t);
  if (ball.p() > 1.0) {
    prob.regime = EnvelopeRegime::kRatioInfinite;
    prob.mu_bar = detail::variance_mu_bar(t, ball.p());
  }
  return prob;
}

/// ψ_t = e^{(1-1/μ)t} - 1, φ = log^p, z = η^p; ratio-infinite exactly when p > 1.
inline EnvelopeProblem hstar_problem(const SparsityBall& ball, double t) {
  if (!(t > 0.0)) throw DomainError("h* problem: t must be > 0");
  EnvelopeProblem prob;
  detail::attach_log_power(prob, ball);
  prob.psi = [t](double mu) { return std::expm1((1.0 - 1.0 / mu) * t); };
  prob.dpsi = [t](double mu) { return t / (mu * mu) * std::exp((1.0 - 1.0 / mu) * t); };
  prob.mu_max = detail::default_mu_max(ball, t);
  if (ball.p() > 1.0) {
    prob.regime = EnvelopeRegime::kRatioInfinite;
    prob.mu_bar = detail::hstar_mu_bar(t, ball.p());
  }
  return prob;
}

/// sup over the ball of ∫b(t, μ) dF.
inline EnvelopeResult worst_bias(const SparsityBall& ball, double t) {
  if (t == 0.0) {
    EnvelopeResult zero;
    return zero;
  }
  return envelope_value(bias_problem(ball, t));
}

/// sup over the ball of ∫v(t, μ) dF = Ψ(η^p) + v(t, 1). `value` holds the
/// full worst variance; `slope`, `mu_star` and friends describe Ψ.
inline EnvelopeResult worst_variance(const SparsityBall& ball, double t) {
  auto result = envelope_value(variance_problem(ball, t));
  result.value += variance_proxy(t, 1.0);
  return result;
}

/// h*(t) = sup over the ball of Ḡ(t)/Ē(t) - 1.
inline double h_star(double t, const SparsityBall& ball) {
  if (!(t >= 0.0)) throw DomainError("h_star: t must be >= 0");
  if (t == 0.0) return 0.0;
  return envelope_value(hstar_problem(ball, t)).value;
}

struct MinimalThreshold {
  double numeric;
  double formula;
  double gap() const { return std::abs(numeric - formula); }
};

/// p(log(1/η) + log log log(1/η)) + log((1-q)/q), the printed asymptotic form.
inline double t_q_star_formula(const SparsityBall& ball, const FdrConfig& cfg) {
  const double l = -std::log(ball.eta());
  if (!(std::log(l) > 0.0)) throw DomainError("t_q_star: eta too large for log log log");
  const double q = cfg.q();
  return ball.p() * (l + std::log(std::log(l))) + std::log((1.0 - q) / q);
}

/// T_q* = inf over the ball of T_q(G): the first t with h*(t) ≥ (1-q)/q.
/// At t = log(1/q) every ψ_t stays below e^t - 1 = (1-q)/q, so the lower
/// bracket end is known to sit below the crossing.
inline MinimalThreshold t_q_star(const SparsityBall& ball, const FdrConfig& cfg) {
  if (!(ball.eta() < std::exp(-std::exp(1.0)))) throw DomainError("t_q_star: need eta < e^{-e}");
  const double q = cfg.q();
  const double target = (1.0 - q) / q;
  const double lo = -std::log(q);
  double hi = 3.0 * ball.p() * -std::log(ball.eta()) + 20.0;
  auto gap = [&](double t) { return t <= lo ? -target : h_star(t, ball) - target; };
  int expansions = 0;
  while (gap(hi) < 0.0) {
    hi *= 1.5;
    if (++expansions > 10) throw NumericalError("t_q_star: no crossing found");
  }
  const double numeric = numerics::bisect(gap, lo, hi, 1e-10, 1e-13);
  return {numeric, t_q_star_formula(ball, cfg)};
}

struct ScanPoint {
  double mu;
  double eps;
  double threshold;
  RiskBreakdown risk;
};

struct RiskScan {
  double max_total = 0.0;
  double argmax_mu = 1.0;
  std::vector<ScanPoint> curve;
};

/// Ideal FDR risk of the calibrated two-point mixture at one μ.
inline ScanPoint ideal_risk_point(const SparsityBall& ball, const FdrConfig& cfg, double mu) {
  const auto f = calibrated_two_point(ball, mu);
  const double eps = f.size() == 2 ? f.weights()[1] : 1.0;
  const double t = fdr_functional(ExpScaleMixture(f), cfg);
  return {mu, eps, t, threshold_bayes_risk(t, f)};
}

/// Ideal risk over calibrated two-point mixtures on a μ grid; the bias and
/// variance columns give the decomposition of the worst-case curve.
/// Grid points that cannot be calibrated (ε > 1) are skipped.
inline RiskScan worst_ideal_risk_scan(const SparsityBall& ball, const FdrConfig& cfg,
                                      const std::vector<double>& mu_grid) {
  RiskScan scan;
  for (double mu : mu_grid) {
    if (!(mu > 1.0)) throw DomainError("risk scan: grid values must exceed 1");
    if (std::pow(ball.eta() / std::log(mu), ball.p()) > 1.0) continue;
    scan.curve.push_back(ideal_risk_point(ball, cfg, mu));
    if (scan.curve.back().risk.total > scan.max_total) {
      scan.max_total = scan.curve.back().risk.total;
      scan.argmax_mu = mu;
    }
  }
  return scan;
}

struct AsymptoticPoint {
  double t0;
  double tq_star;
  double tq_star_formula;
  double rate;
  double mu_b_star;
  double mu_v_star;
};

inline AsymptoticPoint asymptotic_point(const SparsityBall& ball, const FdrConfig& cfg) {
  const auto lf = least_favorable_mus(ball);
  const auto tq = t_q_star(ball, cfg);
  return {minimax_threshold(ball), tq.numeric, tq.formula, asymptotic_minimax_risk(ball),
          lf.mu_b, lf.mu_v};
}

}  // namespace fdrexp
