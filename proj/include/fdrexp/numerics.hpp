#pragma once

// Numerical kernels shared by the library: adaptive Gauss-Kronrod quadrature,
// monotone bracketed root finding, golden-section maximization and a few
// log-domain helpers.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <queue>
#include <span>
#include <vector>

#include "fdrexp/errors.hpp"

namespace fdrexp::numerics {

struct QuadratureOptions {
  double rel_tol = 1e-10;
  double abs_tol = 1e-14;
  std::size_t max_intervals = 4000;
};

namespace detail {

// 15-point Kronrod abscissae on [-1, 1] (nonnegative half) and weights, with
// the embedded 7-point Gauss weights on the odd-indexed abscissae.
inline constexpr std::array<double, 8> kKronrodNodes = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.0};
inline constexpr std::array<double, 8> kKronrodWeights = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> kGaussWeights = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Panel {
  double a;
  double b;
  double value;
  double error;
  bool operator<(const Panel& other) const { return error < other.error; }
};

template <typename F>
Panel gauss_kronrod_15(F& f, double a, double b) {
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const double fc = f(center);
  double kronrod = fc * kKronrodWeights[7];
  double gauss = fc * kGaussWeights[3];
  for (std::size_t j = 0; j < 7; ++j) {
    const double dx = half * kKronrodNodes[j];
    const double sum = f(center - dx) + f(center + dx);
    kronrod += kKronrodWeights[j] * sum;
    if (j % 2 == 1) gauss += kGaussWeights[j / 2] * sum;
  }
  return {a, b, kronrod * half, std::abs((kronrod - gauss) * half)};
}

}  // namespace detail

/// Globally adaptive G7/K15 quadrature of f over the finite interval [a, b].
/// The interval with the largest error estimate is bisected until the summed
/// estimate falls under max(abs_tol, rel_tol * |integral|).
template <typename F>
double integrate(F&& f, double a, double b, const QuadratureOptions& opts = {}) {
  if (a == b) return 0.0;
  if (b < a) return -integrate(f, b, a, opts);
  std::priority_queue<detail::Panel> heap;
  auto first = detail::gauss_kronrod_15(f, a, b);
  double total = first.value;
  double error = first.error;
  heap.push(first);
  while (error > std::max(opts.abs_tol, opts.rel_tol * std::abs(total)) &&
         heap.size() < opts.max_intervals) {
    const auto worst = heap.top();
    const double mid = 0.5 * (worst.a + worst.b);
    if (mid <= worst.a || mid >= worst.b) break;
    heap.pop();
    const auto left = detail::gauss_kronrod_15(f, worst.a, mid);
    const auto right = detail::gauss_kronrod_15(f, mid, worst.b);
    total += left.value + right.value - worst.value;
    error += left.error + right.error - worst.error;
    heap.push(left);
    heap.push(right);
  }
  return total;
}

/// Integrates over consecutive panels [breaks[i], breaks[i+1]].
template <typename F>
double integrate_piecewise(F&& f, std::span<const double> breaks,
                           const QuadratureOptions& opts = {}) {
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
    total += integrate(f, breaks[i], breaks[i + 1], opts);
  }
  return total;
}

/// Root of a function that is negative at lo and nonnegative at hi.
/// Bisects until the bracket is narrower than abs_width + rel_width * |x|.
template <typename F>
double bisect(F&& f, double lo, double hi, double abs_width = 1e-13, double rel_width = 1e-15,
              int max_iter = 400) {
  double flo = f(lo);
  double fhi = f(hi);
  if (flo >= 0.0) return lo;
  if (fhi < 0.0) throw NumericalError("bisect: bracket does not contain a sign change");
  for (int it = 0; it < max_iter; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (hi - lo <= abs_width + rel_width * std::abs(mid)) break;
    if (f(mid) < 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

struct Extremum {
  double x;
  double value;
};

/// Golden-section search for the maximum of a unimodal function on [lo, hi].
template <typename F>
Extremum golden_max(F&& f, double lo, double hi, double rel_tol = 1e-10, int max_iter = 300) {
  constexpr double kInvPhi = 0.6180339887498948482;
  double x1 = hi - kInvPhi * (hi - lo);
  double x2 = lo + kInvPhi * (hi - lo);
  double f1 = f(x1);
  double f2 = f(x2);
  for (int it = 0; it < max_iter; ++it) {
    if (hi - lo <= rel_tol * (std::abs(x1) + std::abs(x2)) + 1e-300) break;
    if (f1 < f2) {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + kInvPhi * (hi - lo);
      f2 = f(x2);
    } else {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - kInvPhi * (hi - lo);
      f1 = f(x1);
    }
  }
  return f1 >= f2 ? Extremum{x1, f1} : Extremum{x2, f2};
}

/// count points log-spaced between lo and hi inclusive (both > 0).
inline std::vector<double> logspace(double lo, double hi, std::size_t count) {
  std::vector<double> out(count);
  if (count == 1) {
    out[0] = lo;
    return out;
  }
  const double a = std::log(lo);
  const double step = (std::log(hi) - a) / static_cast<double>(count - 1);
  for (std::size_t i = 0; i < count; ++i) out[i] = std::exp(a + step * static_cast<double>(i));
  out.front() = lo;
  out.back() = hi;
  return out;
}

/// log(Σ exp(terms)), stable for large or very negative entries.
inline double log_sum_exp(std::span<const double> terms) {
  double peak = -std::numeric_limits<double>::infinity();
  for (double v : terms) peak = std::max(peak, v);
  if (!std::isfinite(peak)) return peak;
  double acc = 0.0;
  for (double v : terms) acc += std::exp(v - peak);
  return peak + std::log(acc);
}

/// Ordinary least-squares slope of y against x.
inline double ols_slope(std::span<const double> x, std::span<const double> y) {
  const auto n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  return sxy / sxx;
}

}  // namespace fdrexp::numerics
