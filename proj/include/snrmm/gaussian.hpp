#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <numbers>
#include <queue>
#include <span>
#include <vector>

#include "snrmm/error.hpp"

namespace snrmm {

inline constexpr double inv_sqrt_2pi = 0.398942280401432677939946059934;
inline constexpr double log_sqrt_2pi = 0.918938533204672741780329736406;

/// Standard normal density. x is split as hi + lo with hi on a 2^-16
/// lattice so that hi*hi is exact; otherwise the rounding of x*x alone
/// costs ~1e-13 relative accuracy once x*x/2 reaches the hundreds.
inline double phi(double x) {
  x = std::abs(x);
  if (x < 4.0) return inv_sqrt_2pi * std::exp(-0.5 * x * x);
  const double hi = std::ldexp(std::floor(std::ldexp(x, 16)), -16);
  const double lo = x - hi;
  return inv_sqrt_2pi * std::exp(-0.5 * hi * hi) * std::exp(-0.5 * lo * (hi + x));
}

inline double log_phi(double x) { return -0.5 * x * x - log_sqrt_2pi; }

/// Truncated asymptotic series for the Mills ratio,
/// phi(lam)/lam * sum_{j<=order} (-1)^j (2j)! / (j! 2^j lam^{2j}).
/// Odd orders bound the upper tail from below, even orders from above.
inline double mills_bound(unsigned order, double lam) {
  detail::require(lam > 0.0 && std::isfinite(lam), "mills_bound: lam must be a positive finite number");
  // (2j)!/(j! 2^j) = (2j-1)!!, so consecutive terms differ by -(2j-1)/lam^2.
  const double inv_lam2 = 1.0 / (lam * lam);
  double term = 1.0;
  double sum = 1.0;
  for (unsigned j = 1; j <= order; ++j) {
    term *= -static_cast<double>(2 * j - 1) * inv_lam2;
    sum += term;
  }
  return phi(lam) / lam * sum;
}

namespace detail {

// J_k(a) = int_0^inf t^k exp(-a t - t^2/2) dt, so that the tail moments
// psi_k(a) = int_a^inf (z-a)^k phi(z) dz equal phi(a) J_k(a).
// Integration by parts gives a J_k + J_{k+1} = k J_{k-1}; the ratios
// r_k = J_k / J_{k-1} satisfy r_k = k / (a + r_{k+1}), which is stable when
// run backwards for a bounded away from zero.
struct ScaledTail {
  double j0, j1, j2;
};

inline ScaledTail scaled_tail_cf(double a) {
  const int depth = 40 + static_cast<int>(1200.0 / (a * a));
  double r = 0.0;
  double r1 = 0.0, r2 = 0.0;
  for (int k = depth; k >= 1; --k) {
    r = k / (a + r);
    if (k == 2) r2 = r;
    if (k == 1) r1 = r;
  }
  const double j0 = 1.0 / (a + r1);
  const double j1 = r1 * j0;
  return {j0, j1, r2 * j1};
}

inline constexpr double cf_cutoff = 2.0;

} // namespace detail

/// 1 - Phi(x). Uses erfc near the center and phi times the continued
/// fraction for the Mills ratio in the right tail; never 1 - Phi.
inline double upper_tail(double x) {
  if (x > detail::cf_cutoff) return phi(x) * detail::scaled_tail_cf(x).j0;
  return 0.5 * std::erfc(x / std::numbers::sqrt2);
}

/// Phi(x).
inline double lower_tail(double x) { return upper_tail(-x); }

/// Partial moment int_a^inf (z-a)^order phi(z) dz for order 0, 1, 2.
/// Order 0 is the upper tail; order 1 is phi(a) - a Q(a); order 2 is
/// (1+a^2) Q(a) - a phi(a).
inline double tail_moment(int order, double a) {
  detail::require(order >= 0 && order <= 2, "tail_moment: order must be 0, 1 or 2");
  if (a > detail::cf_cutoff) {
    const auto j = detail::scaled_tail_cf(a);
    const double p = phi(a);
    return order == 0 ? p * j.j0 : order == 1 ? p * j.j1 : p * j.j2;
  }
  const double q = upper_tail(a);
  const double p = phi(a);
  switch (order) {
    case 0: return q;
    case 1: return p - a * q;
    default: return (1.0 + a * a) * q - a * p;
  }
}

/// log of tail_moment, finite for every finite a.
inline double log_tail_moment(int order, double a) {
  detail::require(order >= 0 && order <= 2, "log_tail_moment: order must be 0, 1 or 2");
  if (a > detail::cf_cutoff) {
    const auto j = detail::scaled_tail_cf(a);
    const double jk = order == 0 ? j.j0 : order == 1 ? j.j1 : j.j2;
    return log_phi(a) + std::log(jk);
  }
  return std::log(tail_moment(order, a));
}

/// tail_moment(2, a) / tail_moment(1, a) without underflow.
inline double tail_moment_ratio21(double a) {
  if (a > detail::cf_cutoff) {
    const auto j = detail::scaled_tail_cf(a);
    return j.j2 / j.j1;
  }
  return tail_moment(2, a) / tail_moment(1, a);
}

struct QuadratureResult {
  double value = 0.0;
  double error = 0.0;
  std::size_t evaluations = 0;
};

namespace detail {

struct KronrodPanel {
  double lo, hi, value, error;
  bool operator<(const KronrodPanel& o) const { return error < o.error; }
};

// 7-point Gauss / 15-point Kronrod pair.
inline KronrodPanel gk15(const std::function<double(double)>& g, double lo, double hi) {
  static constexpr std::array<double, 8> xk = {
      0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
      0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
      0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
      0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
  static constexpr std::array<double, 8> wk = {
      0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
      0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
      0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
      0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
  static constexpr std::array<double, 4> wg = {
      0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
      0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

  const double c = 0.5 * (lo + hi);
  const double h = 0.5 * (hi - lo);
  const double fc = g(c);
  double kron = wk[7] * fc;
  double gauss = wg[3] * fc;
  for (int i = 0; i < 7; ++i) {
    const double f1 = g(c - h * xk[i]);
    const double f2 = g(c + h * xk[i]);
    kron += wk[i] * (f1 + f2);
    if (i % 2 == 1) gauss += wg[i / 2] * (f1 + f2);
  }
  return {lo, hi, kron * h, std::abs((kron - gauss) * h)};
}

} // namespace detail

/// Adaptive Gauss-Kronrod estimate of int f(z) phi(z) dz over
/// [center - halfwidth, center + halfwidth]. Breakpoints inside the range
/// split the initial panels so kinks fall on panel edges.
inline QuadratureResult gauss_expect(const std::function<double(double)>& f, double center,
                                     double halfwidth, double tol = 1e-10,
                                     std::span<const double> breakpoints = {},
                                     std::size_t max_evaluations = 200000) {
  detail::require(halfwidth >= 8.0, "gauss_expect: halfwidth must be at least 8");
  detail::require(tol > 0.0, "gauss_expect: tol must be positive");
  const double lo = center - halfwidth;
  const double hi = center + halfwidth;

  std::vector<double> edges{lo};
  for (double b : breakpoints)
    if (b > lo && b < hi) edges.push_back(b);
  edges.push_back(hi);
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());

  const auto g = [&f](double z) { return f(z) * phi(z); };
  std::priority_queue<detail::KronrodPanel> panels;
  double total = 0.0, error = 0.0;
  std::size_t evals = 0;
  for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
    auto p = detail::gk15(g, edges[i], edges[i + 1]);
    evals += 15;
    total += p.value;
    error += p.error;
    panels.push(p);
  }

  while (error > tol) {
    if (evals + 30 > max_evaluations)
      throw ConvergenceError("gauss_expect: node budget exhausted", total, error);
    auto worst = panels.top();
    const double mid = 0.5 * (worst.lo + worst.hi);
    if (!(mid > worst.lo && mid < worst.hi))
      throw ConvergenceError("gauss_expect: panel width underflow", total, error);
    panels.pop();
    auto left = detail::gk15(g, worst.lo, mid);
    auto right = detail::gk15(g, mid, worst.hi);
    evals += 30;
    total += left.value + right.value - worst.value;
    error += left.error + right.error - worst.error;
    panels.push(left);
    panels.push(right);
  }
  // Recompute the sums from the panels: the running totals drift by rounding.
  total = 0.0;
  error = 0.0;
  std::vector<detail::KronrodPanel> done;
  while (!panels.empty()) {
    done.push_back(panels.top());
    panels.pop();
  }
  std::sort(done.begin(), done.end(), [](const auto& a, const auto& b) { return a.lo < b.lo; });
  for (const auto& p : done) {
    total += p.value;
    error += p.error;
  }
  return {total, error, evals};
}

} // namespace snrmm
