#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <string_view>
#include <vector>

#include "snrmm/error.hpp"
#include "snrmm/estimators.hpp"
#include "snrmm/gaussian.hpp"
#include "snrmm/parallel.hpp"

namespace snrmm {

/// Parameter space of k-sparse mean vectors in R^n with ||theta||_2^2 <= k tau^2,
/// observed with noise level sigma. a_bound, when present, adds the
/// sup-norm cap ||theta||_inf <= a_bound * tau.
struct SparseSpace {
  std::int64_t n = 1;
  std::int64_t k = 1;
  double tau = 1.0;
  double sigma = 1.0;
  std::optional<double> a_bound;

  double eps() const { return static_cast<double>(k) / static_cast<double>(n); }
  double mu() const { return tau / sigma; }
  /// sqrt(2 log(1/eps)), the universal threshold at unit noise.
  double nu() const { return std::sqrt(2.0 * std::log(1.0 / eps())); }

  void validate() const {
    detail::require(n >= 1, "n must be a positive integer");
    detail::require(k >= 1, "k must be a positive integer");
    detail::require(k <= n, "k must not exceed n");
    detail::require(tau > 0.0 && std::isfinite(tau), "tau must be a positive finite number");
    detail::require(sigma > 0.0 && std::isfinite(sigma), "sigma must be a positive finite number");
    if (a_bound) detail::require(*a_bound > 1.0, "a_bound must exceed 1");
  }
};

enum class RiskMethod { ClosedForm, Quadrature, MonteCarlo };

inline constexpr std::string_view to_string(RiskMethod m) {
  switch (m) {
    case RiskMethod::ClosedForm: return "closed_form";
    case RiskMethod::Quadrature: return "quadrature";
    case RiskMethod::MonteCarlo: return "monte_carlo";
  }
  return "unknown";
}

struct RiskReport {
  double value = 0.0;
  RiskMethod method = RiskMethod::ClosedForm;
  /// Absolute error estimate for quadrature, standard error for Monte Carlo.
  double error_bound = 0.0;
};

// ---- one-dimensional risks at unit noise --------------------------------

/// E soft(mu+z, lam).
inline double soft_first_moment(double lam, double mu) {
  return tail_moment(1, lam - mu) - tail_moment(1, lam + mu);
}

/// E soft(mu+z, lam)^2.
inline double soft_second_moment(double lam, double mu) {
  return tail_moment(2, lam - mu) + tail_moment(2, lam + mu);
}

inline double risk_linear(double lam, double mu) {
  const double shrink = 1.0 / (1.0 + lam);
  const double bias = lam * shrink;
  return bias * bias * mu * mu + shrink * shrink;
}

/// Risk of soft thresholding followed by 1/(1+gamma) shrinkage.
inline double risk_elastic(double lam, double gamma, double mu) {
  if (std::isinf(gamma)) return mu * mu;
  if (lam == 0.0) return risk_linear(gamma, mu);
  const double s = 1.0 / (1.0 + gamma);
  const double m1 = soft_first_moment(lam, mu);
  const double m2 = soft_second_moment(lam, mu);
  return s * s * m2 - 2.0 * mu * s * m1 + mu * mu;
}

inline double risk_soft(double lam, double mu) { return risk_elastic(lam, 0.0, mu); }

inline double risk_hard(double lam, double mu) {
  mu = std::abs(mu);
  const double a = lam - mu;
  const double b = lam + mu;
  // P(-b < z < a); for a < 0 the complement form would cancel.
  const double mass = a < 0.0 ? upper_tail(-a) - upper_tail(b) : 1.0 - upper_tail(a) - upper_tail(b);
  return (mu * mu - 1.0) * mass + 1.0 + a * phi(a) + b * phi(b);
}

/// Unit-noise risk of `kind` at signal mu.
inline double risk_1d(EstimatorKind kind, const Tuning& t, double mu) {
  switch (kind) {
    case EstimatorKind::Soft: return risk_soft(t.lambda, mu);
    case EstimatorKind::Hard: return risk_hard(t.lambda, mu);
    case EstimatorKind::Linear: return risk_linear(t.lambda, mu);
    case EstimatorKind::SoftLinear: return risk_elastic(t.lambda, t.gamma, mu);
    case EstimatorKind::Zero: return mu * mu;
  }
  return 0.0;
}

/// Quadrature evaluation of E(estimate(mu+z) - mu)^2, independent of the
/// closed forms above.
inline RiskReport quadrature_risk(EstimatorKind kind, const Tuning& t, double mu, double tol = 1e-10) {
  validate(kind, t);
  const auto loss = [&](double z) {
    const double e = estimate(kind, t, mu + z) - mu;
    return e * e;
  };
  const std::array<double, 2> kinks = {t.lambda - mu, -t.lambda - mu};
  const auto q = gauss_expect(loss, 0.0, 10.0, tol, kinks);
  return {q.value, RiskMethod::Quadrature, q.error};
}

/// Monte Carlo estimate of E(estimate(mu+z) - mu)^2. Draws are split into
/// fixed chunks with derived seeds and merged in chunk order, so the result
/// depends only on (samples, seed).
inline RiskReport mc_risk(EstimatorKind kind, const Tuning& t, double mu, std::uint64_t samples,
                          std::uint64_t seed) {
  validate(kind, t);
  detail::require(samples >= 1, "mc_risk: samples must be positive");
  constexpr std::uint64_t chunk = 1u << 15;
  const std::size_t chunks = static_cast<std::size_t>((samples + chunk - 1) / chunk);
  std::vector<RunningStats> parts(chunks);
  parallel_for(chunks, [&](std::size_t c) {
    const std::uint64_t begin = c * chunk;
    const std::uint64_t count = std::min(chunk, samples - begin);
    std::mt19937_64 gen(derive_seed(seed, c));
    std::normal_distribution<double> normal;
    RunningStats s;
    for (std::uint64_t i = 0; i < count; ++i) {
      const double e = estimate(kind, t, mu + normal(gen)) - mu;
      s.push(e * e);
    }
    parts[c] = s;
  });
  RunningStats total;
  for (const auto& p : parts) total.merge(p);
  return {total.mean, RiskMethod::MonteCarlo, total.standard_error()};
}

// ---- supremum risk ------------------------------------------------------

struct InnerMax {
  double value = 0.0;
  double argmax = 0.0;
};

/// max over m in [0, mu_max] of r_H(lam, m): coarse grid, then golden
/// section on the bracket around the best node. The grid maximum is kept
/// as a floor in case the profile is not unimodal.
inline InnerMax hard_inner_max(double lam, double mu_max, std::size_t grid_points = 1024) {
  mu_max = std::abs(mu_max);
  if (mu_max == 0.0) return {risk_hard(lam, 0.0), 0.0};
  const double step = mu_max / static_cast<double>(grid_points - 1);
  std::size_t best = 0;
  double best_value = risk_hard(lam, 0.0);
  for (std::size_t i = 1; i < grid_points; ++i) {
    const double v = risk_hard(lam, step * static_cast<double>(i));
    if (v > best_value) {
      best_value = v;
      best = i;
    }
  }
  double lo = best == 0 ? 0.0 : step * static_cast<double>(best - 1);
  double hi = std::min(mu_max, step * static_cast<double>(best + 1));
  constexpr double inv_phi = 0.618033988749894848204586834366;
  double x1 = hi - inv_phi * (hi - lo);
  double x2 = lo + inv_phi * (hi - lo);
  double f1 = risk_hard(lam, x1);
  double f2 = risk_hard(lam, x2);
  const double tol = 1e-10 * std::max(1.0, mu_max);
  while (hi - lo > tol) {
    if (f1 < f2) {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + inv_phi * (hi - lo);
      f2 = risk_hard(lam, x2);
    } else {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - inv_phi * (hi - lo);
      f1 = risk_hard(lam, x1);
    }
  }
  const double x = f1 >= f2 ? x1 : x2;
  const double fx = std::max(f1, f2);
  if (fx >= best_value) return {fx, x};
  return {best_value, step * static_cast<double>(best)};
}

/// Supremum risk per coordinate at unit noise:
/// (1-eps) r(lam, 0) + eps r(lam, mu), with the Hard rule's inner maximum.
/// lam is already expressed in noise units.
inline double unit_sup_risk(EstimatorKind kind, const Tuning& unit_tuning, double eps, double mu) {
  if (kind == EstimatorKind::Hard) {
    return (1.0 - eps) * risk_hard(unit_tuning.lambda, 0.0) +
           eps * hard_inner_max(unit_tuning.lambda, mu).value;
  }
  return (1.0 - eps) * risk_1d(kind, unit_tuning, 0.0) + eps * risk_1d(kind, unit_tuning, mu);
}

/// Tuning re-expressed at unit noise (Linear is already dimensionless).
inline Tuning unit_tuning(EstimatorKind kind, const Tuning& t, double sigma) {
  return scale_tuning(kind, t, 1.0 / sigma);
}

/// Worst-case n-dimensional mean squared error over the space.
inline RiskReport sup_risk(EstimatorKind kind, const Tuning& t, const SparseSpace& space) {
  space.validate();
  validate(kind, t);
  const double unit = unit_sup_risk(kind, unit_tuning(kind, t, space.sigma), space.eps(), space.mu());
  return {static_cast<double>(space.n) * space.sigma * space.sigma * unit, RiskMethod::ClosedForm, 0.0};
}

// ---- soft thresholding excess in log space ------------------------------

/// A real number stored as sign and log magnitude. Used where the quantity
/// of interest underflows double, e.g. the soft-threshold excess risk near
/// its optimum.
struct SignedLog {
  int sign = 0;  // -1, 0, +1
  double log_abs = -std::numeric_limits<double>::infinity();

  double to_double() const { return sign == 0 ? 0.0 : sign * std::exp(log_abs); }

  friend bool operator<(const SignedLog& a, const SignedLog& b) {
    if (a.sign != b.sign) return a.sign < b.sign;
    if (a.sign == 0) return false;
    return a.sign > 0 ? a.log_abs < b.log_abs : a.log_abs > b.log_abs;
  }
};

namespace detail {

inline SignedLog signed_log_sum(std::span<const SignedLog> terms) {
  double top = -std::numeric_limits<double>::infinity();
  for (const auto& t : terms)
    if (t.sign != 0) top = std::max(top, t.log_abs);
  if (!std::isfinite(top)) return {};
  double acc = 0.0;
  for (const auto& t : terms)
    if (t.sign != 0) acc += t.sign * std::exp(t.log_abs - top);
  if (acc == 0.0) return {};
  return {acc > 0.0 ? 1 : -1, top + std::log(std::abs(acc))};
}

} // namespace detail

/// (1-eps) r_S(lam,0) + eps r_S(lam,mu) - eps mu^2 at unit noise, kept in
/// log space so that values far below the double range still order.
inline SignedLog soft_excess(double lam, double eps, double mu) {
  mu = std::abs(mu);
  std::vector<SignedLog> terms;
  if (eps < 1.0)
    terms.push_back({1, std::log1p(-eps) + std::log(2.0) + log_tail_moment(2, lam)});
  const double a = lam - mu;
  const double b = lam + mu;
  // psi2(a) - 2 mu psi1(a) = psi1(a) (psi2/psi1 - 2 mu)
  const double gap = tail_moment_ratio21(a) - 2.0 * mu;
  if (gap != 0.0)
    terms.push_back({gap > 0.0 ? 1 : -1, std::log(eps) + log_tail_moment(1, a) + std::log(std::abs(gap))});
  // psi2(b) + 2 mu psi1(b) > 0
  terms.push_back({1, std::log(eps) + log_tail_moment(1, b) + std::log(tail_moment_ratio21(b) + 2.0 * mu)});
  return detail::signed_log_sum(terms);
}

} // namespace snrmm
