#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <string>
#include <string_view>
#include <vector>

#include "snrmm/error.hpp"
#include "snrmm/estimators.hpp"
#include "snrmm/regime.hpp"
#include "snrmm/risk.hpp"

namespace snrmm {

enum class Boundary { Interior, Lower, Upper };

inline constexpr std::string_view to_string(Boundary b) {
  switch (b) {
    case Boundary::Interior: return "interior";
    case Boundary::Lower: return "lower";
    case Boundary::Upper: return "upper";
  }
  return "unknown";
}

struct TuningResult {
  Tuning tuning;
  double value = 0.0;  ///< minimized supremum risk
  std::int64_t evaluations = 0;
  Boundary lambda_boundary = Boundary::Interior;
  Boundary gamma_boundary = Boundary::Interior;
  bool gamma_clamped = false;
};

template <class V>
struct GoldenResult {
  double x;
  V fx;
  int evaluations;
};

/// Golden-section minimization of f on [lo, hi]. V only needs operator<.
/// Stops once the bracket is narrower than tol * max(1, |x|).
template <class F>
auto golden_minimize(F&& f, double lo, double hi, double tol) {
  using V = decltype(f(lo));
  constexpr double inv_phi = 0.618033988749894848204586834366;
  double x1 = hi - inv_phi * (hi - lo);
  double x2 = lo + inv_phi * (hi - lo);
  V f1 = f(x1);
  V f2 = f(x2);
  int evals = 2;
  while (hi - lo > tol * std::max(1.0, std::abs(0.5 * (lo + hi))) && evals < 400) {
    if (f2 < f1) {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + inv_phi * (hi - lo);
      f2 = f(x2);
    } else {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - inv_phi * (hi - lo);
      f1 = f(x1);
    }
    ++evals;
  }
  if (f2 < f1) return GoldenResult<V>{x2, f2, evals};
  return GoldenResult<V>{x1, f1, evals};
}

inline std::vector<double> log_grid(double lo, double hi, std::size_t points) {
  std::vector<double> g(points);
  if (points == 1) {
    g[0] = lo;
    return g;
  }
  const double a = std::log(lo), b = std::log(hi);
  for (std::size_t i = 0; i < points; ++i)
    g[i] = std::exp(a + (b - a) * static_cast<double>(i) / static_cast<double>(points - 1));
  g.front() = lo;
  g.back() = hi;
  return g;
}

/// Upper end of the lambda search range, in noise units for the threshold
/// rules and dimensionless for Linear.
inline double lambda_search_upper(EstimatorKind kind, const SparseSpace& space) {
  const double eps = space.eps();
  const double mu = space.mu();
  if (kind == EstimatorKind::Linear) {
    // The optimum sits at 1/(eps mu^2); keep it well inside the range.
    return std::max(1e8, 1e3 * (1.0 + 1.0 / (eps * mu * mu)));
  }
  const double base = std::max(10.0, 2.0 * (mu + space.nu()));
  // When mu is small the soft-threshold optimum scales like log(2/eps)/mu.
  const double low_snr = 2.0 * (std::log(2.0 / eps) + 0.5 * mu * mu) / mu;
  return std::min(1e12, std::max(base, low_snr));
}

inline constexpr double lambda_search_lower = 1e-4;

namespace detail {

struct UnitOptimum {
  double lambda = 0.0;  // noise units (dimensionless for Linear)
  double unit_value = 0.0;
  std::int64_t evaluations = 0;
  Boundary boundary = Boundary::Interior;
};

inline UnitOptimum optimize_unit_lambda(EstimatorKind kind, double eps, double mu, double upper,
                                        int grid_points, double refine_tol) {
  std::vector<double> grid{0.0};
  const auto tail = log_grid(lambda_search_lower, upper, static_cast<std::size_t>(grid_points));
  grid.insert(grid.end(), tail.begin(), tail.end());

  UnitOptimum r;
  const auto solve = [&](auto&& objective) {
    // Strict < keeps the smallest lambda among ties.
    std::size_t best = 0;
    auto best_value = objective(grid[0]);
    for (std::size_t i = 1; i < grid.size(); ++i) {
      auto v = objective(grid[i]);
      if (v < best_value) {
        best_value = v;
        best = i;
      }
    }
    r.evaluations += static_cast<std::int64_t>(grid.size());
    r.lambda = grid[best];
    if (best == 0) {
      r.boundary = Boundary::Lower;
    } else if (best + 1 == grid.size()) {
      r.boundary = Boundary::Upper;
    } else {
      auto g = golden_minimize(objective, grid[best - 1], grid[best + 1], refine_tol);
      r.evaluations += g.evaluations;
      if (g.fx < best_value) r.lambda = g.x;
    }
  };

  if (kind == EstimatorKind::Soft) {
    // Compare in log space: near the optimum the excess over eps mu^2 can
    // sit hundreds of orders of magnitude below double resolution.
    solve([&](double lam) { return soft_excess(lam, eps, mu); });
  } else {
    solve([&](double lam) { return unit_sup_risk(kind, {lam, 0.0}, eps, mu); });
  }
  r.unit_value = unit_sup_risk(kind, {r.lambda, 0.0}, eps, mu);
  return r;
}

} // namespace detail

/// Minimizes the supremum risk over lambda for Soft, Hard or Linear:
/// log-spaced grid (plus lambda = 0), then golden section on the bracket
/// around the best node.
inline TuningResult optimize_lambda(EstimatorKind kind, const SparseSpace& space, int grid_points = 512,
                                    double refine_tol = 1e-8) {
  space.validate();
  detail::require(kind == EstimatorKind::Soft || kind == EstimatorKind::Hard || kind == EstimatorKind::Linear,
                  "optimize_lambda: estimator must be soft, hard or linear");
  detail::require(grid_points >= 3, "optimize_lambda: grid_points must be at least 3");
  detail::require(refine_tol > 0.0, "optimize_lambda: refine_tol must be positive");

  const auto opt = detail::optimize_unit_lambda(kind, space.eps(), space.mu(), lambda_search_upper(kind, space),
                                                grid_points, refine_tol);
  TuningResult result;
  result.tuning = scale_tuning(kind, {opt.lambda, 0.0}, space.sigma);
  result.value = static_cast<double>(space.n) * space.sigma * space.sigma * opt.unit_value;
  result.evaluations = opt.evaluations;
  result.lambda_boundary = opt.boundary;
  return result;
}

inline constexpr double gamma_cap = 1e12;

/// Joint minimization over (lambda, gamma) for SoftLinear: coarse grid
/// seeded with the moderate-SNR recommendation and the Soft and Linear
/// optima, then alternating golden-section passes.
inline TuningResult optimize_lambda_gamma(const SparseSpace& space, double refine_tol = 1e-8,
                                          int grid_points = 64) {
  space.validate();
  detail::require(refine_tol > 0.0, "optimize_lambda_gamma: refine_tol must be positive");
  const double eps = space.eps();
  const double mu = space.mu();
  const double lam_upper = lambda_search_upper(EstimatorKind::Soft, space);

  std::int64_t evals = 0;
  const auto objective = [&](double lam, double gamma) {
    ++evals;
    return unit_sup_risk(EstimatorKind::SoftLinear, {lam, gamma}, eps, mu);
  };

  std::vector<double> lam_grid{0.0};
  for (double v : log_grid(lambda_search_lower, lam_upper, static_cast<std::size_t>(grid_points)))
    lam_grid.push_back(v);
  std::vector<double> gamma_grid{0.0};
  for (double v : log_grid(1e-6, gamma_cap, static_cast<std::size_t>(grid_points)))
    gamma_grid.push_back(v);

  double best_lam = 0.0, best_gamma = 0.0;
  double best = objective(0.0, 0.0);
  const auto consider = [&](double lam, double gamma) {
    lam = std::clamp(lam, 0.0, lam_upper);
    gamma = std::clamp(gamma, 0.0, gamma_cap);
    const double v = objective(lam, gamma);
    if (v < best) {
      best = v;
      best_lam = lam;
      best_gamma = gamma;
    }
  };
  for (double l : lam_grid)
    for (double g : gamma_grid) consider(l, g);

  // Seeds: moderate-SNR recommendation, Soft optimum at gamma = 0 and the
  // Linear optimum at lambda = 0.
  consider(2.0 * mu, 1.0 / (2.0 * eps * mu * mu * std::exp(1.5 * mu * mu)) - 1.0);
  {
    auto soft = detail::optimize_unit_lambda(EstimatorKind::Soft, eps, mu, lam_upper, 512, refine_tol);
    consider(soft.lambda, 0.0);
    auto lin = detail::optimize_unit_lambda(EstimatorKind::Linear, eps, mu,
                                            lambda_search_upper(EstimatorKind::Linear, space), 512, refine_tol);
    consider(0.0, lin.lambda);
    evals += soft.evaluations + lin.evaluations;
  }

  const double lam_ratio = lam_grid[2] / lam_grid[1];
  const double gamma_ratio = gamma_grid[2] / gamma_grid[1];
  for (int pass = 0; pass < 200; ++pass) {
    const double before = best;
    {
      const double lo = best_lam > 0.0 ? best_lam / lam_ratio : 0.0;
      const double hi = std::min(lam_upper, best_lam > 0.0 ? best_lam * lam_ratio : lam_grid[1]);
      const double g = best_gamma;
      auto r = golden_minimize([&](double l) { return objective(l, g); }, lo, hi, refine_tol);
      if (r.fx < best) {
        best = r.fx;
        best_lam = r.x;
      }
    }
    {
      const double lo = best_gamma > 0.0 ? best_gamma / gamma_ratio : 0.0;
      const double hi = std::min(gamma_cap, best_gamma > 0.0 ? best_gamma * gamma_ratio : gamma_grid[1]);
      const double l = best_lam;
      auto r = golden_minimize([&](double g) { return objective(l, g); }, lo, hi, refine_tol);
      if (r.fx < best) {
        best = r.fx;
        best_gamma = r.x;
      }
    }
    if (before - best <= refine_tol * best) break;
  }

  TuningResult result;
  result.tuning = {best_lam * space.sigma, best_gamma};
  result.value = static_cast<double>(space.n) * space.sigma * space.sigma * best;
  result.evaluations = evals;
  result.lambda_boundary = best_lam == 0.0 ? Boundary::Lower
                           : best_lam >= lam_upper ? Boundary::Upper
                                                   : Boundary::Interior;
  result.gamma_boundary = best_gamma == 0.0 ? Boundary::Lower
                          : best_gamma >= gamma_cap ? Boundary::Upper
                                                    : Boundary::Interior;
  result.gamma_clamped = best_gamma >= gamma_cap;
  return result;
}

struct RecommendedTuning {
  Tuning tuning;
  bool gamma_clamped = false;  ///< the moderate-SNR gamma formula went negative
};

/// Closed-form tunings that attain the regime's minimax approximation:
/// universal threshold for Soft/Hard, 1/(eps mu^2) for Linear at low SNR,
/// (2 sigma mu, 1/(2 eps mu^2 e^{1.5 mu^2}) - 1) for SoftLinear at moderate SNR.
inline RecommendedTuning recommended_tuning(EstimatorKind kind, const SparseSpace& space, RegimeLabel regime) {
  space.validate();
  const double eps = space.eps();
  const double mu = space.mu();
  switch (kind) {
    case EstimatorKind::Soft:
    case EstimatorKind::Hard:
      return {{space.sigma * space.nu(), 0.0}, false};
    case EstimatorKind::Linear:
      if (regime == RegimeLabel::LowSNR) return {{1.0 / (eps * mu * mu), 0.0}, false};
      break;
    case EstimatorKind::SoftLinear:
      if (regime == RegimeLabel::ModerateSNR) {
        const double gamma = 1.0 / (2.0 * eps * mu * mu * std::exp(1.5 * mu * mu)) - 1.0;
        return {{2.0 * space.sigma * mu, std::max(0.0, gamma)}, gamma < 0.0};
      }
      break;
    case EstimatorKind::Zero: break;
  }
  throw DomainError("recommended_tuning: no recommendation for estimator '" + std::string(to_string(kind)) +
                    "' in regime '" + std::string(to_string(regime)) + "'");
}

struct Interval {
  double lower = 0.0;
  double upper = 0.0;
  bool contains(double x) const { return lower <= x && x <= upper; }
};

/// Window of lambda^2 / sigma^2 over which hard thresholding keeps the
/// high-SNR second-order risk: [nu^2 - c1 log log nu, nu^2 + c2 nu sqrt(2 log nu)].
inline Interval hard_tuning_window(const SparseSpace& space, double c1, double c2) {
  space.validate();
  detail::require(c1 >= 0.0 && c1 < 1.0, "hard_tuning_window: c1 must lie in [0, 1)");
  detail::require(c2 > 0.0, "hard_tuning_window: c2 must be positive");
  const double nu = space.nu();
  detail::require(nu > std::numbers::e, "hard_tuning_window: needs nu = sqrt(2 log(1/eps)) > e");
  const double nu2 = nu * nu;
  return {nu2 - c1 * std::log(std::log(nu)), nu2 + c2 * nu * std::sqrt(2.0 * std::log(nu))};
}

} // namespace snrmm
