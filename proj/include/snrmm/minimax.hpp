#pragma once

#include <cmath>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>

#include "snrmm/error.hpp"
#include "snrmm/estimators.hpp"
#include "snrmm/regime.hpp"
#include "snrmm/risk.hpp"

namespace snrmm {

/// Leading and second-order approximations of the minimax risk, in the
/// same units as the n-dimensional squared error. Vanishing remainders are
/// dropped throughout.
struct MinimaxApprox {
  RegimeLabel regime = RegimeLabel::Unclassified;
  double first_order = 0.0;
  /// Empty when only a bracket is known (moderate SNR, unbounded space).
  std::optional<double> second_order;
  std::optional<double> lower_bound;
  std::optional<double> upper_bound;
  double nu = 0.0;
  bool bounded_space = false;
  static constexpr std::string_view note = "asymptotic, o(1) dropped";
};

inline MinimaxApprox minimax_approx(const SparseSpace& space, RegimeLabel regime) {
  space.validate();
  detail::require(space.eps() < 1.0, "minimax_approx: eps = k/n must be below 1");
  const double scale = static_cast<double>(space.n) * space.sigma * space.sigma;
  const double eps = space.eps();
  const double mu = space.mu();
  const double signal = eps * mu * mu;

  MinimaxApprox a;
  a.regime = regime;
  a.nu = space.nu();
  a.bounded_space = space.a_bound.has_value();
  switch (regime) {
    case RegimeLabel::LowSNR:
      a.first_order = scale * signal;
      a.second_order = scale * (signal - signal * signal);
      break;
    case RegimeLabel::ModerateSNR: {
      const double e = std::exp(mu * mu);
      a.first_order = scale * signal;
      a.lower_bound = scale * (signal - 0.5 * eps * eps * mu * mu * e);
      a.upper_bound = scale * (signal - std::sqrt(2.0 / std::numbers::pi) * eps * eps * mu * e);
      if (a.bounded_space) a.second_order = a.lower_bound;
      break;
    }
    case RegimeLabel::HighSNR: {
      const double log_inv = std::log(1.0 / eps);
      a.first_order = scale * 2.0 * eps * log_inv;
      a.second_order = scale * (2.0 * eps * log_inv - 2.0 * eps * a.nu * std::sqrt(2.0 * std::log(a.nu)));
      break;
    }
    case RegimeLabel::Unclassified:
      throw DomainError("minimax_approx: regime is unclassified; classify the space or force a regime");
  }
  return a;
}

/// Approximate inf over tuning of the supremum risk of one estimator family.
inline double estimator_sup_risk_approx(EstimatorKind kind, const SparseSpace& space, RegimeLabel regime) {
  space.validate();
  detail::require(space.eps() < 1.0, "estimator_sup_risk_approx: eps = k/n must be below 1");
  const double scale = static_cast<double>(space.n) * space.sigma * space.sigma;
  const double eps = space.eps();
  const double mu = space.mu();
  const double signal = eps * mu * mu;
  const double log_inv = std::log(1.0 / eps);
  const double nu = space.nu();
  const bool low_or_moderate = regime == RegimeLabel::LowSNR || regime == RegimeLabel::ModerateSNR;

  switch (kind) {
    case EstimatorKind::Soft:
      if (low_or_moderate) return scale * (signal - std::exp(-log_inv * log_inv / (2.0 * mu * mu)));
      if (regime == RegimeLabel::HighSNR) return scale * (2.0 * eps * log_inv - 6.0 * eps * std::log(nu));
      break;
    case EstimatorKind::Hard:
      if (low_or_moderate) return scale * signal;
      if (regime == RegimeLabel::HighSNR)
        return scale * (2.0 * eps * log_inv - 2.0 * eps * nu * std::sqrt(2.0 * std::log(nu)));
      break;
    case EstimatorKind::Linear:
      if (regime != RegimeLabel::Unclassified) return scale * signal / (1.0 + signal);
      break;
    case EstimatorKind::SoftLinear:
      if (regime == RegimeLabel::ModerateSNR)
        return scale * (signal - std::sqrt(2.0 / std::numbers::pi) * eps * eps * mu * std::exp(mu * mu));
      break;
    case EstimatorKind::Zero: break;
  }
  throw DomainError("estimator_sup_risk_approx: no approximation for estimator '" + std::string(to_string(kind)) +
                    "' in regime '" + std::string(to_string(regime)) + "'");
}

/// 2 sigma^2 k log(n/k), the leading-order minimax risk over k-sparse vectors.
inline double classical_minimax(const SparseSpace& space) {
  space.validate();
  detail::require(space.k < space.n, "classical_minimax: k must be below n");
  return 2.0 * space.sigma * space.sigma * static_cast<double>(space.k) *
         std::log(static_cast<double>(space.n) / static_cast<double>(space.k));
}

} // namespace snrmm
