#pragma once

#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "snrmm/error.hpp"

namespace snrmm {

enum class EstimatorKind { Soft, Hard, Linear, SoftLinear, Zero };

/// Threshold / shrinkage pair. lambda is in observation units for the
/// thresholding rules and dimensionless for Linear; gamma only matters for
/// SoftLinear and may be +inf (which collapses it to Zero).
struct Tuning {
  double lambda = 0.0;
  double gamma = 0.0;

  bool operator==(const Tuning&) const = default;
};

inline constexpr std::string_view to_string(EstimatorKind kind) {
  switch (kind) {
    case EstimatorKind::Soft: return "soft";
    case EstimatorKind::Hard: return "hard";
    case EstimatorKind::Linear: return "linear";
    case EstimatorKind::SoftLinear: return "softlinear";
    case EstimatorKind::Zero: return "zero";
  }
  return "unknown";
}

inline EstimatorKind parse_estimator(std::string_view name) {
  for (auto k : {EstimatorKind::Soft, EstimatorKind::Hard, EstimatorKind::Linear,
                 EstimatorKind::SoftLinear, EstimatorKind::Zero})
    if (to_string(k) == name) return k;
  throw DomainError("unknown estimator '" + std::string(name) + "'");
}

inline void validate(EstimatorKind kind, const Tuning& t) {
  detail::require(t.lambda >= 0.0 && std::isfinite(t.lambda), "lambda must be a finite number >= 0");
  if (kind == EstimatorKind::SoftLinear) detail::require(t.gamma >= 0.0, "gamma must be >= 0");
}

inline double soft_threshold(double y, double lam) {
  const double mag = std::abs(y) - lam;
  return mag > 0.0 ? std::copysign(mag, y) : 0.0;
}

inline double hard_threshold(double y, double lam) { return std::abs(y) > lam ? y : 0.0; }

/// One coordinate of the estimator.
inline double estimate(EstimatorKind kind, const Tuning& t, double y) {
  switch (kind) {
    case EstimatorKind::Soft: return soft_threshold(y, t.lambda);
    case EstimatorKind::Hard: return hard_threshold(y, t.lambda);
    case EstimatorKind::Linear: return y / (1.0 + t.lambda);
    case EstimatorKind::SoftLinear:
      if (std::isinf(t.gamma)) return 0.0;
      return soft_threshold(y, t.lambda) / (1.0 + t.gamma);
    case EstimatorKind::Zero: return 0.0;
  }
  return 0.0;
}

inline std::vector<double> apply(EstimatorKind kind, const Tuning& t, std::span<const double> y) {
  std::vector<double> out(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) out[i] = estimate(kind, t, y[i]);
  return out;
}

/// Tuning that makes the estimator commute with y -> t*y.
inline Tuning scale_tuning(EstimatorKind kind, const Tuning& tuning, double t) {
  detail::require(t > 0.0, "scale_tuning: t must be positive");
  switch (kind) {
    case EstimatorKind::Soft:
    case EstimatorKind::Hard:
    case EstimatorKind::SoftLinear: return {tuning.lambda * t, tuning.gamma};
    case EstimatorKind::Linear:
    case EstimatorKind::Zero: return tuning;
  }
  return tuning;
}

} // namespace snrmm
