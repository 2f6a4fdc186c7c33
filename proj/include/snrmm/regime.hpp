#pragma once

#include <cmath>
#include <string>
#include <string_view>

#include "snrmm/error.hpp"
#include "snrmm/risk.hpp"

namespace snrmm {

enum class RegimeLabel { LowSNR, ModerateSNR, HighSNR, Unclassified };

inline constexpr std::string_view to_string(RegimeLabel r) {
  switch (r) {
    case RegimeLabel::LowSNR: return "low";
    case RegimeLabel::ModerateSNR: return "moderate";
    case RegimeLabel::HighSNR: return "high";
    case RegimeLabel::Unclassified: return "unclassified";
  }
  return "unknown";
}

inline RegimeLabel parse_regime(std::string_view name) {
  for (auto r : {RegimeLabel::LowSNR, RegimeLabel::ModerateSNR, RegimeLabel::HighSNR, RegimeLabel::Unclassified})
    if (to_string(r) == name) return r;
  throw DomainError("unknown regime '" + std::string(name) + "'");
}

/// Regime label plus the diagnostics it was derived from.
struct Regime {
  RegimeLabel label = RegimeLabel::Unclassified;
  double mu = 0.0;
  double ratio = 0.0;  ///< mu / sqrt(log(1/eps))
};

/// Finite-sample reading of the asymptotic regimes: mu <= low_cut is low
/// SNR, mu >= high_cut sqrt(log 1/eps) is high SNR, mu in
/// (low_cut, sqrt(log 1/eps) / high_cut] is moderate. The gap between the
/// last two bands is left unclassified on purpose.
inline Regime classify_regime(const SparseSpace& space, double low_cut = 0.5, double high_cut = 2.0) {
  space.validate();
  detail::require(space.eps() < 1.0, "classify_regime: eps = k/n must be below 1");
  detail::require(low_cut >= 0.0, "classify_regime: low_cut must be >= 0");
  detail::require(high_cut > 0.0, "classify_regime: high_cut must be positive");
  const double mu = space.mu();
  const double scale = std::sqrt(std::log(1.0 / space.eps()));
  Regime r{RegimeLabel::Unclassified, mu, mu / scale};
  if (mu <= low_cut)
    r.label = RegimeLabel::LowSNR;
  else if (mu >= high_cut * scale)
    r.label = RegimeLabel::HighSNR;
  else if (mu <= scale / high_cut)
    r.label = RegimeLabel::ModerateSNR;
  return r;
}

} // namespace snrmm
