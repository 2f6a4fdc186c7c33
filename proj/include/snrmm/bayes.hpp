#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "snrmm/error.hpp"
#include "snrmm/minimax.hpp"
#include "snrmm/parallel.hpp"
#include "snrmm/regime.hpp"
#include "snrmm/risk.hpp"

namespace snrmm {

enum class Sidedness { Symmetric, OneSided };

inline constexpr std::string_view to_string(Sidedness s) {
  return s == Sidedness::Symmetric ? "symmetric" : "onesided";
}

inline Sidedness parse_sidedness(std::string_view name) {
  if (name == "symmetric") return Sidedness::Symmetric;
  if (name == "onesided") return Sidedness::OneSided;
  throw DomainError("unknown sidedness '" + std::string(name) + "'");
}

/// One nonzero coordinate of magnitude mu at a uniform position in R^m;
/// its sign is uniform for Symmetric and positive for OneSided.
struct SpikePrior {
  double mu = 1.0;
  std::int64_t m = 1;
  Sidedness sided = Sidedness::Symmetric;
};

/// Independent copies of a spike prior on consecutive blocks.
struct BlockPrior {
  SpikePrior spike;
  std::int64_t blocks = 1;
};

struct BayesRiskEstimate {
  double value = 0.0;
  double standard_error = 0.0;
  std::int64_t reps = 0;
  std::uint64_t seed = 0;
};

/// Posterior mean under the symmetric spike prior, evaluated in log space.
inline std::vector<double> posterior_mean_symmetric(std::span<const double> y, double mu) {
  detail::require(!y.empty(), "posterior_mean_symmetric: y must be nonempty");
  detail::require(mu > 0.0, "posterior_mean_symmetric: mu must be positive");
  // log(e^{s} + e^{-s}) = |s| + log1p(e^{-2|s|})
  std::vector<double> log_cosh2(y.size());
  double top = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double s = std::abs(mu * y[i]);
    log_cosh2[i] = s + std::log1p(std::exp(-2.0 * s));
    top = std::max(top, log_cosh2[i]);
  }
  std::vector<double> out(y.size());
  double acc = 0.0;
  for (std::size_t j = 0; j < y.size(); ++j) {
    out[j] = std::exp(log_cosh2[j] - top);
    acc += out[j];
  }
  // e^{s} - e^{-s} = (e^{s} + e^{-s}) tanh(s), reusing the normalized weights.
  for (std::size_t j = 0; j < y.size(); ++j) out[j] = mu * std::tanh(mu * y[j]) * (out[j] / acc);
  return out;
}

/// Posterior mean under the one-sided spike prior: mu times the softmax of mu*y.
inline std::vector<double> posterior_mean_onesided(std::span<const double> y, double mu) {
  detail::require(!y.empty(), "posterior_mean_onesided: y must be nonempty");
  detail::require(mu > 0.0, "posterior_mean_onesided: mu must be positive");
  double top = -std::numeric_limits<double>::infinity();
  for (double v : y) top = std::max(top, mu * v);
  std::vector<double> out(y.size());
  double acc = 0.0;
  for (std::size_t j = 0; j < y.size(); ++j) {
    out[j] = std::exp(mu * y[j] - top);
    acc += out[j];
  }
  for (double& v : out) v = mu * v / acc;
  return out;
}

inline std::vector<double> posterior_mean(const SpikePrior& prior, std::span<const double> y) {
  return prior.sided == Sidedness::Symmetric ? posterior_mean_symmetric(y, prior.mu)
                                             : posterior_mean_onesided(y, prior.mu);
}

/// Bayes risk of an arbitrary block estimator under the block prior,
/// estimated from `reps` draws of one block and scaled by the block count.
/// Reps are sharded with derived seeds, so the result is independent of
/// the worker count.
template <class BlockEstimator>
BayesRiskEstimate mc_bayes_risk_with(const BlockPrior& prior, std::int64_t reps, std::uint64_t seed,
                                     BlockEstimator&& estimator) {
  detail::require(prior.spike.mu > 0.0, "mc_bayes_risk: mu must be positive");
  detail::require(prior.spike.m >= 1, "mc_bayes_risk: m must be positive");
  detail::require(prior.blocks >= 1, "mc_bayes_risk: blocks must be positive");
  detail::require(reps >= 2, "mc_bayes_risk: reps must be at least 2");

  constexpr std::int64_t shard = 256;
  const auto shards = static_cast<std::size_t>((reps + shard - 1) / shard);
  const auto m = static_cast<std::size_t>(prior.spike.m);
  std::vector<RunningStats> parts(shards);
  parallel_for(shards, [&](std::size_t s) {
    const std::int64_t count = std::min<std::int64_t>(shard, reps - static_cast<std::int64_t>(s) * shard);
    std::mt19937_64 gen(derive_seed(seed, s));
    std::normal_distribution<double> normal;
    std::uniform_int_distribution<std::size_t> position(0, m - 1);
    std::vector<double> y(m);
    RunningStats stats;
    for (std::int64_t r = 0; r < count; ++r) {
      const std::size_t at = position(gen);
      double spike = prior.spike.mu;
      if (prior.spike.sided == Sidedness::Symmetric && (gen() & 1u)) spike = -spike;
      for (std::size_t i = 0; i < m; ++i) y[i] = normal(gen);
      y[at] += spike;
      const std::vector<double> est = estimator(std::span<const double>(y));
      double loss = 0.0;
      for (std::size_t i = 0; i < m; ++i) {
        const double d = est[i] - (i == at ? spike : 0.0);
        loss += d * d;
      }
      stats.push(loss);
    }
    parts[s] = stats;
  });
  RunningStats total;
  for (const auto& p : parts) total.merge(p);
  const double k = static_cast<double>(prior.blocks);
  return {k * total.mean, k * total.standard_error(), reps, seed};
}

/// Bayes risk of the block prior using its exact posterior mean.
inline BayesRiskEstimate mc_bayes_risk(const BlockPrior& prior, std::int64_t reps, std::uint64_t seed) {
  return mc_bayes_risk_with(prior, reps, seed,
                            [&](std::span<const double> y) { return posterior_mean(prior.spike, y); });
}

/// Spike location nu_{m-1} - sqrt(2 log nu_{m-1}) for the one-sided prior,
/// with nu_j = sqrt(2 log j).
inline double one_sided_spike_location(std::int64_t m) {
  detail::require(m >= 3, "one_sided_spike_location: m must be at least 3");
  const double nu = std::sqrt(2.0 * std::log(static_cast<double>(m - 1)));
  return nu - std::sqrt(2.0 * std::log(nu));
}

/// Block size floor(n/k); leftover coordinates carry a zero prior.
inline std::int64_t block_size(const SparseSpace& space) { return space.n / space.k; }

/// Lower bound on the minimax risk implied by the spike priors, with
/// vanishing remainders dropped.
inline double lower_bound_formula(RegimeLabel regime, const SparseSpace& space) {
  space.validate();
  detail::require(block_size(space) >= 3, "lower_bound_formula: needs block size floor(n/k) >= 3");
  const double scale = static_cast<double>(space.n) * space.sigma * space.sigma;
  const double eps = space.eps();
  switch (regime) {
    // Both coincide with the minimax displays for these regimes.
    case RegimeLabel::LowSNR: return *minimax_approx(space, regime).second_order;
    case RegimeLabel::ModerateSNR: return *minimax_approx(space, regime).lower_bound;
    case RegimeLabel::HighSNR: {
      const double ratio = static_cast<double>(space.n) / static_cast<double>(space.k);
      const double nu = std::sqrt(2.0 * std::log(ratio));
      return scale * (2.0 * eps * std::log(ratio) - 2.0 * eps * nu * std::sqrt(2.0 * std::log(nu)));
    }
    case RegimeLabel::Unclassified: break;
  }
  throw DomainError("lower_bound_formula: regime is unclassified; classify the space or force a regime");
}

} // namespace snrmm
