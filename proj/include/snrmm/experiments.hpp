#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <limits>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <boost/math/distributions/students_t.hpp>
#include <json.hpp>

#include "snrmm/error.hpp"
#include "snrmm/estimators.hpp"
#include "snrmm/parallel.hpp"
#include "snrmm/tuning.hpp"

namespace snrmm {

enum class SweepAxis { Sigma, Mu };

inline constexpr std::string_view to_string(SweepAxis a) { return a == SweepAxis::Sigma ? "sigma" : "mu"; }

/// k as a function of n: floor(n^p) for p in {2/3, 3/4, 1/2}, or fixed.
struct SparsityRule {
  enum class Kind { Pow23, Pow34, Pow12, Explicit };
  Kind kind = Kind::Pow23;
  std::int64_t k = 0;

  std::int64_t resolve(std::int64_t n) const {
    double p = 0.0;
    switch (kind) {
      case Kind::Pow23: p = 2.0 / 3.0; break;
      case Kind::Pow34: p = 0.75; break;
      case Kind::Pow12: p = 0.5; break;
      case Kind::Explicit: return k;
    }
    const double v = std::pow(static_cast<double>(n), p);
    // pow(1000, 2/3) lands just below 100; nudge exact powers back up.
    return static_cast<std::int64_t>(std::floor(v * (1.0 + 1e-12)));
  }

  std::string name() const {
    switch (kind) {
      case Kind::Pow23: return "pow(2/3)";
      case Kind::Pow34: return "pow(3/4)";
      case Kind::Pow12: return "pow(1/2)";
      case Kind::Explicit: return std::to_string(k);
    }
    return "";
  }
};

struct SimConfig {
  std::int64_t n = 500;
  SparsityRule sparsity_rule;
  double tau = 1.0;
  SweepAxis sweep = SweepAxis::Sigma;
  std::vector<double> sweep_grid;
  std::int64_t reps = 20;
  std::uint64_t master_seed = 0;
  std::vector<EstimatorKind> estimators;
  std::int64_t tuning_grid_size = 200;
  std::optional<double> signal_value;

  std::int64_t k() const { return sparsity_rule.resolve(n); }
  double signal() const { return signal_value.value_or(tau); }

  void validate() const {
    detail::require(n >= 1, "config: n must be a positive integer");
    const auto kk = k();
    detail::require(kk >= 1 && kk <= n, "config: sparsity_rule must give 1 <= k <= n");
    detail::require(tau > 0.0 && std::isfinite(tau), "config: tau must be positive");
    detail::require(!sweep_grid.empty(), "config: sweep_grid must be nonempty");
    for (std::size_t i = 0; i < sweep_grid.size(); ++i) {
      detail::require(sweep_grid[i] > 0.0 && std::isfinite(sweep_grid[i]), "config: sweep_grid values must be positive");
      if (i > 0) detail::require(sweep_grid[i] > sweep_grid[i - 1], "config: sweep_grid must be strictly increasing");
    }
    detail::require(reps >= 1, "config: reps must be positive");
    detail::require(!estimators.empty(), "config: estimators must be nonempty");
    detail::require(tuning_grid_size >= 2, "config: tuning_grid_size must be at least 2");
    if (signal_value) detail::require(*signal_value > 0.0, "config: signal_value must be positive");
  }
};

struct SimResult {
  EstimatorKind estimator = EstimatorKind::Zero;
  std::int64_t n = 0;
  std::int64_t k = 0;
  double tau = 0.0;
  double sigma = 0.0;
  double mu = 0.0;
  double sweep_value = 0.0;
  double mse_scaled = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  double lambda_opt = 0.0;
  double gamma_opt = 0.0;
  std::int64_t reps = 0;
  std::uint64_t seed = 0;
  /// Set when the cell failed; numeric columns are then NaN.
  std::optional<std::string> error;
};

/// Two-sided 97.5% Student t quantile with `dof` degrees of freedom.
inline double t_quantile_975(std::int64_t dof) {
  detail::require(dof >= 1, "t_quantile_975: dof must be positive");
  boost::math::students_t dist(static_cast<double>(dof));
  return boost::math::quantile(dist, 0.975);
}

/// n-vector with exactly k entries equal to `value` at uniformly chosen positions.
inline std::vector<double> gen_signal(std::int64_t n, std::int64_t k, double value, std::uint64_t seed) {
  detail::require(n >= 1 && k >= 0, "gen_signal: n must be positive and k non-negative");
  detail::require(k <= n, "gen_signal: k must not exceed n");
  std::vector<std::int64_t> index(static_cast<std::size_t>(n));
  for (std::int64_t i = 0; i < n; ++i) index[static_cast<std::size_t>(i)] = i;
  std::mt19937_64 gen(seed);
  // Partial Fisher-Yates: the first k slots end up a uniform k-subset.
  for (std::int64_t i = 0; i < k; ++i) {
    std::uniform_int_distribution<std::int64_t> pick(i, n - 1);
    std::swap(index[static_cast<std::size_t>(i)], index[static_cast<std::size_t>(pick(gen))]);
  }
  std::vector<double> theta(static_cast<std::size_t>(n), 0.0);
  for (std::int64_t i = 0; i < k; ++i) theta[static_cast<std::size_t>(index[static_cast<std::size_t>(i)])] = value;
  return theta;
}

/// Replicates of one sweep cell, shared by every estimator.
struct SweepCell {
  std::size_t index = 0;
  double sweep_value = 0.0;
  double sigma = 1.0;
  double mu = 1.0;
  double signal = 1.0;
  std::int64_t n = 0;
  std::int64_t k = 0;
  std::uint64_t seed = 0;
  std::vector<std::vector<double>> theta;
  std::vector<std::vector<double>> y;
};

inline SweepCell make_cell(const SimConfig& config, std::size_t sweep_index) {
  SweepCell cell;
  cell.index = sweep_index;
  cell.sweep_value = config.sweep_grid.at(sweep_index);
  cell.n = config.n;
  cell.k = config.k();
  cell.signal = config.signal();
  if (config.sweep == SweepAxis::Sigma) {
    cell.sigma = cell.sweep_value;
    cell.mu = config.tau / cell.sigma;
  } else {
    cell.mu = cell.sweep_value;
    cell.sigma = config.tau / cell.mu;
  }
  cell.seed = derive_seed(config.master_seed, sweep_index);
  const auto n = static_cast<std::size_t>(config.n);
  for (std::int64_t r = 0; r < config.reps; ++r) {
    const std::uint64_t rep_seed = derive_seed(cell.seed, static_cast<std::uint64_t>(r));
    auto theta = gen_signal(config.n, cell.k, cell.signal, derive_seed(rep_seed, 0));
    std::mt19937_64 gen(derive_seed(rep_seed, 1));
    std::normal_distribution<double> normal;
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) y[i] = theta[i] + cell.sigma * normal(gen);
    cell.theta.push_back(std::move(theta));
    cell.y.push_back(std::move(y));
  }
  return cell;
}

/// Per-replicate ||estimate - theta||^2 / ||theta||^2.
inline std::vector<double> scaled_errors(const SweepCell& cell, EstimatorKind kind, const Tuning& t) {
  std::vector<double> out(cell.y.size());
  for (std::size_t r = 0; r < cell.y.size(); ++r) {
    const auto& y = cell.y[r];
    const auto& theta = cell.theta[r];
    double err = 0.0, norm = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
      const double d = estimate(kind, t, y[i]) - theta[i];
      err += d * d;
      norm += theta[i] * theta[i];
    }
    out[r] = err / norm;
  }
  return out;
}

/// Tuning grid of the sweep protocol for one estimator in one cell.
inline std::vector<Tuning> tuning_grid(const SweepCell& cell, EstimatorKind kind, std::int64_t grid_size) {
  const auto size = static_cast<std::size_t>(grid_size);
  const double eps = static_cast<double>(cell.k) / static_cast<double>(cell.n);
  const double nu = std::sqrt(2.0 * std::log(1.0 / eps));
  const double mu_signal = cell.signal / cell.sigma;
  const double unit_top = 3.0 * (mu_signal + nu);
  std::vector<Tuning> grid;
  switch (kind) {
    case EstimatorKind::Soft:
    case EstimatorKind::Hard:
      for (double l : log_grid(1e-3, unit_top, size)) grid.push_back({cell.sigma * l, 0.0});
      break;
    case EstimatorKind::Linear:
      for (double l : log_grid(1e-4, 1e6, size)) grid.push_back({l, 0.0});
      break;
    case EstimatorKind::SoftLinear: {
      // 60 x 60 product grid, plus lambda = 0 and gamma = 0 so it nests
      // both Linear and Soft.
      std::vector<double> lams{0.0}, gammas{0.0};
      for (double l : log_grid(1e-3, unit_top, 60)) lams.push_back(cell.sigma * l);
      for (double g : log_grid(1e-4, 1e6, 60)) gammas.push_back(g);
      for (double l : lams)
        for (double g : gammas) grid.push_back({l, g});
      break;
    }
    case EstimatorKind::Zero: grid.push_back({0.0, 0.0}); break;
  }
  return grid;
}

struct CellSelection {
  Tuning tuning;
  std::vector<double> errors;  ///< per-replicate scaled errors at `tuning`
  double mean = 0.0;
};

/// Empirical minimizer of the mean scaled error over `grid`; ties go to the
/// earliest grid entry.
inline CellSelection select_tuning(const SweepCell& cell, EstimatorKind kind, std::span<const Tuning> grid) {
  detail::require(!grid.empty(), "select_tuning: grid must be nonempty");
  CellSelection best;
  best.mean = std::numeric_limits<double>::infinity();
  for (const auto& t : grid) {
    auto errs = scaled_errors(cell, kind, t);
    double mean = 0.0;
    for (double e : errs) mean += e;
    mean /= static_cast<double>(errs.size());
    if (mean < best.mean) best = {t, std::move(errs), mean};
  }
  return best;
}

inline SimResult summarize(const SweepCell& cell, const SimConfig& config, EstimatorKind kind,
                           const CellSelection& sel) {
  SimResult row;
  row.estimator = kind;
  row.n = cell.n;
  row.k = cell.k;
  row.tau = config.tau;
  row.sigma = cell.sigma;
  row.mu = cell.mu;
  row.sweep_value = cell.sweep_value;
  row.reps = config.reps;
  row.seed = cell.seed;
  row.mse_scaled = sel.mean;
  row.lambda_opt = sel.tuning.lambda;
  row.gamma_opt = sel.tuning.gamma;
  double half = 0.0;
  if (sel.errors.size() > 1) {
    RunningStats s;
    for (double e : sel.errors) s.push(e);
    half = t_quantile_975(static_cast<std::int64_t>(sel.errors.size()) - 1) * s.standard_error();
  }
  row.ci_low = sel.mean - half;
  row.ci_high = sel.mean + half;
  return row;
}

/// Runs every (sweep value, estimator) cell. Rows come back ordered by the
/// configured estimator order, then by sweep value.
inline std::vector<SimResult> run_sweep(const SimConfig& config) {
  config.validate();
  const std::size_t cells = config.sweep_grid.size();
  const std::size_t kinds = config.estimators.size();
  std::vector<SimResult> rows(cells * kinds);
  parallel_for(cells, [&](std::size_t c) {
    const SweepCell cell = make_cell(config, c);
    for (std::size_t e = 0; e < kinds; ++e) {
      const EstimatorKind kind = config.estimators[e];
      SimResult& row = rows[e * cells + c];
      try {
        const auto grid = tuning_grid(cell, kind, config.tuning_grid_size);
        row = summarize(cell, config, kind, select_tuning(cell, kind, grid));
        if (!std::isfinite(row.mse_scaled)) throw std::runtime_error("non-finite scaled error");
      } catch (const std::exception& ex) {
        const double nan = std::numeric_limits<double>::quiet_NaN();
        row = summarize(cell, config, kind, CellSelection{{nan, nan}, {}, nan});
        row.ci_low = row.ci_high = nan;
        row.error = ex.what();
      }
    }
  });
  return rows;
}

inline constexpr std::string_view csv_header =
    "estimator,n,k,tau,sigma,mu,sweep_value,mse_scaled,ci_low,ci_high,lambda_opt,gamma_opt,reps,seed";

namespace detail {
inline std::string format_real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}
} // namespace detail

inline std::string csv_row(const SimResult& r) {
  using detail::format_real;
  std::string s(to_string(r.estimator));
  s += ',' + std::to_string(r.n) + ',' + std::to_string(r.k);
  for (double v : {r.tau, r.sigma, r.mu, r.sweep_value, r.mse_scaled, r.ci_low, r.ci_high, r.lambda_opt, r.gamma_opt})
    s += ',' + format_real(v);
  s += ',' + std::to_string(r.reps) + ',' + std::to_string(r.seed);
  return s;
}

inline void write_csv(std::span<const SimResult> results, const std::string& path) {
  detail::require(!results.empty(), "write_csv: no results to write");
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("write_csv: cannot open '" + path + "' for writing");
  out << csv_header << '\n';
  for (const auto& r : results) out << csv_row(r) << '\n';
  out.flush();
  if (!out) throw std::runtime_error("write_csv: write to '" + path + "' failed");
}

// ---- JSON config --------------------------------------------------------

inline SimConfig config_from_json(const nlohmann::json& j) {
  static const std::vector<std::string> known = {"n",    "sparsity_rule", "tau",        "sweep",
                                                 "sweep_grid", "reps",   "master_seed", "estimators",
                                                 "tuning_grid_size", "signal_value"};
  detail::require(j.is_object(), "config: top level must be a JSON object");
  for (const auto& [key, _] : j.items())
    detail::require(std::find(known.begin(), known.end(), key) != known.end(), "config: unknown key '" + key + "'");
  for (const char* key : {"n", "sparsity_rule", "tau", "sweep", "sweep_grid", "estimators"})
    detail::require(j.contains(key), std::string("config: missing key '") + key + "'");

  SimConfig c;
  try {
    c.n = j.at("n").get<std::int64_t>();
    const auto& rule = j.at("sparsity_rule");
    if (rule.is_number_integer()) {
      c.sparsity_rule = {SparsityRule::Kind::Explicit, rule.get<std::int64_t>()};
    } else {
      const auto s = rule.get<std::string>();
      if (s == "pow(2/3)") c.sparsity_rule.kind = SparsityRule::Kind::Pow23;
      else if (s == "pow(3/4)") c.sparsity_rule.kind = SparsityRule::Kind::Pow34;
      else if (s == "pow(1/2)") c.sparsity_rule.kind = SparsityRule::Kind::Pow12;
      else throw DomainError("config: sparsity_rule must be pow(2/3), pow(3/4), pow(1/2) or an integer k");
    }
    c.tau = j.at("tau").get<double>();
    const auto axis = j.at("sweep").get<std::string>();
    if (axis == "sigma") c.sweep = SweepAxis::Sigma;
    else if (axis == "mu") c.sweep = SweepAxis::Mu;
    else throw DomainError("config: sweep must be 'sigma' or 'mu'");
    c.sweep_grid = j.at("sweep_grid").get<std::vector<double>>();
    if (j.contains("reps")) c.reps = j.at("reps").get<std::int64_t>();
    if (j.contains("master_seed")) c.master_seed = j.at("master_seed").get<std::uint64_t>();
    for (const auto& name : j.at("estimators").get<std::vector<std::string>>())
      c.estimators.push_back(parse_estimator(name));
    if (j.contains("tuning_grid_size")) c.tuning_grid_size = j.at("tuning_grid_size").get<std::int64_t>();
    if (j.contains("signal_value") && !j.at("signal_value").is_null())
      c.signal_value = j.at("signal_value").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw DomainError(std::string("config: ") + e.what());
  }
  c.validate();
  return c;
}

inline SimConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DomainError("config: cannot open '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw DomainError("config: malformed JSON in '" + path + "': " + e.what());
  }
  return config_from_json(j);
}

} // namespace snrmm
