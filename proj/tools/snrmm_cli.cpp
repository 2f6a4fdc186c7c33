// snrmm: command-line front end for the sparse-sequence minimax library.
#include <cmath>
#include <cstdint>
#include <iostream>
#include <limits>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "snrmm/snrmm.hpp"

namespace {

using nlohmann::json;
using namespace snrmm;

// Exit codes.
constexpr int kOk = 0;
constexpr int kRuntime = 1;
constexpr int kValidation = 2;

struct Options {
  std::string estimator = "soft";
  double lambda = 0.0;
  double gamma = 0.0;
  double mu = 0.0;
  std::string oracle = "closed";
  std::uint64_t samples = 1000000;
  std::uint64_t seed = 1;

  std::int64_t n = 0;
  std::int64_t k = 0;
  double tau = 0.0;
  double sigma = 1.0;

  int grid_points = 512;
  double refine_tol = 1e-8;

  std::string regime;
  std::optional<double> bounded;
  double low_cut = 0.5;
  double high_cut = 2.0;

  std::int64_t m = 0;
  std::int64_t blocks = 1;
  std::int64_t reps = 100000;
  std::string sided = "symmetric";

  std::string config;
  std::string out;
};

json space_json(const SparseSpace& s) {
  json j{{"n", s.n}, {"k", s.k}, {"tau", s.tau}, {"sigma", s.sigma}, {"eps", s.eps()}, {"mu", s.mu()}};
  if (s.a_bound) j["a_bound"] = *s.a_bound;
  return j;
}

json report_json(const RiskReport& r) {
  return {{"value", r.value}, {"method", std::string(to_string(r.method))}, {"error_bound", r.error_bound}};
}

json optional_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

SparseSpace space_from(const Options& o) {
  SparseSpace s{o.n, o.k, o.tau, o.sigma, o.bounded};
  s.validate();
  return s;
}

Tuning tuning_from(const Options& o, EstimatorKind kind) {
  Tuning t{o.lambda, o.gamma};
  if (kind == EstimatorKind::SoftLinear && std::isinf(o.gamma)) t.gamma = std::numeric_limits<double>::infinity();
  return t;
}

int cmd_risk(const Options& o) {
  const auto kind = parse_estimator(o.estimator);
  const auto t = tuning_from(o, kind);
  validate(kind, t);
  RiskReport r;
  if (o.oracle == "quadrature")
    r = quadrature_risk(kind, t, o.mu);
  else if (o.oracle == "mc")
    r = mc_risk(kind, t, o.mu, o.samples, o.seed);
  else
    r = {risk_1d(kind, t, o.mu), RiskMethod::ClosedForm, 0.0};
  json j{{"estimator", o.estimator}, {"lambda", t.lambda}, {"gamma", t.gamma}, {"mu", o.mu}};
  j.update(report_json(r));
  std::cout << j.dump(2) << '\n';
  return kOk;
}

int cmd_suprisk(const Options& o) {
  const auto kind = parse_estimator(o.estimator);
  const auto space = space_from(o);
  const auto t = tuning_from(o, kind);
  json j{{"estimator", o.estimator}, {"lambda", t.lambda}, {"gamma", t.gamma}, {"space", space_json(space)}};
  j.update(report_json(sup_risk(kind, t, space)));
  std::cout << j.dump(2) << '\n';
  return kOk;
}

int cmd_tune(const Options& o) {
  const auto kind = parse_estimator(o.estimator);
  const auto space = space_from(o);
  TuningResult r;
  if (kind == EstimatorKind::SoftLinear)
    r = optimize_lambda_gamma(space, o.refine_tol);
  else
    r = optimize_lambda(kind, space, o.grid_points, o.refine_tol);
  json j{{"estimator", o.estimator},
         {"space", space_json(space)},
         {"lambda_opt", r.tuning.lambda},
         {"gamma_opt", r.tuning.gamma},
         {"value", r.value},
         {"evaluations", r.evaluations},
         {"lambda_boundary", std::string(to_string(r.lambda_boundary))}};
  if (kind == EstimatorKind::SoftLinear) {
    j["gamma_boundary"] = std::string(to_string(r.gamma_boundary));
    j["gamma_clamped"] = r.gamma_clamped;
  }
  std::cout << j.dump(2) << '\n';
  return kOk;
}

int cmd_minimax(const Options& o) {
  if (o.bounded && !(*o.bounded > 1.0)) throw DomainError("--bounded: A must exceed 1");
  const auto space = space_from(o);
  const auto classified = classify_regime(space, o.low_cut, o.high_cut);
  const RegimeLabel label = o.regime.empty() ? classified.label : parse_regime(o.regime);
  json j{{"space", space_json(space)},
         {"classified_regime", std::string(to_string(classified.label))},
         {"diagnostics", {{"mu", classified.mu}, {"ratio", classified.ratio}}},
         {"regime", std::string(to_string(label))},
         {"classical_minimax", classical_minimax(space)}};
  const auto a = minimax_approx(space, label);
  j["approximation"] = {{"first_order", a.first_order},
                        {"second_order", optional_json(a.second_order)},
                        {"lower_bound", optional_json(a.lower_bound)},
                        {"upper_bound", optional_json(a.upper_bound)},
                        {"nu", a.nu},
                        {"bounded_space", a.bounded_space},
                        {"note", std::string(MinimaxApprox::note)}};
  json estimators = json::object();
  for (auto kind : {EstimatorKind::Soft, EstimatorKind::Hard, EstimatorKind::Linear, EstimatorKind::SoftLinear}) {
    try {
      estimators[std::string(to_string(kind))] = estimator_sup_risk_approx(kind, space, label);
    } catch (const DomainError&) {
      estimators[std::string(to_string(kind))] = nullptr;
    }
  }
  j["estimator_sup_risk_approx"] = estimators;
  std::cout << j.dump(2) << '\n';
  return kOk;
}

int cmd_bayes(const Options& o) {
  BlockPrior prior{{o.mu, o.m, parse_sidedness(o.sided)}, o.blocks};
  const auto r = mc_bayes_risk(prior, o.reps, o.seed);
  json j{{"mu", o.mu},          {"m", o.m},
         {"blocks", o.blocks},  {"sided", o.sided},
         {"value", r.value},    {"standard_error", r.standard_error},
         {"reps", r.reps},      {"seed", r.seed}};
  std::cout << j.dump(2) << '\n';
  return kOk;
}

int cmd_simulate(const Options& o) {
  const auto config = load_config(o.config);
  const auto rows = run_sweep(config);
  write_csv(rows, o.out);
  std::int64_t failed = 0;
  for (const auto& r : rows) failed += r.error ? 1 : 0;
  json j{{"out", o.out},
         {"rows", rows.size()},
         {"failed_rows", failed},
         {"n", config.n},
         {"k", config.k()},
         {"sparsity_rule", config.sparsity_rule.name()},
         {"sweep", std::string(to_string(config.sweep))},
         {"reps", config.reps},
         {"master_seed", config.master_seed}};
  std::cout << j.dump(2) << '\n';
  return kOk;
}

void add_space_flags(CLI::App* cmd, Options& o) {
  cmd->add_option("--n", o.n, "ambient dimension (count)")->required()->check(CLI::PositiveNumber);
  cmd->add_option("--k", o.k, "sparsity budget, nonzero coordinates (count)")->required()->check(CLI::PositiveNumber);
  cmd->add_option("--tau", o.tau, "per-coordinate signal budget (observation units)")
      ->required()
      ->check(CLI::PositiveNumber);
  cmd->add_option("--sigma", o.sigma, "noise level (observation units)")->required()->check(CLI::PositiveNumber);
}

const CLI::IsMember kEstimators({"soft", "hard", "linear", "softlinear", "zero"});

} // namespace

int main(int argc, char** argv) {
  Options o;
  CLI::App app{"Minimax risk analysis of the sparse Gaussian sequence model"};
  app.require_subcommand(1);

  auto* risk = app.add_subcommand("risk", "one-dimensional risk at unit noise");
  risk->add_option("--estimator", o.estimator, "soft | hard | linear | softlinear | zero")->required()->check(kEstimators);
  risk->add_option("--lambda", o.lambda, "threshold (noise units) or linear shrinkage (dimensionless)")
      ->required()
      ->check(CLI::NonNegativeNumber);
  risk->add_option("--gamma", o.gamma, "quadratic shrinkage weight for softlinear (dimensionless, default 0)")
      ->check(CLI::NonNegativeNumber);
  risk->add_option("--mu", o.mu, "signal value (noise units)")->required();
  risk->add_option("--oracle", o.oracle, "closed | quadrature | mc (default closed)")
      ->check(CLI::IsMember({"closed", "quadrature", "mc"}));
  risk->add_option("--samples", o.samples, "Monte Carlo draws for --oracle mc (count, default 1e6)")
      ->check(CLI::PositiveNumber);
  risk->add_option("--seed", o.seed, "Monte Carlo seed (64-bit integer, default 1)");

  auto* sup = app.add_subcommand("suprisk", "worst-case n-dimensional risk over the sparse space");
  sup->add_option("--estimator", o.estimator, "soft | hard | linear | softlinear | zero")->required()->check(kEstimators);
  sup->add_option("--lambda", o.lambda, "threshold (observation units) or linear shrinkage (dimensionless)")
      ->required()
      ->check(CLI::NonNegativeNumber);
  sup->add_option("--gamma", o.gamma, "quadratic shrinkage weight for softlinear (dimensionless, default 0)")
      ->check(CLI::NonNegativeNumber);
  add_space_flags(sup, o);

  auto* tune = app.add_subcommand("tune", "minimize the worst-case risk over the tuning parameters");
  tune->add_option("--estimator", o.estimator, "soft | hard | linear | softlinear")
      ->required()
      ->check(CLI::IsMember({"soft", "hard", "linear", "softlinear"}));
  add_space_flags(tune, o);
  tune->add_option("--grid-points", o.grid_points, "coarse lambda grid size (count, default 512)")
      ->check(CLI::Range(3, 1000000));
  tune->add_option("--refine-tol", o.refine_tol, "relative golden-section tolerance (dimensionless, default 1e-8)")
      ->check(CLI::PositiveNumber);

  auto* mm = app.add_subcommand("minimax", "regime classification and minimax risk approximations");
  add_space_flags(mm, o);
  mm->add_option("--regime", o.regime, "force a regime: low | moderate | high (default: classify)")
      ->check(CLI::IsMember({"low", "moderate", "high"}));
  mm->add_option("--bounded", o.bounded, "sup-norm multiplier A > 1 for the bounded space (dimensionless)");
  mm->add_option("--low-cut", o.low_cut, "low-SNR cut on mu (noise units, default 0.5)")->check(CLI::NonNegativeNumber);
  mm->add_option("--high-cut", o.high_cut, "high-SNR multiplier of sqrt(log 1/eps) (dimensionless, default 2)")
      ->check(CLI::PositiveNumber);

  auto* bayes = app.add_subcommand("bayes", "Monte Carlo Bayes risk of the spike block prior");
  bayes->add_option("--m", o.m, "block dimension (count)")->required()->check(CLI::PositiveNumber);
  bayes->add_option("--mu", o.mu, "spike magnitude (noise units)")->required()->check(CLI::PositiveNumber);
  bayes->add_option("--blocks", o.blocks, "number of blocks k (count, default 1)")->check(CLI::PositiveNumber);
  bayes->add_option("--reps", o.reps, "Monte Carlo replicates (count >= 2, default 1e5)")->check(CLI::Range(2, INT32_MAX));
  bayes->add_option("--seed", o.seed, "Monte Carlo seed (64-bit integer, default 1)");
  bayes->add_option("--sided", o.sided, "symmetric | onesided (default symmetric)")
      ->check(CLI::IsMember({"symmetric", "onesided"}));

  auto* sim = app.add_subcommand("simulate", "run a simulation sweep and write CSV");
  sim->add_option("--config", o.config, "JSON sweep configuration (path)")->required();
  sim->add_option("--out", o.out, "CSV destination (path)")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kValidation;
  }

  try {
    if (*risk) return cmd_risk(o);
    if (*sup) return cmd_suprisk(o);
    if (*tune) return cmd_tune(o);
    if (*mm) return cmd_minimax(o);
    if (*bayes) return cmd_bayes(o);
    if (*sim) return cmd_simulate(o);
  } catch (const DomainError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kRuntime;
  }
  return kRuntime;
}
