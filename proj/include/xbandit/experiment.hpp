#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "xbandit/simulator.hpp"

namespace xbandit {

/// Invalid experiment configuration; the CLI maps it to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ArmConfig {
  double alpha = 2.0;
  double C = 1.0;
};

struct RegressionWindow {
  double t_min = 0.0;
  double t_max = 0.0;
};

struct ExperimentConfig {
  std::string name = "experiment";
  std::vector<ArmConfig> arms;
  std::size_t n = 0;
  std::size_t replicates = 1;
  std::vector<PolicyKind> policies;
  std::uint64_t seed = 1;
  std::size_t parallelism = 1;

  // estimator
  double b = 1.0;
  double D = 1.0;
  double E = 1.0;
  std::optional<std::size_t> N;  ///< overrides A0
  double A0 = kDefaultA0;
  std::optional<double> delta0;  ///< overrides rho
  double rho = kDefaultRho;

  // robust-ucb
  double eps = 0.4;
  std::optional<double> v;  ///< nullopt = auto
  std::optional<double> u;  ///< nullopt = auto
  double u_margin = 1.0;

  // regret curve
  RegretEstimator regret_estimator = RegretEstimator::conditional;
  std::size_t grid_points = 256;
  std::optional<RegressionWindow> window;

  std::filesystem::path out_dir = "xbandit-out";

  /// Parses and schema-checks a config document (unknown keys are errors).
  static ExperimentConfig from_json(const nlohmann::json& doc);
  /// Canonical form. Parallelism and the output directory are left out when
  /// `reproducible_only` is set.
  nlohmann::json to_json(bool reproducible_only = false) const;
  void validate() const;

  BanditInstance instance() const;
};

/// Reads a config file, a manifest written by a previous run, or a bundled
/// preset name.
ExperimentConfig load_config(const std::string& path_or_preset);

std::vector<std::string> preset_names();
/// JSON text of a bundled preset; throws ConfigError for unknown names.
std::string preset_text(std::string_view name);

/// FNV-1a of the canonical reproducible config, as 16 hex digits.
std::string config_hash(const ExperimentConfig& cfg);

struct ResolvedParams {
  std::size_t N = 0;
  std::size_t KN = 0;
  double delta0 = 0.0;
  std::size_t best_arm = 0;  ///< zero-based
  std::string best_arm_diagnostic;
  std::optional<double> u_bound;  ///< raw threshold lower bound
  std::optional<double> u;
  std::optional<double> v;
  bool oracle_assisted = false;  ///< v resolved from the true arm parameters
  std::vector<std::string> notes;  ///< one line per auto resolution

  nlohmann::json to_json() const;
};

/// Fills in N, delta0, u and v. Throws ConfigError on K N > n and on parameters
/// the policies would reject.
ResolvedParams resolve(const ExperimentConfig& cfg);

PolicySpec policy_spec(const ExperimentConfig& cfg, const ResolvedParams& params, PolicyKind kind);

struct PullStats {
  std::vector<double> mean;
  std::vector<double> stderr_mean;
  std::vector<std::size_t> min;
  std::vector<std::size_t> max;
};

struct PolicyOutcome {
  PolicyKind kind;
  RegretCurve curve;
  PullStats pulls;
  std::optional<std::vector<double>> winner_freq;  ///< per arm, committing policies only
  std::size_t initialization_rounds = 0;
  std::optional<SlopeFit> fit;
  std::string fit_error;
};

struct ExperimentOutcome {
  std::string hash;
  ResolvedParams params;
  std::vector<PolicyOutcome> policies;
  std::vector<std::string> warnings;
};

ExperimentOutcome run_experiment(const ExperimentConfig& cfg);

std::string format_csv(const ExperimentOutcome& outcome);
nlohmann::json summary_json(const ExperimentConfig& cfg, const ExperimentOutcome& outcome);
nlohmann::json manifest_json(const ExperimentConfig& cfg, const ExperimentOutcome& outcome);

struct ArtifactPaths {
  std::filesystem::path csv;
  std::filesystem::path summary;
  std::filesystem::path manifest;
};

/// Writes <name>.csv, <name>.summary.json and <name>.manifest.json under cfg.out_dir.
ArtifactPaths write_artifacts(const ExperimentConfig& cfg, const ExperimentOutcome& outcome);

struct CsvCurve {
  std::string policy;
  std::vector<double> t;
  std::vector<double> mean_regret;
  std::vector<double> stderr_regret;
  std::size_t replicates = 0;
};

struct CsvDocument {
  std::string config_hash;
  std::map<std::string, std::size_t> initialization_rounds;
  std::vector<CsvCurve> curves;  ///< file order
};

CsvDocument read_regret_csv(const std::filesystem::path& path);

struct RegressRow {
  std::string policy;
  SlopeFit fit;
  std::string warning;
};

/// Log-log fit of every curve in the CSV over [t_min, t_max]. Curves without
/// enough usable points throw.
std::vector<RegressRow> regress_csv(const std::filesystem::path& path, double t_min, double t_max);

struct BenchRow {
  PolicyKind kind;
  std::size_t n = 0;
  std::uint64_t estimator_ops = 0;
  std::uint64_t estimator_ops_after_init = 0;
  double wall_seconds = 0.0;
};

struct BenchExponent {
  PolicyKind kind;
  std::optional<double> ops_exponent;  ///< nullopt when every count is zero
  std::optional<double> wall_exponent;
  bool ops_constant = false;
};

struct BenchReport {
  std::size_t N = 0;
  std::vector<BenchRow> rows;
  std::vector<BenchExponent> exponents;

  nlohmann::json to_json() const;
};

/// One seeded episode per (policy, horizon) at a fixed N (resolved at the
/// smallest horizon when the config leaves it to A0).
BenchReport run_bench(const ExperimentConfig& cfg, const std::vector<std::size_t>& horizons);

}  // namespace xbandit
