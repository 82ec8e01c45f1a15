// xbandit command-line driver: run, regress, bench, presets.

#include <cstdio>
#include <exception>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "xbandit/experiment.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

int cmd_run(const std::string& config_path, std::optional<std::uint64_t> seed, std::optional<std::size_t> replicates,
            std::optional<std::size_t> parallelism, std::optional<std::string> out_dir) {
  xbandit::ExperimentConfig cfg = xbandit::load_config(config_path);
  if (seed) cfg.seed = *seed;
  if (replicates) cfg.replicates = *replicates;
  if (parallelism) cfg.parallelism = *parallelism;
  if (out_dir) cfg.out_dir = *out_dir;
  cfg.validate();

  const auto outcome = xbandit::run_experiment(cfg);
  for (const auto& note : outcome.params.notes) std::cerr << "resolved: " << note << "\n";
  for (const auto& w : outcome.warnings) std::cerr << "warning: " << w << "\n";
  const auto paths = xbandit::write_artifacts(cfg, outcome);

  std::printf("config_hash %s\n", outcome.hash.c_str());
  for (const auto& p : outcome.policies) {
    std::printf("%-15s final_regret %.6g +- %.2g", std::string(xbandit::to_string(p.kind)).c_str(),
                p.curve.mean_regret.back(), p.curve.stderr_regret.back());
    if (p.fit) std::printf("  slope %.4f  r2 %.4f", p.fit->slope, p.fit->r2);
    std::printf("\n");
  }
  std::printf("wrote %s\nwrote %s\nwrote %s\n", paths.csv.string().c_str(), paths.summary.string().c_str(),
              paths.manifest.string().c_str());
  return 0;
}

int cmd_regress(const std::string& csv, double t_min, double t_max, bool as_json) {
  const auto rows = xbandit::regress_csv(csv, t_min, t_max);
  if (as_json) {
    nlohmann::json doc = nlohmann::json::array();
    for (const auto& r : rows) {
      doc.push_back({{"policy", r.policy},
                     {"slope", r.fit.slope},
                     {"r2", r.fit.r2},
                     {"points", r.fit.points},
                     {"dropped", r.fit.dropped},
                     {"degenerate", r.fit.degenerate},
                     {"warning", r.warning.empty() ? nlohmann::json(nullptr) : nlohmann::json(r.warning)}});
    }
    std::cout << doc.dump(2) << "\n";
  } else {
    std::printf("%-15s %12s %8s %7s %8s\n", "policy", "slope", "r2", "points", "dropped");
    for (const auto& r : rows) {
      std::printf("%-15s %12.6f %8.4f %7zu %8zu%s\n", r.policy.c_str(), r.fit.slope, r.fit.r2, r.fit.points,
                  r.fit.dropped, r.fit.degenerate ? "  (degenerate)" : "");
    }
  }
  for (const auto& r : rows) {
    if (!r.warning.empty()) std::cerr << "warning: " << r.policy << ": " << r.warning << "\n";
  }
  return 0;
}

int cmd_bench(const std::string& config_path, const std::vector<std::size_t>& horizons,
              std::optional<std::string> json_out) {
  const auto cfg = xbandit::load_config(config_path);
  const auto report = xbandit::run_bench(cfg, horizons);
  std::printf("N = %zu\n", report.N);
  std::printf("%-15s %9s %14s %14s %10s\n", "policy", "n", "estimator_ops", "ops_post_init", "wall_s");
  for (const auto& r : report.rows) {
    std::printf("%-15s %9zu %14llu %14llu %10.4f\n", std::string(xbandit::to_string(r.kind)).c_str(), r.n,
                static_cast<unsigned long long>(r.estimator_ops),
                static_cast<unsigned long long>(r.estimator_ops_after_init), r.wall_seconds);
  }
  for (const auto& e : report.exponents) {
    std::printf("%-15s ops exponent %s  wall exponent %s%s\n", std::string(xbandit::to_string(e.kind)).c_str(),
                e.ops_exponent ? std::to_string(*e.ops_exponent).c_str() : "n/a",
                e.wall_exponent ? std::to_string(*e.wall_exponent).c_str() : "n/a",
                e.ops_constant ? "  (ops constant in n)" : "");
  }
  if (json_out) {
    std::FILE* f = std::fopen(json_out->c_str(), "wb");
    if (!f) throw std::runtime_error("cannot write " + *json_out);
    const std::string text = report.to_json().dump(2) + "\n";
    std::fwrite(text.data(), 1, text.size(), f);
    std::fclose(f);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Extreme (max-K-armed) bandit experiments"};
  app.require_subcommand(1);

  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> replicates;
  std::optional<std::size_t> parallelism;
  std::optional<std::string> out_dir;
  auto* run = app.add_subcommand("run", "Run a batch experiment and write CSV, summary and manifest");
  run->add_option("--config", config, "Config file, manifest, or preset name")->required();
  run->add_option("--seed", seed, "Master seed");
  run->add_option("--replicates", replicates, "Replicates per policy")->check(CLI::PositiveNumber);
  run->add_option("--parallelism", parallelism, "Worker threads")->check(CLI::PositiveNumber);
  run->add_option("--out", out_dir, "Output directory");

  std::string csv;
  double t_min = 0.0;
  double t_max = 0.0;
  bool as_json = false;
  auto* regress = app.add_subcommand("regress", "Log-log slope of each regret curve over a window");
  regress->add_option("--csv", csv, "Regret CSV written by run")->required()->check(CLI::ExistingFile);
  regress->add_option("--tmin", t_min, "Window start")->required();
  regress->add_option("--tmax", t_max, "Window end")->required();
  regress->add_flag("--json", as_json, "Emit JSON instead of a table");

  std::string bench_config;
  std::vector<std::size_t> horizons;
  std::optional<std::string> bench_json;
  auto* bench = app.add_subcommand("bench", "Estimator-operation and wall-time scaling per policy");
  bench->add_option("--config", bench_config, "Config file or preset name")->required();
  bench->add_option("--horizons", horizons, "Increasing horizons, comma separated")->required()->delimiter(',');
  bench->add_option("--json", bench_json, "Also write the report as JSON");

  std::string show;
  auto* presets = app.add_subcommand("presets", "List bundled configs");
  presets->add_option("--show", show, "Print one preset");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*run) return cmd_run(config, seed, replicates, parallelism, out_dir);
    if (*regress) return cmd_regress(csv, t_min, t_max, as_json);
    if (*bench) return cmd_bench(bench_config, horizons, bench_json);
    if (*presets) {
      if (!show.empty()) {
        std::cout << xbandit::preset_text(show);
      } else {
        for (const auto& name : xbandit::preset_names()) std::cout << name << "\n";
      }
      return 0;
    }
  } catch (const xbandit::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return 0;
}
