#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "xbandit/experiment.hpp"

namespace py = pybind11;
using namespace xbandit;

namespace {

nlohmann::json to_json_doc(const py::object& config) {
  if (py::isinstance<py::str>(config)) return nlohmann::json::parse(config.cast<std::string>());
  const auto text = py::module_::import("json").attr("dumps")(config).cast<std::string>();
  return nlohmann::json::parse(text);
}

py::object to_py(const nlohmann::json& doc) { return py::module_::import("json").attr("loads")(doc.dump()); }

ExperimentConfig parse_config(const py::object& config) {
  if (py::isinstance<py::str>(config)) {
    const auto text = config.cast<std::string>();
    if (!text.empty() && text.front() != '{') return load_config(text);
  }
  return ExperimentConfig::from_json(to_json_doc(config));
}

py::dict episode_dict(const EpisodeResult& r) {
  py::dict d;
  d["horizon"] = r.horizon;
  d["pulls"] = r.pulls;
  d["running_max"] = r.running_max;
  d["grid"] = r.grid;
  d["grid_max"] = r.grid_max;
  d["grid_conditional_max"] = r.grid_conditional_max;
  d["pull_counts"] = r.pull_counts;
  d["winner"] = r.winner ? py::object(py::int_(*r.winner)) : py::object(py::none());
  d["initialization_rounds"] = r.initialization_rounds;
  d["estimator_ops"] = r.estimator_ops;
  d["estimator_ops_after_init"] = r.estimator_ops_after_init;
  d["final_max"] = r.final_max;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Extreme bandit core: samplers, tail estimators, policies and the Monte-Carlo harness";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);

  py::class_<TailSpec>(m, "TailSpec")
      .def(py::init([](double alpha, double beta, double C, double Cprime) {
             TailSpec t{alpha, beta, C, Cprime};
             t.validate();
             return t;
           }),
           py::arg("alpha"), py::arg("beta") = kInfiniteBeta, py::arg("C") = 1.0, py::arg("Cprime") = 0.0)
      .def_readwrite("alpha", &TailSpec::alpha)
      .def_readwrite("beta", &TailSpec::beta)
      .def_readwrite("C", &TailSpec::C)
      .def_readwrite("Cprime", &TailSpec::Cprime)
      .def("__eq__", [](const TailSpec& a, const TailSpec& b) { return a == b; })
      .def("__repr__", [](const TailSpec& t) {
        return "TailSpec(alpha=" + std::to_string(t.alpha) + ", beta=" + std::to_string(t.beta) +
               ", C=" + std::to_string(t.C) + ", Cprime=" + std::to_string(t.Cprime) + ")";
      });

  py::class_<ExactPareto>(m, "ExactPareto")
      .def(py::init<double, double>(), py::arg("alpha"), py::arg("C"))
      .def_property_readonly("alpha", &ExactPareto::alpha)
      .def_property_readonly("C", &ExactPareto::scale)
      .def_property_readonly("support_min", &ExactPareto::support_min)
      .def("cdf", &ExactPareto::cdf)
      .def("quantile", &ExactPareto::quantile)
      .def("mean", &ExactPareto::mean)
      .def("tail", &ExactPareto::tail, py::arg("Cprime") = 0.0, py::arg("beta") = kInfiniteBeta)
      .def(
          "sample", [](const ExactPareto& d, std::size_t n, std::uint64_t seed) {
            const CounterStream s(seed);
            std::vector<double> out(n);
            for (std::size_t i = 0; i < n; ++i) out[i] = d.quantile(s.uniform_at(i));
            return out;
          },
          py::arg("n"), py::arg("seed"), "n draws from the counter stream keyed by seed");

  py::class_<EstimatorConfig>(m, "EstimatorConfig")
      .def(py::init<>())
      .def_readwrite("b", &EstimatorConfig::b)
      .def_readwrite("D", &EstimatorConfig::D)
      .def_readwrite("E", &EstimatorConfig::E)
      .def_readwrite("A0", &EstimatorConfig::A0)
      .def_readwrite("rho", &EstimatorConfig::rho)
      .def_readwrite("delta0", &EstimatorConfig::delta0)
      .def("confidence_level", &EstimatorConfig::confidence_level);

  m.def("frechet_value", &frechet_value, py::arg("T"), py::arg("alpha"), py::arg("C"));
  m.def("expected_max_exact", &expected_max_exact, py::arg("T"), py::arg("alpha"), py::arg("C"));
  m.def("min_horizon_q1", &min_horizon_q1);
  m.def("frechet_error_bound", &frechet_error_bound, py::arg("T"), py::arg("tail"));
  m.def("power_transform", &power_transform, py::arg("tail"), py::arg("r"));
  m.def(
      "high_prob_bounds",
      [](double T, double delta, double alpha, double C) {
        const auto b = high_prob_bounds(T, delta, alpha, C);
        return py::make_tuple(b.lower, b.upper);
      },
      py::arg("T"), py::arg("delta"), py::arg("alpha"), py::arg("C"));

  m.def(
      "estimate_alpha_at",
      [](const std::vector<double>& xs, double r) -> py::object {
        const auto a = estimate_alpha_at(xs, r);
        return a.defined ? py::object(py::float_(a.alpha)) : py::object(py::none());
      },
      py::arg("samples"), py::arg("r"), "Count-ratio tail index, or None when the upper count is zero");
  m.def(
      "select_r",
      [](const std::vector<double>& xs, double delta) {
        const auto c = select_r(xs, delta);
        py::dict d;
        d["r"] = c.r;
        d["alpha"] = c.alpha;
        d["level"] = c.level;
        d["exceedances"] = c.exceedances;
        d["status"] = c.status == ThresholdStatus::stabilized ? "stabilized"
                      : c.status == ThresholdStatus::fallback ? "fallback"
                                                              : "degenerate";
        return d;
      },
      py::arg("samples"), py::arg("delta"));
  m.def(
      "estimate_h", [](const std::vector<double>& xs, double delta) { return estimate_h(xs, delta); },
      py::arg("samples"), py::arg("delta"));
  m.def(
      "estimate_C", [](const std::vector<double>& xs, double b, double h) { return estimate_C(xs, b, h); },
      py::arg("samples"), py::arg("b"), py::arg("h"));
  m.def(
      "estimate_tail",
      [](const std::vector<double>& xs, double delta, double b) {
        const auto e = estimate_tail(xs, delta, b);
        py::dict d;
        d["h"] = e.h;
        d["alpha_hat"] = e.alpha_hat;
        d["C_hat"] = e.C_hat;
        d["T"] = e.T;
        d["degenerate"] = e.degenerate;
        return d;
      },
      py::arg("samples"), py::arg("delta"), py::arg("b") = 1.0);
  m.def("lambda1", &lambda1, py::arg("T"), py::arg("cfg"), py::arg("delta0"));
  m.def("lambda2", &lambda2, py::arg("T"), py::arg("cfg"), py::arg("delta0"));
  m.def("delta0_of", &delta0_of, py::arg("n"), py::arg("alpha_star"));
  m.def("required_pulls_N", &required_pulls_N, py::arg("n"), py::arg("cfg"));
  m.def(
      "index_B",
      [](double h, double lambda_1, double C_hat, double lambda_2, double n) {
        return optimistic_index(h, lambda_1, C_hat, lambda_2, n);
      },
      py::arg("h"), py::arg("lambda1"), py::arg("C_hat"), py::arg("lambda2"), py::arg("n"));

  m.def("censor", &censor, py::arg("x"), py::arg("u"));
  m.def(
      "threshold_lower_bound", [](const std::vector<TailSpec>& arms) { return threshold_lower_bound(arms); },
      py::arg("arms"));
  m.def("censored_mean", &censored_mean, py::arg("arm"), py::arg("u"));
  m.def(
      "moment_bound_v",
      [](const std::vector<ExactPareto>& arms, double eps, double u) { return moment_bound_v(arms, eps, u); },
      py::arg("arms"), py::arg("eps"), py::arg("u"));

  m.def(
      "best_arm",
      [](const std::vector<ExactPareto>& arms, double n) {
        const auto r = best_arm(BanditInstance{arms}, n);
        return py::make_tuple(r.arm, r.frechet_arm, r.diagnostic);
      },
      py::arg("arms"), py::arg("n"), "(argmin alpha, argmax Frechet value, diagnostic); zero-based arms");
  m.def(
      "oracle_expected_max",
      [](const std::vector<ExactPareto>& arms, double n) { return oracle_expected_max(BanditInstance{arms}, n); },
      py::arg("arms"), py::arg("n"));
  m.def(
      "conditional_expected_max",
      [](const std::vector<ExactPareto>& arms, double b, const std::vector<std::size_t>& counts) {
        return conditional_expected_max(BanditInstance{arms}, b, counts);
      },
      py::arg("arms"), py::arg("b"), py::arg("counts"));
  m.def(
      "loglog_fit",
      [](const std::vector<double>& x, const std::vector<double>& y) {
        const auto f = loglog_fit(x, y);
        py::dict d;
        d["slope"] = f.slope;
        d["intercept"] = f.intercept;
        d["r2"] = f.r2;
        d["points"] = f.points;
        d["dropped"] = f.dropped;
        d["degenerate"] = f.degenerate;
        return d;
      },
      py::arg("x"), py::arg("y"));

  m.def("preset_names", &preset_names);
  m.def("preset_text", [](const std::string& name) { return preset_text(name); });
  m.def(
      "config_hash", [](const py::object& config) { return config_hash(parse_config(config)); },
      py::arg("config"));
  m.def(
      "resolve_config", [](const py::object& config) { return to_py(resolve(parse_config(config)).to_json()); },
      py::arg("config"), "Resolved N, delta0, u and v for a config dict, JSON text, path or preset name");

  m.def(
      "run_episode",
      [](const py::object& config, const std::string& policy, std::uint64_t seed, bool keep_trajectory) {
        const auto cfg = parse_config(config);
        const auto params = resolve(cfg);
        const auto spec = policy_spec(cfg, params, parse_policy_kind(policy));
        const auto inst = cfg.instance();
        RecordingOptions rec;
        rec.keep_trajectory = keep_trajectory;
        rec.grid = regret_time_grid(cfg.n, std::vector<std::size_t>{params.KN}, cfg.grid_points);
        EpisodeResult r;
        {
          py::gil_scoped_release release;
          auto p = make_policy(spec, inst.size(), cfg.n, seed);
          r = xbandit::run_episode(inst, *p, cfg.n, seed, rec);
        }
        return episode_dict(r);
      },
      py::arg("config"), py::arg("policy"), py::arg("seed"), py::arg("keep_trajectory") = true);

  m.def(
      "run_batch",
      [](const py::object& config, const std::string& policy, std::optional<std::size_t> replicates,
         std::optional<std::uint64_t> seed) {
        const auto cfg = parse_config(config);
        const auto params = resolve(cfg);
        const auto spec = policy_spec(cfg, params, parse_policy_kind(policy));
        const auto inst = cfg.instance();
        RecordingOptions rec;
        rec.grid = {cfg.n};
        std::vector<EpisodeResult> results;
        {
          py::gil_scoped_release release;
          results = xbandit::run_batch(inst, spec, cfg.n, replicates.value_or(cfg.replicates), seed.value_or(cfg.seed),
                                       cfg.parallelism, rec);
        }
        py::list out;
        for (const auto& r : results) out.append(episode_dict(r));
        return out;
      },
      py::arg("config"), py::arg("policy"), py::arg("replicates") = py::none(), py::arg("seed") = py::none());

  m.def(
      "run_experiment",
      [](const py::object& config, std::optional<std::size_t> replicates, std::optional<std::uint64_t> seed,
         std::optional<std::size_t> parallelism) {
        auto cfg = parse_config(config);
        if (replicates) cfg.replicates = *replicates;
        if (seed) cfg.seed = *seed;
        if (parallelism) cfg.parallelism = *parallelism;
        cfg.validate();
        ExperimentOutcome outcome;
        {
          py::gil_scoped_release release;
          outcome = xbandit::run_experiment(cfg);
        }
        py::dict d;
        d["config_hash"] = outcome.hash;
        d["csv"] = format_csv(outcome);
        d["summary"] = to_py(summary_json(cfg, outcome));
        d["manifest"] = to_py(manifest_json(cfg, outcome));
        return d;
      },
      py::arg("config"), py::arg("replicates") = py::none(), py::arg("seed") = py::none(),
      py::arg("parallelism") = py::none());

  m.def(
      "regress_csv",
      [](const std::filesystem::path& path, double t_min, double t_max) {
        py::list out;
        for (const auto& r : xbandit::regress_csv(path, t_min, t_max)) {
          py::dict d;
          d["policy"] = r.policy;
          d["slope"] = r.fit.slope;
          d["r2"] = r.fit.r2;
          d["points"] = r.fit.points;
          d["dropped"] = r.fit.dropped;
          d["degenerate"] = r.fit.degenerate;
          d["warning"] = r.warning;
          out.append(d);
        }
        return out;
      },
      py::arg("csv"), py::arg("t_min"), py::arg("t_max"));
}
