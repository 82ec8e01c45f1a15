#include "xbandit/experiment.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace xbandit {

using nlohmann::json;

namespace {

[[noreturn]] void config_fail(const std::string& where, const std::string& what) {
  throw ConfigError(where + ": " + what);
}

/// Object reader that rejects keys nobody asked for.
class Section {
 public:
  Section(const json& doc, std::string path) : doc_(doc), path_(std::move(path)) {
    if (!doc_.is_object()) config_fail(path_.empty() ? "config" : path_, "expected an object");
  }

  bool has(const std::string& key) const { return doc_.contains(key); }

  const json& get(const std::string& key) {
    seen_.insert(key);
    if (!doc_.contains(key)) config_fail(where(key), "required field is missing");
    return doc_.at(key);
  }

  const json* find(const std::string& key) {
    seen_.insert(key);
    auto it = doc_.find(key);
    return it == doc_.end() || it->is_null() ? nullptr : &*it;
  }

  double number(const std::string& key, double fallback) {
    const json* v = find(key);
    return v ? as_number(*v, where(key)) : fallback;
  }

  std::size_t count(const std::string& key, std::size_t fallback) {
    const json* v = find(key);
    return v ? as_count(*v, where(key)) : fallback;
  }

  std::string where(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  void finish() const {
    for (const auto& [key, value] : doc_.items()) {
      if (!seen_.count(key)) config_fail(where(key), "unknown field");
    }
  }

  static double as_number(const json& v, const std::string& where) {
    if (!v.is_number()) config_fail(where, "expected a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) config_fail(where, "expected a finite number");
    return x;
  }

  static std::size_t as_count(const json& v, const std::string& where) {
    if (v.is_number_unsigned()) return v.get<std::size_t>();
    if (v.is_number_integer()) {
      if (v.get<std::int64_t>() < 0) config_fail(where, "expected a nonnegative integer");
      return static_cast<std::size_t>(v.get<std::int64_t>());
    }
    const double x = as_number(v, where);
    if (x < 0.0 || x != std::floor(x) || x > 9.0e15) config_fail(where, "expected a nonnegative integer");
    return static_cast<std::size_t>(x);
  }

 private:
  const json& doc_;
  std::string path_;
  std::set<std::string> seen_;
};

std::optional<double> auto_or_number(Section& s, const std::string& key) {
  const json* v = s.find(key);
  if (!v) return std::nullopt;
  if (v->is_string()) {
    if (v->get<std::string>() == "auto") return std::nullopt;
    config_fail(s.where(key), "expected a number or \"auto\"");
  }
  return Section::as_number(*v, s.where(key));
}

bool uses_index_policy(const ExperimentConfig& cfg) {
  return std::any_of(cfg.policies.begin(), cfg.policies.end(), [](PolicyKind k) {
    return k == PolicyKind::extreme_etc || k == PolicyKind::extreme_hunter;
  });
}

bool uses_policy(const ExperimentConfig& cfg, PolicyKind kind) {
  return std::find(cfg.policies.begin(), cfg.policies.end(), kind) != cfg.policies.end();
}

EstimatorConfig estimator_config(const ExperimentConfig& cfg) {
  EstimatorConfig est;
  est.b = cfg.b;
  est.D = cfg.D;
  est.E = cfg.E;
  est.A0 = cfg.A0;
  est.rho = cfg.rho;
  est.delta0 = cfg.delta0;
  return est;
}

std::string format_g17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string format_short(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

constexpr std::string_view kCsvHeader = "policy,t,mean_regret,stderr,replicates";

constexpr std::string_view kPaperTable2 = R"({
  "name": "paper-table2",
  "arms": [
    {"alpha": 15, "C": 1e8},
    {"alpha": 1.5, "C": 1},
    {"alpha": 10, "C": 1e5}
  ],
  "n": 100000,
  "replicates": 1000,
  "policies": ["extreme-etc", "robust-ucb", "uniform"],
  "seed": 1,
  "parallelism": 1,
  "estimator": {"b": 1, "D": 1, "E": 1, "A0": 0.001, "rho": 6},
  "robust_ucb": {"eps": 0.4, "v": "auto", "u": "auto", "u_margin": 1},
  "regret": {"estimator": "conditional", "grid_points": 256, "window": [50000, 100000]},
  "output": {"dir": "xbandit-out"}
}
)";

constexpr std::string_view kBenchTable1 = R"({
  "name": "bench-table1",
  "arms": [
    {"alpha": 15, "C": 1e8},
    {"alpha": 1.5, "C": 1},
    {"alpha": 10, "C": 1e5}
  ],
  "n": 20000,
  "replicates": 1,
  "policies": ["extreme-etc", "extreme-hunter", "uniform"],
  "seed": 1,
  "parallelism": 1,
  "estimator": {"b": 1, "D": 1, "E": 1, "N": 100, "rho": 6},
  "regret": {"estimator": "conditional", "grid_points": 256},
  "output": {"dir": "xbandit-out"}
}
)";

constexpr std::string_view kSmoke = R"({
  "name": "smoke",
  "arms": [
    {"alpha": 15, "C": 1e8},
    {"alpha": 1.5, "C": 1},
    {"alpha": 10, "C": 1e5}
  ],
  "n": 2000,
  "replicates": 4,
  "policies": ["extreme-etc", "extreme-hunter", "robust-ucb", "uniform"],
  "seed": 7,
  "parallelism": 1,
  "estimator": {"b": 1, "D": 1, "E": 1, "N": 100, "rho": 6},
  "robust_ucb": {"eps": 0.4, "v": "auto", "u": "auto", "u_margin": 1},
  "regret": {"estimator": "conditional", "grid_points": 64, "window": [1000, 2000]},
  "output": {"dir": "xbandit-out"}
}
)";

struct Preset {
  std::string_view name;
  std::string_view text;
};

constexpr Preset kPresets[] = {
    {"paper-table2", kPaperTable2},
    {"bench-table1", kBenchTable1},
    {"smoke", kSmoke},
};

}  // namespace

// ---------------------------------------------------------------------------

ExperimentConfig ExperimentConfig::from_json(const json& doc) {
  ExperimentConfig cfg;
  Section top(doc, "");

  if (const json* v = top.find("name")) {
    if (!v->is_string() || v->get<std::string>().empty()) config_fail("name", "expected a nonempty string");
    cfg.name = v->get<std::string>();
    if (cfg.name.find_first_of("/\\") != std::string::npos) config_fail("name", "must not contain path separators");
  }

  const json& arms = top.get("arms");
  if (!arms.is_array() || arms.empty()) config_fail("arms", "expected a nonempty list of {alpha, C}");
  for (std::size_t i = 0; i < arms.size(); ++i) {
    Section arm(arms[i], "arms[" + std::to_string(i) + "]");
    cfg.arms.push_back({Section::as_number(arm.get("alpha"), arm.where("alpha")),
                        Section::as_number(arm.get("C"), arm.where("C"))});
    arm.finish();
  }

  cfg.n = Section::as_count(top.get("n"), "n");
  cfg.replicates = top.count("replicates", cfg.replicates);
  if (const json* s = top.find("seed"))
    cfg.seed = s->is_number_unsigned() ? s->get<std::uint64_t>() : Section::as_count(*s, "seed");
  cfg.parallelism = top.count("parallelism", cfg.parallelism);

  const json& policies = top.get("policies");
  if (!policies.is_array() || policies.empty()) config_fail("policies", "expected a nonempty list of policy names");
  for (std::size_t i = 0; i < policies.size(); ++i) {
    const std::string where = "policies[" + std::to_string(i) + "]";
    if (!policies[i].is_string()) config_fail(where, "expected a policy name");
    try {
      cfg.policies.push_back(parse_policy_kind(policies[i].get<std::string>()));
    } catch (const std::invalid_argument& e) {
      config_fail(where, e.what());
    }
  }

  if (const json* est = top.find("estimator")) {
    Section s(*est, "estimator");
    cfg.b = s.number("b", cfg.b);
    cfg.D = s.number("D", cfg.D);
    cfg.E = s.number("E", cfg.E);
    if (s.has("N") && s.has("A0")) config_fail("estimator", "give either N or A0, not both");
    if (s.find("N")) cfg.N = s.count("N", 0);
    cfg.A0 = s.number("A0", cfg.A0);
    if (s.has("delta0") && s.has("rho")) config_fail("estimator", "give either delta0 or rho, not both");
    if (s.find("delta0")) cfg.delta0 = s.number("delta0", 0.0);
    cfg.rho = s.number("rho", cfg.rho);
    s.finish();
  }

  if (const json* rb = top.find("robust_ucb")) {
    Section s(*rb, "robust_ucb");
    cfg.eps = s.number("eps", cfg.eps);
    cfg.v = auto_or_number(s, "v");
    cfg.u = auto_or_number(s, "u");
    cfg.u_margin = s.number("u_margin", cfg.u_margin);
    s.finish();
  }

  if (const json* rg = top.find("regret")) {
    Section s(*rg, "regret");
    if (const json* e = s.find("estimator")) {
      if (!e->is_string()) config_fail("regret.estimator", "expected \"conditional\" or \"empirical\"");
      try {
        cfg.regret_estimator = parse_regret_estimator(e->get<std::string>());
      } catch (const std::invalid_argument& err) {
        config_fail("regret.estimator", err.what());
      }
    }
    cfg.grid_points = s.count("grid_points", cfg.grid_points);
    if (const json* w = s.find("window")) {
      if (!w->is_array() || w->size() != 2) config_fail("regret.window", "expected [t_min, t_max]");
      cfg.window = RegressionWindow{Section::as_number((*w)[0], "regret.window[0]"),
                                    Section::as_number((*w)[1], "regret.window[1]")};
    }
    s.finish();
  }

  if (const json* out = top.find("output")) {
    Section s(*out, "output");
    if (const json* dir = s.find("dir")) {
      if (!dir->is_string() || dir->get<std::string>().empty()) config_fail("output.dir", "expected a path");
      cfg.out_dir = dir->get<std::string>();
    }
    s.finish();
  }

  top.finish();
  cfg.validate();
  return cfg;
}

json ExperimentConfig::to_json(bool reproducible_only) const {
  json doc;
  doc["name"] = name;
  doc["arms"] = json::array();
  for (const auto& a : arms) doc["arms"].push_back({{"alpha", a.alpha}, {"C", a.C}});
  doc["n"] = n;
  doc["replicates"] = replicates;
  doc["seed"] = seed;
  doc["policies"] = json::array();
  for (PolicyKind k : policies) doc["policies"].push_back(std::string(to_string(k)));

  json est = {{"b", b}, {"D", D}, {"E", E}};
  if (N) est["N"] = *N; else est["A0"] = A0;
  if (delta0) est["delta0"] = *delta0; else est["rho"] = rho;
  doc["estimator"] = est;

  doc["robust_ucb"] = {{"eps", eps}, {"u_margin", u_margin}};
  doc["robust_ucb"]["v"] = v ? json(*v) : json("auto");
  doc["robust_ucb"]["u"] = u ? json(*u) : json("auto");

  json regret = {{"estimator", std::string(to_string(regret_estimator))}, {"grid_points", grid_points}};
  regret["window"] = window ? json::array({window->t_min, window->t_max}) : json(nullptr);
  doc["regret"] = regret;

  if (!reproducible_only) {
    doc["parallelism"] = parallelism;
    doc["output"] = {{"dir", out_dir.string()}};
  }
  return doc;
}

void ExperimentConfig::validate() const {
  if (arms.empty()) config_fail("arms", "at least one arm is required");
  for (std::size_t i = 0; i < arms.size(); ++i) {
    const std::string where = "arms[" + std::to_string(i) + "]";
    if (!(arms[i].alpha > 1.0)) config_fail(where + ".alpha", "must exceed 1");
    if (!(arms[i].C > 0.0)) config_fail(where + ".C", "must be positive");
  }
  if (n == 0) config_fail("n", "horizon must be at least 1");
  if (replicates == 0) config_fail("replicates", "must be at least 1");
  if (parallelism == 0) config_fail("parallelism", "must be at least 1");
  if (policies.empty()) config_fail("policies", "at least one policy is required");
  if (N && *N == 0) config_fail("estimator.N", "must be at least 1");
  try {
    estimator_config(*this).validate();
  } catch (const std::invalid_argument& e) {
    config_fail("estimator", e.what());
  }
  if (!(eps > 0.0 && eps <= 1.0)) config_fail("robust_ucb.eps", "must lie in (0, 1]");
  if (v && !(*v > 0.0)) config_fail("robust_ucb.v", "must be positive");
  if (u && !(*u >= 0.0)) config_fail("robust_ucb.u", "must be nonnegative");
  if (!(u_margin > 0.0)) config_fail("robust_ucb.u_margin", "must be positive");
  if (grid_points < 2) config_fail("regret.grid_points", "must be at least 2");
  if (window) {
    if (!(window->t_min >= 1.0 && window->t_min < window->t_max))
      config_fail("regret.window", "expected 1 <= t_min < t_max");
    if (window->t_max > static_cast<double>(n)) config_fail("regret.window", "t_max exceeds the horizon n");
  }
  try {
    instance().validate();
  } catch (const std::invalid_argument& e) {
    config_fail("arms", e.what());
  }
}

BanditInstance ExperimentConfig::instance() const {
  BanditInstance inst;
  for (const auto& a : arms) inst.arms.emplace_back(a.alpha, a.C);
  return inst;
}

std::vector<std::string> preset_names() {
  std::vector<std::string> out;
  for (const auto& p : kPresets) out.emplace_back(p.name);
  return out;
}

std::string preset_text(std::string_view name) {
  for (const auto& p : kPresets) {
    if (p.name == name) return std::string(p.text);
  }
  throw ConfigError("unknown preset '" + std::string(name) + "'");
}

ExperimentConfig load_config(const std::string& path_or_preset) {
  std::string text;
  std::string origin = path_or_preset;
  if (std::filesystem::exists(path_or_preset)) {
    std::ifstream in(path_or_preset, std::ios::binary);
    if (!in) throw ConfigError("cannot read " + path_or_preset);
    std::ostringstream buf;
    buf << in.rdbuf();
    text = buf.str();
  } else {
    const auto names = preset_names();
    if (std::find(names.begin(), names.end(), path_or_preset) == names.end())
      throw ConfigError("no such config file or preset: " + path_or_preset);
    text = preset_text(path_or_preset);
    origin = "preset " + path_or_preset;
  }

  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(origin + ": " + e.what());
  }

  // A manifest carries the config it was produced from.
  if (doc.is_object() && doc.contains("config") && doc.contains("config_hash")) {
    ExperimentConfig cfg = ExperimentConfig::from_json(doc.at("config"));
    const std::string expected = doc.at("config_hash").is_string() ? doc.at("config_hash").get<std::string>() : "";
    if (config_hash(cfg) != expected)
      throw ConfigError(origin + ": manifest config_hash does not match its config");
    return cfg;
  }
  return ExperimentConfig::from_json(doc);
}

std::string config_hash(const ExperimentConfig& cfg) {
  const std::string canonical = cfg.to_json(true).dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : canonical) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

json ResolvedParams::to_json() const {
  json doc;
  doc["N"] = N;
  doc["KN"] = KN;
  doc["delta0"] = delta0;
  doc["best_arm"] = best_arm + 1;
  doc["best_arm_diagnostic"] = best_arm_diagnostic.empty() ? json(nullptr) : json(best_arm_diagnostic);
  doc["u_bound"] = u_bound ? json(*u_bound) : json(nullptr);
  doc["u"] = u ? json(*u) : json(nullptr);
  doc["v"] = v ? json(*v) : json(nullptr);
  doc["oracle_assisted"] = oracle_assisted;
  doc["notes"] = notes;
  return doc;
}

ResolvedParams resolve(const ExperimentConfig& cfg) {
  cfg.validate();
  ResolvedParams out;
  const BanditInstance inst = cfg.instance();
  const double n = static_cast<double>(cfg.n);

  const BestArmReport best = best_arm(inst, n);
  out.best_arm = best.arm;
  out.best_arm_diagnostic = best.diagnostic;

  const EstimatorConfig est = estimator_config(cfg);
  try {
    out.delta0 = est.confidence_level(n);
  } catch (const std::invalid_argument& e) {
    config_fail("estimator", e.what());
  }
  out.notes.push_back(cfg.delta0 ? "delta0 = " + format_short(out.delta0) + " (given)"
                                 : "delta0 = n^-" + format_short(cfg.rho) + " = " + format_short(out.delta0));

  if (cfg.N) {
    out.N = *cfg.N;
    out.notes.push_back("N = " + std::to_string(out.N) + " (given)");
  } else {
    out.N = required_pulls_N(n, est);
    out.notes.push_back("N = ceil(A0 (ln n)^(2(2b+1)/b)) = " + std::to_string(out.N) + " with A0 = " +
                        format_short(cfg.A0));
  }
  out.KN = cfg.arms.size() * out.N;
  if (uses_index_policy(cfg) && out.KN > cfg.n)
    throw ConfigError("initialization exceeds horizon: K*N = " + std::to_string(out.KN) +
                      " > n = " + std::to_string(cfg.n));

  if (uses_policy(cfg, PolicyKind::robust_ucb)) {
    if (cfg.u) {
      out.u = *cfg.u;
      out.notes.push_back("u = " + format_short(*out.u) + " (given)");
    } else {
      if (cfg.arms.size() < 2) config_fail("robust_ucb.u", "\"auto\" needs at least two arms");
      const auto tails = inst.tail_specs();
      out.u_bound = threshold_lower_bound(tails);
      out.u = *out.u_bound + cfg.u_margin;
      out.notes.push_back("u = threshold bound " + format_short(*out.u_bound) + " + margin " +
                          format_short(cfg.u_margin) + " = " + format_short(*out.u));
    }
    if (cfg.v) {
      out.v = *cfg.v;
      out.notes.push_back("v = " + format_short(*out.v) + " (given)");
    } else {
      try {
        out.v = moment_bound_v(inst.arms, cfg.eps, *out.u);
      } catch (const std::domain_error& e) {
        config_fail("robust_ucb.v", e.what());
      }
      out.oracle_assisted = true;
      out.notes.push_back("v = max_k E[Y_k^(1+eps)] = " + format_short(*out.v) +
                          " from the true arm parameters (oracle-assisted)");
    }
  }
  return out;
}

PolicySpec policy_spec(const ExperimentConfig& cfg, const ResolvedParams& params, PolicyKind kind) {
  PolicySpec spec;
  spec.kind = kind;
  spec.N = params.N;
  spec.estimator = estimator_config(cfg);
  if (kind == PolicyKind::robust_ucb) {
    if (!params.u || !params.v) throw ConfigError("robust-ucb parameters were not resolved");
    spec.reduction = ReductionConfig{*params.u, cfg.eps, *params.v};
  }
  return spec;
}

// ---------------------------------------------------------------------------

ExperimentOutcome run_experiment(const ExperimentConfig& cfg) {
  ExperimentOutcome outcome;
  outcome.params = resolve(cfg);
  outcome.hash = config_hash(cfg);
  if (!outcome.params.best_arm_diagnostic.empty()) outcome.warnings.push_back(outcome.params.best_arm_diagnostic);

  const BanditInstance inst = cfg.instance();
  const ExactPareto best = inst.arms[outcome.params.best_arm];
  const auto oracle = [&](double t) { return expected_max_exact(t, best.alpha(), best.scale()); };

  std::vector<std::size_t> forced{cfg.n};
  if (uses_index_policy(cfg)) forced.push_back(outcome.params.KN);
  if (cfg.window) {
    forced.push_back(static_cast<std::size_t>(std::ceil(cfg.window->t_min)));
    forced.push_back(static_cast<std::size_t>(std::floor(cfg.window->t_max)));
  }
  RecordingOptions recording;
  recording.grid = regret_time_grid(cfg.n, forced, cfg.grid_points);

  const std::size_t K = cfg.arms.size();
  for (PolicyKind kind : cfg.policies) {
    const PolicySpec spec = policy_spec(cfg, outcome.params, kind);
    const auto results = run_batch(inst, spec, cfg.n, cfg.replicates, cfg.seed, cfg.parallelism, recording);

    PolicyOutcome po;
    po.kind = kind;
    po.curve = aggregate_regret(results, oracle, cfg.regret_estimator);
    po.initialization_rounds = results.front().initialization_rounds;

    const double R = static_cast<double>(results.size());
    po.pulls.mean.assign(K, 0.0);
    po.pulls.stderr_mean.assign(K, 0.0);
    po.pulls.min.assign(K, cfg.n);
    po.pulls.max.assign(K, 0);
    for (std::size_t k = 0; k < K; ++k) {
      double sum = 0.0;
      for (const auto& r : results) {
        sum += static_cast<double>(r.pull_counts[k]);
        po.pulls.min[k] = std::min(po.pulls.min[k], r.pull_counts[k]);
        po.pulls.max[k] = std::max(po.pulls.max[k], r.pull_counts[k]);
      }
      const double mean = sum / R;
      double ss = 0.0;
      for (const auto& r : results) ss += std::pow(static_cast<double>(r.pull_counts[k]) - mean, 2);
      po.pulls.mean[k] = mean;
      po.pulls.stderr_mean[k] = results.size() > 1 ? std::sqrt(ss / (R - 1.0) / R) : 0.0;
    }

    if (kind == PolicyKind::extreme_etc) {
      std::vector<double> freq(K, 0.0);
      for (const auto& r : results) {
        if (r.winner) freq[*r.winner] += 1.0 / R;
      }
      po.winner_freq = freq;
    }

    if (cfg.window) {
      try {
        po.fit = loglog_slope(po.curve, cfg.window->t_min, cfg.window->t_max);
      } catch (const std::invalid_argument& e) {
        po.fit_error = e.what();
        outcome.warnings.push_back(std::string(to_string(kind)) + ": " + e.what());
      }
      if (po.initialization_rounds > 0 && cfg.window->t_min < static_cast<double>(po.initialization_rounds)) {
        outcome.warnings.push_back(std::string(to_string(kind)) + ": window starts before the end of initialization (round " +
                                   std::to_string(po.initialization_rounds) + ")");
      }
    }
    outcome.policies.push_back(std::move(po));
  }
  return outcome;
}

std::string format_csv(const ExperimentOutcome& outcome) {
  std::string out;
  out += "# config_hash: " + outcome.hash + "\n";
  for (const auto& p : outcome.policies)
    out += "# initialization_rounds " + std::string(to_string(p.kind)) + " " + std::to_string(p.initialization_rounds) + "\n";
  out += kCsvHeader;
  out += "\n";
  for (const auto& p : outcome.policies) {
    const std::string name(to_string(p.kind));
    const std::string reps = std::to_string(p.curve.replicates);
    for (std::size_t i = 0; i < p.curve.t.size(); ++i) {
      out += name;
      out += ',';
      out += std::to_string(p.curve.t[i]);
      out += ',';
      out += format_g17(p.curve.mean_regret[i]);
      out += ',';
      out += format_g17(p.curve.stderr_regret[i]);
      out += ',';
      out += reps;
      out += '\n';
    }
  }
  return out;
}

json summary_json(const ExperimentConfig& cfg, const ExperimentOutcome& outcome) {
  json doc;
  doc["config_hash"] = outcome.hash;
  doc["name"] = cfg.name;
  doc["n"] = cfg.n;
  doc["replicates"] = cfg.replicates;
  doc["seed"] = cfg.seed;
  doc["resolved_params"] = outcome.params.to_json();
  doc["regret_estimator"] = std::string(to_string(cfg.regret_estimator));
  doc["window"] = cfg.window ? json::array({cfg.window->t_min, cfg.window->t_max}) : json(nullptr);

  json winner = json::object(), slope = json::object(), r2 = json::object(), fit = json::object();
  json pulls = json::object(), final_regret = json::object();
  for (const auto& p : outcome.policies) {
    const std::string name(to_string(p.kind));
    winner[name] = p.winner_freq ? json(*p.winner_freq) : json(nullptr);
    slope[name] = p.fit ? json(p.fit->slope) : json(nullptr);
    r2[name] = p.fit ? json(p.fit->r2) : json(nullptr);
    if (p.fit) {
      fit[name] = {{"points", p.fit->points}, {"dropped", p.fit->dropped}, {"degenerate", p.fit->degenerate},
                   {"intercept", p.fit->intercept}};
    } else {
      fit[name] = cfg.window ? json({{"error", p.fit_error}}) : json(nullptr);
    }
    pulls[name] = {{"mean", p.pulls.mean}, {"stderr", p.pulls.stderr_mean}, {"min", p.pulls.min}, {"max", p.pulls.max}};
    final_regret[name] = {{"mean", p.curve.mean_regret.back()}, {"stderr", p.curve.stderr_regret.back()}};
  }
  doc["winner_freq"] = winner;
  doc["slope"] = slope;
  doc["r2"] = r2;
  doc["fit"] = fit;
  doc["pull_counts"] = pulls;
  doc["final_regret"] = final_regret;
  doc["warnings"] = outcome.warnings;
  return doc;
}

json manifest_json(const ExperimentConfig& cfg, const ExperimentOutcome& outcome) {
  return {{"manifest_version", 1},
          {"config_hash", outcome.hash},
          {"seed", cfg.seed},
          {"config", cfg.to_json(true)},
          {"resolved_params", outcome.params.to_json()}};
}

ArtifactPaths write_artifacts(const ExperimentConfig& cfg, const ExperimentOutcome& outcome) {
  std::filesystem::create_directories(cfg.out_dir);
  ArtifactPaths paths{cfg.out_dir / (cfg.name + ".csv"), cfg.out_dir / (cfg.name + ".summary.json"),
                      cfg.out_dir / (cfg.name + ".manifest.json")};
  auto write = [](const std::filesystem::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + p.string());
    out << text;
    if (!out) throw std::runtime_error("write failed for " + p.string());
  };
  write(paths.csv, format_csv(outcome));
  write(paths.summary, summary_json(cfg, outcome).dump(2) + "\n");
  write(paths.manifest, manifest_json(cfg, outcome).dump(2) + "\n");
  return paths;
}

// ---------------------------------------------------------------------------

CsvDocument read_regret_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read " + path.string());
  CsvDocument doc;
  std::string line;
  std::size_t lineno = 0;
  bool header = false;
  auto fail = [&](const std::string& what) {
    throw ConfigError(path.string() + ":" + std::to_string(lineno) + ": " + what);
  };
  auto parse_double = [&](std::string_view s) {
    double x = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), x);
    if (ec != std::errc() || ptr != s.data() + s.size()) fail("bad number '" + std::string(s) + "'");
    return x;
  };

  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line.front() == '#') {
      std::istringstream meta(line.substr(1));
      std::string key;
      meta >> key;
      if (key == "config_hash:") {
        meta >> doc.config_hash;
      } else if (key == "initialization_rounds") {
        std::string policy;
        std::size_t rounds = 0;
        if (meta >> policy >> rounds) doc.initialization_rounds[policy] = rounds;
      }
      continue;
    }
    if (!header) {
      if (line != kCsvHeader) fail("expected header '" + std::string(kCsvHeader) + "'");
      header = true;
      continue;
    }
    std::vector<std::string_view> fields;
    std::string_view rest(line);
    for (;;) {
      const auto comma = rest.find(',');
      fields.push_back(rest.substr(0, comma));
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    if (fields.size() != 5) fail("expected 5 fields");
    const std::string policy(fields[0]);
    auto it = std::find_if(doc.curves.begin(), doc.curves.end(), [&](const CsvCurve& c) { return c.policy == policy; });
    if (it == doc.curves.end()) {
      doc.curves.push_back({policy, {}, {}, {}, 0});
      it = std::prev(doc.curves.end());
    }
    const double t = parse_double(fields[1]);
    if (!it->t.empty() && !(t > it->t.back())) fail("time grid must be strictly increasing");
    it->t.push_back(t);
    it->mean_regret.push_back(parse_double(fields[2]));
    it->stderr_regret.push_back(parse_double(fields[3]));
    it->replicates = static_cast<std::size_t>(parse_double(fields[4]));
  }
  if (!header) throw ConfigError(path.string() + ": missing CSV header");
  if (doc.curves.empty()) throw ConfigError(path.string() + ": no data rows");
  return doc;
}

std::vector<RegressRow> regress_csv(const std::filesystem::path& path, double t_min, double t_max) {
  if (!(t_min < t_max)) throw ConfigError("regression window must satisfy t_min < t_max");
  const CsvDocument doc = read_regret_csv(path);
  std::vector<RegressRow> rows;
  for (const auto& c : doc.curves) {
    std::vector<double> x;
    std::vector<double> y;
    for (std::size_t i = 0; i < c.t.size(); ++i) {
      if (c.t[i] < t_min || c.t[i] > t_max) continue;
      x.push_back(c.t[i]);
      y.push_back(c.mean_regret[i]);
    }
    RegressRow row{c.policy, {}, {}};
    try {
      row.fit = loglog_fit(x, y);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(c.policy + ": " + e.what());
    }
    const auto init = doc.initialization_rounds.find(c.policy);
    if (init != doc.initialization_rounds.end() && init->second > 0 && t_min < static_cast<double>(init->second)) {
      row.warning = "commitment point t = " + std::to_string(init->second) + " lies outside the window [" +
                    format_short(t_min) + ", " + format_short(t_max) + "]; the fit mixes exploration rounds";
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

// ---------------------------------------------------------------------------

json BenchReport::to_json() const {
  json doc;
  doc["N"] = N;
  doc["rows"] = json::array();
  for (const auto& r : rows) {
    doc["rows"].push_back({{"policy", std::string(to_string(r.kind))},
                           {"n", r.n},
                           {"estimator_ops", r.estimator_ops},
                           {"estimator_ops_after_init", r.estimator_ops_after_init},
                           {"wall_seconds", r.wall_seconds}});
  }
  doc["exponents"] = json::object();
  for (const auto& e : exponents) {
    doc["exponents"][std::string(to_string(e.kind))] = {
        {"ops", e.ops_exponent ? json(*e.ops_exponent) : json(nullptr)},
        {"wall", e.wall_exponent ? json(*e.wall_exponent) : json(nullptr)},
        {"ops_constant", e.ops_constant}};
  }
  return doc;
}

BenchReport run_bench(const ExperimentConfig& cfg, const std::vector<std::size_t>& horizons) {
  if (horizons.size() < 2) throw ConfigError("bench needs at least two horizons");
  for (std::size_t i = 0; i < horizons.size(); ++i) {
    if (horizons[i] == 0 || (i > 0 && horizons[i] <= horizons[i - 1]))
      throw ConfigError("bench horizons must be positive and increasing");
  }

  ExperimentConfig base = cfg;
  base.n = horizons.front();
  base.window.reset();
  const ResolvedParams params = resolve(base);

  BenchReport report;
  report.N = params.N;
  const BanditInstance inst = cfg.instance();
  for (PolicyKind kind : cfg.policies) {
    PolicySpec spec = policy_spec(base, params, kind);
    std::vector<double> ns;
    std::vector<double> ops;
    std::vector<double> wall;
    for (std::size_t n : horizons) {
      auto policy = make_policy(spec, inst.size(), n, cfg.seed);
      RecordingOptions recording;
      recording.grid = {n};
      const EpisodeResult r = run_episode(inst, *policy, n, cfg.seed, recording);
      report.rows.push_back({kind, n, r.estimator_ops, r.estimator_ops_after_init, r.wall_seconds});
      ns.push_back(static_cast<double>(n));
      ops.push_back(static_cast<double>(r.estimator_ops));
      wall.push_back(r.wall_seconds);
    }

    BenchExponent e{kind, std::nullopt, std::nullopt, false};
    e.ops_constant = std::adjacent_find(ops.begin(), ops.end(), std::not_equal_to<>()) == ops.end();
    if (e.ops_constant) {
      if (ops.front() > 0.0) e.ops_exponent = 0.0;
    } else {
      try {
        e.ops_exponent = loglog_fit(ns, ops).slope;
      } catch (const std::invalid_argument&) {
      }
    }
    try {
      e.wall_exponent = loglog_fit(ns, wall).slope;
    } catch (const std::invalid_argument&) {
    }
    report.exponents.push_back(e);
  }
  return report;
}

}  // namespace xbandit
