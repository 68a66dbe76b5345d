#include "relusgd/harness.hpp"

#include <charconv>
#include <fstream>
#include <ostream>
#include <set>
#include <sstream>

namespace relusgd::harness {

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

namespace {

using nlohmann::json;

void reject_unknown_keys(const json& obj, const std::string& where,
                         const std::set<std::string>& allowed) {
  std::string offending;
  for (const auto& item : obj.items()) {
    if (!allowed.contains(item.key())) {
      if (!offending.empty()) offending += ", ";
      offending += item.key();
    }
  }
  if (!offending.empty()) {
    throw ConfigError("config: unknown key(s) in " + where + ": " + offending);
  }
}

const json& require(const json& obj, const std::string& where,
                    const std::string& key) {
  if (!obj.contains(key)) {
    throw ConfigError("config: missing key '" + key + "' in " + where);
  }
  return obj.at(key);
}

double as_number(const json& v, const std::string& what) {
  if (!v.is_number()) throw ConfigError("config: " + what + " must be a number");
  return v.get<double>();
}

std::int64_t as_integer(const json& v, const std::string& what) {
  if (!v.is_number_integer()) {
    throw ConfigError("config: " + what + " must be an integer");
  }
  return v.get<std::int64_t>();
}

InputDistribution parse_distribution(const json& obj, int dim) {
  if (!obj.is_object()) throw ConfigError("config: distribution must be an object");
  const std::string kind = require(obj, "distribution", "kind").get<std::string>();
  if (kind == "uniform_box") {
    reject_unknown_keys(obj, "distribution", {"kind", "lower", "upper"});
    return InputDistribution::uniform_box(
        as_number(require(obj, "distribution", "lower"), "distribution.lower"),
        as_number(require(obj, "distribution", "upper"), "distribution.upper"),
        dim);
  }
  if (kind == "discrete") {
    reject_unknown_keys(obj, "distribution",
                        {"kind", "lower", "upper", "points", "weights"});
    std::vector<std::vector<double>> points;
    for (const auto& p : require(obj, "distribution", "points")) {
      points.push_back(p.get<std::vector<double>>());
    }
    return InputDistribution::discrete(
        as_number(require(obj, "distribution", "lower"), "distribution.lower"),
        as_number(require(obj, "distribution", "upper"), "distribution.upper"),
        dim, std::move(points),
        require(obj, "distribution", "weights").get<std::vector<double>>());
  }
  throw ConfigError("config: distribution.kind must be uniform_box|discrete");
}

InitSpec parse_init(const json& obj) {
  if (!obj.is_object()) throw ConfigError("config: init must be an object");
  const std::string kind = require(obj, "init", "kind").get<std::string>();
  InitSpec init;
  if (kind == "explicit") {
    reject_unknown_keys(obj, "init", {"kind", "values"});
    init.kind = InitSpec::Kind::explicit_values;
    init.values = require(obj, "init", "values").get<std::vector<double>>();
    return init;
  }
  if (kind == "random_box") {
    reject_unknown_keys(obj, "init", {"kind", "low", "high", "seed"});
    init.kind = InitSpec::Kind::random_box;
    init.box_low = as_number(require(obj, "init", "low"), "init.low");
    init.box_high = as_number(require(obj, "init", "high"), "init.high");
    init.seed = static_cast<std::uint64_t>(
        as_integer(require(obj, "init", "seed"), "init.seed"));
    return init;
  }
  throw ConfigError("config: init.kind must be explicit|random_box");
}

Schedule parse_schedule(const json& obj) {
  if (!obj.is_object()) throw ConfigError("config: schedule must be an object");
  const std::string kind = require(obj, "schedule", "kind").get<std::string>();
  Schedule s;
  if (kind == "constant") {
    s.kind = Schedule::Kind::constant;
    reject_unknown_keys(obj, "schedule", {"kind", "gamma0", "bound_fraction"});
  } else if (kind == "polynomial") {
    s.kind = Schedule::Kind::polynomial;
    reject_unknown_keys(obj, "schedule",
                        {"kind", "gamma0", "bound_fraction", "exponent"});
    s.exponent = as_number(require(obj, "schedule", "exponent"),
                           "schedule.exponent");
    if (s.exponent < 0.0) {
      throw ConfigError("config: schedule.exponent must be >= 0");
    }
  } else {
    throw ConfigError("config: schedule.kind must be constant|polynomial");
  }
  const bool has_gamma0 = obj.contains("gamma0");
  const bool has_fraction = obj.contains("bound_fraction");
  if (has_gamma0 == has_fraction) {
    throw ConfigError(
        "config: schedule needs exactly one of gamma0 | bound_fraction");
  }
  if (has_gamma0) {
    s.gamma0 = as_number(obj.at("gamma0"), "schedule.gamma0");
    if (!(s.gamma0 > 0.0)) {
      throw ConfigError("config: schedule.gamma0 must be positive");
    }
  } else {
    s.bound_fraction =
        as_number(obj.at("bound_fraction"), "schedule.bound_fraction");
    if (!(s.bound_fraction > 0.0)) {
      throw ConfigError("config: schedule.bound_fraction must be positive");
    }
  }
  return s;
}

}  // namespace

RunConfig config_from_json(const json& doc) {
  if (!doc.is_object()) throw ConfigError("config: top level must be an object");
  reject_unknown_keys(doc, "top level",
                      {"mode", "network", "target", "distribution", "init",
                       "schedule", "batch_size", "seed", "horizon",
                       "true_risk_every", "stop_threshold", "bound_form",
                       "delta", "override_validation", "grid_resolution"});

  RunConfig cfg;
  const std::string mode = require(doc, "top level", "mode").get<std::string>();
  if (mode == "gd") {
    cfg.mode = RunMode::gd;
  } else if (mode == "sgd") {
    cfg.mode = RunMode::sgd;
  } else {
    throw ConfigError("config: mode must be gd|sgd");
  }

  const json& net = require(doc, "top level", "network");
  reject_unknown_keys(net, "network", {"input_dim", "hidden_width"});
  cfg.shape = make_shape(
      static_cast<int>(as_integer(require(net, "network", "input_dim"),
                                  "network.input_dim")),
      static_cast<int>(as_integer(require(net, "network", "hidden_width"),
                                  "network.hidden_width")));

  cfg.xi = as_number(require(doc, "top level", "target"), "target");
  cfg.distribution = parse_distribution(
      require(doc, "top level", "distribution"), cfg.shape.input_dim);
  cfg.init = parse_init(require(doc, "top level", "init"));
  if (cfg.init.kind == InitSpec::Kind::explicit_values &&
      static_cast<int>(cfg.init.values.size()) != cfg.shape.param_count()) {
    throw ConfigError("config: init.values length must equal the parameter "
                      "count " + std::to_string(cfg.shape.param_count()));
  }
  cfg.schedule = parse_schedule(require(doc, "top level", "schedule"));

  if (doc.contains("batch_size")) {
    const json& bs = doc.at("batch_size");
    cfg.batch_sizes.clear();
    if (bs.is_array()) {
      for (const auto& v : bs) {
        cfg.batch_sizes.push_back(
            static_cast<int>(as_integer(v, "batch_size entry")));
      }
    } else {
      cfg.batch_sizes.push_back(
          static_cast<int>(as_integer(bs, "batch_size")));
    }
    if (cfg.batch_sizes.empty()) {
      throw ConfigError("config: batch_size list may not be empty");
    }
    for (int m : cfg.batch_sizes) {
      if (m < 1) throw ConfigError("config: batch sizes must be >= 1");
    }
  }

  cfg.seed = static_cast<std::uint64_t>(
      as_integer(require(doc, "top level", "seed"), "seed"));
  cfg.horizon = as_integer(require(doc, "top level", "horizon"), "horizon");
  if (cfg.horizon < 0) throw ConfigError("config: horizon must be >= 0");

  if (doc.contains("true_risk_every")) {
    cfg.true_risk_every = as_integer(doc.at("true_risk_every"),
                                     "true_risk_every");
    if (cfg.true_risk_every < 0) {
      throw ConfigError("config: true_risk_every must be >= 0");
    }
  }
  if (doc.contains("stop_threshold")) {
    cfg.stop_threshold = as_number(doc.at("stop_threshold"), "stop_threshold");
  }
  if (doc.contains("bound_form")) {
    const std::string form = doc.at("bound_form").get<std::string>();
    if (form == "V") {
      cfg.bound_form = BoundForm::lyapunov;
    } else if (form == "A") {
      cfg.bound_form = BoundForm::norm;
    } else {
      throw ConfigError("config: bound_form must be V|A");
    }
  }
  if (doc.contains("delta")) {
    cfg.delta = as_number(doc.at("delta"), "delta");
    if (!(cfg.delta > 0.0 && cfg.delta < 1.0)) {
      throw ConfigError("config: delta must lie in (0, 1)");
    }
  }
  if (doc.contains("override_validation")) {
    if (!doc.at("override_validation").is_boolean()) {
      throw ConfigError("config: override_validation must be a boolean");
    }
    cfg.override_validation = doc.at("override_validation").get<bool>();
  }
  if (doc.contains("grid_resolution")) {
    cfg.grid_resolution = as_integer(doc.at("grid_resolution"),
                                     "grid_resolution");
    if (cfg.grid_resolution < 2) {
      throw ConfigError("config: grid_resolution must be >= 2");
    }
  }
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path.string());
  json doc;
  try {
    in >> doc;
  } catch (const json::parse_error& err) {
    throw ConfigError("config: invalid JSON in " + path.string() + ": " +
                      err.what());
  }
  return config_from_json(doc);
}

std::uint64_t config_hash(const json& doc) {
  const std::string dump = doc.dump();
  std::uint64_t h = 0xcbf29ce484222325ull;  // FNV-1a
  for (unsigned char c : dump) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

void write_trajectory_csv(std::ostream& out, const Trajectory& traj) {
  out << "step,gamma,emp_risk,true_risk,V,grad_norm,descent_residual\n";
  for (const StepRecord& row : traj.rows) {
    out << row.step << ',' << format_double(row.rate) << ',';
    if (row.has_emp) out << format_double(row.emp_risk);
    out << ',';
    if (row.has_true) out << format_double(row.true_risk);
    out << ',' << format_double(row.lyapunov) << ','
        << format_double(row.grad_norm) << ','
        << format_double(row.descent_residual) << '\n';
  }
}

nlohmann::json summary_json(const Trajectory& traj, const RunConfig& cfg,
                            std::uint64_t hash) {
  json summary;
  summary["mode"] = cfg.mode == RunMode::gd ? "gd" : "sgd";
  summary["seed"] = cfg.seed;
  char hex[32];
  std::snprintf(hex, sizeof(hex), "%016llx",
                static_cast<unsigned long long>(hash));
  summary["config_hash"] = std::string(hex);
  summary["steps_executed"] = traj.steps_executed;
  summary["stopped_early"] = traj.stopped_early;
  summary["final_true_risk"] =
      traj.has_final_true ? json(traj.final_true_risk) : json();
  summary["final_emp_risk"] =
      traj.has_final_emp ? json(traj.final_emp_risk) : json();
  summary["initial_lyapunov"] = traj.initial_lyapunov;
  summary["final_lyapunov"] = traj.final_lyapunov;
  summary["lyapunov_monotone"] = traj.lyapunov_monotone;
  summary["max_param_norm"] = traj.max_param_norm;
  summary["max_descent_residual"] = traj.max_descent_residual;
  summary["schedule"] = {
      {"accepted", traj.decision.accepted},
      {"reason", traj.decision.reason},
      {"bound_form", traj.decision.form == BoundForm::lyapunov ? "V" : "A"},
      {"bound", traj.decision.bound},
      {"sup_rate", traj.decision.sup_rate},
      {"delta_effective", traj.decision.delta_effective},
  };
  summary["integration"] = {
      {"exact", RiskModel(cfg.distribution, TargetSpec::constant(cfg.xi),
                          cfg.grid_resolution)
                    .meta()
                    .exact},
      {"grid_resolution", cfg.grid_resolution},
  };
  return summary;
}

nlohmann::json execute_run(const std::filesystem::path& config_path,
                           const std::filesystem::path& out_dir) {
  std::ifstream in(config_path);
  if (!in) throw ConfigError("config: cannot open " + config_path.string());
  json doc;
  try {
    in >> doc;
  } catch (const json::parse_error& err) {
    throw ConfigError("config: invalid JSON: " + std::string(err.what()));
  }
  const RunConfig cfg = config_from_json(doc);
  const Trajectory traj = run(cfg);

  std::filesystem::create_directories(out_dir);
  {
    std::ofstream csv(out_dir / "trajectory.csv", std::ios::binary);
    write_trajectory_csv(csv, traj);
  }
  const json summary = summary_json(traj, cfg, config_hash(doc));
  {
    std::ofstream js(out_dir / "summary.json", std::ios::binary);
    js << summary.dump(2) << '\n';
  }
  return summary;
}

}  // namespace relusgd::harness
