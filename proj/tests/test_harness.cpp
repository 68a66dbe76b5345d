#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "relusgd/harness.hpp"

using namespace relusgd;
using nlohmann::json;

namespace {

json demo_config() {
  return json{
      {"mode", "sgd"},
      {"network", {{"input_dim", 1}, {"hidden_width", 4}}},
      {"target", 1.0},
      {"distribution",
       {{"kind", "uniform_box"}, {"lower", 0.0}, {"upper", 1.0}}},
      {"init",
       {{"kind", "random_box"}, {"low", -0.5}, {"high", 0.5}, {"seed", 7}}},
      {"schedule", {{"kind", "constant"}, {"bound_fraction", 0.9}}},
      {"batch_size", 8},
      {"seed", 42},
      {"horizon", 50},
      {"true_risk_every", 10},
  };
}

}  // namespace

TEST_CASE("double formatting round-trips") {
  for (double v : {0.1, 1.0 / 3.0, -2.5e-17, 64.0, 1e300}) {
    CHECK(std::stod(harness::format_double(v)) == v);
  }
  CHECK(harness::format_double(64.0) == "64");
}

TEST_CASE("config parsing") {
  SUBCASE("a full document maps onto the run config") {
    const RunConfig cfg = harness::config_from_json(demo_config());
    CHECK(cfg.mode == RunMode::sgd);
    CHECK(cfg.shape.input_dim == 1);
    CHECK(cfg.shape.hidden_width == 4);
    CHECK(cfg.xi == 1.0);
    CHECK(cfg.schedule.bound_fraction == 0.9);
    CHECK(cfg.batch_sizes == std::vector<int>{8});
    CHECK(cfg.seed == 42);
    CHECK(cfg.horizon == 50);
    CHECK(cfg.true_risk_every == 10);
    CHECK(cfg.delta == 0.9);  // default
  }
  SUBCASE("unknown keys are rejected by name") {
    json doc = demo_config();
    doc["learning_rate"] = 0.1;
    try {
      harness::config_from_json(doc);
      FAIL("expected a config error");
    } catch (const ConfigError& err) {
      CHECK(std::string(err.what()).find("learning_rate") !=
            std::string::npos);
    }
  }
  SUBCASE("unknown nested keys are rejected") {
    json doc = demo_config();
    doc["schedule"]["warmup"] = 10;
    CHECK_THROWS_AS(harness::config_from_json(doc), ConfigError);
  }
  SUBCASE("missing keys are reported") {
    json doc = demo_config();
    doc.erase("seed");
    CHECK_THROWS_AS(harness::config_from_json(doc), ConfigError);
  }
  SUBCASE("schedule needs exactly one rate source") {
    json doc = demo_config();
    doc["schedule"] = {{"kind", "constant"}};
    CHECK_THROWS_AS(harness::config_from_json(doc), ConfigError);
    doc["schedule"] = {
        {"kind", "constant"}, {"gamma0", 0.1}, {"bound_fraction", 0.9}};
    CHECK_THROWS_AS(harness::config_from_json(doc), ConfigError);
  }
  SUBCASE("enumerations are validated") {
    json doc = demo_config();
    doc["mode"] = "adam";
    CHECK_THROWS_AS(harness::config_from_json(doc), ConfigError);
    doc = demo_config();
    doc["bound_form"] = "W";
    CHECK_THROWS_AS(harness::config_from_json(doc), ConfigError);
  }
  SUBCASE("delta outside (0,1) is rejected") {
    json doc = demo_config();
    doc["delta"] = 1.0;
    CHECK_THROWS_AS(harness::config_from_json(doc), ConfigError);
  }
  SUBCASE("explicit init length must match the shape") {
    json doc = demo_config();
    doc["init"] = {{"kind", "explicit"}, {"values", {1.0, 2.0}}};
    CHECK_THROWS_AS(harness::config_from_json(doc), ConfigError);
  }
  SUBCASE("batch size lists are validated") {
    json doc = demo_config();
    doc["batch_size"] = json::array();
    CHECK_THROWS_AS(harness::config_from_json(doc), ConfigError);
    doc["batch_size"] = {4, 0};
    CHECK_THROWS_AS(harness::config_from_json(doc), ConfigError);
    doc["batch_size"] = {4, 8, 16};
    CHECK(harness::config_from_json(doc).batch_sizes ==
          std::vector<int>{4, 8, 16});
  }
  SUBCASE("discrete distributions parse") {
    json doc = demo_config();
    doc["distribution"] = {{"kind", "discrete"},
                           {"lower", 0.0},
                           {"upper", 3.0},
                           {"points", {{2.0}}},
                           {"weights", {1.0}}};
    const RunConfig cfg = harness::config_from_json(doc);
    CHECK(cfg.distribution.kind() == InputDistribution::Kind::discrete_finite);
  }
}

TEST_CASE("config hashing") {
  const json a = demo_config();
  json b = demo_config();
  CHECK(harness::config_hash(a) == harness::config_hash(b));
  b["seed"] = 43;
  CHECK(harness::config_hash(a) != harness::config_hash(b));
}

TEST_CASE("trajectory CSV") {
  const RunConfig cfg = harness::config_from_json(demo_config());
  const Trajectory traj = run(cfg);

  std::ostringstream out;
  harness::write_trajectory_csv(out, traj);
  const std::string csv = out.str();

  std::istringstream lines(csv);
  std::string header;
  std::getline(lines, header);
  CHECK(header == "step,gamma,emp_risk,true_risk,V,grad_norm,descent_residual");

  int rows = 0;
  std::string line;
  while (std::getline(lines, line)) {
    CHECK(std::count(line.begin(), line.end(), ',') == 6);
    ++rows;
  }
  CHECK(rows == 50);

  SUBCASE("true risk column is empty off the cadence") {
    std::istringstream rescan(csv);
    std::getline(rescan, line);  // header
    std::getline(rescan, line);  // step 0: cadence hit
    CHECK(line.find(",,") == std::string::npos);
    std::getline(rescan, line);  // step 1: no true risk
    CHECK(line.find(",,") != std::string::npos);
  }
  SUBCASE("re-running the config writes identical bytes") {
    const Trajectory again = run(cfg);
    std::ostringstream out2;
    harness::write_trajectory_csv(out2, again);
    CHECK(out2.str() == csv);
  }
}

TEST_CASE("summary document") {
  const RunConfig cfg = harness::config_from_json(demo_config());
  const Trajectory traj = run(cfg);
  const json summary = harness::summary_json(traj, cfg, 0x1234abcdu);
  for (const char* key :
       {"mode", "seed", "config_hash", "steps_executed", "stopped_early",
        "final_true_risk", "final_emp_risk", "initial_lyapunov",
        "final_lyapunov", "lyapunov_monotone", "max_param_norm",
        "max_descent_residual", "schedule", "integration"}) {
    CHECK(summary.contains(key));
  }
  CHECK(summary["lyapunov_monotone"].get<bool>());
  CHECK(summary["schedule"]["accepted"].get<bool>());
  CHECK(summary["integration"]["exact"].get<bool>());
}

TEST_CASE("execute_run writes both artifacts") {
  const auto dir = std::filesystem::temp_directory_path() /
                   "relusgd_harness_test";
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  const auto config_path = dir / "config.json";
  {
    std::ofstream out(config_path);
    out << demo_config().dump(2);
  }

  const json summary = harness::execute_run(config_path, dir / "out");
  CHECK(std::filesystem::exists(dir / "out" / "trajectory.csv"));
  CHECK(std::filesystem::exists(dir / "out" / "summary.json"));
  CHECK(summary["steps_executed"].get<int>() == 50);

  SUBCASE("a summable schedule is a configuration error") {
    json doc = demo_config();
    doc["schedule"] = {
        {"kind", "polynomial"}, {"gamma0", 1e-4}, {"exponent", 2.0}};
    const auto bad_path = dir / "bad.json";
    {
      std::ofstream out(bad_path);
      out << doc.dump(2);
    }
    CHECK_THROWS_AS(harness::execute_run(bad_path, dir / "out2"), ConfigError);
  }
  std::filesystem::remove_all(dir);
}

TEST_CASE("trajectory CSV matches the golden file") {
  // Schema stability: the exact bytes of a short reference run are under
  // version control.  Core is built with FP contraction off, so the values
  // do not drift across build types.
  const std::filesystem::path golden_dir =
      std::filesystem::path(RELUSGD_TEST_DIR) / "golden";
  const RunConfig cfg = harness::load_config(golden_dir / "sgd_short.json");
  const Trajectory traj = run(cfg);

  std::ostringstream out;
  harness::write_trajectory_csv(out, traj);

  std::ifstream golden(golden_dir / "sgd_short.csv", std::ios::binary);
  REQUIRE(golden.good());
  std::ostringstream expected;
  expected << golden.rdbuf();
  CHECK(out.str() == expected.str());
}

TEST_CASE("load_config failure modes") {
  CHECK_THROWS_AS(harness::load_config("/nonexistent/config.json"),
                  ConfigError);
  const auto dir = std::filesystem::temp_directory_path();
  const auto path = dir / "relusgd_invalid.json";
  {
    std::ofstream out(path);
    out << "{ not json";
  }
  CHECK_THROWS_AS(harness::load_config(path), ConfigError);
  std::filesystem::remove(path);
}
