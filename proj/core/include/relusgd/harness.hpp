#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include <json.hpp>

#include "relusgd/errors.hpp"
#include "relusgd/optimizer.hpp"

// Configuration documents and machine-readable run outputs: strict JSON
// config parsing (unknown keys rejected), the trajectory CSV, and the run
// summary JSON.  Formatting is locale-independent and deterministic, so a
// re-run of the same config is byte-identical.

namespace relusgd::harness {

// Shortest round-trip decimal rendering of a double (to_chars).
std::string format_double(double v);

RunConfig config_from_json(const nlohmann::json& doc);
RunConfig load_config(const std::filesystem::path& path);

// FNV-1a over the compact dump of the document.
std::uint64_t config_hash(const nlohmann::json& doc);

// Columns: step,gamma,emp_risk,true_risk,V,grad_norm,descent_residual
// (risk columns are empty when the value was not evaluated at that step).
void write_trajectory_csv(std::ostream& out, const Trajectory& traj);

nlohmann::json summary_json(const Trajectory& traj, const RunConfig& cfg,
                            std::uint64_t config_hash);

// Parses, validates, runs, and writes trajectory.csv + summary.json under
// out_dir.  Returns the summary.
nlohmann::json execute_run(const std::filesystem::path& config_path,
                           const std::filesystem::path& out_dir);

}  // namespace relusgd::harness
