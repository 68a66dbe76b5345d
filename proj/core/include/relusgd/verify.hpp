#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

// Randomized property suites behind the `verify` subcommand.  Every trial is
// a pure function of (suite seed, trial index), so a falsifying trial can be
// serialized and replayed in isolation.

namespace relusgd::verify {

enum class Suite { identities, bounds, limits, all };

std::optional<Suite> suite_from_name(const std::string& name);
std::string suite_name(Suite suite);

struct PropertyResult {
  std::string property;
  int trials = 0;
  int failures = 0;
  // Replay record for the first failing trial, when any.
  nlohmann::json first_failure;
};

struct Report {
  std::vector<PropertyResult> results;
  bool all_passed() const;
};

// Runs every property of the suite for `trials` trials each, fanning trials
// out over at most `threads` workers (<= 0 picks the machine parallelism).
Report run_suite(Suite suite, std::uint64_t seed, int trials, int threads = 0);

// Re-runs the single trial described by a falsifying-input record.  Returns
// true when the failure reproduces; `detail` receives a diagnostic line.
bool replay(const nlohmann::json& record, std::string* detail);

}  // namespace relusgd::verify
