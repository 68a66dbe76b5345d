#pragma once

#include <stdexcept>

namespace relusgd {

// Bad configuration (schema violations, rejected schedules without the
// override flag).  The CLI maps this to exit code 2.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace relusgd
