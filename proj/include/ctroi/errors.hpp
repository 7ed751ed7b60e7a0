#pragma once

#include <stdexcept>
#include <string>

namespace ctroi {

// Domain error: invalid inputs, contract violations, numerical breakdown.
// The CLI maps these to exit code 1 (usage errors are exit code 2).
struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace ctroi
