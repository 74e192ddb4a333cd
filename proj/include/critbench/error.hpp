#pragma once

#include <stdexcept>
#include <string>

namespace critbench {

/// Failure raised by any pipeline stage. `stage()` names the stage so the
/// CLI can print "stage: message" diagnostics.
class Error : public std::runtime_error {
 public:
  Error(std::string stage, const std::string& message)
      : std::runtime_error(stage + ": " + message), stage_(std::move(stage)) {}

  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

}  // namespace critbench
