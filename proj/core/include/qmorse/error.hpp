#pragma once

#include <stdexcept>
#include <string>

namespace qmorse {

/// Exception carrying a stable machine-readable code (e.g. "trace_free_violation")
/// alongside the human-readable message. The CLI maps codes to exit statuses.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& message)
      : std::runtime_error(message), code_(std::move(code)) {}

  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

}  // namespace qmorse
