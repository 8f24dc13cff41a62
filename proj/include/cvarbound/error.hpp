#pragma once

#include <stdexcept>
#include <string>

namespace cvarbound {

// Thrown when an input violates a documented precondition. `code()` is a
// stable machine-readable identifier; the CLI maps it to exit status 2.
class ValidationError : public std::invalid_argument {
 public:
  ValidationError(std::string code, const std::string& message)
      : std::invalid_argument(message), code_(std::move(code)) {}

  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

inline void require(bool condition, const char* code, const std::string& message) {
  if (!condition) throw ValidationError(code, message);
}

}  // namespace cvarbound
