#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace galaxy {

enum class ErrorKind {
  io,                // missing/unwritable files
  format,            // malformed or unsupported file contents
  degenerate_input,  // constant images, empty masks, zero-variance data
  invalid_argument,  // violated preconditions on parameters
  training_failure,  // optimizer did not converge
};

std::string_view to_string(ErrorKind kind);

/// Single exception type for the library; `kind()` lets callers (the CLI in
/// particular) map failures onto exit codes without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace galaxy
