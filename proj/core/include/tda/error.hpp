#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace tda {

enum class ErrorCode {
  input,      // missing or unreadable input
  schema,     // column roles do not match the data
  format,     // malformed artifact or file contents
  config,     // invalid parameters
  not_found,  // unknown axis pair, segment, column
  conflict,   // request incompatible with precomputed artifacts
  internal,   // broken invariant
};

std::string_view to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace tda
