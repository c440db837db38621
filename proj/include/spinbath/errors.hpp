#pragma once

#include <stdexcept>
#include <string>

namespace spinbath {

/// Bad configuration or argument values; CLI maps these to exit code 2.
struct ValidationError : std::invalid_argument {
  explicit ValidationError(const std::string& what) : std::invalid_argument(what) {}
};

/// Unreadable / malformed input files; CLI maps these to exit code 3.
struct ParseError : std::runtime_error {
  explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

/// Mathematical domain violation at runtime (e.g. the coherence pole).
struct DomainError : std::runtime_error {
  explicit DomainError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace spinbath
