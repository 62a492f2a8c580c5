#pragma once

#include <stdexcept>
#include <string>

namespace sfmnav {

/// Base exception for every recoverable failure raised by the library.
/// The message carries the short error tag ("degenerate repulsor",
/// "scenario infeasible", ...) optionally followed by detail after a colon.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace sfmnav
