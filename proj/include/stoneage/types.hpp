#pragma once

#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>

namespace stoneage {

using NodeId = std::uint32_t;
using Round = std::uint32_t;
using StateId = std::uint16_t;
using LetterId = std::uint16_t;

/// The empty emission. Never stored in a port.
inline constexpr LetterId kEpsilon = std::numeric_limits<LetterId>::max();

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input text; carries the 1-based line number when known.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line = 0)
      : Error(line == 0 ? what : "line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace stoneage
