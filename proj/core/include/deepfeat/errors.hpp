#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

namespace deepfeat {

// Base class for all library errors.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Shape or length disagreement between operands. Messages name both sides.
struct DimensionError : Error {
  using Error::Error;
};

// Malformed or truncated file. Carries the byte offset where parsing stopped
// when it is known.
struct FormatError : Error {
  explicit FormatError(const std::string& what,
                       std::optional<std::uint64_t> offset = std::nullopt)
      : Error(what), byte_offset(offset) {}
  std::optional<std::uint64_t> byte_offset;
};

// Invalid parameter value (non-positive temperature, bad layer index, ...).
struct ValueError : Error {
  using Error::Error;
};

// A solver did not reach its tolerance within the iteration budget.
struct ConvergenceError : Error {
  ConvergenceError(const std::string& what, double gap)
      : Error(what), final_gap(gap) {}
  double final_gap;
};

}  // namespace deepfeat
