#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace cmeshpart {

/// Global tree index. Offset arrays and ghost ids live in this range.
using GlobalIndex = std::int64_t;
/// Per-rank tree or ghost index.
using LocalIndex = std::int32_t;
using Rank = int;

/// Raised when a precondition on indices or ranges is violated.
class RangeError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

/// Raised for partition tables that violate the validity properties.
class PartitionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Internal consistency failure during repartitioning (index rewrite or
/// ghost bookkeeping went wrong).
class ConsistencyError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Text or binary input could not be parsed.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace cmeshpart
