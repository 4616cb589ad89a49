#pragma once

#include <stdexcept>
#include <string>

namespace civl {

/// Raised when inputs violate an operation's contract (bad data, unknown ids,
/// inconsistent arguments). The message names the offending row/column/id.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace civl
