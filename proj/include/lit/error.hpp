// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace lit {

// Error taxonomy. Config-class errors (bad config, pairing, copy plans,
// malformed input files) map to CLI exit code 2; the rest to 1.
enum class ErrorKind {
  Dimension,      // tensor shapes do not conform
  Config,         // invalid configuration value or combination
  Pairing,        // teacher/student split shapes disagree
  Copy,           // layer copy plan names missing or mismatched layers
  Data,           // bad sample content (e.g. label out of range)
  Format,         // malformed file
  Usage,          // API misuse (non-scalar loss, empty dataset, ...)
  Internal,       // broken invariant
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message) : std::runtime_error(message), kind_(kind) {}
  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

}  // namespace lit
