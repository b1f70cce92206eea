// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace nlse {

// Error categories; values double as process exit codes in the CLI.
enum class ErrorCode : int {
  Config = 2,   // malformed or contradictory configuration
  Model = 3,    // model fails structural validation
  Runtime = 4,  // numerical failure during a run (nodes, NaN, ...)
  Gauge = 5,    // gauge transform not applicable on this box
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& msg) {
  throw Error(code, msg);
}

}  // namespace nlse
