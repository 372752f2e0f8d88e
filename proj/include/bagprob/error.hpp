#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace bagprob {

enum class ErrorCode {
  InvalidGraph,
  InvalidArgument,
  UnknownNode,
  GraphCyclic,
  PlainCycle,
  CycleLimitExceeded,
  TooLarge,
  BadOrder,
  WidthLimit,
  TargetRequired,
  Infeasible,
  IoError,
  ParseError,
  SchemaError,
};

/// Upper-snake name of the code, e.g. "GRAPH_CYCLIC".
std::string_view to_string(ErrorCode code) noexcept;

/// Every library failure is reported through this exception; the code is
/// the machine-readable part, what() carries the human diagnostic.
class BagError : public std::runtime_error {
 public:
  BagError(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace bagprob
