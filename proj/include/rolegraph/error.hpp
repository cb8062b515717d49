#pragma once

#include <stdexcept>
#include <string>

namespace rolegraph {

enum class ErrorCode {
  InvalidArgument,
  Io,
  MalformedLine,
  MalformedBlock,
  Config,
  SchemaMismatch,
  Span,
  EmptyGraph,
  Dimension,
  NonNegativity,
};

const char* to_string(ErrorCode code);

// Single exception type for the core; callers dispatch on code().
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what);
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace rolegraph
