#include "rolegraph/error.hpp"

namespace rolegraph {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::Io: return "Io";
    case ErrorCode::MalformedLine: return "MalformedLine";
    case ErrorCode::MalformedBlock: return "MalformedBlock";
    case ErrorCode::Config: return "ConfigError";
    case ErrorCode::SchemaMismatch: return "SchemaMismatch";
    case ErrorCode::Span: return "SpanError";
    case ErrorCode::EmptyGraph: return "EmptyGraph";
    case ErrorCode::Dimension: return "DimensionError";
    case ErrorCode::NonNegativity: return "NonNegativityViolation";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& what)
    : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

}  // namespace rolegraph
