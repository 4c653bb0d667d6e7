#include "geoprop/error.hpp"

namespace geoprop {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidGeoPoint: return "InvalidGeoPoint";
    case ErrorCode::kNonConvergence: return "NonConvergence";
    case ErrorCode::kEmptySet: return "EmptySet";
    case ErrorCode::kMalformedRecord: return "MalformedRecord";
    case ErrorCode::kInvalidPattern: return "InvalidPattern";
    case ErrorCode::kEmptyGraph: return "EmptyGraph";
    case ErrorCode::kInvalidConfig: return "InvalidConfig";
    case ErrorCode::kInsufficientLabels: return "InsufficientLabels";
    case ErrorCode::kEmptyInput: return "EmptyInput";
    case ErrorCode::kIo: return "Io";
  }
  return "Unknown";
}

}  // namespace geoprop
