#pragma once

#include <stdexcept>
#include <string>

namespace geoprop {

enum class ErrorCode {
  kInvalidGeoPoint,
  kNonConvergence,
  kEmptySet,
  kMalformedRecord,
  kInvalidPattern,
  kEmptyGraph,
  kInvalidConfig,
  kInsufficientLabels,
  kEmptyInput,
  kIo,
};

const char* to_string(ErrorCode code);

// All library failures surface as this one exception type; callers branch
// on code() when they need to (the CLI maps codes to exit statuses).
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace geoprop
