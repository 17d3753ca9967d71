#include "ppest/error.hpp"

namespace ppest {

const char* error_code_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::kArgument: return "argument";
    case ErrorCode::kIngestion: return "ingestion";
    case ErrorCode::kIo: return "io";
    case ErrorCode::kConfig: return "config";
    case ErrorCode::kAllocation: return "allocation";
    case ErrorCode::kCalibration: return "calibration";
    case ErrorCode::kUndefinedMetric: return "undefined_metric";
    case ErrorCode::kVarianceUndefined: return "variance_undefined";
  }
  return "unknown";
}

}  // namespace ppest
