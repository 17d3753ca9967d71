#pragma once

#include <stdexcept>
#include <string>

namespace ppest {

enum class ErrorCode {
  kArgument = 1,
  kIngestion,
  kIo,
  kConfig,
  kAllocation,
  kCalibration,
  kUndefinedMetric,
  kVarianceUndefined,
};

const char* error_code_name(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

#define PPEST_DEFINE_ERROR(Name, Code)                                   \
  class Name : public Error {                                            \
   public:                                                               \
    explicit Name(const std::string& what) : Error(ErrorCode::Code, what) {} \
  };

PPEST_DEFINE_ERROR(ArgumentError, kArgument)
PPEST_DEFINE_ERROR(IngestionError, kIngestion)
PPEST_DEFINE_ERROR(IoError, kIo)
PPEST_DEFINE_ERROR(ConfigError, kConfig)
PPEST_DEFINE_ERROR(AllocationError, kAllocation)
PPEST_DEFINE_ERROR(CalibrationError, kCalibration)
PPEST_DEFINE_ERROR(UndefinedMetricError, kUndefinedMetric)
PPEST_DEFINE_ERROR(VarianceUndefinedError, kVarianceUndefined)

#undef PPEST_DEFINE_ERROR

}  // namespace ppest
