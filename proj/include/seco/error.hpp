#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace seco {

enum class ErrorCode {
  InvalidArgument,
  SumMismatch,
  FormatError,
  ClassOutOfRange,
  BadMagic,
  TruncatedFile,
  NonFiniteValue,
  FileError,
  DimMismatch,
  BothEmpty,
  BackendUnavailable,
  ImageNotFound,
  EmptyResult,
  EmptyPool,
  EmptyMask,
  DegenerateDataset,
  TooFewSamples,
  MissingStatistics,
  EmptyInput,
  PoolEmpty,
  DoesNotFit,
  ConfigError,
};

std::string_view to_string(ErrorCode code);

// Every failure in the library surfaces as seco::Error carrying a code the
// CLI maps onto exit statuses.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace seco
