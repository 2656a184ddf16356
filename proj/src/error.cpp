#include "seco/error.hpp"

namespace seco {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::SumMismatch: return "SumMismatch";
    case ErrorCode::FormatError: return "FormatError";
    case ErrorCode::ClassOutOfRange: return "ClassOutOfRange";
    case ErrorCode::BadMagic: return "BadMagic";
    case ErrorCode::TruncatedFile: return "TruncatedFile";
    case ErrorCode::NonFiniteValue: return "NonFiniteValue";
    case ErrorCode::FileError: return "FileError";
    case ErrorCode::DimMismatch: return "DimMismatch";
    case ErrorCode::BothEmpty: return "BothEmpty";
    case ErrorCode::BackendUnavailable: return "BackendUnavailable";
    case ErrorCode::ImageNotFound: return "ImageNotFound";
    case ErrorCode::EmptyResult: return "EmptyResult";
    case ErrorCode::EmptyPool: return "EmptyPool";
    case ErrorCode::EmptyMask: return "EmptyMask";
    case ErrorCode::DegenerateDataset: return "DegenerateDataset";
    case ErrorCode::TooFewSamples: return "TooFewSamples";
    case ErrorCode::MissingStatistics: return "MissingStatistics";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::PoolEmpty: return "PoolEmpty";
    case ErrorCode::DoesNotFit: return "DoesNotFit";
    case ErrorCode::ConfigError: return "ConfigError";
  }
  return "Unknown";
}

}  // namespace seco
