#include "wmh/error.hpp"

namespace wmh {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::Io: return "Io";
    case ErrorCode::BadMagic: return "BadMagic";
    case ErrorCode::UnsupportedDim: return "UnsupportedDim";
    case ErrorCode::UnsupportedDatatype: return "UnsupportedDatatype";
    case ErrorCode::TruncatedData: return "TruncatedData";
    case ErrorCode::BadGzip: return "BadGzip";
    case ErrorCode::InvalidHeader: return "InvalidHeader";
    case ErrorCode::InvalidVolume: return "InvalidVolume";
    case ErrorCode::DegenerateMask: return "DegenerateMask";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::UnknownConcatSource: return "UnknownConcatSource";
    case ErrorCode::ShapeCheckFailed: return "ShapeCheckFailed";
    case ErrorCode::BadVersion: return "BadVersion";
    case ErrorCode::TruncatedTensor: return "TruncatedTensor";
    case ErrorCode::BadManifest: return "BadManifest";
    case ErrorCode::TileTooSmall: return "TileTooSmall";
    case ErrorCode::OrientationMismatch: return "OrientationMismatch";
    case ErrorCode::NotAPosterior: return "NotAPosterior";
    case ErrorCode::NonBinaryInput: return "NonBinaryInput";
    case ErrorCode::FlatHistogram: return "FlatHistogram";
    case ErrorCode::ZeroReference: return "ZeroReference";
    case ErrorCode::NoPositives: return "NoPositives";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::TooFewPairs: return "TooFewPairs";
    case ErrorCode::ZeroMeanReference: return "ZeroMeanReference";
    case ErrorCode::NoCompleteRows: return "NoCompleteRows";
    case ErrorCode::RankDeficient: return "RankDeficient";
    case ErrorCode::TooFewRows: return "TooFewRows";
    case ErrorCode::MissingHeader: return "MissingHeader";
    case ErrorCode::UnknownDiagnosis: return "UnknownDiagnosis";
    case ErrorCode::DuplicateId: return "DuplicateId";
    case ErrorCode::EmptyCohort: return "EmptyCohort";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

std::string_view to_string(ErrorCategory category) noexcept {
  switch (category) {
    case ErrorCategory::Io: return "IO";
    case ErrorCategory::Format: return "Format";
    case ErrorCategory::Shape: return "Shape";
    case ErrorCategory::Degenerate: return "Degenerate";
    case ErrorCategory::Argument: return "Argument";
  }
  return "Unknown";
}

ErrorCategory category_of(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::Io:
      return ErrorCategory::Io;
    case ErrorCode::BadMagic:
    case ErrorCode::UnsupportedDim:
    case ErrorCode::UnsupportedDatatype:
    case ErrorCode::TruncatedData:
    case ErrorCode::BadGzip:
    case ErrorCode::InvalidHeader:
    case ErrorCode::BadVersion:
    case ErrorCode::TruncatedTensor:
    case ErrorCode::BadManifest:
    case ErrorCode::MissingHeader:
    case ErrorCode::UnknownDiagnosis:
    case ErrorCode::DuplicateId:
      return ErrorCategory::Format;
    case ErrorCode::InvalidVolume:
    case ErrorCode::ShapeMismatch:
    case ErrorCode::UnknownConcatSource:
    case ErrorCode::ShapeCheckFailed:
    case ErrorCode::TileTooSmall:
    case ErrorCode::OrientationMismatch:
    case ErrorCode::NonBinaryInput:
    case ErrorCode::LengthMismatch:
      return ErrorCategory::Shape;
    case ErrorCode::DegenerateMask:
    case ErrorCode::NotAPosterior:
    case ErrorCode::FlatHistogram:
    case ErrorCode::ZeroReference:
    case ErrorCode::NoPositives:
    case ErrorCode::TooFewPairs:
    case ErrorCode::ZeroMeanReference:
    case ErrorCode::NoCompleteRows:
    case ErrorCode::RankDeficient:
    case ErrorCode::TooFewRows:
    case ErrorCode::EmptyCohort:
      return ErrorCategory::Degenerate;
    case ErrorCode::InvalidArgument:
      return ErrorCategory::Argument;
  }
  return ErrorCategory::Argument;
}

Error::Error(ErrorCode code, const std::string& what)
    : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

void fail(ErrorCode code, const std::string& message) { throw Error(code, message); }

}  // namespace wmh
