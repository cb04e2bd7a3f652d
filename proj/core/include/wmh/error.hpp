#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace wmh {

enum class ErrorCode {
  // volume_io
  Io,
  BadMagic,
  UnsupportedDim,
  UnsupportedDatatype,
  TruncatedData,
  BadGzip,
  InvalidHeader,
  InvalidVolume,
  DegenerateMask,
  // nn_engine
  ShapeMismatch,
  UnknownConcatSource,
  ShapeCheckFailed,
  BadVersion,
  TruncatedTensor,
  BadManifest,
  // stackgen
  TileTooSmall,
  OrientationMismatch,
  NotAPosterior,
  NonBinaryInput,
  // histo_baseline
  FlatHistogram,
  // metrics
  ZeroReference,
  NoPositives,
  // stats
  LengthMismatch,
  TooFewPairs,
  ZeroMeanReference,
  NoCompleteRows,
  RankDeficient,
  TooFewRows,
  // cohort
  MissingHeader,
  UnknownDiagnosis,
  DuplicateId,
  EmptyCohort,
  // generic
  InvalidArgument,
};

/// Coarse grouping used for CLI exit codes and report messages.
enum class ErrorCategory { Io, Format, Shape, Degenerate, Argument };

std::string_view to_string(ErrorCode code) noexcept;
std::string_view to_string(ErrorCategory category) noexcept;
ErrorCategory category_of(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what);

  ErrorCode code() const noexcept { return code_; }
  ErrorCategory category() const noexcept { return category_of(code_); }

 private:
  ErrorCode code_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& message);

}  // namespace wmh
