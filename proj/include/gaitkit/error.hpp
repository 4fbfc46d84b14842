#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace gaitkit {

enum class ErrorCode {
  // data_model
  MalformedHeader,
  NonMonotoneFrames,
  EmptyFile,
  MissingField,
  NonPositiveSd,
  InvalidSequence,
  InvalidSkeletonMap,
  // preprocess
  AllFramesEmpty,
  LandmarkNeverObserved,
  SequenceTooShort,
  CutoffAboveNyquist,
  MissingHipLandmarks,
  DegenerateSegment,
  // kinematics
  DegenerateAxes,
  // gait_metrics
  NoCyclesFound,
  NoProgression,
  WindowEmpty,
  // ml_harness
  TrialTooShort,
  SingularSystem,
  FeatureDimensionMismatch,
  EmptyTrial,
  TooFewSubjects,
  // eval_metrics
  LengthMismatch,
  ZeroVariance,
  SingleClass,
  TooFewSamples,
  // cli
  IdMismatch,
  ConfigError,
  Io,
};

std::string_view to_string(ErrorCode code);

/// Every failure surfaced by the library carries one of the codes above so
/// callers (and the CLI exit-code logic) can branch without string matching.
class GaitError : public std::runtime_error {
 public:
  GaitError(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace gaitkit
