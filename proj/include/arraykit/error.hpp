// Copyright 2026 The arraykit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>

namespace arraykit {

// Values are part of the C ABI (see arraykit.h); append only.
enum class ErrorCode : int {
  kOk = 0,
  kInvalidArgument = 1,
  kIoError = 2,
  kConfigInvalid = 3,
  kDegenerateSignal = 10,
  kRatioOutOfRange = 11,
  kRateMismatch = 12,
  kUnsortedKnots = 13,
  kTooFewKnots = 14,
  kBadFraming = 15,
  kBadSpec = 20,
  kInsufficientDecay = 21,
  kNoDistinctPath = 22,
  kHookFailure = 30,
  kNoSharpPeak = 31,
  kTooFewValidSegments = 32,
  kTrackCoverageGap = 33,
  kNoDetection = 40,
  kOutsideCalibratedField = 41,
  kGeometryError = 42,
  kPositionOutsideRoom = 50,
  kTrajectoryMismatch = 51,
  kTooShort = 52,
  kShapeMismatch = 60,
  kNoiseTooShort = 61,
  kPolicyUnsatisfiable = 62,
  kSplitViolation = 63,
  kDegenerateReference = 70,
  kNoValidFrames = 71,
};

const char* error_code_name(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& message);

inline void require(bool condition, ErrorCode code, const char* message) {
  if (!condition) fail(code, message);
}

}  // namespace arraykit
