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

#include "arraykit/error.hpp"

namespace arraykit {

const char* error_code_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::kOk: return "Ok";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kIoError: return "IoError";
    case ErrorCode::kConfigInvalid: return "ConfigInvalid";
    case ErrorCode::kDegenerateSignal: return "DegenerateSignal";
    case ErrorCode::kRatioOutOfRange: return "RatioOutOfRange";
    case ErrorCode::kRateMismatch: return "RateMismatch";
    case ErrorCode::kUnsortedKnots: return "UnsortedKnots";
    case ErrorCode::kTooFewKnots: return "TooFewKnots";
    case ErrorCode::kBadFraming: return "BadFraming";
    case ErrorCode::kBadSpec: return "BadSpec";
    case ErrorCode::kInsufficientDecay: return "InsufficientDecay";
    case ErrorCode::kNoDistinctPath: return "NoDistinctPath";
    case ErrorCode::kHookFailure: return "HookFailure";
    case ErrorCode::kNoSharpPeak: return "NoSharpPeak";
    case ErrorCode::kTooFewValidSegments: return "TooFewValidSegments";
    case ErrorCode::kTrackCoverageGap: return "TrackCoverageGap";
    case ErrorCode::kNoDetection: return "NoDetection";
    case ErrorCode::kOutsideCalibratedField: return "OutsideCalibratedField";
    case ErrorCode::kGeometryError: return "GeometryError";
    case ErrorCode::kPositionOutsideRoom: return "PositionOutsideRoom";
    case ErrorCode::kTrajectoryMismatch: return "TrajectoryMismatch";
    case ErrorCode::kTooShort: return "TooShort";
    case ErrorCode::kShapeMismatch: return "ShapeMismatch";
    case ErrorCode::kNoiseTooShort: return "NoiseTooShort";
    case ErrorCode::kPolicyUnsatisfiable: return "PolicyUnsatisfiable";
    case ErrorCode::kSplitViolation: return "SplitViolation";
    case ErrorCode::kDegenerateReference: return "DegenerateReference";
    case ErrorCode::kNoValidFrames: return "NoValidFrames";
  }
  return "Unknown";
}

void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace arraykit
