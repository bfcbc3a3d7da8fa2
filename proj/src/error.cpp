// Copyright 2026 The rexamine Authors
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

#include "rexamine/error.hpp"

namespace rexamine {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kParseError: return "ParseError";
    case ErrorCode::kDuplicateId: return "DuplicateId";
    case ErrorCode::kEmptyCorpus: return "EmptyCorpus";
    case ErrorCode::kInsufficientRecords: return "InsufficientRecords";
    case ErrorCode::kUnknownReport: return "UnknownReport";
    case ErrorCode::kTransport: return "Transport";
    case ErrorCode::kCacheMiss: return "CacheMiss";
    case ErrorCode::kCredentialMissing: return "CredentialMissing";
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kEmptyGeneration: return "EmptyGeneration";
    case ErrorCode::kNotEnoughMaterial: return "NotEnoughMaterial";
    case ErrorCode::kEmptyText: return "EmptyText";
    case ErrorCode::kZeroVector: return "ZeroVector";
    case ErrorCode::kMalformedJudgeOutput: return "MalformedJudgeOutput";
    case ErrorCode::kAdapterCrashed: return "AdapterCrashed";
    case ErrorCode::kProtocolViolation: return "ProtocolViolation";
    case ErrorCode::kTimeout: return "Timeout";
    case ErrorCode::kZeroVariance: return "ZeroVariance";
    case ErrorCode::kTooFewSamples: return "TooFewSamples";
    case ErrorCode::kConstantInput: return "ConstantInput";
    case ErrorCode::kLengthMismatch: return "LengthMismatch";
    case ErrorCode::kMissingScores: return "MissingScores";
    case ErrorCode::kMissingAnnotation: return "MissingAnnotation";
    case ErrorCode::kIoError: return "IoError";
    case ErrorCode::kTooFewReviewers: return "TooFewReviewers";
    case ErrorCode::kOverlapTooLarge: return "OverlapTooLarge";
    case ErrorCode::kNotAssigned: return "NotAssigned";
    case ErrorCode::kCategoryMissing: return "CategoryMissing";
    case ErrorCode::kTotalMismatch: return "TotalMismatch";
    case ErrorCode::kUnknownReviewer: return "UnknownReviewer";
    case ErrorCode::kVersionConflict: return "VersionConflict";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

}  // namespace rexamine
