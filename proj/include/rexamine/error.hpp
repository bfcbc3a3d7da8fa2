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

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace rexamine {

// Every failure the harness reports carries one of these codes. Callers that
// need to branch on the failure mode test code(); the message is for humans.
enum class ErrorCode {
  // corpus
  kParseError,
  kDuplicateId,
  kEmptyCorpus,
  kInsufficientRecords,
  kUnknownReport,
  // llm-gateway
  kTransport,
  kCacheMiss,
  kCredentialMissing,
  kDimensionMismatch,
  // perturb
  kEmptyGeneration,
  kNotEnoughMaterial,
  // metrics
  kEmptyText,
  kZeroVector,
  kMalformedJudgeOutput,
  kAdapterCrashed,
  kProtocolViolation,
  kTimeout,
  // stats
  kZeroVariance,
  kTooFewSamples,
  kConstantInput,
  kLengthMismatch,
  // audit
  kMissingScores,
  kMissingAnnotation,
  kIoError,
  // annotate-service
  kTooFewReviewers,
  kOverlapTooLarge,
  kNotAssigned,
  kCategoryMissing,
  kTotalMismatch,
  kUnknownReviewer,
  kVersionConflict,
  kInvalidArgument,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace rexamine
