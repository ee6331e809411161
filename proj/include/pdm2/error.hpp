/*
 *  Copyright (C) 2026 The pdm2 Authors
 *
 *  SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace pdm2 {

enum class ErrorCode {
  kInvalidArgument,
  kEmptyInput,
  kMismatchedGrid,
  kInvalidBand,
  kWindowOutOfRange,
  kLowConfidence,
  kDegenerateDesign,
  kDegeneratePoints,
  kNoSignal,
  kInsufficientMotion,
  kRankDeficient,
  kNonConvergence,
  kSingularNormalEquations,
  kSeriesTooShort,
  kEmptyModel,
  kInsufficientData,
  kPlanInfeasible,
  kEmptySession,
  kIo,
  kParse,
};

std::string_view ToString(ErrorCode code);

// Process exit status used by the CLI for each error family.
int ExitStatus(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace pdm2
