/*
 *  Copyright (C) 2026 The pdm2 Authors
 *
 *  SPDX-License-Identifier: Apache-2.0
 */

#include "pdm2/error.hpp"

namespace pdm2 {

std::string_view ToString(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kEmptyInput: return "EmptyInput";
    case ErrorCode::kMismatchedGrid: return "MismatchedGrid";
    case ErrorCode::kInvalidBand: return "InvalidBand";
    case ErrorCode::kWindowOutOfRange: return "WindowOutOfRange";
    case ErrorCode::kLowConfidence: return "LowConfidence";
    case ErrorCode::kDegenerateDesign: return "DegenerateDesign";
    case ErrorCode::kDegeneratePoints: return "DegeneratePoints";
    case ErrorCode::kNoSignal: return "NoSignal";
    case ErrorCode::kInsufficientMotion: return "InsufficientMotion";
    case ErrorCode::kRankDeficient: return "RankDeficient";
    case ErrorCode::kNonConvergence: return "NonConvergence";
    case ErrorCode::kSingularNormalEquations: return "SingularNormalEquations";
    case ErrorCode::kSeriesTooShort: return "SeriesTooShort";
    case ErrorCode::kEmptyModel: return "EmptyModel";
    case ErrorCode::kInsufficientData: return "InsufficientData";
    case ErrorCode::kPlanInfeasible: return "PlanInfeasible";
    case ErrorCode::kEmptySession: return "EmptySession";
    case ErrorCode::kIo: return "IoError";
    case ErrorCode::kParse: return "ParseError";
  }
  return "Unknown";
}

int ExitStatus(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument:
    case ErrorCode::kInvalidBand:
    case ErrorCode::kWindowOutOfRange:
    case ErrorCode::kMismatchedGrid:
      return 2;
    case ErrorCode::kIo:
    case ErrorCode::kParse:
      return 3;
    case ErrorCode::kNonConvergence:
    case ErrorCode::kSingularNormalEquations:
      return 5;
    case ErrorCode::kLowConfidence:
      return 6;
    default:
      return 4;
  }
}

}  // namespace pdm2
