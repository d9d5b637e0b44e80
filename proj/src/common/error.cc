#include "fgl/common/error.h"

namespace fgl {

std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kParse: return "PARSE_ERROR";
    case ErrorCode::kBounds: return "BOUNDS_ERROR";
    case ErrorCode::kShape: return "SHAPE_ERROR";
    case ErrorCode::kFormat: return "FORMAT_ERROR";
    case ErrorCode::kConfig: return "CONFIG_ERROR";
    case ErrorCode::kIo: return "IO_ERROR";
    case ErrorCode::kInfeasiblePartition: return "INFEASIBLE_PARTITION";
    case ErrorCode::kContractViolation: return "CONTRACT_VIOLATION";
    case ErrorCode::kNumeric: return "NUMERIC_ERROR";
    case ErrorCode::kEvaluation: return "EVALUATION_ERROR";
    case ErrorCode::kAggregation: return "AGGREGATION_ERROR";
    case ErrorCode::kInfiniteBudget: return "INFINITE_BUDGET";
    case ErrorCode::kInfeasibleBudget: return "INFEASIBLE_BUDGET";
    case ErrorCode::kPrivacyContract: return "PRIVACY_CONTRACT";
    case ErrorCode::kComparison: return "COMPARISON_ERROR";
  }
  return "UNKNOWN_ERROR";
}

int ErrorExitStatus(ErrorCode code) {
  switch (code) {
    case ErrorCode::kParse:
    case ErrorCode::kFormat:
    case ErrorCode::kConfig:
      return 2;
    case ErrorCode::kIo: return 3;
    case ErrorCode::kInfeasiblePartition:
    case ErrorCode::kInfeasibleBudget:
    case ErrorCode::kInfiniteBudget:
      return 4;
    default: return 1;
  }
}

}  // namespace fgl
