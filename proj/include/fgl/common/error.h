#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace fgl {

enum class ErrorCode {
  kParse,
  kBounds,
  kShape,
  kFormat,
  kConfig,
  kIo,
  kInfeasiblePartition,
  kContractViolation,
  kNumeric,
  kEvaluation,
  kAggregation,
  kInfiniteBudget,
  kInfeasibleBudget,
  kPrivacyContract,
  kComparison,
};

// Stable upper-case identifier printed by the CLI ahead of the message.
std::string_view ErrorCodeName(ErrorCode code);

// Process exit status used by the CLI for each error category.
int ErrorExitStatus(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace fgl
