// SPDX-License-Identifier: Apache-2.0
#include "bp/error.hpp"

namespace bp {

int exit_code(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::kUsage: return 2;
    case ErrorKind::kDataValidation: return 3;
    case ErrorKind::kNumeric: return 4;
    case ErrorKind::kDegenerate: return 5;
  }
  return 1;
}

const char* error_code_name(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::kUsage: return "USAGE";
    case ErrorKind::kDataValidation: return "DATA_VALIDATION";
    case ErrorKind::kNumeric: return "NUMERIC_FAILURE";
    case ErrorKind::kDegenerate: return "STATISTICAL_DEGENERACY";
  }
  return "UNKNOWN";
}

}  // namespace bp
