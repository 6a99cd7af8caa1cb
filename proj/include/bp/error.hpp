// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace bp {

/// Failure category. Each maps to a fixed process exit code in the CLI.
enum class ErrorKind {
  kUsage,           // exit 2
  kDataValidation,  // exit 3
  kNumeric,         // exit 4
  kDegenerate,      // exit 5
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

inline Error usage_error(const std::string& m) { return {ErrorKind::kUsage, m}; }
inline Error data_error(const std::string& m) { return {ErrorKind::kDataValidation, m}; }
inline Error numeric_error(const std::string& m) { return {ErrorKind::kNumeric, m}; }
inline Error degenerate_error(const std::string& m) { return {ErrorKind::kDegenerate, m}; }

int exit_code(ErrorKind kind) noexcept;
const char* error_code_name(ErrorKind kind) noexcept;

}  // namespace bp
