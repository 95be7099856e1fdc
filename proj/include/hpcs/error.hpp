// Copyright 2026 The hpc-sentinel Authors.
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

namespace hpcs {

// Broad error classes; the CLI maps them onto process exit codes.
enum class ErrorKind {
  kUsage,    // bad flags or preconditions violated by the caller
  kData,     // malformed or inconsistent input data, I/O failures
  kNumeric,  // divergence or non-finite results
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, std::string code, const std::string& message)
      : std::runtime_error(message), kind_(kind), code_(std::move(code)) {}

  ErrorKind kind() const noexcept { return kind_; }
  // Short machine-readable name, e.g. "MalformedLine" or "TooFewSamples".
  const std::string& code() const noexcept { return code_; }

 private:
  ErrorKind kind_;
  std::string code_;
};

inline Error usage_error(std::string code, const std::string& message) {
  return Error(ErrorKind::kUsage, std::move(code), message);
}
inline Error data_error(std::string code, const std::string& message) {
  return Error(ErrorKind::kData, std::move(code), message);
}
inline Error numeric_error(std::string code, const std::string& message) {
  return Error(ErrorKind::kNumeric, std::move(code), message);
}

}  // namespace hpcs
