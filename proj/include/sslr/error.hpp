/*
 * Copyright 2026 The sslr Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <stdexcept>
#include <string>

namespace sslr {

// Error categories. The CLI maps these onto process exit codes.
enum class ErrorCode {
  kArgument,             // bad parameters, out-of-range input
  kProtocol,             // share/role/dimension mismatch between parties
  kTransport,            // socket failure, peer disconnect, malformed frame
  kFormat,               // corrupt file header, ingestion failure
  kRandomnessUnderflow,  // correlated randomness exhausted
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

inline const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kArgument: return "argument";
    case ErrorCode::kProtocol: return "protocol";
    case ErrorCode::kTransport: return "transport";
    case ErrorCode::kFormat: return "format";
    case ErrorCode::kRandomnessUnderflow: return "randomness-underflow";
  }
  return "unknown";
}

}  // namespace sslr
