// Copyright 2026 The embed-adapt Authors. All Rights Reserved.
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

#ifndef EMBED_ADAPT_ERROR_H_
#define EMBED_ADAPT_ERROR_H_

#include <exception>
#include <stdexcept>
#include <string>

namespace embed_adapt {

// Every failure raised by the library derives from Error. The category
// decides the process exit status the CLI reports.
enum class ErrorCategory {
  kUsage = 1,      // bad arguments or violated preconditions
  kData = 2,       // unreadable, malformed, or inconsistent input data
  kNumerical = 3,  // divergence, undefined quantities, solver failure
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, const std::string& message)
      : std::runtime_error(message), category_(category) {}

  ErrorCategory category() const { return category_; }

 private:
  ErrorCategory category_;
};

class UsageError : public Error {
 public:
  explicit UsageError(const std::string& message)
      : Error(ErrorCategory::kUsage, message) {}
};

class DataError : public Error {
 public:
  explicit DataError(const std::string& message)
      : Error(ErrorCategory::kData, message) {}
};

class NumericalError : public Error {
 public:
  explicit NumericalError(const std::string& message)
      : Error(ErrorCategory::kNumerical, message) {}
};

// Returns a copy of the error with `prefix` prepended to its message, keeping
// the concrete error type.
std::exception_ptr WithPrefix(const Error& error, const std::string& prefix);

// Maps an error category to the CLI exit code (0 is success).
int ExitCodeFor(ErrorCategory category);

}  // namespace embed_adapt

#endif  // EMBED_ADAPT_ERROR_H_
