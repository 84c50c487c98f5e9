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

#include "embed_adapt/error.h"

namespace embed_adapt {

std::exception_ptr WithPrefix(const Error& error, const std::string& prefix) {
  const std::string message = prefix + error.what();
  switch (error.category()) {
    case ErrorCategory::kUsage:
      return std::make_exception_ptr(UsageError(message));
    case ErrorCategory::kData:
      return std::make_exception_ptr(DataError(message));
    case ErrorCategory::kNumerical:
      return std::make_exception_ptr(NumericalError(message));
  }
  return std::make_exception_ptr(Error(error.category(), message));
}

int ExitCodeFor(ErrorCategory category) {
  return static_cast<int>(category);
}

}  // namespace embed_adapt
