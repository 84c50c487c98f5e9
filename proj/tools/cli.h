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

#ifndef EMBED_ADAPT_TOOLS_CLI_H_
#define EMBED_ADAPT_TOOLS_CLI_H_

#include <iosfwd>

namespace embed_adapt {

// Entry point of the embed-adapt binary. Result payloads go to `out` (or to
// --out files), progress and diagnostics to `err`. Returns the exit status:
// 0 success, 1 usage error, 2 data/format error, 3 numerical failure.
int RunCli(int argc, const char* const* argv, std::ostream& out,
           std::ostream& err);

}  // namespace embed_adapt

#endif  // EMBED_ADAPT_TOOLS_CLI_H_
