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

#ifndef EMBED_ADAPT_EMBEDDING_IO_H_
#define EMBED_ADAPT_EMBEDDING_IO_H_

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>

#include "embed_adapt/embedding_set.h"

namespace embed_adapt {

// On-disk layouts.
//
//   text:   "<vocab> <dim>\n" then one "<word> <v1> ... <vdim>\n" per word.
//           Values are printed in shortest round-trip decimal form, so a
//           text save/load cycle reproduces every double exactly. FastText
//           .vec files are read as text.
//   binary: "<vocab> <dim>\n" then per word the UTF-8 word bytes, one 0x20,
//           dim little-endian IEEE-754 float32 values and one 0x0A. The
//           reader also accepts records without the trailing newline.
enum class Format { kText, kBinary };

// "text" or "binary"; throws UsageError otherwise.
Format ParseFormat(std::string_view name);
std::string_view FormatName(Format format);

// ".bin" selects binary, anything else text.
Format FormatFromPath(const std::filesystem::path& path);

EmbeddingSet Load(const std::filesystem::path& path, Format format);
EmbeddingSet LoadText(std::istream& in);
EmbeddingSet LoadBinary(std::istream& in);

// Rejects empty sets and words containing whitespace. Binary output narrows
// to float32; values that overflow float32 are rejected.
void Save(const EmbeddingSet& set, const std::filesystem::path& path,
          Format format);
void SaveText(const EmbeddingSet& set, std::ostream& out);
void SaveBinary(const EmbeddingSet& set, std::ostream& out);

struct SubsetResult {
  EmbeddingSet set;
  std::size_t dropped = 0;  // requested words absent from the input set
};

// Rows of `set` for `words`, in the order of `words`. Missing words are
// dropped and counted; repeated requests for the same word keep the first.
SubsetResult Subset(const EmbeddingSet& set,
                    std::span<const std::string> words);

}  // namespace embed_adapt

#endif  // EMBED_ADAPT_EMBEDDING_IO_H_
