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

#ifndef EMBED_ADAPT_DIGEST_H_
#define EMBED_ADAPT_DIGEST_H_

#include <filesystem>
#include <string>
#include <string_view>

#include "embed_adapt/embedding_set.h"

namespace embed_adapt {

// Lowercase hex SHA-256.
std::string Sha256Hex(std::string_view bytes);
std::string Sha256File(const std::filesystem::path& path);

// Digest of the set's exact text encoding; equal sets give equal digests.
std::string DigestEmbeddingSet(const EmbeddingSet& set);

}  // namespace embed_adapt

#endif  // EMBED_ADAPT_DIGEST_H_
