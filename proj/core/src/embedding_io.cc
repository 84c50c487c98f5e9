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

#include "embed_adapt/embedding_io.h"

#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <unordered_set>

#include "embed_adapt/error.h"

namespace embed_adapt {
namespace {

bool IsSpace(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' ||
         c == '\f';
}

std::vector<std::string_view> SplitWhitespace(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && IsSpace(line[i])) ++i;
    std::size_t start = i;
    while (i < line.size() && !IsSpace(line[i])) ++i;
    if (i > start) fields.push_back(line.substr(start, i - start));
  }
  return fields;
}

struct Header {
  std::size_t vocab_size;
  std::size_t dim;
};

Header ParseHeader(std::string_view line) {
  auto fields = SplitWhitespace(line);
  if (fields.size() != 2) {
    throw DataError("malformed header: expected '<vocab> <dim>'");
  }
  Header header{};
  std::size_t* targets[2] = {&header.vocab_size, &header.dim};
  for (int i = 0; i < 2; ++i) {
    auto f = fields[i];
    auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), *targets[i]);
    if (ec != std::errc() || ptr != f.data() + f.size() || *targets[i] == 0) {
      throw DataError("malformed header: '" + std::string(f) +
                      "' is not a positive integer");
    }
  }
  return header;
}

double ParseValue(std::string_view field, std::string_view word) {
  double value = 0.0;
  const char* begin = field.data();
  const char* end = begin + field.size();
  // from_chars does not accept a leading '+'.
  if (begin != end && *begin == '+') ++begin;
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec == std::errc::result_out_of_range) {
    throw DataError("non-finite value '" + std::string(field) +
                    "' in vector of '" + std::string(word) + "'");
  }
  if (ec != std::errc() || ptr != end) {
    throw DataError("unparseable value '" + std::string(field) +
                    "' in vector of '" + std::string(word) + "'");
  }
  if (!std::isfinite(value)) {
    throw DataError("non-finite value in vector of '" + std::string(word) +
                    "'");
  }
  return value;
}

std::string CountMismatch(std::size_t declared, std::size_t found) {
  return "count mismatch: header declares " + std::to_string(declared) +
         " words, file contains " + std::to_string(found);
}

// Guard against headers that would make us allocate absurd amounts before
// the body has been validated.
constexpr std::size_t kMaxReserveRows = 1u << 20;

void ValidateForSave(const EmbeddingSet& set) {
  if (set.empty()) throw DataError("empty embedding set");
  for (const auto& word : set.vocab()) {
    for (char c : word) {
      if (IsSpace(c)) {
        throw DataError("word '" + word +
                        "' contains whitespace and cannot be saved");
      }
    }
  }
}

void WriteFloatLE(std::ostream& out, float value) {
  auto bits = std::bit_cast<std::uint32_t>(value);
  char bytes[4] = {static_cast<char>(bits & 0xFF),
                   static_cast<char>((bits >> 8) & 0xFF),
                   static_cast<char>((bits >> 16) & 0xFF),
                   static_cast<char>((bits >> 24) & 0xFF)};
  out.write(bytes, 4);
}

float ReadFloatLE(const unsigned char* bytes) {
  std::uint32_t bits = static_cast<std::uint32_t>(bytes[0]) |
                       (static_cast<std::uint32_t>(bytes[1]) << 8) |
                       (static_cast<std::uint32_t>(bytes[2]) << 16) |
                       (static_cast<std::uint32_t>(bytes[3]) << 24);
  return std::bit_cast<float>(bits);
}

}  // namespace

Format ParseFormat(std::string_view name) {
  if (name == "text") return Format::kText;
  if (name == "binary") return Format::kBinary;
  throw UsageError("unknown format '" + std::string(name) +
                   "' (expected text or binary)");
}

std::string_view FormatName(Format format) {
  return format == Format::kText ? "text" : "binary";
}

Format FormatFromPath(const std::filesystem::path& path) {
  return path.extension() == ".bin" ? Format::kBinary : Format::kText;
}

EmbeddingSet LoadText(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw DataError("malformed header: empty file");
  const Header header = ParseHeader(line);

  std::vector<std::string> vocab;
  std::vector<double> values;
  vocab.reserve(std::min(header.vocab_size, kMaxReserveRows));
  while (std::getline(in, line)) {
    auto fields = SplitWhitespace(line);
    if (fields.empty()) continue;
    if (vocab.size() == header.vocab_size) {
      std::size_t extra = 1;
      while (std::getline(in, line)) {
        if (!SplitWhitespace(line).empty()) ++extra;
      }
      throw DataError(CountMismatch(header.vocab_size, vocab.size() + extra));
    }
    std::string_view word = fields[0];
    if (fields.size() - 1 != header.dim) {
      throw DataError("dimension mismatch: word '" + std::string(word) +
                      "' has " + std::to_string(fields.size() - 1) +
                      " values, header declares " +
                      std::to_string(header.dim));
    }
    for (std::size_t i = 1; i < fields.size(); ++i) {
      values.push_back(ParseValue(fields[i], word));
    }
    vocab.emplace_back(word);
  }
  if (vocab.size() != header.vocab_size) {
    throw DataError(CountMismatch(header.vocab_size, vocab.size()));
  }
  RowMatrix matrix = Eigen::Map<RowMatrix>(
      values.data(), static_cast<Eigen::Index>(vocab.size()),
      static_cast<Eigen::Index>(header.dim));
  return EmbeddingSet(std::move(vocab), std::move(matrix));
}

EmbeddingSet LoadBinary(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw DataError("malformed header: empty file");
  const Header header = ParseHeader(line);
  if (header.dim > std::numeric_limits<std::size_t>::max() / 4) {
    throw DataError("malformed header: dimension too large");
  }

  std::vector<std::string> vocab;
  std::vector<double> values;
  vocab.reserve(std::min(header.vocab_size, kMaxReserveRows));
  std::vector<unsigned char> record(header.dim * 4);
  for (std::size_t n = 0; n < header.vocab_size; ++n) {
    int c = in.get();
    while (c == '\n') c = in.get();
    if (c == std::char_traits<char>::eof()) {
      throw DataError(CountMismatch(header.vocab_size, n));
    }
    std::string word;
    while (c != ' ') {
      if (c == std::char_traits<char>::eof()) {
        throw DataError("truncated record for word '" + word + "'");
      }
      word.push_back(static_cast<char>(c));
      c = in.get();
    }
    in.read(reinterpret_cast<char*>(record.data()),
            static_cast<std::streamsize>(record.size()));
    if (static_cast<std::size_t>(in.gcount()) != record.size()) {
      throw DataError("dimension mismatch: truncated vector for word '" +
                      word + "'");
    }
    for (std::size_t i = 0; i < header.dim; ++i) {
      float v = ReadFloatLE(record.data() + 4 * i);
      if (!std::isfinite(v)) {
        throw DataError("non-finite value in vector of '" + word + "'");
      }
      values.push_back(static_cast<double>(v));
    }
    if (in.peek() == '\n') in.get();
    vocab.push_back(std::move(word));
  }
  // Anything other than trailing whitespace means more records than declared.
  for (int c = in.get(); c != std::char_traits<char>::eof(); c = in.get()) {
    if (!IsSpace(static_cast<char>(c))) {
      throw DataError("count mismatch: data after the declared " +
                      std::to_string(header.vocab_size) + " words");
    }
  }
  RowMatrix matrix = Eigen::Map<RowMatrix>(
      values.data(), static_cast<Eigen::Index>(vocab.size()),
      static_cast<Eigen::Index>(header.dim));
  return EmbeddingSet(std::move(vocab), std::move(matrix));
}

EmbeddingSet Load(const std::filesystem::path& path, Format format) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path.string() + "' for reading");
  try {
    return format == Format::kText ? LoadText(in) : LoadBinary(in);
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

void SaveText(const EmbeddingSet& set, std::ostream& out) {
  ValidateForSave(set);
  out << set.size() << ' ' << set.dim() << '\n';
  char buffer[64];
  for (std::size_t r = 0; r < set.size(); ++r) {
    out << set.word(r);
    for (double v : set.row(r)) {
      auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof(buffer), v);
      out.put(' ');
      out.write(buffer, ptr - buffer);
    }
    out.put('\n');
  }
}

void SaveBinary(const EmbeddingSet& set, std::ostream& out) {
  ValidateForSave(set);
  out << set.size() << ' ' << set.dim() << '\n';
  for (std::size_t r = 0; r < set.size(); ++r) {
    out << set.word(r) << ' ';
    for (double v : set.row(r)) {
      float f = static_cast<float>(v);
      if (!std::isfinite(f)) {
        throw DataError("value of '" + set.word(r) + "' overflows float32");
      }
      WriteFloatLE(out, f);
    }
    out.put('\n');
  }
}

void Save(const EmbeddingSet& set, const std::filesystem::path& path,
          Format format) {
  ValidateForSave(set);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot open '" + path.string() + "' for writing");
  if (format == Format::kText) {
    SaveText(set, out);
  } else {
    SaveBinary(set, out);
  }
  out.flush();
  if (!out) throw DataError("write to '" + path.string() + "' failed");
}

SubsetResult Subset(const EmbeddingSet& set,
                    std::span<const std::string> words) {
  std::vector<std::string> vocab;
  std::vector<std::size_t> rows;
  std::unordered_set<std::string_view> seen;
  std::size_t dropped = 0;
  for (const auto& w : words) {
    auto idx = set.Find(w);
    if (!idx) {
      ++dropped;
      continue;
    }
    if (!seen.insert(w).second) continue;
    vocab.push_back(w);
    rows.push_back(*idx);
  }
  RowMatrix matrix(static_cast<Eigen::Index>(rows.size()),
                   static_cast<Eigen::Index>(set.dim()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    matrix.row(static_cast<Eigen::Index>(i)) =
        set.matrix().row(static_cast<Eigen::Index>(rows[i]));
  }
  return {EmbeddingSet(std::move(vocab), std::move(matrix)), dropped};
}

}  // namespace embed_adapt
