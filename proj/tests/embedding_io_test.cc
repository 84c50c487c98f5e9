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


#include <cmath>
#include <cstring>
#include <sstream>
#include <string>
#include <unordered_set>
#include <vector>

#include "doctest.h"
#include "embed_adapt/embedding_io.h"
#include "embed_adapt/error.h"
#include "test_util.h"

namespace embed_adapt {
namespace {

using testing::RandomFloatSet;
using testing::RandomSet;
using testing::TempDir;

EmbeddingSet FromText(const std::string& text) {
  std::istringstream in(text);
  return LoadText(in);
}

EmbeddingSet FromBinary(const std::string& bytes) {
  std::istringstream in(bytes);
  return LoadBinary(in);
}

std::string ToText(const EmbeddingSet& set) {
  std::ostringstream out;
  SaveText(set, out);
  return out.str();
}

std::string ToBinary(const EmbeddingSet& set) {
  std::ostringstream out;
  SaveBinary(set, out);
  return out.str();
}

template <typename Fn>
std::string ErrorMessage(Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.what();
  }
  return "";
}

bool BitwiseEqual(const EmbeddingSet& a, const EmbeddingSet& b) {
  if (a.vocab() != b.vocab() || a.dim() != b.dim()) return false;
  return std::memcmp(a.matrix().data(), b.matrix().data(),
                     sizeof(double) * a.size() * a.dim()) == 0;
}

TEST_CASE("minimal text file loads") {
  auto set = FromText("2 3\na 1 0 0\nb 0 1 0\n");
  CHECK(set.vocab() == std::vector<std::string>{"a", "b"});
  CHECK(set.dim() == 3);
  CHECK(set.matrix()(0, 0) == 1.0);
  CHECK(set.matrix()(1, 1) == 1.0);
  CHECK(set.IndexOf("b") == 1);
}

TEST_CASE("text loader tolerates crlf, tabs and blank lines") {
  auto set = FromText("2 2\r\n\na\t1 2\r\nb 3\t4  \n\n");
  CHECK(set.size() == 2);
  CHECK(set.matrix()(1, 1) == 4.0);
}

TEST_CASE("header count larger than contents is a count mismatch") {
  auto msg = ErrorMessage([] {
    FromText("5 2\na 1 2\nb 1 2\nc 1 2\nd 1 2\n");
  });
  CHECK(msg.find("count mismatch") != std::string::npos);
}

TEST_CASE("header count smaller than contents is a count mismatch") {
  auto msg = ErrorMessage([] { FromText("1 2\na 1 2\nb 1 2\n"); });
  CHECK(msg.find("count mismatch") != std::string::npos);
}

TEST_CASE("malformed headers are rejected") {
  for (const char* text : {"", "3\n", "a b\n", "0 3\n", "2 0\n", "2 3 4\n",
                           "-1 3\n", "2 3x\n"}) {
    auto msg = ErrorMessage([&] { FromText(text); });
    CHECK_MESSAGE(msg.find("malformed header") != std::string::npos, text);
  }
}

TEST_CASE("dimension mismatch names the word") {
  auto msg = ErrorMessage([] { FromText("2 3\na 1 2 3\nbad 1 2\n"); });
  CHECK(msg.find("dimension mismatch") != std::string::npos);
  CHECK(msg.find("bad") != std::string::npos);
}

TEST_CASE("duplicate word is rejected and named") {
  auto msg = ErrorMessage([] { FromText("2 1\ndup 1\ndup 2\n"); });
  CHECK(msg.find("duplicate") != std::string::npos);
  CHECK(msg.find("dup") != std::string::npos);
}

TEST_CASE("non-finite values are rejected") {
  for (const char* v : {"nan", "inf", "-inf", "1e400"}) {
    auto msg = ErrorMessage([&] { FromText(std::string("1 2\na 1 ") + v + "\n"); });
    CHECK_MESSAGE(msg.find("non-finite") != std::string::npos, v);
  }
  CHECK_THROWS_AS(FromText("1 2\na 1 x\n"), DataError);
}

TEST_CASE("save text of a single word") {
  EmbeddingSet set({"a"}, RowMatrix{{1, 2, 3}});
  CHECK(ToText(set) == "1 3\na 1 2 3\n");
}

TEST_CASE("save rejects empty sets and whitespace words") {
  auto empty = EmbeddingSet::Empty(3);
  CHECK(ErrorMessage([&] { ToText(empty); }) == "empty embedding set");
  CHECK(ErrorMessage([&] { ToBinary(empty); }) == "empty embedding set");
  TempDir dir;
  CHECK_THROWS_AS(Save(empty, dir / "e.vec", Format::kText), DataError);
  EmbeddingSet spaced({"two words"}, RowMatrix{{1.0}});
  CHECK_THROWS_AS(ToText(spaced), DataError);
  CHECK_THROWS_AS(ToBinary(spaced), DataError);
}

TEST_CASE("binary save rejects values beyond float32 range") {
  EmbeddingSet big({"a"}, RowMatrix{{1e300}});
  CHECK_THROWS_AS(ToBinary(big), DataError);
}

TEST_CASE("binary layout is header, word, space, little-endian floats, newline") {
  EmbeddingSet set({"ab"}, RowMatrix{{1.0, -2.0}});
  const std::string bytes = ToBinary(set);
  const std::string expected = std::string("1 2\nab ") +
                               std::string("\x00\x00\x80\x3f", 4) +
                               std::string("\x00\x00\x00\xc0", 4) + "\n";
  CHECK(bytes == expected);
}

TEST_CASE("binary reader tolerates records without trailing newline") {
  std::string bytes = std::string("2 1\na ") + std::string("\x00\x00\x80\x3f", 4) +
                      "b " + std::string("\x00\x00\x00\x40", 4);
  auto set = FromBinary(bytes);
  CHECK(set.vocab() == std::vector<std::string>{"a", "b"});
  CHECK(set.matrix()(1, 0) == 2.0);
}

TEST_CASE("binary truncation and surplus data are detected") {
  EmbeddingSet set({"a", "b"}, RowMatrix{{1.0, 2.0}, {3.0, 4.0}});
  std::string bytes = ToBinary(set);
  CHECK_THROWS_AS(FromBinary(bytes.substr(0, bytes.size() - 4)), DataError);
  CHECK_THROWS_AS(FromBinary("3" + bytes.substr(1)), DataError);
  auto msg = ErrorMessage([&] { FromBinary("1" + bytes.substr(1)); });
  CHECK(msg.find("count mismatch") != std::string::npos);
}

TEST_CASE("binary non-finite float is rejected") {
  std::string bytes = std::string("1 1\na ") + std::string("\x00\x00\xc0\x7f", 4) + "\n";
  auto msg = ErrorMessage([&] { FromBinary(bytes); });
  CHECK(msg.find("non-finite") != std::string::npos);
}

TEST_CASE("random 100x300 binary round trip is bit exact") {
  Rng rng(7);
  auto set = RandomFloatSet(100, 300, rng);
  TempDir dir;
  Save(set, dir / "x.bin", Format::kBinary);
  auto back = Load(dir / "x.bin", Format::kBinary);
  CHECK(BitwiseEqual(set, back));
}

TEST_CASE("text round trip is exact for arbitrary doubles") {
  Rng rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    auto set = RandomSet(30, 17, rng);
    CHECK(BitwiseEqual(set, FromText(ToText(set))));
  }
  EmbeddingSet extremes({"a"}, RowMatrix{{5e-324, 1.7976931348623157e308,
                                          -0.0, 0.1, 1.0 / 3.0}});
  CHECK(BitwiseEqual(extremes, FromText(ToText(extremes))));
}

TEST_CASE("load of a missing file names the file") {
  auto msg = ErrorMessage([] { Load("/nonexistent/dir/x.vec", Format::kText); });
  CHECK(msg.find("/nonexistent/dir/x.vec") != std::string::npos);
}

TEST_CASE("format helpers") {
  CHECK(ParseFormat("text") == Format::kText);
  CHECK(ParseFormat("binary") == Format::kBinary);
  CHECK_THROWS_AS(ParseFormat("bin"), UsageError);
  CHECK(FormatName(Format::kBinary) == "binary");
  CHECK(FormatFromPath("a/b.bin") == Format::kBinary);
  CHECK(FormatFromPath("a/b.vec") == Format::kText);
}

TEST_CASE("subset keeps requested order and counts drops") {
  EmbeddingSet set({"a", "b", "c"}, RowMatrix{{1.0}, {2.0}, {3.0}});
  std::vector<std::string> words = {"b", "z"};
  auto result = Subset(set, words);
  CHECK(result.set.vocab() == std::vector<std::string>{"b"});
  CHECK(result.set.matrix()(0, 0) == 2.0);
  CHECK(result.dropped == 1);

  auto same = Subset(set, set.vocab());
  CHECK(same.set == set);
  CHECK(same.dropped == 0);
}

TEST_CASE("subsets of two sets over shared words align") {
  Rng rng(3);
  EmbeddingSet left(testing::MakeWords(10, "l"), testing::GaussianMatrix(10, 4, rng));
  std::vector<std::string> right_words = {"l0", "l2", "l4", "l6", "l8", "l9",
                                          "r0", "r1", "r2", "r3"};
  EmbeddingSet right(right_words, testing::GaussianMatrix(10, 4, rng));
  std::vector<std::string> shared;
  for (const auto& w : left.vocab()) {
    if (right.Contains(w)) shared.push_back(w);
  }
  REQUIRE(shared.size() == 6);
  auto a = Subset(left, shared);
  auto b = Subset(right, shared);
  CHECK(a.set.size() == 6);
  CHECK(b.set.size() == 6);
  CHECK(a.set.vocab() == b.set.vocab());
  for (std::size_t i = 0; i < 6; ++i) {
    CHECK(a.set.matrix().row(static_cast<Eigen::Index>(i)) ==
          left.matrix().row(static_cast<Eigen::Index>(left.IndexOf(shared[i]))));
  }
}

TEST_CASE("embedding set constructor enforces invariants") {
  CHECK_THROWS_AS(EmbeddingSet({"a"}, RowMatrix{{std::nan("")}}), DataError);
  CHECK_THROWS_AS(EmbeddingSet({"a", "b"}, RowMatrix{{1.0}}), DataError);
  CHECK_THROWS_AS(EmbeddingSet({""}, RowMatrix{{1.0}}), DataError);
  CHECK_THROWS_AS(EmbeddingSet({"a"}, RowMatrix(1, 0)), DataError);
  EmbeddingSet set({"a"}, RowMatrix{{1.0}});
  CHECK_THROWS_AS(set.IndexOf("zz"), UsageError);
}

// Mutated files either load into a valid set or fail with a library error.
TEST_CASE("fuzzed files never yield invalid sets") {
  Rng rng(2024);
  EmbeddingSet base({"alpha", "beta", "gamma"},
                    RowMatrix{{1.5, -2.0}, {0.25, 3.0}, {7.0, 8.0}});
  const std::string seeds[2] = {ToText(base), ToBinary(base)};
  const char alphabet[] = " \n\t0123456789.-+eanif\x7f\x80\xff";
  for (int format = 0; format < 2; ++format) {
    for (int trial = 0; trial < 2000; ++trial) {
      std::string bytes = seeds[format];
      const int edits = 1 + static_cast<int>(rng.Below(4));
      for (int e = 0; e < edits && !bytes.empty(); ++e) {
        const std::size_t pos = rng.Below(bytes.size());
        switch (rng.Below(3)) {
          case 0:
            bytes[pos] = alphabet[rng.Below(sizeof(alphabet) - 1)];
            break;
          case 1:
            bytes.erase(pos, 1 + rng.Below(3));
            break;
          default:
            bytes.insert(pos, 1, alphabet[rng.Below(sizeof(alphabet) - 1)]);
        }
      }
      try {
        auto set = format == 0 ? FromText(bytes) : FromBinary(bytes);
        REQUIRE(set.size() == set.vocab().size());
        std::unordered_set<std::string> unique(set.vocab().begin(), set.vocab().end());
        CHECK(unique.size() == set.size());
        CHECK(set.matrix().allFinite());
        CHECK(static_cast<std::size_t>(set.matrix().rows()) == set.size());
      } catch (const Error&) {
      }
    }
  }
}

}  // namespace
}  // namespace embed_adapt
