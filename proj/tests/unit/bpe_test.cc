/* Copyright 2026 The snmt Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *   http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "doctest.h"

#include <cstdio>

#include "snmt/bpe.h"

using namespace snmt;

TEST_CASE("bpe learns the most frequent pairs") {
  const MergeTable t = bpe_learn({{"low", 5}, {"lower", 2}, {"newest", 6}, {"widest", 3}}, 3);
  REQUIRE(t.size() == 3);
  CHECK(t.merges()[0] == MergeTable::Pair{"e", "s"});
  CHECK(t.merges()[1] == MergeTable::Pair{"es", "t"});
  CHECK(t.rank("e", "s") == 0);
  CHECK(t.rank("x", "y") == -1);
}

TEST_CASE("bpe ties go to the smaller pair") {
  const MergeTable t = bpe_learn({{"ab", 1}, {"cd", 1}}, 1);
  CHECK(t.merges()[0] == MergeTable::Pair{"a", "b"});
}

TEST_CASE("apply and decode") {
  const MergeTable t = bpe_learn({{"lowest", 4}, {"low", 4}}, 10);
  CHECK(bpe_apply("low", t) == std::vector<std::string>{"low"});
  const auto pieces = bpe_apply("slow", t);
  CHECK(pieces.size() > 1);
  CHECK(pieces.back().find(kBpeMarker) == std::string::npos);
  const std::vector<std::string> words = {"slowest", "lo", "wól"};
  const BpeDecoded d = bpe_decode(bpe_apply_sequence(words, t));
  CHECK(d.tokens == words);
  CHECK_FALSE(d.dangling_marker);
  const BpeDecoded dangling = bpe_decode({"lo@@"});
  CHECK(dangling.dangling_marker);
  CHECK(dangling.tokens == std::vector<std::string>{"lo"});
}

TEST_CASE("merge tables round trip through text and files") {
  const MergeTable t = bpe_learn({{"héllo", 3}, {"hélium", 2}}, 5);
  CHECK(MergeTable::from_text(t.to_text()).merges() == t.merges());
  const std::string path = "bpe_test_merges.txt";
  t.save(path);
  CHECK(MergeTable::load(path).merges() == t.merges());
  std::remove(path.c_str());
}
