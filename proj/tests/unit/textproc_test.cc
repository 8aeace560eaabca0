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

#include "snmt/textproc.h"

using namespace snmt;

TEST_CASE("tokenize splits words, numbers and punctuation") {
  const auto t = tokenize("Hello, world! It costs 1,000.50 dollars.");
  const std::vector<std::string> expected = {"Hello", ",", "world", "!", "It", "costs", "1,000.50", "dollars", "."};
  CHECK(surfaces(t) == expected);
  CHECK(t[1].joiner_left);
  CHECK(t[0].joiner_right);
  CHECK(t[6].protected_as == "__ent_numeric");
  CHECK(t[0].case_value == CaseValue::kCapitalized);
}

TEST_CASE("urls are kept whole") {
  const auto t = tokenize("see https://example.com/a?b=1 now");
  REQUIRE(t.size() == 3);
  CHECK(t[1].surface == "https://example.com/a?b=1");
  CHECK(t[1].protected_as == "__ent_url");
}

TEST_CASE("detokenize restores the original text") {
  for (const char* s : {"a  b\tc\n", "  leading", "x(y)z", "Ça va? Très bien!", "東京 タワー", "a - b -- c", "e.g. U.S."})
    CHECK(detokenize(tokenize(s)) == s);
  CHECK(tokenize("   ").empty());
}

TEST_CASE("joiner notation round trips through text") {
  const auto t = tokenize("don't stop.");
  const std::string line = format_tokens(t);
  CHECK(line.find(kJoinerMarker) != std::string::npos);
  CHECK(detokenize(parse_tokens(line)) == "don't stop.");
}

TEST_CASE("case classes") {
  CHECK(classify_case("hello") == CaseValue::kLower);
  CHECK(classify_case("Hello") == CaseValue::kCapitalized);
  CHECK(classify_case("HELLO") == CaseValue::kUpper);
  CHECK(classify_case("eBay") == CaseValue::kMixed);
  CHECK(classify_case("A") == CaseValue::kCapitalized);
  CHECK(classify_case("42") == CaseValue::kNone);
  CHECK(classify_case("ÉCOLE") == CaseValue::kUpper);
  CHECK(to_lower("ÉCOLE") == "école");
  CHECK(restore_case("école", CaseValue::kCapitalized) == "École");
}

TEST_CASE("case labels and indices") {
  for (CaseValue v : {CaseValue::kLower, CaseValue::kCapitalized, CaseValue::kUpper, CaseValue::kMixed,
                      CaseValue::kNone}) {
    CHECK(case_from_label(case_label(v)) == v);
    CHECK(case_from_index(case_index(v)) == v);
    CHECK(case_index(v) < kCaseFeatureSize);
  }
  CHECK(case_index(CaseValue::kNone) == 0);
}

TEST_CASE("case split and restore") {
  const auto tokens = tokenize("The NASA iPhone and école");
  const CaseSplit split = case_split(tokens);
  CHECK(split.tokens[0].surface == "the");
  CHECK(split.tokens[1].surface == "nasa");
  CHECK(split.tokens[2].surface == "iPhone");
  CHECK(surfaces(case_restore(split.tokens, split.cases)) == surfaces(tokens));
  CHECK_THROWS(case_restore(split.tokens, {}));
}

TEST_CASE("utf8 helpers") {
  CHECK(is_valid_utf8("héllo"));
  CHECK_FALSE(is_valid_utf8("\xff"));
  std::string s;
  append_utf8(s, U'😀');
  CHECK(decode_utf8(s) == std::vector<char32_t>{U'😀'});
  CHECK(split_whitespace("  a \t b ") == std::vector<std::string>{"a", "b"});
  CHECK(join({"a", "b"}, "-") == "a-b");
}
