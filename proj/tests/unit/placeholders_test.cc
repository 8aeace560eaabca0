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

#include "snmt/placeholders.h"
#include "snmt/textproc.h"

using namespace snmt;

namespace {
std::vector<std::string> words(const char* s) { return split_whitespace(s); }
}  // namespace

TEST_CASE("placeholder tokens") {
  CHECK(placeholder_tokens().size() == kEntityTypeCount);
  CHECK(placeholder_token(EntityType::kNumeric) == "__ent_numeric");
  for (const auto& t : placeholder_tokens()) {
    CHECK(is_placeholder_token(t));
    CHECK(placeholder_token(*entity_type_from_token(t)) == t);
  }
  CHECK_FALSE(is_placeholder_token("numeric"));
}

TEST_CASE("recognition") {
  const auto spans = recognize(words("it was 25 billion"));
  REQUIRE(spans.size() == 1);
  CHECK(spans[0].type == EntityType::kNumeric);
  CHECK(spans[0].begin == 2);
  CHECK(spans[0].end == 3);
  CHECK(recognize(words("no digits here")).empty());
  const auto url = recognize(words("see http://x.y"));
  REQUIRE(url.size() == 1);
  CHECK(url[0].type == EntityType::kUrl);
}

TEST_CASE("lexicon entries match longest first") {
  const Lexicon lex = Lexicon::parse("New York\t__ent_location\tNueva York\nYork\t__ent_location\n");
  const auto spans = recognize(words("in New York again"), lex);
  REQUIRE(spans.size() == 1);
  CHECK(spans[0].begin == 1);
  CHECK(spans[0].end == 3);
  CHECK(spans[0].translation == "Nueva York");
}

TEST_CASE("substitution and records") {
  const auto tokens = words("25 billion and 3 more");
  const auto sub = substitute(tokens, recognize(tokens));
  CHECK(join(sub.tokens) == "__ent_numeric billion and __ent_numeric more");
  REQUIRE(sub.record.size() == 2);
  CHECK(sub.record[0].value == "25");
  CHECK(sub.record[1].index == 3);
  CHECK(parse_record(format_record(sub.record)) == sub.record);
  std::vector<Substitution> odd = {{0, EntityType::kUrl, "a:b%c\td", "x"}};
  CHECK(parse_record(format_record(odd)) == odd);
  CHECK(substitute(tokens, {}).tokens == tokens);
  CHECK_THROWS(substitute(tokens, {{EntityType::kNumeric, 0, 2, "", ""}, {EntityType::kNumeric, 1, 3, "", ""}}));
}

TEST_CASE("cross validation needs a link and equal types") {
  const std::vector<EntitySpan> src = {{EntityType::kNumeric, 0, 1, "25", ""}};
  const std::vector<EntitySpan> tgt = {{EntityType::kNumeric, 0, 1, "250", ""}};
  const std::vector<EntitySpan> date = {{EntityType::kDate, 0, 1, "250", ""}};
  const auto linked = AlignmentMatrix::from_pharaoh("0-0", 2, 2);
  const auto unlinked = AlignmentMatrix::from_pharaoh("1-1", 2, 2);
  CHECK(cross_validate(src, tgt, linked).size() == 1);
  CHECK(cross_validate(src, tgt, unlinked).empty());
  CHECK(cross_validate(src, date, linked).empty());
  CHECK(cross_validate(src, {}, linked).empty());
}

TEST_CASE("restoration with and without regrouping") {
  const auto sub = substitute(words("1.4 billion"), recognize(words("1.4 billion")));
  const std::vector<std::string> target = {"__ent_numeric", "억"};
  const DigitRegroupRule rule;
  CHECK(join(restore(target, sub.tokens, sub.record, {}, {&rule}).tokens, "") == "14억");
  CHECK(join(restore(target, sub.tokens, sub.record, {}).tokens, "") == "1.4억");
  CHECK(shift_decimal("1.4", 1) == "14");
  CHECK(shift_decimal("25", -1) == "2.5");
  CHECK(shift_decimal("1,500", 2) == "150000");
  const auto missing = restore({"__ent_url"}, sub.tokens, sub.record, {});
  CHECK(missing.unmatched == std::vector<int>{0});
}

TEST_CASE("attention picks among same-type occurrences") {
  const auto tokens = words("3 and 7");
  const auto sub = substitute(tokens, recognize(tokens));
  const std::vector<std::vector<double>> attention = {{0.1, 0.1, 0.8}, {0.9, 0.05, 0.05}};
  const auto r = restore({"__ent_numeric", "__ent_numeric"}, sub.tokens, sub.record, attention);
  CHECK(join(r.tokens) == "7 3");
  CHECK(join(restore({"__ent_numeric", "__ent_numeric"}, sub.tokens, sub.record, {}).tokens) == "3 7");
}

TEST_CASE("pair substitution") {
  const auto r = substitute_pair(words("25 billion"), words("250 억"), AlignmentMatrix::from_pharaoh("0-0 1-1"));
  REQUIRE(r.has_value());
  CHECK(join(r->first.tokens) == "__ent_numeric billion");
  CHECK(join(r->second.tokens) == "__ent_numeric 억");
  CHECK_FALSE(substitute_pair(words("hello"), words("bonjour"), AlignmentMatrix::from_pharaoh("0-0")).has_value());
}
