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

#include "snmt/aligner.h"
#include "snmt/vocab.h"

using namespace snmt;

TEST_CASE("vocabulary layout") {
  VocabOptions opt;
  opt.control_tokens = {"⟦polite:formal⟧"};
  opt.placeholders = true;
  const Vocab v = Vocab::build({{"b", "a", "b"}, {"c", "b", "a"}}, opt);
  CHECK(v.token(Vocab::kPad) == kPadToken);
  CHECK(v.token(Vocab::kUnk) == kUnkToken);
  CHECK(v.token(Vocab::kBos) == kBosToken);
  CHECK(v.token(Vocab::kEos) == kEosToken);
  CHECK(v.token(Vocab::kReserved) == "⟦polite:formal⟧");
  CHECK(v.is_control(Vocab::kReserved));
  CHECK(v.is_placeholder(Vocab::kReserved + 1));
  const int b = v.id("b");
  CHECK(b < v.id("a"));
  CHECK(v.id("a") < v.id("c"));
  CHECK(v.id("zzz") == Vocab::kUnk);
  CHECK(v.decode(v.encode({"a", "q"})) == std::vector<std::string>{"a", kUnkToken});
  const auto mask = v.emittable_mask();
  CHECK(mask[Vocab::kPad] == 0);
  CHECK(mask[Vocab::kBos] == 0);
  CHECK(mask[Vocab::kReserved] == 0);
  CHECK(mask[Vocab::kEos] == 1);
  CHECK(mask[static_cast<std::size_t>(b)] == 1);
}

TEST_CASE("vocabulary size caps and files") {
  VocabOptions opt;
  opt.max_size = 2;
  const Vocab v = Vocab::build({{"x", "x", "y", "y", "z"}}, opt);
  CHECK(v.size() == Vocab::kReserved + 2);
  CHECK_FALSE(v.contains("z"));
  const std::string path = "vocab_test.txt";
  v.save(path);
  CHECK(Vocab::load(path) == v);
  std::remove(path.c_str());
  CHECK(Vocab::from_tokens(v.file_tokens()) == v);
  CHECK(is_control_token("⟦sep⟧"));
  CHECK_FALSE(is_control_token("sep"));
}

TEST_CASE("pharaoh parsing") {
  const auto a = AlignmentMatrix::from_pharaoh("0-0 1-2");
  CHECK(a.source_len() == 2);
  CHECK(a.target_len() == 3);
  CHECK(a.has_link(1, 2));
  CHECK_FALSE(a.has_link(0, 2));
  CHECK(a.to_pharaoh() == "0-0 1-2");
  CHECK_THROWS_AS(AlignmentMatrix::from_pharaoh("0-5", 2, 2, 7), AlignmentParseError);
  try {
    AlignmentMatrix::from_pharaoh("x-1", 2, 2, 7);
  } catch (const AlignmentParseError& e) {
    CHECK(e.line() == 7);
  }
}

TEST_CASE("dense view normalizes by fertility") {
  const AlignmentMatrix a(2, 1, {{0, 0}, {1, 0}});
  const Tensor d = a.to_dense();
  CHECK(d.at(0, 0) == doctest::Approx(0.5));
  CHECK(d.at(0, 1) == doctest::Approx(0.5));
  CHECK(a.fertility(0) == 2);
  CHECK(AlignmentMatrix::from_dense(d) == a);
  CHECK(a.storage_bytes() > 0);
}

TEST_CASE("pharaoh files") {
  const std::vector<AlignmentMatrix> all = {AlignmentMatrix::from_pharaoh("0-0 1-1"),
                                            AlignmentMatrix::from_pharaoh("0-1")};
  const std::string path = "align_test.txt";
  write_pharaoh_file(path, all);
  const auto back = read_pharaoh_file(path);
  REQUIRE(back.size() == 2);
  CHECK(back[0].links() == all[0].links());
  CHECK(back[1].links() == all[1].links());
  std::remove(path.c_str());
}

TEST_CASE("ibm model 1") {
  SUBCASE("single pair") {
    const auto t = ibm1_train({{{"a"}, {"x"}}}, 5);
    CHECK(t.prob("a", "x") == doctest::Approx(1.0));
  }
  SUBCASE("copy language") {
    std::vector<SentencePair> corpus;
    const std::vector<std::string> words = {"a", "b", "c", "d", "e"};
    Rng rng(3);
    for (int i = 0; i < 200; ++i) {
      std::vector<std::string> s;
      for (int j = 0; j < 4; ++j) s.push_back(words[rng.below(5)]);
      corpus.push_back({s, s});
    }
    const auto t = ibm1_train(corpus, 5);
    for (const auto& w : words) CHECK(t.prob(w, w) >= 0.9);
    const auto links = viterbi_align({{"a", "b", "c", "d"}, {"a", "b", "c", "d"}}, t).links();
    CHECK(links == std::vector<AlignmentMatrix::Link>{{0, 0}, {1, 1}, {2, 2}, {3, 3}});
    const auto unknown = viterbi_align({{"p", "q"}, {"r", "s"}}, t).links();
    CHECK(unknown == std::vector<AlignmentMatrix::Link>{{0, 0}, {1, 1}});
    CHECK(ibm1_log_likelihood(corpus, t) > ibm1_log_likelihood(corpus, ibm1_train(corpus, 1)));
  }
  CHECK(diagonal_prior(0, 2, 0, 2, 4.0) == doctest::Approx(1.0));
  CHECK(viterbi_align({{"a"}, {"b"}}, TranslationTable{}).links() == std::vector<AlignmentMatrix::Link>{{0, 0}});
}
