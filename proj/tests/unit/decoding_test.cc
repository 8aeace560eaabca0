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

#include <cmath>
#include <cstdio>

#include "snmt/decoding.h"
#include "snmt/placeholders.h"
#include "snmt/textproc.h"

using namespace snmt;

namespace {

NmtModel random_model(std::uint64_t seed, const Vocab& v) {
  ModelConfig mc;
  mc.layers = 1;
  mc.rnn_size = 8;
  mc.embed_size = 6;
  mc.dropout = 0;
  NmtModel m(mc, v, v);
  m.initialize(seed, 0.8);
  return m;
}

DecodeInput input_of(const Vocab& v, const std::vector<std::string>& words) {
  DecodeInput in;
  in.sentence.ids = v.encode(words);
  in.tokens = words;
  return in;
}

DecodeOptions options(int beam, int max_length = 8) {
  DecodeOptions o;
  o.beam_size = beam;
  o.max_length = max_length;
  return o;
}

}  // namespace

TEST_CASE("ensemble mean") {
  const auto m = average_distributions({{Real(0.6), Real(0.4)}, {Real(0.2), Real(0.8)}});
  CHECK(m[0] == Real(0.4));
  CHECK(m[1] == Real(0.6));
  const std::vector<Real> p = {Real(0.1), Real(0.7), Real(0.2)};
  CHECK(average_distributions({p, p}) == p);
  CHECK(average_distributions({p, p, p, p}) == p);
  CHECK_THROWS(average_distributions({p, {Real(1)}}));
}

TEST_CASE("ensembles need matching vocabularies") {
  const Vocab a = Vocab::from_tokens({"a"}), b = Vocab::from_tokens({"b"});
  const NmtModel x = random_model(1, a), y = random_model(2, b);
  CHECK_THROWS(Ensemble({&x, &y}));
  CHECK_THROWS(Ensemble(std::vector<const NmtModel*>{}));
}

TEST_CASE("n-best lists are sorted and sized") {
  const Vocab v = Vocab::from_tokens({"a", "b", "c"});
  const NmtModel m = random_model(3, v);
  DecodeOptions o = options(4);
  o.n_best = 3;
  const Translation t = beam_search(Ensemble(m), input_of(v, {"a", "b"}), o);
  REQUIRE(t.nbest.size() == 3);
  for (std::size_t i = 1; i < t.nbest.size(); ++i) CHECK(t.nbest[i - 1].score >= t.nbest[i].score);
  for (const auto& h : t.nbest) {
    CHECK(h.words.size() == h.ids.size());
    CHECK(h.attention.size() == h.ids.size());
    for (const auto& row : h.attention) CHECK(row.size() == 2);
  }
  CHECK(format_nbest(0, t.best()).rfind("0 ||| ", 0) == 0);
  o.n_best = 5;
  CHECK_THROWS(beam_search(Ensemble(m), input_of(v, {"a"}), o));
  CHECK_THROWS(beam_search(Ensemble(m), DecodeInput{}, options(2)));
}

TEST_CASE("max length forces hypotheses to finish") {
  const Vocab v = Vocab::from_tokens({"a", "b"});
  const NmtModel m = random_model(4, v);
  const Translation t = beam_search(Ensemble(m), input_of(v, {"a"}), options(2, 1));
  CHECK(t.best().ids.size() <= 1);
}

TEST_CASE("batched decoding equals sequential decoding") {
  const Vocab v = Vocab::from_tokens({"a", "b", "c", "d"});
  const NmtModel m = random_model(5, v);
  Rng rng(1);
  std::vector<DecodeInput> inputs;
  for (int i = 0; i < 12; ++i) {
    std::vector<std::string> w;
    const int n = 1 + static_cast<int>(rng.below(6));
    for (int j = 0; j < n; ++j) w.push_back(std::string(1, static_cast<char>('a' + rng.below(4))));
    inputs.push_back(input_of(v, w));
  }
  const Ensemble ens(m);
  BatchStats stats;
  const auto batched = batch_translate(ens, inputs, 5, options(3), &stats);
  CHECK(stats.tokens > 0);
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    const Translation one = beam_search(ens, inputs[i], options(3));
    CHECK(batched[i].best().ids == one.best().ids);
    CHECK(batched[i].best().score == one.best().score);
  }
}

TEST_CASE("placeholders are limited to the source") {
  VocabOptions vo;
  vo.placeholders = true;
  const Vocab v = Vocab::build({{"a", "b"}}, vo);
  NmtModel m = random_model(6, v);
  Parameter& bias = m.params().get("gen.b");
  for (int id = 0; id < v.size(); ++id)
    if (v.is_placeholder(id)) bias.value[static_cast<std::size_t>(id)] += 8;
  const std::string num = placeholder_token(EntityType::kNumeric);
  const Translation t = beam_search(Ensemble(m), input_of(v, {"a", num}), options(3));
  int count = 0;
  for (const auto& w : t.best().words) {
    if (is_placeholder_token(w)) CHECK(w == num);
    count += w == num;
  }
  CHECK(count == 1);
  DecodeOptions free = options(3);
  free.constrain_placeholders = false;
  int others = 0;
  for (const auto& w : beam_search(Ensemble(m), input_of(v, {"a", num}), free).best().words)
    others += is_placeholder_token(w) && w != num;
  CHECK(others > 0);
}

TEST_CASE("stupid backoff language model") {
  const NGramLM lm = NGramLM::train({{"a", "b"}, {"a", "c"}}, 2);
  CHECK(lm.order() == 2);
  CHECK(lm.vocab_size() == 3);
  CHECK(lm.count({"a", "b"}) == 1);
  CHECK(lm.count({"a"}) == 2);
  CHECK(lm.score({"a"}, "b") == doctest::Approx(0.5));
  CHECK(lm.score({"c"}, "b") == doctest::Approx(0.4 * 0.25));
  CHECK(lm.score({}, "zzz") == doctest::Approx(1.0 / 7));
  CHECK(lm.log_score({"a"}, "b") == doctest::Approx(std::log(0.5)));
  CHECK_THROWS(NGramLM::train({{"a"}}, 6));
  const std::string path = "lm_test.txt";
  lm.save(path);
  const NGramLM back = NGramLM::load(path);
  CHECK(back.score({"a"}, "c") == lm.score({"a"}, "c"));
  std::remove(path.c_str());
}

TEST_CASE("fusion weights") {
  const Vocab v = Vocab::from_tokens({"a", "b", "c"});
  const NmtModel m = random_model(7, v);
  const NGramLM lm = NGramLM::train({{"c", "c", "c"}, {"c", "b"}}, 2);
  const DecodeInput in = input_of(v, {"a", "b"});
  const Hypothesis pure = beam_search(Ensemble(m), in, options(3)).best();
  DecodeOptions big = options(3);
  big.lm = &lm;
  big.beta = 1e6;
  CHECK(beam_search(Ensemble(m), in, big).best().ids == pure.ids);
}

TEST_CASE("unknown replacement") {
  const std::vector<std::vector<Real>> attention = {{Real(0.9), Real(0.1)}, {Real(0.2), Real(0.8)}};
  CHECK(replace_unknown({"<unk>", "x"}, attention, {"Paris", "is"}) == std::vector<std::string>{"Paris", "x"});
  CHECK(replace_unknown({"y", "<unk>"}, attention, {"Paris", "chat"}, {{"chat", "cat"}}) ==
        std::vector<std::string>{"y", "cat"});
  const std::vector<std::vector<Real>> on_control = {{Real(0.9), Real(0.1)}};
  CHECK(replace_unknown({"<unk>"}, on_control, {"⟦polite:formal⟧", "word"}) == std::vector<std::string>{"word"});
}

TEST_CASE("dictionary files") {
  const std::string path = "dict_test.txt";
  {
    std::FILE* f = std::fopen(path.c_str(), "w");
    std::fputs("chat\tcat\nchien\tdog\n", f);
    std::fclose(f);
  }
  const Dictionary d = load_dictionary(path);
  CHECK(d.at("chien") == "dog");
  std::remove(path.c_str());
}

TEST_CASE("recasing with a predicted case feature") {
  ModelConfig mc;
  mc.layers = 1;
  mc.rnn_size = 4;
  mc.embed_size = 4;
  mc.target_features = {kCaseFeatureSize};
  const Vocab v = Vocab::from_tokens({"paris", "is"});
  NmtModel m(mc, v, v);
  Hypothesis h;
  h.ids = {v.id("paris"), v.id("is")};
  h.words = {"paris", "is"};
  h.features = {{case_index(CaseValue::kCapitalized), case_index(CaseValue::kUpper)}};
  CHECK(output_words(m, h) == std::vector<std::string>{"Paris", "IS"});
}

TEST_CASE("distillation keeps the closest hypothesis") {
  const Vocab v = Vocab::from_tokens({"a", "b", "c"});
  const NmtModel m = random_model(8, v);
  std::vector<Example> corpus(3);
  for (auto& e : corpus) {
    e.source.ids = v.encode({"a", "b"});
    e.target.ids = v.encode({"a", "b"});
  }
  DistillStats stats;
  const auto one = distill_prepare(Ensemble(m), corpus, 1, 6, &stats);
  REQUIRE(one.size() == 3);
  CHECK(stats.reranked == 0);
  const auto best = beam_search(Ensemble(m), input_of(v, {"a", "b"}), options(1, 6)).best();
  CHECK(one[0].target.ids == best.ids);
  const auto five = distill_prepare(Ensemble(m), corpus, 5, 6);
  CHECK(five[0].source.ids == corpus[0].source.ids);
}
