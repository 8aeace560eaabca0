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
#include <fstream>

#include "snmt/serialize.h"
#include "snmt/textproc.h"
#include "snmt/training.h"

using namespace snmt;

namespace {

ModelConfig small_config() {
  ModelConfig mc;
  mc.layers = 2;
  mc.rnn_size = 6;
  mc.embed_size = 5;
  mc.dropout = 0;
  return mc;
}

std::vector<Example> copy_corpus(const Vocab& v, int n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Example> out;
  for (int i = 0; i < n; ++i) {
    Example e;
    const int len = 1 + static_cast<int>(rng.below(5));
    const auto words = static_cast<std::uint64_t>(v.size() - Vocab::kReserved);
    for (int j = 0; j < len; ++j) e.source.ids.push_back(Vocab::kReserved + static_cast<int>(rng.below(words)));
    e.target = e.source;
    out.push_back(e);
  }
  return out;
}

}  // namespace

TEST_CASE("feature vectors") {
  CHECK(feature_vector(4, 2) == std::vector<Real>{0, 0, Real(0.25), 0});
  CHECK(feature_vector(1, 0) == std::vector<Real>{1});
  ModelConfig mc = small_config();
  mc.source_features = {2, 5};
  CHECK(mc.source_feature_width() == 7);
  CHECK(mc.encoder_input_size() == 12);
  CHECK(mc.decoder_input_size() == 5 + 6);
}

TEST_CASE("politeness control tokens") {
  CHECK(politeness_token("formal") == "⟦polite:formal⟧");
  const std::vector<std::string> s = {"hello"};
  CHECK(prepend_control_token(s, "formal") == std::vector<std::string>{"⟦polite:formal⟧", "hello"});
  CHECK(prepend_control_token(s, "neutral") == s);
  CHECK_THROWS(prepend_control_token(s, "rude"));
  CHECK(build_multisource_pair({"a"}, {"b"}) == std::vector<std::string>{"a", kSeparatorToken, "b"});
}

TEST_CASE("invalid configurations are rejected") {
  ModelConfig mc = small_config();
  mc.layers = 0;
  CHECK_THROWS(mc.validate());
  mc = small_config();
  mc.dropout = 1.0;
  CHECK_THROWS(mc.validate());
  TrainConfig tc;
  tc.batch_size = 0;
  CHECK_THROWS(tc.validate());
}

TEST_CASE("encoder rejects sources longer than the limit") {
  ModelConfig mc = small_config();
  mc.max_source_length = 3;
  const Vocab v = Vocab::from_tokens({"a"});
  NmtModel m(mc, v, v);
  m.initialize(1);
  Sentence s;
  s.ids = {4, 4, 4, 4};
  Graph g(&m.params());
  CHECK_THROWS(m.encode(g, SourceBatch::make({&s}, 0)));
}

TEST_CASE("single source position gets all the attention") {
  const Vocab v = Vocab::from_tokens({"a", "b"});
  NmtModel m(small_config(), v, v);
  m.initialize(2);
  Sentence s;
  s.ids = {4};
  Graph g(&m.params());
  const auto enc = m.encode(g, SourceBatch::make({&s}, 0));
  const auto step = m.decode_step(g, enc, m.initial_state(g, enc, {0}), {Vocab::kBos}, {});
  CHECK(step.alpha.value()[0] == 1);
  CHECK(std::isinf(step.log_probs.value()[Vocab::kBos]));
}

TEST_CASE("case features come from the surface") {
  const Vocab v = Vocab::from_tokens({"hello", "world"});
  const Sentence s = make_sentence(v, {"Hello", "WORLD", "x"}, 1);
  CHECK(s.ids == std::vector<int>{v.id("hello"), v.id("world"), Vocab::kUnk});
  CHECK(s.features[0][0] == case_index(CaseValue::kCapitalized));
  CHECK(s.features[0][1] == case_index(CaseValue::kUpper));
  CHECK(make_sentence(v, {"Hello"}, 0).ids == std::vector<int>{Vocab::kUnk});
}

TEST_CASE("loss terms") {
  Tensor eye({2, 2}, std::vector<Real>{1, 0, 0, 1});
  Tensor half({2, 2}, std::vector<Real>{0.5, 0.5, 0.5, 0.5});
  CHECK(guided_alignment_loss(eye, eye) == 0);
  CHECK(guided_alignment_loss(Tensor({1, 1}, std::vector<Real>{1}), Tensor({1, 1}, std::vector<Real>{0.5})) ==
        doctest::Approx(0.25));
  CHECK(guided_alignment_loss(eye, half) == doctest::Approx(0.5));
}

TEST_CASE("schedules") {
  TrainConfig tc;
  tc.guided_weight = 0.5;
  const Vocab v = Vocab::from_tokens({"a"});
  NmtModel m(small_config(), v, v);
  Trainer t(m, tc);
  CHECK(t.guided_weight_at(1) == doctest::Approx(0.5));
  CHECK(t.guided_weight_at(2) == doctest::Approx(0.45));
  CHECK(t.guided_weight_at(3) == doctest::Approx(0.405));
  CHECK(t.learning_rate_at(8) == doctest::Approx(1.0));
  CHECK(t.learning_rate_at(9) == doctest::Approx(0.7));
  CHECK(t.learning_rate_at(10) == doctest::Approx(0.49));
}

TEST_CASE("training lowers perplexity and respects frozen rows") {
  const Vocab v = Vocab::from_tokens({"a", "b", "c", "d"});
  NmtModel m(small_config(), v, v);
  m.initialize(3, 0.3);
  const auto corpus = copy_corpus(v, 100, 1);
  Parameter& emb = m.params().get("src_emb");
  emb.frozen_rows.assign(static_cast<std::size_t>(v.size()), 0);
  emb.frozen_rows[4] = 1;
  std::vector<Real> row(emb.value.data() + 4 * emb.value.cols(), emb.value.data() + 5 * emb.value.cols());
  const double before = perplexity(m, corpus);
  TrainConfig tc;
  tc.epochs = 3;
  tc.batch_size = 8;
  std::vector<EpochReport> seen;
  Trainer(m, tc).train(corpus, &corpus, [&](const EpochReport& r) { seen.push_back(r); });
  CHECK(seen.size() == 3);
  CHECK(seen.back().dev_ppl.has_value());
  CHECK(perplexity(m, corpus) < before);
  for (int c = 0; c < emb.value.cols(); ++c) CHECK(emb.value.at(4, c) == row[static_cast<std::size_t>(c)]);
  CHECK(emb.value.at(5, 0) != 0);
  CHECK(format_epoch_log(seen[0]).find('\t') != std::string::npos);
}

TEST_CASE("uniform predictions give log V") {
  const Vocab v = Vocab::from_tokens({"a", "b"});
  NmtModel m(small_config(), v, v);
  m.initialize(1, 0);
  const auto corpus = copy_corpus(v, 5, 2);
  // </s>, <unk>, a, b are emittable.
  CHECK(std::log(perplexity(m, corpus)) == doctest::Approx(std::log(4.0)));
}

TEST_CASE("adaptation") {
  const Vocab v = Vocab::from_tokens({"a", "b", "c", "d"});
  NmtModel m(small_config(), v, v);
  m.initialize(4, 0.3);
  const auto corpus = copy_corpus(v, 50, 3);
  const std::string before = serialize_model(m);
  const AdaptReport none = adapt(m, corpus, 0, TrainConfig{}, corpus);
  CHECK(serialize_model(m) == before);
  CHECK(none.in_domain_before == none.in_domain_after);
  TrainConfig tc;
  tc.batch_size = 8;
  const AdaptReport one = adapt(m, corpus, 1, tc, corpus);
  CHECK(one.epochs.size() == 1);
  CHECK(one.in_domain_after < one.in_domain_before);
}

TEST_CASE("external embeddings") {
  const Vocab v = Vocab::from_tokens({"a", "b"});
  NmtModel m(small_config(), v, v);
  m.initialize(5);
  const std::string path = "emb_test.txt";
  {
    std::ofstream out(path);
    out << "a 1 2 3 4 5\nzzz 1 1 1 1 1\n";
  }
  CHECK(m.load_external_embeddings(path, true, true) == 1);
  const Parameter& emb = m.params().get("src_emb");
  CHECK(emb.value.at(v.id("a"), 2) == 3);
  CHECK(emb.frozen_rows[static_cast<std::size_t>(v.id("a"))] == 1);
  CHECK(emb.frozen_rows[static_cast<std::size_t>(v.id("b"))] == 0);
  {
    std::ofstream out(path);
    out << "a 1 2\n";
  }
  CHECK_THROWS(m.load_external_embeddings(path, true, false));
  std::remove(path.c_str());
}

TEST_CASE("sparse weights give the dense results") {
  const Vocab v = Vocab::from_tokens({"a", "b", "c"});
  NmtModel m(small_config(), v, v);
  m.initialize(6, 0.5);
  magnitude_prune(m.params(), 0.5);
  const auto corpus = copy_corpus(v, 20, 4);
  const double dense = perplexity(m, corpus);
  m.enable_sparse();
  CHECK(m.sparse_enabled());
  CHECK(perplexity(m, corpus) == dense);
  CHECK(m.sparse_bytes() > 0);
  m.disable_sparse();
  CHECK_FALSE(m.sparse_enabled());
}
