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

#include "snmt/compression.h"
#include "snmt/config.h"
#include "snmt/eval.h"
#include "snmt/serialize.h"
#include "snmt/textproc.h"

using namespace snmt;

namespace {

NmtModel tiny_model() {
  ModelConfig mc;
  mc.layers = 1;
  mc.rnn_size = 4;
  mc.embed_size = 3;
  mc.source_features = {kCaseFeatureSize};
  mc.target_features = {kCaseFeatureSize};
  NmtModel m(mc, Vocab::from_tokens({"a", "b"}), Vocab::from_tokens({"x", "y", "z"}));
  m.initialize(5);
  return m;
}

}  // namespace

TEST_CASE("magnitude pruning") {
  ParameterSet params;
  Parameter& w = params.add("w", {2, 5});
  w.value = Tensor({2, 5}, std::vector<Real>{5, -1, 9, 0.5f, -7, 3, 2, -8, 6, 4});
  params.add("b", {1, 5});
  SUBCASE("half of a known tensor") {
    const PruneReport r = magnitude_prune(params, 0.5);
    CHECK(r.prunable == 10);
    CHECK(r.pruned == 5);
    const std::vector<Real> expected = {5, 0, 9, 0, -7, 0, 0, -8, 6, 0};
    for (std::size_t i = 0; i < 10; ++i) CHECK(w.value[i] == expected[i]);
    CHECK(mask_respected(params));
    CHECK(masked_count(params) == 5);
    CHECK(params.get("b").keep.empty());
  }
  SUBCASE("fraction zero keeps everything") {
    magnitude_prune(params, 0.0);
    CHECK(masked_count(params) == 0);
    CHECK(w.value[1] == -1);
  }
  CHECK(is_prunable(w));
  CHECK_FALSE(is_prunable(params.get("b")));
}

TEST_CASE("class uniform pruning works per tensor") {
  ParameterSet params;
  params.add("big", {2, 2}).value = Tensor({2, 2}, std::vector<Real>{10, 20, 30, 40});
  params.add("small", {2, 2}).value = Tensor({2, 2}, std::vector<Real>{1, 2, 3, 4});
  magnitude_prune(params, 0.5, PruneScope::kClassUniform);
  CHECK(params.get("big").value[0] == 0);
  CHECK(params.get("big").value[3] == 40);
  CHECK(params.get("small").value[3] == 4);
  CHECK(params.get("small").value[0] == 0);
}

TEST_CASE("ccs storage") {
  const Tensor dense({3, 2}, std::vector<Real>{1, 0, 0, 2, 3, 0});
  const SparseCCS s = SparseCCS::from_dense(dense);
  CHECK(s.nnz() == 3);
  CHECK(s.column_pointers() == std::vector<int>{0, 2, 3});
  CHECK(s.row_indices() == std::vector<int>{0, 2, 1});
  std::vector<Real> y(3);
  s.matvec(std::vector<Real>{1, 1}, y);
  CHECK(y == std::vector<Real>{1, 2, 3});
  std::vector<Real> z(2);
  s.vecmat(std::vector<Real>{1, 1, 1}, z);
  CHECK(z == std::vector<Real>{4, 2});
  CHECK(ccs_break_even_sparsity(100, 100) > 0.4);
  CHECK(ccs_break_even_sparsity(100, 100) < 0.6);
}

TEST_CASE("model files round trip") {
  NmtModel m = tiny_model();
  magnitude_prune(m.params(), 0.3);
  m.params().get("src_emb").frozen = true;
  const std::string bytes = serialize_model(m);
  CHECK(bytes.substr(0, 4) == "SNMT");
  const NmtModel back = deserialize_model(bytes);
  CHECK(serialize_model(back) == bytes);
  CHECK(back.config() == m.config());
  CHECK(back.params().get("src_emb").frozen);
  const std::string path = "model_test.snmt";
  save_model(m, path);
  CHECK(serialize_model(load_model(path)) == bytes);
  std::remove(path.c_str());
}

TEST_CASE("model file errors") {
  const std::string bytes = serialize_model(tiny_model());
  auto code_of = [](const std::string& b) {
    try {
      deserialize_model(b);
    } catch (const ModelFormatError& e) {
      return e.code();
    }
    FAIL("no error");
    return ModelFileError::kIo;
  };
  CHECK(code_of("XXXXXXXX") == ModelFileError::kBadMagic);
  CHECK(code_of("SN") == ModelFileError::kTruncated);
  CHECK(code_of(bytes.substr(0, bytes.size() - 3)) == ModelFileError::kTruncated);
  CHECK(code_of(bytes + "x") == ModelFileError::kCorrupt);
  std::string future = bytes;
  future[4] = 9;
  CHECK(code_of(future) == ModelFileError::kUnsupportedVersion);
  CHECK_THROWS_AS(load_model("/nonexistent/model.snmt"), ModelFormatError);
}

TEST_CASE("run configuration") {
  const RunConfig c = RunConfig::parse("# comment\nlayers = 3\n\ncase_feature=yes\nbeam_size=7\n", "test.cfg");
  CHECK(c.get_int("layers") == 3);
  CHECK(c.model_config().layers == 3);
  CHECK(c.model_config().target_features == std::vector<int>{kCaseFeatureSize});
  CHECK(c.feature_count() == 1);
  CHECK(c.decode_options().beam_size == 7);
  CHECK(c.train_config().epochs == 13);
  CHECK(c.get_double("guided_decay_factor") == doctest::Approx(0.9));
  CHECK(config_keys().size() > 20);
  try {
    RunConfig::parse("layers=2\nbogus=1\n", "test.cfg");
    FAIL("accepted an unknown key");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("test.cfg:2") != std::string::npos);
  }
  CHECK_THROWS_AS(RunConfig::parse("layers=two").get_int("layers"), ConfigError);
  CHECK_THROWS_AS(RunConfig::parse("no equals sign"), ConfigError);
}

TEST_CASE("bleu") {
  const TokenLine ref = {"the", "cat", "sat", "on", "the", "mat"};
  CHECK(corpus_bleu({ref}, {ref}).score == doctest::Approx(100));
  CHECK(corpus_bleu({{"dog"}}, {ref}).score == 0);
  const BleuStats s = bleu_stats({"the", "the", "the"}, {"the", "cat"});
  CHECK(s.matches[0] == 1);
  CHECK(s.totals[0] == 3);
  const BleuScore short_hyp = corpus_bleu({{"the", "cat", "sat", "on"}}, {ref});
  CHECK(short_hyp.brevity_penalty == doctest::Approx(std::exp(1 - 6.0 / 4)));
  const TokenLine upper = {"The", "Cat", "sat", "on", "THE", "mat"};
  CHECK(corpus_bleu({upper}, {ref}, true).score == doctest::Approx(100));
  CHECK(corpus_bleu({upper}, {ref}).score < 50);
  CHECK_THROWS(corpus_bleu({ref}, {}));
  CHECK(sentence_bleu(ref, ref) == doctest::Approx(1));
  CHECK(sentence_bleu({"a"}, ref) > 0);
  CHECK(sentence_bleu({"the", "cat"}, ref) > sentence_bleu({"a", "dog"}, ref));
}
