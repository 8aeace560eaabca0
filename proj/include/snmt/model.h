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

#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "snmt/compression.h"
#include "snmt/graph.h"
#include "snmt/ops.h"
#include "snmt/vocab.h"

SNMT_NAMESPACE_BEGIN

struct ModelConfig {
  int layers = 2;
  int rnn_size = 500;
  int embed_size = 500;
  bool bidirectional = true;
  double dropout = 0.3;
  /// Number of values of each word feature.
  std::vector<int> source_features;
  std::vector<int> target_features;
  int max_source_length = 250;

  void validate() const;
  int source_feature_width() const;
  int target_feature_width() const;
  /// Size of the first encoder layer input.
  int encoder_input_size() const { return embed_size + source_feature_width(); }
  /// Size of the first decoder layer input: embedding, target features and
  /// the input feed.
  int decoder_input_size() const { return embed_size + target_feature_width() + rnn_size; }
  bool operator==(const ModelConfig& other) const = default;
};

/// x in R^{n_f} with x[index] = 1 / n_f and zeros elsewhere.
std::vector<Real> feature_vector(int n_f, int index);

inline constexpr const char* kPolitenessModes[] = {"formal", "informal", "neutral"};
/// "⟦polite:formal⟧" and so on.
std::string politeness_token(const std::string& mode);
std::vector<std::string> politeness_tokens();
/// Prepends the control token of a politeness mode. The neutral mode
/// leaves the sentence unchanged.
std::vector<std::string> prepend_control_token(const std::vector<std::string>& tokens, const std::string& mode);

/// Token ids of one side of a sentence pair with per-feature values
/// (features[k][position]).
struct Sentence {
  std::vector<int> ids;
  std::vector<std::vector<int>> features;
  int size() const { return static_cast<int>(ids.size()); }
};

/// Right-padded source side of a batch.
struct SourceBatch {
  int batch = 0;
  int length = 0;
  std::vector<int> lengths;
  std::vector<int> ids;
  std::vector<std::vector<int>> features;
  std::vector<std::uint8_t> mask;

  static SourceBatch make(const std::vector<const Sentence*>& sentences, int feature_count);
};

class NmtModel {
 public:
  NmtModel(ModelConfig config, Vocab source_vocab, Vocab target_vocab);

  /// Uniform init in [-0.1, 0.1] in registration order.
  void initialize(std::uint64_t seed, Real range = Real(0.1));

  const ModelConfig& config() const { return config_; }
  ParameterSet& params() { return params_; }
  const ParameterSet& params() const { return params_; }
  const Vocab& source_vocab() const { return source_vocab_; }
  const Vocab& target_vocab() const { return target_vocab_; }

  struct Encoded {
    /// [batch, length, rnn_size]
    Var keys;
    std::vector<std::uint8_t> mask;
    int batch = 0;
    int length = 0;
    /// Per layer, batch x rnn_size.
    std::vector<Var> final_h;
    std::vector<Var> final_c;
  };

  struct State {
    std::vector<Var> h;
    std::vector<Var> c;
    /// Previous attentional hidden state; zeros at the first step.
    Var feed;
    /// Sentence of each row.
    std::vector<int> row_batch;
    int rows() const { return static_cast<int>(row_batch.size()); }
  };

  struct StepOutput {
    /// rows x target vocab; disallowed ids are -inf.
    Var log_probs;
    /// rows x source length.
    Var alpha;
    /// Per target feature, rows x n_f.
    std::vector<Var> feature_probs;
    State state;
  };

  /// Embedding rows followed by the feature vectors of every position.
  Var embed_with_features(Graph& g, bool source, const std::vector<int>& ids,
                          const std::vector<std::vector<int>>& features) const;

  Encoded encode(Graph& g, const SourceBatch& batch) const;
  /// Decoder state for the given rows, each starting from the final encoder
  /// states of its sentence.
  State initial_state(Graph& g, const Encoded& enc, const std::vector<int>& row_batch) const;
  /// One decoder step. `features[k][row]` are the fed target feature values.
  /// `vocab_mask` is either one row shared by all rows or rows x vocab;
  /// empty means the emittable mask.
  StepOutput decode_step(Graph& g, const Encoded& enc, const State& state, const std::vector<int>& ids,
                         const std::vector<std::vector<int>>& features,
                         const std::vector<std::uint8_t>& vocab_mask = {}) const;
  /// Keeps rows of a state in the given order.
  static State select(Graph& g, const State& state, const std::vector<int>& rows);

  /// Overwrites embedding rows of words found in a "word v1 ... vd" file.
  /// Returns the number of rows loaded.
  int load_external_embeddings(const std::string& path, bool source, bool freeze);

  /// Runs weight products through compressed column storage. The sparse
  /// copies are rebuilt from the current weights.
  void enable_sparse();
  void disable_sparse() { sparse_.clear(); }
  bool sparse_enabled() const { return !sparse_.empty(); }
  std::size_t sparse_bytes() const;
  std::size_t dense_weight_bytes() const;

  /// Mask of target ids the generator may emit.
  const std::vector<std::uint8_t>& emittable() const { return emittable_; }

 private:
  void register_parameters();
  Var linear(Graph& g, Var x, const std::string& weight) const;
  std::pair<Var, Var> lstm(Graph& g, const std::string& prefix, Var x, Var h, Var c) const;

  ModelConfig config_;
  Vocab source_vocab_;
  Vocab target_vocab_;
  ParameterSet params_;
  std::vector<std::uint8_t> emittable_;
  std::map<std::string, SparseCCS> sparse_;
};

SNMT_NAMESPACE_END
