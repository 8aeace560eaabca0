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

#include <string>
#include <unordered_map>
#include <vector>

#include "snmt/model.h"
#include "snmt/training.h"

SNMT_NAMESPACE_BEGIN

/// Models whose output distributions are averaged. Vocabularies must be
/// identical.
class Ensemble {
 public:
  explicit Ensemble(std::vector<const NmtModel*> models);
  explicit Ensemble(const NmtModel& model) : Ensemble(std::vector<const NmtModel*>{&model}) {}

  std::size_t size() const { return models_.size(); }
  const NmtModel& model(std::size_t i) const { return *models_[i]; }
  const NmtModel& front() const { return *models_.front(); }
  const Vocab& target_vocab() const { return models_.front()->target_vocab(); }

 private:
  std::vector<const NmtModel*> models_;
};

/// p_ens(x) = (1/M) sum_m p_m(x), summed in model order.
std::vector<Real> average_distributions(const std::vector<std::vector<Real>>& distributions);

/// Word-level n-gram counts scored with stupid backoff (factor 0.4).
/// Sentences are counted without boundary tokens.
class NGramLM {
 public:
  static constexpr double kBackoff = 0.4;

  static NGramLM train(const std::vector<std::vector<std::string>>& corpus, int order);

  int order() const { return order_; }
  std::size_t vocab_size() const { return unigrams_; }
  /// Stupid-backoff score S(word | context); only the last order-1
  /// context words are used. Unseen words get 1 / (N + V).
  double score(const std::vector<std::string>& context, const std::string& word) const;
  double log_score(const std::vector<std::string>& context, const std::string& word) const;
  long long count(const std::vector<std::string>& ngram) const;

  void save(const std::string& path) const;
  static NGramLM load(const std::string& path);

 private:
  double score_from(const std::vector<std::string>& context, std::size_t begin, const std::string& word) const;

  int order_ = 1;
  long long total_ = 0;
  std::size_t unigrams_ = 0;
  std::unordered_map<std::string, long long> counts_;
  /// Summed counts of the n-grams that extend a history.
  std::unordered_map<std::string, long long> history_totals_;
};

/// Source word to target word.
using Dictionary = std::unordered_map<std::string, std::string>;
/// "source<TAB>target" lines.
Dictionary load_dictionary(const std::string& path);

struct DecodeOptions {
  int beam_size = 5;
  /// Maximum number of output tokens before a hypothesis is force-finished.
  int max_length = 100;
  int n_best = 1;
  /// Placeholder tokens may only be emitted as often as they occur in the
  /// source.
  bool constrain_placeholders = true;
  /// Shallow fusion: log p_LM + beta * log p_NMT over the NMT top-K
  /// candidates of each hypothesis.
  const NGramLM* lm = nullptr;
  double beta = 1.0;
  /// Candidate words injected when the NMT favours <unk>; ranked by the LM
  /// term alone.
  const Dictionary* dictionary = nullptr;
};

struct Hypothesis {
  std::vector<int> ids;
  /// Surface per position; differs from the vocabulary for injected words.
  std::vector<std::string> words;
  /// Attention over the source at each emitted position.
  std::vector<std::vector<Real>> attention;
  /// Predicted target feature values, [feature][position].
  std::vector<std::vector<int>> features;
  double score = 0;
  bool finished = false;
  /// Reached max_length without emitting </s>.
  bool forced = false;
};

struct Translation {
  std::vector<Hypothesis> nbest;
  const Hypothesis& best() const { return nbest.front(); }
};

/// Source side of one decode request. `tokens` (optional) are the source
/// surfaces used for dictionary lookups and copies.
struct DecodeInput {
  Sentence sentence;
  std::vector<std::string> tokens;
};

/// Beam search for a group of sentences decoded together. Scores are sums
/// of token log probabilities without length normalization; ties go to the
/// smaller token id, then the earlier parent.
std::vector<Translation> decode_group(const Ensemble& ensemble, const std::vector<const DecodeInput*>& inputs,
                                      const DecodeOptions& options);

Translation beam_search(const Ensemble& ensemble, const DecodeInput& input, const DecodeOptions& options);

struct BatchStats {
  double seconds = 0;
  long tokens = 0;
  double tokens_per_second() const { return seconds > 0 ? static_cast<double>(tokens) / seconds : 0.0; }
};

/// Sorts by source length, decodes groups of `batch_size`, and returns the
/// results in input order.
std::vector<Translation> batch_translate(const Ensemble& ensemble, const std::vector<DecodeInput>& inputs,
                                         int batch_size, const DecodeOptions& options, BatchStats* stats = nullptr);

/// Replaces each <unk> by the dictionary translation of the most attended
/// source word, or by the word itself. Control tokens are never copied.
std::vector<std::string> replace_unknown(const std::vector<std::string>& target,
                                         const std::vector<std::vector<Real>>& attention,
                                         const std::vector<std::string>& source, const Dictionary& dictionary = {});

/// "idx ||| tokens ||| score"
std::string format_nbest(int index, const Hypothesis& hypothesis);

/// Recases hypothesis words with predicted case features when the model has
/// exactly one target feature.
std::vector<std::string> output_words(const NmtModel& model, const Hypothesis& hypothesis);

struct DistillStats {
  /// Sentences whose pick is not the teacher's best hypothesis.
  int reranked = 0;
  int skipped = 0;
};

/// For every source, decodes an n-best list with the teacher and keeps the
/// hypothesis with the highest smoothed sentence BLEU against the reference.
std::vector<Example> distill_prepare(const Ensemble& teacher, const std::vector<Example>& corpus, int n_best,
                                     int max_length, DistillStats* stats = nullptr);

SNMT_NAMESPACE_END
