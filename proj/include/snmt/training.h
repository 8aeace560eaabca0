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
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "snmt/aligner.h"
#include "snmt/model.h"

SNMT_NAMESPACE_BEGIN

/// A training pair. Target ids exclude <s> and </s>.
struct Example {
  Sentence source;
  Sentence target;
  std::optional<AlignmentMatrix> alignment;
};

struct TrainConfig {
  int epochs = 13;
  int batch_size = 64;
  double learning_rate = 1.0;
  double decay = 0.7;
  int start_decay_epoch = 9;
  double max_grad_norm = 5.0;
  int max_length = 50;
  std::uint64_t seed = 1;
  /// Guided alignment weight w_ga and its per-epoch decay.
  double guided_weight = 0.0;
  bool guided_decay = true;
  double guided_decay_factor = 0.9;
  /// Weight of the target feature loss.
  double feature_weight = 1.0;

  void validate() const;
};

struct LossBreakdown {
  double l_dec = 0;
  double l_ga = 0;
  double l_feat = 0;
  double l_total = 0;
  /// Summed NLL and number of predicted tokens, </s> included.
  double nll_sum = 0;
  long tokens = 0;
};

struct BatchLoss {
  Var total;
  LossBreakdown values;
};

/// Teacher-forced loss of one batch:
///   L_total = w_ga * L_ga + (1 - w_ga) * L_dec + lambda_f * L_feat
/// L_dec is the mean NLL per target token, L_ga the per-sentence mean of
/// (1/T) sum_t sum_s (A_ts - alpha_ts)^2 over aligned target rows, L_feat the
/// mean squared error of the feature distributions against one-hot targets.
BatchLoss compute_loss(Graph& g, const NmtModel& model, const std::vector<const Example*>& batch, double w_ga,
                       double lambda_f);

/// Reference form of the guided alignment loss on dense T x S matrices.
/// Rows of A without links are skipped.
double guided_alignment_loss(const Tensor& alignment, const Tensor& attention);

struct EpochReport {
  int epoch = 0;
  double ppl = 0;
  LossBreakdown loss;
  double learning_rate = 0;
  double guided_weight = 0;
  double seconds = 0;
  /// Dev perplexity, when a dev set is given.
  std::optional<double> dev_ppl;
};

/// "epoch ppl L_dec L_ga L_feat lr w_ga seconds", tab-separated.
std::string format_epoch_log(const EpochReport& report);

/// Plain SGD with gradient norm clipping, learning rate decay and guided
/// alignment weight decay.
class Trainer {
 public:
  using EpochCallback = std::function<void(const EpochReport&)>;

  Trainer(NmtModel& model, TrainConfig config);

  std::vector<EpochReport> train(const std::vector<Example>& corpus, const std::vector<Example>* dev = nullptr,
                                 const EpochCallback& on_epoch = {});
  /// Ends training after the current epoch; meant for epoch callbacks.
  void stop() { stop_requested_ = true; }

  /// Learning rate and guided weight in effect at a 1-based epoch.
  double learning_rate_at(int epoch) const;
  double guided_weight_at(int epoch) const;

  /// One SGD update from the gradients in the registry. Returns the
  /// gradient norm before clipping.
  static double sgd_step(ParameterSet& params, double lr, double max_norm);

 private:
  std::vector<std::vector<const Example*>> make_batches(const std::vector<const Example*>& usable, Rng& rng) const;

  NmtModel& model_;
  TrainConfig config_;
  bool stop_requested_ = false;
};

/// Mean NLL, token count and perplexity over a corpus with dropout off.
struct PerplexityReport {
  double nll_sum = 0;
  long tokens = 0;
  double ppl = 0;
};
PerplexityReport evaluate_perplexity(const NmtModel& model, const std::vector<Example>& corpus, int batch_size = 64);
double perplexity(const NmtModel& model, const std::vector<Example>& corpus);

struct AdaptReport {
  double in_domain_before = 0;
  double in_domain_after = 0;
  double generic_before = 0;
  double generic_after = 0;
  std::vector<EpochReport> epochs;
};

/// Continued training on in-domain data with the original vocabulary and a
/// fresh learning rate. Dev sets may be empty.
AdaptReport adapt(NmtModel& model, const std::vector<Example>& in_domain, int epochs, TrainConfig config,
                  const std::vector<Example>& in_domain_dev = {}, const std::vector<Example>& generic_dev = {});

/// source ++ [separator] ++ hypothesis.
std::vector<std::string> build_multisource_pair(const std::vector<std::string>& source,
                                                const std::vector<std::string>& hypothesis,
                                                const std::string& separator = kSeparatorToken);

/// Tokens to ids, with case features from the surface when the model has
/// features. Tokens are lowercased when a case feature is present.
Sentence make_sentence(const Vocab& vocab, const std::vector<std::string>& tokens, int feature_count);

SNMT_NAMESPACE_END
