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

#include "snmt/training.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "snmt/textproc.h"

SNMT_NAMESPACE_BEGIN

void TrainConfig::validate() const {
  if (epochs < 0) throw std::invalid_argument("epochs must be >= 0");
  if (batch_size < 1) throw std::invalid_argument("batch_size must be >= 1");
  if (!(learning_rate > 0)) throw std::invalid_argument("learning_rate must be > 0");
  if (!(decay > 0 && decay <= 1)) throw std::invalid_argument("decay must be in (0, 1]");
  if (!(guided_decay_factor > 0 && guided_decay_factor <= 1))
    throw std::invalid_argument("guided_decay_factor must be in (0, 1]");
  if (guided_weight < 0 || guided_weight > 1) throw std::invalid_argument("guided_weight must be in [0, 1]");
  if (feature_weight < 0) throw std::invalid_argument("feature_weight must be >= 0");
  if (max_grad_norm <= 0) throw std::invalid_argument("max_grad_norm must be > 0");
  if (max_length < 1) throw std::invalid_argument("max_length must be >= 1");
}

BatchLoss compute_loss(Graph& g, const NmtModel& model, const std::vector<const Example*>& batch, double w_ga,
                       double lambda_f) {
  if (batch.empty()) throw std::invalid_argument("compute_loss: empty batch");
  const ModelConfig& cfg = model.config();
  const int B = static_cast<int>(batch.size());
  const int F = static_cast<int>(cfg.target_features.size());

  std::vector<const Sentence*> sources;
  int T = 0;
  long tokens = 0, feature_tokens = 0;
  for (const Example* ex : batch) {
    if (ex->target.ids.empty()) throw std::invalid_argument("compute_loss: empty reference");
    if (static_cast<int>(ex->target.features.size()) != F)
      throw std::invalid_argument("compute_loss: target feature count differs from the model");
    sources.push_back(&ex->source);
    T = std::max(T, ex->target.size() + 1);
    tokens += ex->target.size() + 1;
    feature_tokens += ex->target.size();
  }
  const SourceBatch src = SourceBatch::make(sources, static_cast<int>(cfg.source_features.size()));
  const int S = src.length;

  // Guided alignment weights: each aligned sentence contributes the mean
  // over its aligned rows, averaged over aligned sentences.
  std::vector<Tensor> dense(static_cast<std::size_t>(B));
  std::vector<int> aligned_rows(static_cast<std::size_t>(B), 0);
  int aligned_sentences = 0;
  const bool use_ga = w_ga > 0;
  if (use_ga) {
    for (int b = 0; b < B; ++b) {
      const Example& ex = *batch[static_cast<std::size_t>(b)];
      if (!ex.alignment) continue;
      if (ex.alignment->target_len() != ex.target.size() || ex.alignment->source_len() != ex.source.size())
        throw std::invalid_argument("compute_loss: alignment does not match the sentence pair");
      if (ex.alignment->link_count() == 0) continue;
      dense[static_cast<std::size_t>(b)] = ex.alignment->to_dense();
      for (int t = 0; t < ex.target.size(); ++t)
        if (ex.alignment->fertility(t) > 0) ++aligned_rows[static_cast<std::size_t>(b)];
      ++aligned_sentences;
    }
  }

  NmtModel::Encoded enc = model.encode(g, src);
  std::vector<int> rows(static_cast<std::size_t>(B));
  std::iota(rows.begin(), rows.end(), 0);
  NmtModel::State state = model.initial_state(g, enc, rows);

  Var dec_loss, ga_loss, feat_loss;
  auto accumulate = [](Var& acc, Var v) { acc = acc.valid() ? add(acc, v) : v; };

  for (int t = 0; t < T; ++t) {
    std::vector<int> in_ids(static_cast<std::size_t>(B)), out_ids(static_cast<std::size_t>(B));
    std::vector<Real> w_dec(static_cast<std::size_t>(B), 0);
    std::vector<std::vector<int>> fed(static_cast<std::size_t>(F), std::vector<int>(static_cast<std::size_t>(B), 0));
    for (int b = 0; b < B; ++b) {
      const Sentence& y = batch[static_cast<std::size_t>(b)]->target;
      const int n = y.size();
      in_ids[static_cast<std::size_t>(b)] = t == 0 ? Vocab::kBos : (t - 1 < n ? y.ids[static_cast<std::size_t>(t - 1)] : Vocab::kEos);
      if (t < n) {
        out_ids[static_cast<std::size_t>(b)] = y.ids[static_cast<std::size_t>(t)];
        w_dec[static_cast<std::size_t>(b)] = Real(1) / static_cast<Real>(tokens);
      } else {
        out_ids[static_cast<std::size_t>(b)] = Vocab::kEos;
        if (t == n) w_dec[static_cast<std::size_t>(b)] = Real(1) / static_cast<Real>(tokens);
      }
      // The feature fed at step t is the one predicted at step t - 1,
      // which labels word t - 2.
      for (int k = 0; k < F; ++k)
        if (t >= 2 && t - 2 < n)
          fed[static_cast<std::size_t>(k)][static_cast<std::size_t>(b)] =
              y.features[static_cast<std::size_t>(k)][static_cast<std::size_t>(t - 2)];
    }
    NmtModel::StepOutput step = model.decode_step(g, enc, state, in_ids, fed);
    state = step.state;
    accumulate(dec_loss, pick_nll(step.log_probs, out_ids, w_dec));

    if (use_ga && aligned_sentences > 0) {
      Tensor target = Tensor::matrix(B, S);
      std::vector<Real> w(static_cast<std::size_t>(B), 0);
      bool any = false;
      for (int b = 0; b < B; ++b) {
        const Example& ex = *batch[static_cast<std::size_t>(b)];
        if (dense[static_cast<std::size_t>(b)].empty() || t >= ex.target.size()) continue;
        if (ex.alignment->fertility(t) == 0) continue;
        const Tensor& a = dense[static_cast<std::size_t>(b)];
        for (int s = 0; s < a.cols(); ++s) target.at(b, s) = a.at(t, s);
        w[static_cast<std::size_t>(b)] =
            Real(1) / static_cast<Real>(aligned_rows[static_cast<std::size_t>(b)] * aligned_sentences);
        any = true;
      }
      if (any) accumulate(ga_loss, weighted_sq_error(step.alpha, target, w));
    }

    if (F > 0 && lambda_f > 0 && t >= 1) {
      for (int k = 0; k < F; ++k) {
        const int n_f = cfg.target_features[static_cast<std::size_t>(k)];
        Tensor target = Tensor::matrix(B, n_f);
        std::vector<Real> w(static_cast<std::size_t>(B), 0);
        bool any = false;
        for (int b = 0; b < B; ++b) {
          const Sentence& y = batch[static_cast<std::size_t>(b)]->target;
          if (t - 1 >= y.size()) continue;
          target.at(b, y.features[static_cast<std::size_t>(k)][static_cast<std::size_t>(t - 1)]) = 1;
          w[static_cast<std::size_t>(b)] = Real(1) / static_cast<Real>(feature_tokens);
          any = true;
        }
        if (any) accumulate(feat_loss, weighted_sq_error(step.feature_probs[static_cast<std::size_t>(k)], target, w));
      }
    }
  }

  BatchLoss out;
  out.values.tokens = tokens;
  out.values.l_dec = dec_loss.value()[0];
  out.values.nll_sum = out.values.l_dec * static_cast<double>(tokens);
  out.values.l_ga = ga_loss.valid() ? ga_loss.value()[0] : 0.0;
  out.values.l_feat = feat_loss.valid() ? feat_loss.value()[0] : 0.0;

  Var total = w_ga > 0 ? scale(dec_loss, static_cast<Real>(1 - w_ga)) : dec_loss;
  if (ga_loss.valid()) total = add(total, scale(ga_loss, static_cast<Real>(w_ga)));
  if (feat_loss.valid()) total = add(total, lambda_f == 1 ? feat_loss : scale(feat_loss, static_cast<Real>(lambda_f)));
  out.total = total;
  out.values.l_total = total.value()[0];
  return out;
}

double guided_alignment_loss(const Tensor& alignment, const Tensor& attention) {
  if (!alignment.same_shape(attention) || alignment.rank() != 2)
    throw ShapeError("guided_alignment_loss: shapes differ " + alignment.shape_string() + " vs " +
                     attention.shape_string());
  double total = 0;
  int rows = 0;
  for (int t = 0; t < alignment.rows(); ++t) {
    bool linked = false;
    for (int s = 0; s < alignment.cols(); ++s) linked = linked || alignment.at(t, s) != Real(0);
    if (!linked) continue;
    ++rows;
    for (int s = 0; s < alignment.cols(); ++s) {
      const double d = static_cast<double>(alignment.at(t, s)) - static_cast<double>(attention.at(t, s));
      total += d * d;
    }
  }
  return rows ? total / rows : 0.0;
}

std::string format_epoch_log(const EpochReport& r) {
  std::ostringstream os;
  os.precision(6);
  os << r.epoch << '\t' << r.ppl << '\t' << r.loss.l_dec << '\t' << r.loss.l_ga << '\t' << r.loss.l_feat << '\t'
     << r.learning_rate << '\t' << r.guided_weight << '\t' << r.seconds;
  return os.str();
}

Trainer::Trainer(NmtModel& model, TrainConfig config) : model_(model), config_(std::move(config)) {
  config_.validate();
}

double Trainer::learning_rate_at(int epoch) const {
  double lr = config_.learning_rate;
  for (int e = config_.start_decay_epoch; e <= epoch; ++e) lr *= config_.decay;
  return lr;
}

double Trainer::guided_weight_at(int epoch) const {
  double w = config_.guided_weight;
  if (config_.guided_decay)
    for (int e = 2; e <= epoch; ++e) w *= config_.guided_decay_factor;
  return w;
}

double Trainer::sgd_step(ParameterSet& params, double lr, double max_norm) {
  double sq = 0;
  for (const auto& p : params) {
    if (p.frozen || p.grad.empty()) continue;
    for (std::size_t i = 0; i < p.grad.size(); ++i) sq += static_cast<double>(p.grad[i]) * p.grad[i];
  }
  const double norm = std::sqrt(sq);
  if (!std::isfinite(norm)) throw NumericError("gradient norm is not finite");
  const double factor = norm > max_norm ? max_norm / norm : 1.0;
  const Real step = static_cast<Real>(lr * factor);
  for (auto& p : params) {
    if (p.frozen || p.grad.empty()) continue;
    for (std::size_t i = 0; i < p.value.size(); ++i) p.value[i] -= step * p.grad[i];
    p.apply_mask();
  }
  return norm;
}

std::vector<std::vector<const Example*>> Trainer::make_batches(const std::vector<const Example*>& usable,
                                                               Rng& rng) const {
  std::vector<const Example*> order = usable;
  rng.shuffle(order);
  std::stable_sort(order.begin(), order.end(),
                   [](const Example* a, const Example* b) { return a->source.size() < b->source.size(); });
  std::vector<std::vector<const Example*>> batches;
  for (std::size_t i = 0; i < order.size(); i += static_cast<std::size_t>(config_.batch_size)) {
    const std::size_t end = std::min(order.size(), i + static_cast<std::size_t>(config_.batch_size));
    batches.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(i), order.begin() + static_cast<std::ptrdiff_t>(end));
  }
  rng.shuffle(batches);
  return batches;
}

std::vector<EpochReport> Trainer::train(const std::vector<Example>& corpus, const std::vector<Example>* dev,
                                        const EpochCallback& on_epoch) {
  if (corpus.empty()) throw std::invalid_argument("train: empty corpus");
  std::vector<const Example*> usable;
  for (const auto& ex : corpus)
    if (!ex.source.ids.empty() && !ex.target.ids.empty() && ex.source.size() <= config_.max_length &&
        ex.target.size() <= config_.max_length && ex.source.size() <= model_.config().max_source_length)
      usable.push_back(&ex);
  if (usable.empty()) throw std::invalid_argument("train: no sentence within the length limit");

  Rng rng(config_.seed);
  std::vector<EpochReport> reports;
  stop_requested_ = false;
  for (int epoch = 1; epoch <= config_.epochs && !stop_requested_; ++epoch) {
    const auto start = std::chrono::steady_clock::now();
    EpochReport report;
    report.epoch = epoch;
    report.learning_rate = learning_rate_at(epoch);
    report.guided_weight = guided_weight_at(epoch);
    double ga_sum = 0, feat_sum = 0;
    long batches_seen = 0;
    for (const auto& batch : make_batches(usable, rng)) {
      Graph g(&model_.params(), rng.next_u64());
      g.set_training(true);
      BatchLoss loss = compute_loss(g, model_, batch, report.guided_weight, config_.feature_weight);
      g.backward(loss.total);
      sgd_step(model_.params(), report.learning_rate, config_.max_grad_norm);
      report.loss.nll_sum += loss.values.nll_sum;
      report.loss.tokens += loss.values.tokens;
      ga_sum += loss.values.l_ga;
      feat_sum += loss.values.l_feat;
      ++batches_seen;
    }
    report.loss.l_dec = report.loss.nll_sum / static_cast<double>(report.loss.tokens);
    report.loss.l_ga = ga_sum / static_cast<double>(batches_seen);
    report.loss.l_feat = feat_sum / static_cast<double>(batches_seen);
    report.loss.l_total = report.guided_weight * report.loss.l_ga + (1 - report.guided_weight) * report.loss.l_dec +
                          config_.feature_weight * report.loss.l_feat;
    report.ppl = std::exp(report.loss.l_dec);
    if (dev && !dev->empty()) report.dev_ppl = perplexity(model_, *dev);
    report.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    reports.push_back(report);
    if (on_epoch) on_epoch(report);
  }
  return reports;
}

PerplexityReport evaluate_perplexity(const NmtModel& model, const std::vector<Example>& corpus, int batch_size) {
  if (corpus.empty()) throw std::invalid_argument("perplexity: empty corpus");
  PerplexityReport r;
  for (std::size_t i = 0; i < corpus.size(); i += static_cast<std::size_t>(batch_size)) {
    std::vector<const Example*> batch;
    for (std::size_t j = i; j < std::min(corpus.size(), i + static_cast<std::size_t>(batch_size)); ++j)
      batch.push_back(&corpus[j]);
    Graph g(const_cast<ParameterSet*>(&model.params()));
    g.set_grad_enabled(false);
    BatchLoss loss = compute_loss(g, model, batch, 0.0, 0.0);
    r.nll_sum += loss.values.nll_sum;
    r.tokens += loss.values.tokens;
  }
  r.ppl = std::exp(r.nll_sum / static_cast<double>(r.tokens));
  return r;
}

double perplexity(const NmtModel& model, const std::vector<Example>& corpus) {
  return evaluate_perplexity(model, corpus).ppl;
}

AdaptReport adapt(NmtModel& model, const std::vector<Example>& in_domain, int epochs, TrainConfig config,
                  const std::vector<Example>& in_domain_dev, const std::vector<Example>& generic_dev) {
  AdaptReport report;
  if (!in_domain_dev.empty()) report.in_domain_before = perplexity(model, in_domain_dev);
  if (!generic_dev.empty()) report.generic_before = perplexity(model, generic_dev);
  if (epochs > 0) {
    config.epochs = epochs;
    Trainer trainer(model, config);
    report.epochs = trainer.train(in_domain);
  }
  report.in_domain_after = in_domain_dev.empty() ? 0 : perplexity(model, in_domain_dev);
  report.generic_after = generic_dev.empty() ? 0 : perplexity(model, generic_dev);
  return report;
}

std::vector<std::string> build_multisource_pair(const std::vector<std::string>& source,
                                                const std::vector<std::string>& hypothesis,
                                                const std::string& separator) {
  if (source.empty() || hypothesis.empty()) throw std::invalid_argument("multi-source input needs both sides");
  std::vector<std::string> out = source;
  out.push_back(separator);
  out.insert(out.end(), hypothesis.begin(), hypothesis.end());
  return out;
}

Sentence make_sentence(const Vocab& vocab, const std::vector<std::string>& tokens, int feature_count) {
  if (feature_count < 0 || feature_count > 1) throw std::invalid_argument("only the case feature is supported");
  Sentence s;
  if (feature_count == 0) {
    s.ids = vocab.encode(tokens);
    return s;
  }
  s.features.assign(1, {});
  for (const auto& t : tokens) {
    // Control and placeholder tokens are matched verbatim.
    if (is_control_token(t) || vocab.is_placeholder(vocab.id(t))) {
      s.ids.push_back(vocab.id(t));
      s.features[0].push_back(case_index(CaseValue::kNone));
      continue;
    }
    const CaseValue c = classify_case(t);
    const bool restorable = c != CaseValue::kMixed;
    s.ids.push_back(vocab.id(restorable ? to_lower(t) : t));
    s.features[0].push_back(case_index(c));
  }
  return s;
}

SNMT_NAMESPACE_END
