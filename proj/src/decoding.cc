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

#include "snmt/decoding.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "snmt/eval.h"
#include "snmt/placeholders.h"
#include "snmt/textproc.h"

SNMT_NAMESPACE_BEGIN

Ensemble::Ensemble(std::vector<const NmtModel*> models) : models_(std::move(models)) {
  if (models_.empty()) throw std::invalid_argument("ensemble: no models");
  for (const NmtModel* m : models_) {
    if (m == nullptr) throw std::invalid_argument("ensemble: null model");
    if (!(m->target_vocab() == models_.front()->target_vocab()) ||
        !(m->source_vocab() == models_.front()->source_vocab()))
      throw std::invalid_argument("ensemble: models must share vocabularies");
    if (m->config().source_features != models_.front()->config().source_features ||
        m->config().target_features != models_.front()->config().target_features)
      throw std::invalid_argument("ensemble: models must share word features");
  }
}

std::vector<Real> average_distributions(const std::vector<std::vector<Real>>& distributions) {
  if (distributions.empty()) throw std::invalid_argument("average_distributions: empty input");
  std::vector<Real> out(distributions.front().size(), Real(0));
  for (const auto& d : distributions) {
    if (d.size() != out.size()) throw std::invalid_argument("average_distributions: size mismatch");
    for (std::size_t i = 0; i < d.size(); ++i) out[i] += d[i];
  }
  const Real m = static_cast<Real>(distributions.size());
  for (Real& v : out) v /= m;
  return out;
}

// ---------------------------------------------------------------------------
// N-gram language model

namespace {

constexpr char kKeySep = '\x1f';

std::string ngram_key(const std::vector<std::string>& words, std::size_t begin, std::size_t end) {
  std::string key;
  for (std::size_t i = begin; i < end; ++i) {
    if (i > begin) key.push_back(kKeySep);
    key += words[i];
  }
  return key;
}

}  // namespace

NGramLM NGramLM::train(const std::vector<std::vector<std::string>>& corpus, int order) {
  if (order < 1 || order > 5) throw std::invalid_argument("language model order must be in [1, 5]");
  NGramLM lm;
  lm.order_ = order;
  for (const auto& sentence : corpus) {
    for (std::size_t i = 0; i < sentence.size(); ++i) {
      for (int n = 1; n <= order && i + static_cast<std::size_t>(n) <= sentence.size(); ++n) {
        const std::size_t end = i + static_cast<std::size_t>(n);
        ++lm.counts_[ngram_key(sentence, i, end)];
        if (n >= 2) ++lm.history_totals_[ngram_key(sentence, i, end - 1)];
      }
      ++lm.total_;
    }
  }
  for (const auto& [key, c] : lm.counts_)
    if (key.find(kKeySep) == std::string::npos) ++lm.unigrams_;
  return lm;
}

long long NGramLM::count(const std::vector<std::string>& ngram) const {
  auto it = counts_.find(ngram_key(ngram, 0, ngram.size()));
  return it == counts_.end() ? 0 : it->second;
}

double NGramLM::score_from(const std::vector<std::string>& context, std::size_t begin,
                           const std::string& word) const {
  if (begin >= context.size()) {
    auto it = counts_.find(word);
    if (it == counts_.end() || total_ == 0)
      return 1.0 / (static_cast<double>(total_) + static_cast<double>(unigrams_) + (total_ == 0 ? 1.0 : 0.0));
    return static_cast<double>(it->second) / static_cast<double>(total_);
  }
  const std::string history = ngram_key(context, begin, context.size());
  auto full = counts_.find(history + kKeySep + word);
  if (full != counts_.end()) {
    auto h = history_totals_.find(history);
    return static_cast<double>(full->second) / static_cast<double>(h->second);
  }
  return kBackoff * score_from(context, begin + 1, word);
}

double NGramLM::score(const std::vector<std::string>& context, const std::string& word) const {
  const std::size_t keep = static_cast<std::size_t>(order_ - 1);
  const std::size_t begin = context.size() > keep ? context.size() - keep : 0;
  return score_from(context, begin, word);
}

double NGramLM::log_score(const std::vector<std::string>& context, const std::string& word) const {
  return std::log(score(context, word));
}

void NGramLM::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "#snmt-lm-v1 " << order_ << "\n";
  std::vector<std::pair<std::string, long long>> sorted(counts_.begin(), counts_.end());
  std::sort(sorted.begin(), sorted.end());
  for (auto [key, c] : sorted) {
    std::replace(key.begin(), key.end(), kKeySep, ' ');
    out << c << '\t' << key << '\n';
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

NGramLM NGramLM::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::string line;
  if (!std::getline(in, line) || line.rfind("#snmt-lm-v1 ", 0) != 0)
    throw std::runtime_error(path + ": not a language model file");
  NGramLM lm;
  lm.order_ = std::stoi(line.substr(12));
  if (lm.order_ < 1 || lm.order_ > 5) throw std::runtime_error(path + ": bad order");
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) throw std::runtime_error(path + ":" + std::to_string(line_no) + ": missing tab");
    const long long c = std::stoll(line.substr(0, tab));
    const std::vector<std::string> words = split_whitespace(line.substr(tab + 1));
    if (words.empty() || static_cast<int>(words.size()) > lm.order_ || c <= 0)
      throw std::runtime_error(path + ":" + std::to_string(line_no) + ": bad n-gram");
    lm.counts_[ngram_key(words, 0, words.size())] += c;
    if (words.size() == 1) {
      lm.total_ += c;
      ++lm.unigrams_;
    } else {
      lm.history_totals_[ngram_key(words, 0, words.size() - 1)] += c;
    }
  }
  return lm;
}

Dictionary load_dictionary(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  Dictionary dict;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos || tab == 0 || tab + 1 >= line.size())
      throw std::runtime_error(path + ":" + std::to_string(line_no) + ": expected source<TAB>target");
    dict.emplace(line.substr(0, tab), line.substr(tab + 1));
  }
  return dict;
}

// ---------------------------------------------------------------------------
// Beam search

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

struct Candidate {
  double score;
  int token;
  int parent;
  /// Surface of an injected dictionary word; empty for vocabulary tokens.
  std::string injected;
};

bool better(const Candidate& a, const Candidate& b) {
  if (a.score != b.score) return a.score > b.score;
  if (a.token != b.token) return a.token < b.token;
  if (a.parent != b.parent) return a.parent < b.parent;
  return a.injected < b.injected;
}

struct SentenceSearch {
  const DecodeInput* input = nullptr;
  std::vector<Hypothesis> live;
  std::vector<Hypothesis> finished;
  /// Remaining uses per placeholder target id.
  std::vector<std::pair<int, int>> placeholder_budget;
  bool done = false;
};

int argmax(std::span<const Real> row) {
  int best = 0;
  for (std::size_t i = 1; i < row.size(); ++i)
    if (row[i] > row[static_cast<std::size_t>(best)]) best = static_cast<int>(i);
  return best;
}

std::string source_token(const Ensemble& ens, const DecodeInput& in, std::size_t pos) {
  if (pos < in.tokens.size()) return in.tokens[pos];
  return ens.front().source_vocab().token(in.sentence.ids[pos]);
}

}  // namespace

std::vector<Translation> decode_group(const Ensemble& ensemble, const std::vector<const DecodeInput*>& inputs,
                                      const DecodeOptions& options) {
  if (options.beam_size < 1) throw std::invalid_argument("beam_size must be >= 1");
  if (options.max_length < 1) throw std::invalid_argument("max_length must be >= 1");
  if (options.n_best < 1 || options.n_best > options.beam_size)
    throw std::invalid_argument("n_best must be in [1, beam_size]");
  if (inputs.empty()) return {};
  for (const DecodeInput* in : inputs)
    if (in->sentence.ids.empty()) throw std::invalid_argument("cannot decode an empty source");

  const std::size_t M = ensemble.size();
  const NmtModel& first = ensemble.front();
  const Vocab& tv = ensemble.target_vocab();
  const int V = tv.size();
  const int F = static_cast<int>(first.config().target_features.size());
  const int K = options.beam_size;
  const bool fusion = options.lm != nullptr;

  std::vector<const Sentence*> sentences;
  for (const DecodeInput* in : inputs) sentences.push_back(&in->sentence);
  const SourceBatch batch = SourceBatch::make(sentences, static_cast<int>(first.config().source_features.size()));

  std::vector<Graph> graphs;
  graphs.reserve(M);
  std::vector<NmtModel::Encoded> encoded;
  std::vector<NmtModel::State> states;
  std::vector<int> start_rows(inputs.size());
  std::iota(start_rows.begin(), start_rows.end(), 0);
  for (std::size_t m = 0; m < M; ++m) {
    graphs.emplace_back(const_cast<ParameterSet*>(&ensemble.model(m).params()));
    graphs.back().set_grad_enabled(false);
    encoded.push_back(ensemble.model(m).encode(graphs.back(), batch));
    states.push_back(ensemble.model(m).initial_state(graphs.back(), encoded.back(), start_rows));
  }

  std::vector<SentenceSearch> search(inputs.size());
  for (std::size_t b = 0; b < inputs.size(); ++b) {
    SentenceSearch& s = search[b];
    s.input = inputs[b];
    Hypothesis root;
    root.features.assign(static_cast<std::size_t>(F), {});
    s.live.push_back(std::move(root));
    if (options.constrain_placeholders) {
      std::map<int, int> counts;
      for (std::size_t p = 0; p < inputs[b]->sentence.ids.size(); ++p) {
        const std::string tok = source_token(ensemble, *inputs[b], p);
        if (is_placeholder_token(tok) && tv.contains(tok)) ++counts[tv.id(tok)];
      }
      s.placeholder_budget.assign(counts.begin(), counts.end());
    }
  }
  std::vector<int> placeholder_ids;
  for (int id = 0; id < V; ++id)
    if (tv.is_placeholder(id)) placeholder_ids.push_back(id);

  const std::vector<std::uint8_t>& emittable = first.emittable();
  // Start of the previous step's nodes in each graph.
  std::vector<int> previous_step(M);
  for (std::size_t m = 0; m < M; ++m) previous_step[m] = static_cast<int>(graphs[m].size());

  for (int t = 0; t < options.max_length; ++t) {
    // Rows of the current step, sentence by sentence.
    std::vector<std::pair<int, int>> row_of;  // (sentence, live index)
    for (std::size_t b = 0; b < search.size(); ++b)
      if (!search[b].done)
        for (std::size_t h = 0; h < search[b].live.size(); ++h)
          row_of.emplace_back(static_cast<int>(b), static_cast<int>(h));
    if (row_of.empty()) break;
    const int R = static_cast<int>(row_of.size());

    std::vector<int> ids(static_cast<std::size_t>(R));
    std::vector<std::vector<int>> fed(static_cast<std::size_t>(F), std::vector<int>(static_cast<std::size_t>(R), 0));
    std::vector<std::uint8_t> mask;
    if (options.constrain_placeholders && !placeholder_ids.empty()) mask.reserve(static_cast<std::size_t>(R) * V);
    for (int r = 0; r < R; ++r) {
      const auto [b, h] = row_of[static_cast<std::size_t>(r)];
      const Hypothesis& hyp = search[static_cast<std::size_t>(b)].live[static_cast<std::size_t>(h)];
      ids[static_cast<std::size_t>(r)] = hyp.ids.empty() ? Vocab::kBos : hyp.ids.back();
      if (t >= 2)
        for (int k = 0; k < F; ++k)
          fed[static_cast<std::size_t>(k)][static_cast<std::size_t>(r)] =
              hyp.features[static_cast<std::size_t>(k)][static_cast<std::size_t>(t - 2)];
      if (mask.capacity() > 0) {
        const std::size_t base = mask.size();
        mask.insert(mask.end(), emittable.begin(), emittable.end());
        for (int id : placeholder_ids) mask[base + static_cast<std::size_t>(id)] = 0;
        for (const auto& [id, n] : search[static_cast<std::size_t>(b)].placeholder_budget) {
          const long used = std::count(hyp.ids.begin(), hyp.ids.end(), id);
          if (used < n) mask[base + static_cast<std::size_t>(id)] = 1;
        }
      }
    }

    std::vector<int> step_start(M);
    for (std::size_t m = 0; m < M; ++m) step_start[m] = static_cast<int>(graphs[m].size());
    std::vector<NmtModel::StepOutput> steps;
    steps.reserve(M);
    for (std::size_t m = 0; m < M; ++m)
      steps.push_back(ensemble.model(m).decode_step(graphs[m], encoded[m], states[m], ids, fed, mask));

    // Averaged log probabilities, attention and feature distributions.
    std::vector<double> lp(static_cast<std::size_t>(R) * V);
    if (M == 1) {
      const Tensor& x = steps[0].log_probs.value();
      for (std::size_t i = 0; i < lp.size(); ++i) lp[i] = static_cast<double>(x[i]);
    } else {
      std::vector<std::vector<Real>> probs(M, std::vector<Real>(static_cast<std::size_t>(V)));
      for (int r = 0; r < R; ++r) {
        for (std::size_t m = 0; m < M; ++m) {
          const auto row = steps[m].log_probs.value().row(r);
          for (int w = 0; w < V; ++w) probs[m][static_cast<std::size_t>(w)] = std::exp(row[static_cast<std::size_t>(w)]);
        }
        const std::vector<Real> mean = average_distributions(probs);
        for (int w = 0; w < V; ++w) {
          const Real p = mean[static_cast<std::size_t>(w)];
          lp[static_cast<std::size_t>(r) * V + static_cast<std::size_t>(w)] =
              p > 0 ? std::log(static_cast<double>(p)) : kNegInf;
        }
      }
    }
    Tensor alpha = steps[0].alpha.value();
    std::vector<Tensor> feat;
    for (int k = 0; k < F; ++k) feat.push_back(steps[0].feature_probs[static_cast<std::size_t>(k)].value());
    for (std::size_t m = 1; m < M; ++m) {
      for (std::size_t i = 0; i < alpha.size(); ++i) alpha[i] += steps[m].alpha.value()[i];
      for (int k = 0; k < F; ++k)
        for (std::size_t i = 0; i < feat[static_cast<std::size_t>(k)].size(); ++i)
          feat[static_cast<std::size_t>(k)][i] += steps[m].feature_probs[static_cast<std::size_t>(k)].value()[i];
    }
    if (M > 1)
      for (std::size_t i = 0; i < alpha.size(); ++i) alpha[i] /= static_cast<Real>(M);

    // The feature predicted at this step labels the word fed as input.
    if (t >= 1)
      for (int r = 0; r < R; ++r) {
        const auto [b, h] = row_of[static_cast<std::size_t>(r)];
        Hypothesis& hyp = search[static_cast<std::size_t>(b)].live[static_cast<std::size_t>(h)];
        for (int k = 0; k < F; ++k)
          hyp.features[static_cast<std::size_t>(k)].push_back(argmax(feat[static_cast<std::size_t>(k)].row(r)));
      }

    std::vector<int> keep_rows;
    int row_begin = 0;
    for (std::size_t b = 0; b < search.size(); ++b) {
      SentenceSearch& s = search[b];
      if (s.done) continue;
      const int n_rows = static_cast<int>(s.live.size());
      const int src_len = s.input->sentence.size();
      std::vector<Candidate> cands;
      for (int h = 0; h < n_rows; ++h) {
        const int r = row_begin + h;
        const Hypothesis& hyp = s.live[static_cast<std::size_t>(h)];
        const double* row = lp.data() + static_cast<std::size_t>(r) * V;
        if (!fusion) {
          for (int w = 0; w < V; ++w)
            if (std::isfinite(row[w])) cands.push_back({hyp.score + row[w], w, h, {}});
          continue;
        }
        // NMT top-K for this hypothesis, then rescored with the LM.
        std::vector<int> order;
        for (int w = 0; w < V; ++w)
          if (std::isfinite(row[w])) order.push_back(w);
        const std::size_t top = std::min<std::size_t>(static_cast<std::size_t>(K), order.size());
        std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(top), order.end(),
                          [&](int a, int c) { return row[a] != row[c] ? row[a] > row[c] : a < c; });
        order.resize(top);
        for (int w : order) {
          const double lm = w == Vocab::kEos ? 0.0 : options.lm->log_score(hyp.words, tv.token(w));
          cands.push_back({hyp.score + lm + options.beta * row[w], w, h, {}});
        }
        if (options.dictionary != nullptr && !order.empty() && order.front() == Vocab::kUnk) {
          const int s_pos = argmax(alpha.row(r).subspan(0, static_cast<std::size_t>(src_len)));
          auto it = options.dictionary->find(source_token(ensemble, *s.input, static_cast<std::size_t>(s_pos)));
          if (it != options.dictionary->end())
            cands.push_back({hyp.score + options.lm->log_score(hyp.words, it->second), Vocab::kUnk, h, it->second});
        }
      }
      const std::size_t take = std::min<std::size_t>(static_cast<std::size_t>(K), cands.size());
      std::partial_sort(cands.begin(), cands.begin() + static_cast<std::ptrdiff_t>(take), cands.end(), better);
      cands.resize(take);

      std::vector<Hypothesis> next;
      for (const Candidate& c : cands) {
        const Hypothesis& parent = s.live[static_cast<std::size_t>(c.parent)];
        Hypothesis child = parent;
        child.score = c.score;
        if (c.token == Vocab::kEos) {
          child.finished = true;
          s.finished.push_back(std::move(child));
          continue;
        }
        child.ids.push_back(c.token);
        child.words.push_back(c.injected.empty() ? tv.token(c.token) : c.injected);
        const auto a = alpha.row(row_begin + c.parent);
        child.attention.emplace_back(a.begin(), a.begin() + src_len);
        next.push_back(std::move(child));
        keep_rows.push_back(row_begin + c.parent);
      }
      s.live = std::move(next);
      row_begin += n_rows;

      if (s.live.empty()) {
        s.done = true;
      } else if (static_cast<int>(s.finished.size()) >= options.n_best) {
        std::vector<double> fs;
        for (const auto& f : s.finished) fs.push_back(f.score);
        std::nth_element(fs.begin(), fs.begin() + (options.n_best - 1), fs.end(), std::greater<>());
        double best_live = kNegInf;
        for (const auto& l : s.live) best_live = std::max(best_live, l.score);
        if (best_live < fs[static_cast<std::size_t>(options.n_best - 1)]) s.done = true;
      }
      if (s.done) {
        // Rows of a finished sentence leave the batch.
        const int drop = static_cast<int>(s.live.size());
        keep_rows.resize(keep_rows.size() - static_cast<std::size_t>(drop));
        s.live.clear();
      }
    }
    if (keep_rows.empty()) break;
    for (std::size_t m = 0; m < M; ++m) {
      states[m] = NmtModel::select(graphs[m], steps[m].state, keep_rows);
      std::vector<Var> live = states[m].h;
      live.insert(live.end(), states[m].c.begin(), states[m].c.end());
      live.push_back(states[m].feed);
      graphs[m].release_values(previous_step[m], live);
      previous_step[m] = step_start[m];
    }
  }

  std::vector<Translation> out(search.size());
  for (std::size_t b = 0; b < search.size(); ++b) {
    SentenceSearch& s = search[b];
    for (auto& l : s.live) {
      l.finished = true;
      l.forced = true;
      s.finished.push_back(std::move(l));
    }
    std::stable_sort(s.finished.begin(), s.finished.end(),
                     [](const Hypothesis& a, const Hypothesis& c) { return a.score > c.score; });
    if (static_cast<int>(s.finished.size()) > options.n_best)
      s.finished.resize(static_cast<std::size_t>(options.n_best));
    for (auto& h : s.finished)
      for (auto& f : h.features) f.resize(h.ids.size(), 0);
    out[b].nbest = std::move(s.finished);
  }
  return out;
}

Translation beam_search(const Ensemble& ensemble, const DecodeInput& input, const DecodeOptions& options) {
  return decode_group(ensemble, {&input}, options).front();
}

std::vector<Translation> batch_translate(const Ensemble& ensemble, const std::vector<DecodeInput>& inputs,
                                         int batch_size, const DecodeOptions& options, BatchStats* stats) {
  if (batch_size < 1) throw std::invalid_argument("batch_size must be >= 1");
  const auto start = std::chrono::steady_clock::now();
  std::vector<std::size_t> order(inputs.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return inputs[a].sentence.size() < inputs[b].sentence.size();
  });
  std::vector<Translation> out(inputs.size());
  long tokens = 0;
  for (std::size_t i = 0; i < order.size(); i += static_cast<std::size_t>(batch_size)) {
    std::vector<const DecodeInput*> group;
    const std::size_t end = std::min(order.size(), i + static_cast<std::size_t>(batch_size));
    for (std::size_t j = i; j < end; ++j) group.push_back(&inputs[order[j]]);
    std::vector<Translation> res = decode_group(ensemble, group, options);
    for (std::size_t j = i; j < end; ++j) {
      tokens += static_cast<long>(res[j - i].best().ids.size());
      out[order[j]] = std::move(res[j - i]);
    }
  }
  if (stats != nullptr) {
    stats->seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    stats->tokens = tokens;
  }
  return out;
}

std::vector<std::string> replace_unknown(const std::vector<std::string>& target,
                                         const std::vector<std::vector<Real>>& attention,
                                         const std::vector<std::string>& source, const Dictionary& dictionary) {
  if (attention.size() < target.size()) throw std::invalid_argument("replace_unknown: missing attention rows");
  std::vector<std::string> out = target;
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (out[i] != kUnkToken) continue;
    const auto& a = attention[i];
    int best = -1;
    for (std::size_t s = 0; s < std::min(a.size(), source.size()); ++s) {
      if (is_control_token(source[s])) continue;
      if (best < 0 || a[s] > a[static_cast<std::size_t>(best)]) best = static_cast<int>(s);
    }
    if (best < 0) continue;
    const std::string& word = source[static_cast<std::size_t>(best)];
    auto it = dictionary.find(word);
    out[i] = it != dictionary.end() ? it->second : word;
  }
  return out;
}

std::string format_nbest(int index, const Hypothesis& hypothesis) {
  char score[64];
  std::snprintf(score, sizeof score, "%.6f", hypothesis.score);
  return std::to_string(index) + " ||| " + join(hypothesis.words) + " ||| " + score;
}

std::vector<std::string> output_words(const NmtModel& model, const Hypothesis& hypothesis) {
  const auto& tf = model.config().target_features;
  if (tf.size() != 1 || tf.front() != kCaseFeatureSize || hypothesis.features.empty()) return hypothesis.words;
  std::vector<std::string> out;
  for (std::size_t i = 0; i < hypothesis.words.size(); ++i) {
    const std::string& w = hypothesis.words[i];
    const int f = i < hypothesis.features[0].size() ? hypothesis.features[0][i] : 0;
    if (is_control_token(w) || is_placeholder_token(w)) {
      out.push_back(w);
      continue;
    }
    out.push_back(restore_case(w, case_from_index(f)));
  }
  return out;
}

std::vector<Example> distill_prepare(const Ensemble& teacher, const std::vector<Example>& corpus, int n_best,
                                     int max_length, DistillStats* stats) {
  DecodeOptions opt;
  opt.beam_size = n_best;
  opt.n_best = n_best;
  opt.max_length = max_length;
  std::vector<DecodeInput> inputs;
  for (const Example& ex : corpus) inputs.push_back({ex.source, {}});
  const std::vector<Translation> res = batch_translate(teacher, inputs, 32, opt);
  const Vocab& tv = teacher.target_vocab();
  DistillStats local;
  std::vector<Example> out;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    if (res[i].nbest.empty()) {
      ++local.skipped;
      continue;
    }
    const TokenLine ref = tv.decode(corpus[i].target.ids);
    std::size_t pick = 0;
    double best = -1;
    for (std::size_t j = 0; j < res[i].nbest.size(); ++j) {
      const double bleu = sentence_bleu(res[i].nbest[j].words, ref);
      if (bleu > best) {
        best = bleu;
        pick = j;
      }
    }
    if (pick != 0) ++local.reranked;
    const Hypothesis& h = res[i].nbest[pick];
    Example ex;
    ex.source = corpus[i].source;
    ex.target.ids = h.ids;
    ex.target.features = h.features;
    out.push_back(std::move(ex));
  }
  if (stats != nullptr) *stats = local;
  return out;
}

SNMT_NAMESPACE_END
