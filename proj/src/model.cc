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

#include "snmt/model.h"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <tuple>

#include "snmt/textproc.h"

SNMT_NAMESPACE_BEGIN

namespace {

std::string layer_name(const char* prefix, int layer) { return std::string(prefix) + ".l" + std::to_string(layer); }

Var param_of(Graph& g, const ParameterSet& params, const std::string& name) {
  // The graph accumulates gradients into the registry, which is the only
  // mutation; decoding never calls backward.
  return g.param(const_cast<ParameterSet&>(params).get(name));
}

}  // namespace

void ModelConfig::validate() const {
  if (layers < 1) throw std::invalid_argument("config: layers must be >= 1");
  if (rnn_size < 1 || embed_size < 1) throw std::invalid_argument("config: sizes must be >= 1");
  if (dropout < 0 || dropout >= 1) throw std::invalid_argument("config: dropout must be in [0, 1)");
  if (max_source_length < 1) throw std::invalid_argument("config: max_source_length must be >= 1");
  for (int n : source_features)
    if (n < 1) throw std::invalid_argument("config: feature sizes must be >= 1");
  for (int n : target_features)
    if (n < 1) throw std::invalid_argument("config: feature sizes must be >= 1");
}

int ModelConfig::source_feature_width() const {
  int w = 0;
  for (int n : source_features) w += n;
  return w;
}

int ModelConfig::target_feature_width() const {
  int w = 0;
  for (int n : target_features) w += n;
  return w;
}

std::vector<Real> feature_vector(int n_f, int index) {
  if (n_f < 1 || index < 0 || index >= n_f)
    throw std::out_of_range("feature value " + std::to_string(index) + " out of range for n_f=" + std::to_string(n_f));
  std::vector<Real> x(static_cast<std::size_t>(n_f), 0);
  x[static_cast<std::size_t>(index)] = Real(1) / static_cast<Real>(n_f);
  return x;
}

std::string politeness_token(const std::string& mode) {
  for (const char* m : kPolitenessModes)
    if (mode == m) return "⟦polite:" + mode + "⟧";
  throw std::invalid_argument("unknown politeness mode '" + mode + "'");
}

std::vector<std::string> politeness_tokens() {
  std::vector<std::string> out;
  for (const char* m : kPolitenessModes) out.push_back(politeness_token(m));
  return out;
}

std::vector<std::string> prepend_control_token(const std::vector<std::string>& tokens, const std::string& mode) {
  const std::string token = politeness_token(mode);
  if (mode == "neutral") return tokens;
  std::vector<std::string> out;
  out.reserve(tokens.size() + 1);
  out.push_back(token);
  out.insert(out.end(), tokens.begin(), tokens.end());
  return out;
}

SourceBatch SourceBatch::make(const std::vector<const Sentence*>& sentences, int feature_count) {
  if (sentences.empty()) throw std::invalid_argument("SourceBatch: no sentences");
  SourceBatch b;
  b.batch = static_cast<int>(sentences.size());
  for (const Sentence* s : sentences) {
    if (s->ids.empty()) throw std::invalid_argument("SourceBatch: empty source sentence");
    if (static_cast<int>(s->features.size()) != feature_count)
      throw std::invalid_argument("SourceBatch: expected " + std::to_string(feature_count) + " source features");
    for (const auto& f : s->features)
      if (f.size() != s->ids.size()) throw std::invalid_argument("SourceBatch: feature length differs from sentence");
    b.lengths.push_back(s->size());
    b.length = std::max(b.length, s->size());
  }
  const std::size_t cells = static_cast<std::size_t>(b.batch) * static_cast<std::size_t>(b.length);
  b.ids.assign(cells, Vocab::kPad);
  b.mask.assign(cells, 0);
  b.features.assign(static_cast<std::size_t>(feature_count), std::vector<int>(cells, 0));
  for (int i = 0; i < b.batch; ++i) {
    const Sentence& s = *sentences[static_cast<std::size_t>(i)];
    for (int t = 0; t < s.size(); ++t) {
      const std::size_t cell = static_cast<std::size_t>(i) * b.length + t;
      b.ids[cell] = s.ids[static_cast<std::size_t>(t)];
      b.mask[cell] = 1;
      for (int k = 0; k < feature_count; ++k)
        b.features[static_cast<std::size_t>(k)][cell] = s.features[static_cast<std::size_t>(k)][static_cast<std::size_t>(t)];
    }
  }
  return b;
}

NmtModel::NmtModel(ModelConfig config, Vocab source_vocab, Vocab target_vocab)
    : config_(std::move(config)), source_vocab_(std::move(source_vocab)), target_vocab_(std::move(target_vocab)) {
  config_.validate();
  emittable_ = target_vocab_.emittable_mask();
  register_parameters();
}

void NmtModel::register_parameters() {
  const int H = config_.rnn_size, E = config_.embed_size;
  params_.add("src_emb", {source_vocab_.size(), E});
  params_.add("tgt_emb", {target_vocab_.size(), E});
  for (int l = 0; l < config_.layers; ++l) {
    const int in = l == 0 ? config_.encoder_input_size() : H;
    params_.add(layer_name("enc.fwd", l) + ".W", {in + H, 4 * H});
    params_.add(layer_name("enc.fwd", l) + ".b", {1, 4 * H});
  }
  if (config_.bidirectional)
    for (int l = 0; l < config_.layers; ++l) {
      const int in = l == 0 ? config_.encoder_input_size() : H;
      params_.add(layer_name("enc.bwd", l) + ".W", {in + H, 4 * H});
      params_.add(layer_name("enc.bwd", l) + ".b", {1, 4 * H});
    }
  for (int l = 0; l < config_.layers; ++l) {
    const int in = l == 0 ? config_.decoder_input_size() : H;
    params_.add(layer_name("dec", l) + ".W", {in + H, 4 * H});
    params_.add(layer_name("dec", l) + ".b", {1, 4 * H});
  }
  params_.add("att.W_a", {H, H});
  params_.add("att.W_c", {2 * H, H});
  params_.add("gen.W", {H, target_vocab_.size()});
  params_.add("gen.b", {1, target_vocab_.size()});
  for (std::size_t k = 0; k < config_.target_features.size(); ++k) {
    params_.add("feat" + std::to_string(k) + ".W", {H, config_.target_features[k]});
    params_.add("feat" + std::to_string(k) + ".b", {1, config_.target_features[k]});
  }
}

void NmtModel::initialize(std::uint64_t seed, Real range) {
  Rng rng(seed);
  params_.init_uniform(rng, range);
  for (auto& p : params_) p.apply_mask();
  if (!sparse_.empty()) enable_sparse();
}

Var NmtModel::linear(Graph& g, Var x, const std::string& weight) const {
  auto it = sparse_.find(weight);
  if (it != sparse_.end()) return sparse_matmul(x, it->second);
  return matmul(x, param_of(g, params_, weight));
}

std::pair<Var, Var> NmtModel::lstm(Graph& g, const std::string& prefix, Var x, Var h, Var c) const {
  Var gates = add_bias(linear(g, concat_cols({x, h}), prefix + ".W"), param_of(g, params_, prefix + ".b"));
  return lstm_cell(gates, c);
}

Var NmtModel::embed_with_features(Graph& g, bool source, const std::vector<int>& ids,
                                  const std::vector<std::vector<int>>& features) const {
  const Vocab& vocab = source ? source_vocab_ : target_vocab_;
  const auto& spec = source ? config_.source_features : config_.target_features;
  for (int id : ids)
    if (id < 0 || id >= vocab.size()) throw std::out_of_range("token id " + std::to_string(id) + " out of range");
  if (features.size() != spec.size())
    throw std::invalid_argument("expected " + std::to_string(spec.size()) + " features, got " +
                                std::to_string(features.size()));
  Var emb = lookup(param_of(g, params_, source ? "src_emb" : "tgt_emb"), ids);
  if (spec.empty()) return emb;
  int width = 0;
  for (int n : spec) width += n;
  Tensor f = Tensor::matrix(static_cast<int>(ids.size()), width);
  int offset = 0;
  for (std::size_t k = 0; k < spec.size(); ++k) {
    if (features[k].size() != ids.size()) throw std::invalid_argument("feature length differs from token count");
    for (std::size_t r = 0; r < ids.size(); ++r) {
      const auto x = feature_vector(spec[k], features[k][r]);
      for (int j = 0; j < spec[k]; ++j) f.at(static_cast<int>(r), offset + j) = x[static_cast<std::size_t>(j)];
    }
    offset += spec[k];
  }
  return concat_cols({emb, g.input(std::move(f))});
}

NmtModel::Encoded NmtModel::encode(Graph& g, const SourceBatch& batch) const {
  if (batch.length > config_.max_source_length)
    throw std::invalid_argument("source length " + std::to_string(batch.length) + " exceeds maximum " +
                                std::to_string(config_.max_source_length));
  const int B = batch.batch, S = batch.length, H = config_.rnn_size, L = config_.layers;
  const Real p = static_cast<Real>(config_.dropout);
  Var x_all = embed_with_features(g, true, batch.ids, batch.features);

  std::vector<Var> inputs(static_cast<std::size_t>(S));
  // Batch rows holding a real token at each position.
  std::vector<std::vector<int>> active(static_cast<std::size_t>(S));
  for (int s = 0; s < S; ++s) {
    std::vector<int> rows(static_cast<std::size_t>(B));
    for (int b = 0; b < B; ++b) {
      rows[static_cast<std::size_t>(b)] = b * S + s;
      if (batch.mask[static_cast<std::size_t>(b) * S + s]) active[static_cast<std::size_t>(s)].push_back(b);
    }
    inputs[static_cast<std::size_t>(s)] = B == 1 && S == 1 ? x_all : gather_rows(x_all, rows);
  }

  Encoded enc;
  enc.batch = B;
  enc.length = S;
  enc.mask = batch.mask;

  // Only rows with a real token step; padded rows carry their state, so the
  // forward pass ends on the last real token and the backward pass starts
  // from a zero state.
  auto run = [&](const char* prefix, bool reverse, std::vector<Var>& final_h, std::vector<Var>& final_c) {
    std::vector<Var> layer_in = inputs;
    for (int l = 0; l < L; ++l) {
      Var h = g.input(Tensor::matrix(B, H));
      Var c = g.input(Tensor::matrix(B, H));
      std::vector<Var> out(static_cast<std::size_t>(S));
      const std::string name = layer_name(prefix, l);
      for (int k = 0; k < S; ++k) {
        const int s = reverse ? S - 1 - k : k;
        Var in = layer_in[static_cast<std::size_t>(s)];
        if (l > 0) in = dropout(in, p);
        const std::vector<int>& rows = active[static_cast<std::size_t>(s)];
        if (static_cast<int>(rows.size()) == B) {
          std::tie(h, c) = lstm(g, name, in, h, c);
        } else {
          auto [h2, c2] = lstm(g, name, gather_rows(in, rows), gather_rows(h, rows), gather_rows(c, rows));
          h = scatter_rows(h, h2, rows);
          c = scatter_rows(c, c2, rows);
        }
        out[static_cast<std::size_t>(s)] = h;
      }
      final_h.push_back(h);
      final_c.push_back(c);
      layer_in = std::move(out);
    }
    return layer_in;
  };

  std::vector<Var> outputs = run("enc.fwd", false, enc.final_h, enc.final_c);
  if (config_.bidirectional) {
    std::vector<Var> bh, bc;
    auto back = run("enc.bwd", true, bh, bc);
    for (int s = 0; s < S; ++s)
      outputs[static_cast<std::size_t>(s)] = add(outputs[static_cast<std::size_t>(s)], back[static_cast<std::size_t>(s)]);
    for (int l = 0; l < L; ++l) {
      enc.final_h[static_cast<std::size_t>(l)] = add(enc.final_h[static_cast<std::size_t>(l)], bh[static_cast<std::size_t>(l)]);
      enc.final_c[static_cast<std::size_t>(l)] = add(enc.final_c[static_cast<std::size_t>(l)], bc[static_cast<std::size_t>(l)]);
    }
  }
  enc.keys = stack_steps(outputs);
  return enc;
}

NmtModel::State NmtModel::initial_state(Graph& g, const Encoded& enc, const std::vector<int>& row_batch) const {
  State st;
  st.row_batch = row_batch;
  bool identity = static_cast<int>(row_batch.size()) == enc.batch;
  for (std::size_t r = 0; identity && r < row_batch.size(); ++r) identity = row_batch[r] == static_cast<int>(r);
  for (int l = 0; l < config_.layers; ++l) {
    st.h.push_back(identity ? enc.final_h[static_cast<std::size_t>(l)]
                            : gather_rows(enc.final_h[static_cast<std::size_t>(l)], row_batch));
    st.c.push_back(identity ? enc.final_c[static_cast<std::size_t>(l)]
                            : gather_rows(enc.final_c[static_cast<std::size_t>(l)], row_batch));
  }
  st.feed = g.input(Tensor::matrix(static_cast<int>(row_batch.size()), config_.rnn_size));
  return st;
}

NmtModel::StepOutput NmtModel::decode_step(Graph& g, const Encoded& enc, const State& state,
                                           const std::vector<int>& ids,
                                           const std::vector<std::vector<int>>& features,
                                           const std::vector<std::uint8_t>& vocab_mask) const {
  const int R = state.rows();
  if (static_cast<int>(ids.size()) != R) throw std::invalid_argument("decode_step: one input id per row expected");
  const Real p = static_cast<Real>(config_.dropout);
  const int L = config_.layers, S = enc.length;

  StepOutput out;
  out.state.row_batch = state.row_batch;
  Var x = concat_cols({embed_with_features(g, false, ids, features), state.feed});
  for (int l = 0; l < L; ++l) {
    Var in = l == 0 ? x : dropout(out.state.h.back(), p);
    auto [h, c] = lstm(g, layer_name("dec", l), in, state.h[static_cast<std::size_t>(l)], state.c[static_cast<std::size_t>(l)]);
    out.state.h.push_back(h);
    out.state.c.push_back(c);
  }
  Var top = out.state.h.back();

  Var scores = attention_scores(enc.keys, linear(g, top, "att.W_a"), state.row_batch);
  std::vector<std::uint8_t> mask(static_cast<std::size_t>(R) * S);
  for (int r = 0; r < R; ++r)
    std::copy_n(enc.mask.begin() + static_cast<std::ptrdiff_t>(state.row_batch[static_cast<std::size_t>(r)]) * S, S,
                mask.begin() + static_cast<std::ptrdiff_t>(r) * S);
  out.alpha = masked_softmax_rows(scores, mask);
  Var context = attention_context(enc.keys, out.alpha, state.row_batch);
  Var hhat = tanh(linear(g, concat_cols({context, top}), "att.W_c"));
  out.state.feed = hhat;

  Var gen_in = dropout(hhat, p);
  Var logits = add_bias(linear(g, gen_in, "gen.W"), param_of(g, params_, "gen.b"));
  out.log_probs = log_softmax_rows(logits, vocab_mask.empty() ? emittable_ : vocab_mask);
  for (std::size_t k = 0; k < config_.target_features.size(); ++k) {
    const std::string name = "feat" + std::to_string(k);
    out.feature_probs.push_back(
        softmax_rows(add_bias(linear(g, gen_in, name + ".W"), param_of(g, params_, name + ".b"))));
  }
  return out;
}

NmtModel::State NmtModel::select(Graph& g, const State& state, const std::vector<int>& rows) {
  (void)g;
  State out;
  for (int r : rows) out.row_batch.push_back(state.row_batch.at(static_cast<std::size_t>(r)));
  for (std::size_t l = 0; l < state.h.size(); ++l) {
    out.h.push_back(gather_rows(state.h[l], rows));
    out.c.push_back(gather_rows(state.c[l], rows));
  }
  out.feed = gather_rows(state.feed, rows);
  return out;
}

int NmtModel::load_external_embeddings(const std::string& path, bool source, bool freeze) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  const Vocab& vocab = source ? source_vocab_ : target_vocab_;
  Parameter& emb = params_.get(source ? "src_emb" : "tgt_emb");
  const int E = config_.embed_size;
  std::vector<std::uint8_t> loaded(static_cast<std::size_t>(vocab.size()), 0);
  std::string line;
  int line_no = 0, count = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto fields = split_whitespace(line);
    if (fields.empty()) continue;
    if (static_cast<int>(fields.size()) != E + 1)
      throw std::invalid_argument("embedding line " + std::to_string(line_no) + ": expected " + std::to_string(E) +
                                  " values, got " + std::to_string(fields.size() - 1));
    if (!vocab.contains(fields[0])) continue;
    const int id = vocab.id(fields[0]);
    for (int j = 0; j < E; ++j) {
      try {
        emb.value.at(id, j) = static_cast<Real>(std::stod(fields[static_cast<std::size_t>(j) + 1]));
      } catch (const std::exception&) {
        throw std::invalid_argument("embedding line " + std::to_string(line_no) + ": bad number");
      }
    }
    if (!loaded[static_cast<std::size_t>(id)]) ++count;
    loaded[static_cast<std::size_t>(id)] = 1;
  }
  if (freeze) {
    if (emb.frozen_rows.empty()) emb.frozen_rows.assign(static_cast<std::size_t>(vocab.size()), 0);
    for (std::size_t i = 0; i < loaded.size(); ++i)
      if (loaded[i]) emb.frozen_rows[i] = 1;
  }
  return count;
}

void NmtModel::enable_sparse() {
  sparse_.clear();
  for (const auto& p : params_)
    if (p.name.size() > 2 && p.name.compare(p.name.size() - 2, 2, ".W") == 0) sparse_[p.name] = SparseCCS::from_dense(p.value);
  for (const char* name : {"att.W_a", "att.W_c"}) sparse_[name] = SparseCCS::from_dense(params_.get(name).value);
}

std::size_t NmtModel::sparse_bytes() const {
  std::size_t n = 0;
  for (const auto& [name, m] : sparse_) n += m.memory_bytes();
  return n;
}

std::size_t NmtModel::dense_weight_bytes() const {
  std::size_t n = 0;
  for (const auto& [name, m] : sparse_) n += m.dense_bytes();
  return n;
}

SNMT_NAMESPACE_END
