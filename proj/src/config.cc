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

#include "snmt/config.h"

#include <charconv>
#include <fstream>
#include <sstream>

#include "snmt/textproc.h"

SNMT_NAMESPACE_BEGIN

const std::vector<ConfigKey>& config_keys() {
  static const std::vector<ConfigKey> keys = {
      {"layers", "2", "LSTM layers in encoder and decoder"},
      {"rnn_size", "500", "hidden size"},
      {"embed_size", "500", "word embedding size"},
      {"bidirectional", "1", "bidirectional encoder"},
      {"dropout", "0.3", "dropout on non-recurrent connections"},
      {"max_source_length", "250", "longest source the encoder accepts"},
      {"param_init", "0.1", "parameters start uniform in [-param_init, param_init]"},
      {"case_feature", "0", "source and target case features"},
      {"placeholders", "0", "reserve placeholder tokens in the vocabularies"},
      {"source_vocab_size", "0", "source vocabulary cap, 0 = unlimited"},
      {"target_vocab_size", "0", "target vocabulary cap, 0 = unlimited"},
      {"epochs", "13", "training epochs"},
      {"batch_size", "64", "sentences per training batch"},
      {"learning_rate", "1.0", "initial SGD learning rate"},
      {"decay", "0.7", "learning rate decay factor"},
      {"start_decay_epoch", "9", "first epoch with a decayed learning rate"},
      {"max_grad_norm", "5", "gradient norm clipping threshold"},
      {"max_length", "50", "longest training sentence kept"},
      {"seed", "1", "random seed"},
      {"guided_weight", "0", "guided alignment weight"},
      {"guided_decay", "1", "decay the guided alignment weight every epoch"},
      {"guided_decay_factor", "0.9", "guided alignment decay factor"},
      {"feature_weight", "1", "target feature loss weight"},
      {"beam_size", "5", "beam size"},
      {"batch", "30", "sentences decoded together"},
      {"max_decode_length", "100", "longest output"},
      {"n_best", "1", "hypotheses kept per sentence"},
      {"beta", "1", "shallow fusion weight of the translation model"},
      {"constrain_placeholders", "1", "limit placeholders to those in the source"},
  };
  return keys;
}

RunConfig::RunConfig() {
  for (const ConfigKey& k : config_keys()) values_[k.name] = k.default_value;
}

RunConfig RunConfig::parse(const std::string& text, const std::string& origin) {
  RunConfig cfg;
  std::stringstream ss(text);
  std::string line;
  int line_no = 0;
  while (std::getline(ss, line)) {
    ++line_no;
    const std::string where = origin + ":" + std::to_string(line_no);
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(where + ": expected key=value");
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      const auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    try {
      cfg.set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    } catch (const ConfigError& e) {
      throw ConfigError(where + ": " + e.what());
    }
  }
  return cfg;
}

RunConfig RunConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), path);
}

void RunConfig::set(const std::string& key, const std::string& value) {
  auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError("unknown key '" + key + "'");
  it->second = value;
}

const std::string& RunConfig::get(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError("unknown key '" + key + "'");
  return it->second;
}

int RunConfig::get_int(const std::string& key) const {
  const std::string& s = get(key);
  int v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) throw ConfigError(key + ": expected an integer, got '" + s + "'");
  return v;
}

double RunConfig::get_double(const std::string& key) const {
  const std::string& s = get(key);
  double v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) throw ConfigError(key + ": expected a number, got '" + s + "'");
  return v;
}

bool RunConfig::get_bool(const std::string& key) const {
  const std::string s = to_lower(get(key));
  if (s == "1" || s == "true" || s == "yes") return true;
  if (s == "0" || s == "false" || s == "no") return false;
  throw ConfigError(key + ": expected a boolean, got '" + s + "'");
}

ModelConfig RunConfig::model_config() const {
  ModelConfig c;
  c.layers = get_int("layers");
  c.rnn_size = get_int("rnn_size");
  c.embed_size = get_int("embed_size");
  c.bidirectional = get_bool("bidirectional");
  c.dropout = get_double("dropout");
  c.max_source_length = get_int("max_source_length");
  if (get_bool("case_feature")) {
    c.source_features = {kCaseFeatureSize};
    c.target_features = {kCaseFeatureSize};
  }
  c.validate();
  return c;
}

TrainConfig RunConfig::train_config() const {
  TrainConfig t;
  t.epochs = get_int("epochs");
  t.batch_size = get_int("batch_size");
  t.learning_rate = get_double("learning_rate");
  t.decay = get_double("decay");
  t.start_decay_epoch = get_int("start_decay_epoch");
  t.max_grad_norm = get_double("max_grad_norm");
  t.max_length = get_int("max_length");
  t.seed = static_cast<std::uint64_t>(get_int("seed"));
  t.guided_weight = get_double("guided_weight");
  t.guided_decay = get_bool("guided_decay");
  t.guided_decay_factor = get_double("guided_decay_factor");
  t.feature_weight = get_double("feature_weight");
  t.validate();
  return t;
}

DecodeOptions RunConfig::decode_options() const {
  DecodeOptions d;
  d.beam_size = get_int("beam_size");
  d.max_length = get_int("max_decode_length");
  d.n_best = get_int("n_best");
  d.beta = get_double("beta");
  d.constrain_placeholders = get_bool("constrain_placeholders");
  if (d.beam_size < 1 || d.max_length < 1 || d.n_best < 1 || d.n_best > d.beam_size || d.beta < 0)
    throw ConfigError("invalid decoding options");
  return d;
}

std::string RunConfig::dump() const {
  std::string out;
  for (const auto& [k, v] : values_) out += k + "=" + v + "\n";
  return out;
}

SNMT_NAMESPACE_END
