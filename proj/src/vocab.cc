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

#include "snmt/vocab.h"

#include <algorithm>
#include <fstream>
#include <map>
#include <stdexcept>

#include "snmt/placeholders.h"

SNMT_NAMESPACE_BEGIN

bool is_control_token(const std::string& token) {
  static const std::string open = "⟦", close = "⟧";
  return token.size() > open.size() + close.size() && token.compare(0, open.size(), open) == 0 &&
         token.compare(token.size() - close.size(), close.size(), close) == 0;
}

Vocab::Vocab() {
  push(kPadToken);
  push(kUnkToken);
  push(kBosToken);
  push(kEosToken);
}

void Vocab::push(const std::string& token) {
  if (token.empty()) throw std::invalid_argument("vocab: empty token");
  if (!index_.emplace(token, static_cast<int>(tokens_.size())).second)
    throw std::invalid_argument("vocab: duplicate token '" + token + "'");
  tokens_.push_back(token);
}

Vocab Vocab::build(const std::vector<std::vector<std::string>>& corpus, const VocabOptions& options) {
  Vocab v;
  for (const auto& c : options.control_tokens)
    if (!v.contains(c)) v.push(c);
  if (options.placeholders)
    for (const auto& p : placeholder_tokens())
      if (!v.contains(p)) v.push(p);

  std::map<std::string, long long> counts;
  for (const auto& sentence : corpus)
    for (const auto& w : sentence) ++counts[w];
  std::vector<std::pair<std::string, long long>> ranked;
  for (const auto& [w, c] : counts)
    if (!v.contains(w) && c >= options.min_frequency) ranked.emplace_back(w, c);
  std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
  const int reserved = v.size();
  for (const auto& [w, c] : ranked) {
    if (options.max_size > 0 && v.size() - reserved >= options.max_size) break;
    v.push(w);
  }
  return v;
}

Vocab Vocab::from_tokens(const std::vector<std::string>& tokens) {
  Vocab v;
  for (const auto& t : tokens) v.push(t);
  return v;
}

int Vocab::id(const std::string& token) const {
  auto it = index_.find(token);
  return it == index_.end() ? kUnk : it->second;
}

std::vector<int> Vocab::encode(const std::vector<std::string>& tokens) const {
  std::vector<int> ids;
  ids.reserve(tokens.size());
  for (const auto& t : tokens) ids.push_back(id(t));
  return ids;
}

std::vector<std::string> Vocab::decode(const std::vector<int>& ids) const {
  std::vector<std::string> out;
  out.reserve(ids.size());
  for (int i : ids) out.push_back(token(i));
  return out;
}

bool Vocab::is_control(int id) const { return is_control_token(token(id)); }

bool Vocab::is_placeholder(int id) const { return is_placeholder_token(token(id)); }

std::vector<std::uint8_t> Vocab::emittable_mask() const {
  std::vector<std::uint8_t> mask(tokens_.size(), 1);
  mask[kPad] = 0;
  mask[kBos] = 0;
  for (int i = kReserved; i < size(); ++i)
    if (is_control(i)) mask[static_cast<std::size_t>(i)] = 0;
  return mask;
}

std::vector<std::string> Vocab::file_tokens() const { return {tokens_.begin() + kReserved, tokens_.end()}; }

void Vocab::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  for (const auto& t : file_tokens()) out << t << '\n';
}

Vocab Vocab::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::vector<std::string> tokens;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) tokens.push_back(line);
  }
  return from_tokens(tokens);
}

SNMT_NAMESPACE_END
