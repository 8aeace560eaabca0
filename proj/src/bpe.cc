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

#include "snmt/bpe.h"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include "snmt/textproc.h"

SNMT_NAMESPACE_BEGIN

namespace {

std::vector<std::string> characters(const std::string& token) {
  std::vector<std::string> out;
  for (char32_t cp : decode_utf8(token)) {
    std::string s;
    append_utf8(s, cp);
    out.push_back(std::move(s));
  }
  return out;
}

// Merges every left-to-right, non-overlapping occurrence of (a, b).
bool merge_pair(std::vector<std::string>& symbols, const std::string& a, const std::string& b) {
  bool changed = false;
  std::vector<std::string> out;
  out.reserve(symbols.size());
  for (std::size_t i = 0; i < symbols.size(); ++i) {
    if (i + 1 < symbols.size() && symbols[i] == a && symbols[i + 1] == b) {
      out.push_back(a + b);
      ++i;
      changed = true;
    } else {
      out.push_back(std::move(symbols[i]));
    }
  }
  symbols = std::move(out);
  return changed;
}

}  // namespace

MergeTable::MergeTable(std::vector<Pair> merges) : merges_(std::move(merges)) {
  for (std::size_t i = 0; i < merges_.size(); ++i) {
    if (!ranks_.emplace(merges_[i], static_cast<int>(i)).second)
      throw std::invalid_argument("duplicate merge: " + merges_[i].first + " " + merges_[i].second);
  }
}

int MergeTable::rank(const std::string& a, const std::string& b) const {
  auto it = ranks_.find({a, b});
  return it == ranks_.end() ? -1 : it->second;
}

std::string MergeTable::to_text() const {
  std::ostringstream os;
  os << "#bpe-v1 " << merges_.size() << '\n';
  for (const auto& [a, b] : merges_) os << a << ' ' << b << '\n';
  return os.str();
}

MergeTable MergeTable::from_text(const std::string& text) {
  std::istringstream is(text);
  std::string line;
  if (!std::getline(is, line) || line.rfind("#bpe-v1 ", 0) != 0)
    throw std::runtime_error("merge table: missing '#bpe-v1 <n>' header");
  const long long declared = std::stoll(line.substr(8));
  std::vector<Pair> merges;
  int line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto parts = split_whitespace(line);
    if (parts.size() != 2)
      throw std::runtime_error("merge table line " + std::to_string(line_no) + ": expected 'a b'");
    merges.emplace_back(parts[0], parts[1]);
  }
  if (static_cast<long long>(merges.size()) != declared)
    throw std::runtime_error("merge table: header declares " + std::to_string(declared) + " merges, found " +
                             std::to_string(merges.size()));
  return MergeTable(std::move(merges));
}

void MergeTable::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << to_text();
}

MergeTable MergeTable::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return from_text(os.str());
}

MergeTable bpe_learn(const std::map<std::string, long long>& word_counts, int n_merges) {
  if (n_merges < 0) throw std::invalid_argument("n_merges must be >= 0");
  struct Word {
    std::vector<std::string> symbols;
    long long count;
  };
  std::vector<Word> words;
  for (const auto& [w, c] : word_counts)
    if (!w.empty() && c > 0) words.push_back({characters(w), c});

  std::vector<MergeTable::Pair> merges;
  while (static_cast<int>(merges.size()) < n_merges) {
    std::map<MergeTable::Pair, long long> counts;
    for (const auto& w : words)
      for (std::size_t i = 0; i + 1 < w.symbols.size(); ++i) counts[{w.symbols[i], w.symbols[i + 1]}] += w.count;
    if (counts.empty()) break;
    // std::map iterates pairs in lexicographic order, so the first maximum
    // is the tie winner.
    auto best = counts.begin();
    for (auto it = counts.begin(); it != counts.end(); ++it)
      if (it->second > best->second) best = it;
    const auto pair = best->first;
    for (auto& w : words) merge_pair(w.symbols, pair.first, pair.second);
    merges.push_back(pair);
  }
  return MergeTable(std::move(merges));
}

std::vector<std::string> bpe_segment(const std::string& token, const MergeTable& table) {
  if (token.empty()) throw std::invalid_argument("bpe_apply: empty token");
  auto symbols = characters(token);
  // Replaying merges in order is equivalent to repeatedly applying the
  // lowest-ranked present pair whose rank is above the last one applied.
  int last = -1;
  while (symbols.size() > 1) {
    int next = -1;
    for (std::size_t i = 0; i + 1 < symbols.size(); ++i) {
      const int r = table.rank(symbols[i], symbols[i + 1]);
      if (r > last && (next < 0 || r < next)) next = r;
    }
    if (next < 0) break;
    const auto& pair = table.merges()[static_cast<std::size_t>(next)];
    merge_pair(symbols, pair.first, pair.second);
    last = next;
  }
  return symbols;
}

std::vector<std::string> bpe_apply(const std::string& token, const MergeTable& table) {
  auto pieces = bpe_segment(token, table);
  for (std::size_t i = 0; i + 1 < pieces.size(); ++i) pieces[i] += kBpeMarker;
  return pieces;
}

std::vector<std::string> bpe_apply_sequence(const std::vector<std::string>& tokens, const MergeTable& table) {
  std::vector<std::string> out;
  for (const auto& t : tokens) {
    auto pieces = bpe_apply(t, table);
    out.insert(out.end(), pieces.begin(), pieces.end());
  }
  return out;
}

BpeDecoded bpe_decode(const std::vector<std::string>& pieces) {
  const std::string marker = kBpeMarker;
  BpeDecoded out;
  std::string current;
  bool open = false;
  for (const auto& p : pieces) {
    const bool cont = p.size() >= marker.size() && p.compare(p.size() - marker.size(), marker.size(), marker) == 0;
    if (cont) {
      current += p.substr(0, p.size() - marker.size());
      open = true;
    } else {
      current += p;
      out.tokens.push_back(std::move(current));
      current.clear();
      open = false;
    }
  }
  if (open) {
    out.dangling_marker = true;
    out.tokens.push_back(std::move(current));
  }
  return out;
}

SNMT_NAMESPACE_END
