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

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "snmt/abi.h"

SNMT_NAMESPACE_BEGIN

inline constexpr const char* kBpeMarker = "@@";

/// Ordered byte-pair merges. Pieces other than the last of a token carry
/// the "@@" continuation suffix.
class MergeTable {
 public:
  using Pair = std::pair<std::string, std::string>;

  MergeTable() = default;
  explicit MergeTable(std::vector<Pair> merges);

  const std::vector<Pair>& merges() const { return merges_; }
  std::size_t size() const { return merges_.size(); }
  bool empty() const { return merges_.empty(); }
  /// Position of a pair in learning order, -1 if absent.
  int rank(const std::string& a, const std::string& b) const;

  void save(const std::string& path) const;
  static MergeTable load(const std::string& path);
  std::string to_text() const;
  static MergeTable from_text(const std::string& text);

 private:
  std::vector<Pair> merges_;
  std::map<Pair, int> ranks_;
};

/// Learns up to `n_merges` merges. Each step merges the most frequent
/// adjacent pair; ties go to the lexicographically smaller pair.
MergeTable bpe_learn(const std::map<std::string, long long>& word_counts, int n_merges);

/// Splits a token into code-point symbols and replays the merges in table
/// order.
std::vector<std::string> bpe_segment(const std::string& token, const MergeTable& table);
/// bpe_segment with the continuation suffix attached.
std::vector<std::string> bpe_apply(const std::string& token, const MergeTable& table);
std::vector<std::string> bpe_apply_sequence(const std::vector<std::string>& tokens, const MergeTable& table);

struct BpeDecoded {
  std::vector<std::string> tokens;
  /// The sequence ended on a continuation piece; its marker was dropped.
  bool dangling_marker = false;
};

BpeDecoded bpe_decode(const std::vector<std::string>& pieces);

SNMT_NAMESPACE_END
