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

#include "snmt/abi.h"

SNMT_NAMESPACE_BEGIN

inline constexpr const char* kPadToken = "<blank>";
inline constexpr const char* kUnkToken = "<unk>";
inline constexpr const char* kBosToken = "<s>";
inline constexpr const char* kEosToken = "</s>";
inline constexpr const char* kSeparatorToken = "⟦sep⟧";

/// True for bracketed control tokens such as "⟦polite:formal⟧" or "⟦sep⟧".
bool is_control_token(const std::string& token);

struct VocabOptions {
  std::vector<std::string> control_tokens;
  bool placeholders = false;
  /// Most frequent words kept, not counting reserved, control and
  /// placeholder tokens. 0 keeps every word.
  int max_size = 0;
  int min_frequency = 1;
};

/// Token <-> id mapping with a fixed layout: 0 padding, 1 <unk>, 2 <s>,
/// 3 </s>, then control tokens, then placeholder tokens, then words by
/// descending frequency (ties in byte order).
class Vocab {
 public:
  static constexpr int kPad = 0;
  static constexpr int kUnk = 1;
  static constexpr int kBos = 2;
  static constexpr int kEos = 3;
  static constexpr int kReserved = 4;

  Vocab();
  static Vocab build(const std::vector<std::vector<std::string>>& corpus, const VocabOptions& options = {});
  /// Tokens for ids >= kReserved in id order, as stored in vocabulary files.
  static Vocab from_tokens(const std::vector<std::string>& tokens);

  int size() const { return static_cast<int>(tokens_.size()); }
  int id(const std::string& token) const;
  bool contains(const std::string& token) const { return index_.count(token) > 0; }
  const std::string& token(int id) const { return tokens_.at(static_cast<std::size_t>(id)); }
  std::vector<int> encode(const std::vector<std::string>& tokens) const;
  std::vector<std::string> decode(const std::vector<int>& ids) const;

  bool is_control(int id) const;
  bool is_placeholder(int id) const;
  /// Ids the generator may never produce: padding, <s>, control tokens.
  std::vector<std::uint8_t> emittable_mask() const;

  std::vector<std::string> file_tokens() const;
  void save(const std::string& path) const;
  static Vocab load(const std::string& path);

  bool operator==(const Vocab& other) const { return tokens_ == other.tokens_; }

 private:
  void push(const std::string& token);

  std::vector<std::string> tokens_;
  std::unordered_map<std::string, int> index_;
};

SNMT_NAMESPACE_END
