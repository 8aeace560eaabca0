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

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "snmt/abi.h"

SNMT_NAMESPACE_BEGIN

class TextError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class CaseValue { kLower, kCapitalized, kUpper, kMixed, kNone };

/// Number of values of the case feature.
inline constexpr int kCaseFeatureSize = 5;

/// One-letter labels used in case feature files: L, C, U, M, N.
char case_label(CaseValue value);
CaseValue case_from_label(char label);
/// Feature index of a case value; `kNone` is 0 so that it doubles as the
/// padding value of shifted feature sequences.
int case_index(CaseValue value);
CaseValue case_from_index(int index);

inline constexpr const char* kJoinerMarker = "￭";

struct Token {
  std::string surface;
  CaseValue case_value = CaseValue::kNone;
  /// No space between this token and the previous one.
  bool joiner_left = false;
  /// No space between this token and the next one.
  bool joiner_right = false;
  /// Placeholder id for protected entities ("__ent_url", "__ent_numeric").
  std::string protected_as;
  /// Exact whitespace before this token when it is not a single space (or
  /// when this is the first token). Empty otherwise.
  std::string space_before;
  /// Trailing whitespace of the text; set on the last token only.
  std::string space_after;

  bool is_protected() const { return !protected_as.empty(); }
};

/// Splits text into word, number, url and punctuation tokens. Input must be
/// valid UTF-8; whitespace-only text yields no tokens.
std::vector<Token> tokenize(std::string_view text);
/// Inverse of tokenize on its own output. Tokens without spacing
/// information are separated by one space unless joined.
std::string detokenize(const std::vector<Token>& tokens);

/// Tokens joined by single spaces; a joined token carries a leading "￭".
std::string format_tokens(const std::vector<Token>& tokens);
std::vector<Token> parse_tokens(std::string_view line);
std::vector<std::string> surfaces(const std::vector<Token>& tokens);

CaseValue classify_case(std::string_view word);
std::string to_lower(std::string_view word);
std::string to_upper(std::string_view word);

struct CaseSplit {
  std::vector<Token> tokens;
  std::vector<CaseValue> cases;
};

/// Lowercases every token whose case is restorable; mixed-case tokens keep
/// their surface.
CaseSplit case_split(const std::vector<Token>& tokens);
std::vector<Token> case_restore(const std::vector<Token>& tokens, const std::vector<CaseValue>& cases);
/// String form of case_restore for decoder output.
std::string restore_case(std::string_view word, CaseValue value);

// UTF-8 helpers shared by the other text modules.
bool is_valid_utf8(std::string_view text);
std::vector<char32_t> decode_utf8(std::string_view text);
void append_utf8(std::string& out, char32_t cp);
std::vector<std::string> split_whitespace(std::string_view line);
std::string join(const std::vector<std::string>& items, std::string_view sep = " ");

SNMT_NAMESPACE_END
