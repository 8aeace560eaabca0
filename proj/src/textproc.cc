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

#include "snmt/textproc.h"

#include <algorithm>
#include <array>

SNMT_NAMESPACE_BEGIN

namespace {

// Decodes one code point at `pos`; returns its byte length or 0 if the
// sequence is malformed.
int decode_one(std::string_view s, std::size_t pos, char32_t& cp) {
  const auto b0 = static_cast<unsigned char>(s[pos]);
  int len;
  char32_t min;
  if (b0 < 0x80) {
    cp = b0;
    return 1;
  } else if ((b0 & 0xE0) == 0xC0) {
    len = 2, cp = b0 & 0x1F, min = 0x80;
  } else if ((b0 & 0xF0) == 0xE0) {
    len = 3, cp = b0 & 0x0F, min = 0x800;
  } else if ((b0 & 0xF8) == 0xF0) {
    len = 4, cp = b0 & 0x07, min = 0x10000;
  } else {
    return 0;
  }
  if (pos + static_cast<std::size_t>(len) > s.size()) return 0;
  for (int i = 1; i < len; ++i) {
    const auto b = static_cast<unsigned char>(s[pos + static_cast<std::size_t>(i)]);
    if ((b & 0xC0) != 0x80) return 0;
    cp = (cp << 6) | (b & 0x3F);
  }
  if (cp < min || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) return 0;
  return len;
}

struct CodePoint {
  char32_t cp;
  std::size_t begin;
  std::size_t end;
};

std::vector<CodePoint> code_points(std::string_view s) {
  std::vector<CodePoint> out;
  std::size_t pos = 0;
  while (pos < s.size()) {
    char32_t cp;
    const int len = decode_one(s, pos, cp);
    if (len == 0) throw TextError("invalid UTF-8 at byte " + std::to_string(pos));
    out.push_back({cp, pos, pos + static_cast<std::size_t>(len)});
    pos += static_cast<std::size_t>(len);
  }
  return out;
}

bool is_space(char32_t c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f'; }

bool is_digit(char32_t c) { return c >= '0' && c <= '9'; }

bool is_ascii_letter(char32_t c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'); }

// Punctuation and symbol blocks outside ASCII; everything else above 0x7F
// is treated as part of a word.
bool is_unicode_punct(char32_t c) {
  return (c >= 0x00A1 && c <= 0x00BF && c != 0x00AA && c != 0x00B5 && c != 0x00BA) || c == 0x00D7 ||
         c == 0x00F7 || (c >= 0x2000 && c <= 0x206F) || (c >= 0x20A0 && c <= 0x20CF) ||
         (c >= 0x2190 && c <= 0x23FF) || (c >= 0x25A0 && c <= 0x27BF) || (c >= 0x27E6 && c <= 0x27EF) ||
         (c >= 0x3000 && c <= 0x303F) || (c >= 0xFF01 && c <= 0xFF0F) || (c >= 0xFF1A && c <= 0xFF20) ||
         c == 0xFFE8;
}

bool is_word_char(char32_t c) {
  if (c < 0x80) return is_ascii_letter(c);
  return !is_unicode_punct(c) && !is_space(c);
}

// Upper/lower pairs for the scripts handled by case restoration. Only
// letters with a one-to-one mapping are cased; others count as uncased.
char32_t lower_of(char32_t c) {
  if (c >= 'A' && c <= 'Z') return c + 32;
  if (c >= 0x00C0 && c <= 0x00DE && c != 0x00D7) return c + 32;
  if (c == 0x0178) return 0x00FF;
  if ((c >= 0x0100 && c <= 0x0137) || (c >= 0x014A && c <= 0x0177)) return (c % 2 == 0) ? c + 1 : 0;
  if ((c >= 0x0139 && c <= 0x0148) || (c >= 0x0179 && c <= 0x017E)) return (c % 2 == 1) ? c + 1 : 0;
  if (c >= 0x0391 && c <= 0x03A9 && c != 0x03A2) return c + 32;
  if (c >= 0x0410 && c <= 0x042F) return c + 32;
  if (c >= 0x0400 && c <= 0x040F) return c + 80;
  return 0;
}

char32_t upper_of(char32_t c) {
  if (c >= 'a' && c <= 'z') return c - 32;
  if (c >= 0x00E0 && c <= 0x00FE && c != 0x00F7) return c - 32;
  if (c == 0x00FF) return 0x0178;
  if ((c >= 0x0101 && c <= 0x0137) || (c >= 0x014B && c <= 0x0177)) return (c % 2 == 1) ? c - 1 : 0;
  if ((c >= 0x013A && c <= 0x0148) || (c >= 0x017A && c <= 0x017E)) return (c % 2 == 0) ? c - 1 : 0;
  if (c >= 0x03B1 && c <= 0x03C9 && c != 0x03C2) return c - 32;
  if (c >= 0x0430 && c <= 0x044F) return c - 32;
  if (c >= 0x0450 && c <= 0x045F) return c - 80;
  return 0;
}

bool is_upper(char32_t c) { return lower_of(c) != 0; }
bool is_lower(char32_t c) { return upper_of(c) != 0; }

std::string map_case(std::string_view word, bool upper, bool first_only) {
  std::string out;
  out.reserve(word.size());
  bool done = false;
  for (const auto& p : code_points(word)) {
    char32_t c = p.cp;
    const bool cased = is_upper(c) || is_lower(c);
    if (cased && !done) {
      if (upper && is_lower(c)) c = upper_of(c);
      if (!upper && is_upper(c)) c = lower_of(c);
      if (first_only) done = true;
    }
    append_utf8(out, c);
  }
  return out;
}

bool starts_with(const std::vector<CodePoint>& cps, std::size_t i, std::string_view prefix) {
  for (std::size_t k = 0; k < prefix.size(); ++k) {
    if (i + k >= cps.size()) return false;
    char32_t c = cps[i + k].cp;
    if (c >= 'A' && c <= 'Z') c += 32;
    if (c != static_cast<unsigned char>(prefix[k])) return false;
  }
  return true;
}

bool is_url_trailer(char32_t c) {
  return c == '.' || c == ',' || c == ';' || c == ':' || c == '!' || c == '?' || c == ')' || c == ']' ||
         c == '}' || c == '\'' || c == '"';
}

// Length in code points of a number starting at i, 0 if none. Numbers are
// digit runs joined by single separators: 1,000  1.4  10:30  2016-12-01.
std::size_t match_number(const std::vector<CodePoint>& cps, std::size_t i, std::size_t end) {
  std::size_t j = i;
  if (j < end && (cps[j].cp == '-' || cps[j].cp == '+') && j + 1 < end && is_digit(cps[j + 1].cp)) ++j;
  if (j >= end || !is_digit(cps[j].cp)) return 0;
  while (j < end && is_digit(cps[j].cp)) ++j;
  while (j + 1 < end) {
    const char32_t sep = cps[j].cp;
    if ((sep == '.' || sep == ',' || sep == ':' || sep == '/' || sep == '-') && is_digit(cps[j + 1].cp)) {
      j += 1;
      while (j < end && is_digit(cps[j].cp)) ++j;
    } else {
      break;
    }
  }
  return j - i;
}

std::size_t match_url(const std::vector<CodePoint>& cps, std::size_t i, std::size_t end) {
  static constexpr std::array<std::string_view, 4> kPrefixes = {"http://", "https://", "ftp://", "www."};
  bool found = false;
  for (auto p : kPrefixes)
    if (starts_with(cps, i, p) && i + p.size() < end) found = true;
  if (!found) return 0;
  std::size_t j = end;
  while (j > i && is_url_trailer(cps[j - 1].cp)) --j;
  return j - i;
}

}  // namespace

char case_label(CaseValue value) {
  switch (value) {
    case CaseValue::kLower:
      return 'L';
    case CaseValue::kCapitalized:
      return 'C';
    case CaseValue::kUpper:
      return 'U';
    case CaseValue::kMixed:
      return 'M';
    case CaseValue::kNone:
      return 'N';
  }
  return 'N';
}

CaseValue case_from_label(char label) {
  switch (label) {
    case 'L':
      return CaseValue::kLower;
    case 'C':
      return CaseValue::kCapitalized;
    case 'U':
      return CaseValue::kUpper;
    case 'M':
      return CaseValue::kMixed;
    case 'N':
      return CaseValue::kNone;
  }
  throw TextError(std::string("unknown case label '") + label + "'");
}

int case_index(CaseValue value) {
  switch (value) {
    case CaseValue::kNone:
      return 0;
    case CaseValue::kLower:
      return 1;
    case CaseValue::kCapitalized:
      return 2;
    case CaseValue::kUpper:
      return 3;
    case CaseValue::kMixed:
      return 4;
  }
  return 0;
}

CaseValue case_from_index(int index) {
  static constexpr std::array<CaseValue, 5> kOrder = {CaseValue::kNone, CaseValue::kLower, CaseValue::kCapitalized,
                                                      CaseValue::kUpper, CaseValue::kMixed};
  if (index < 0 || index >= kCaseFeatureSize) throw TextError("case index out of range");
  return kOrder[static_cast<std::size_t>(index)];
}

bool is_valid_utf8(std::string_view text) {
  std::size_t pos = 0;
  while (pos < text.size()) {
    char32_t cp;
    const int len = decode_one(text, pos, cp);
    if (len == 0) return false;
    pos += static_cast<std::size_t>(len);
  }
  return true;
}

std::vector<char32_t> decode_utf8(std::string_view text) {
  std::vector<char32_t> out;
  for (const auto& p : code_points(text)) out.push_back(p.cp);
  return out;
}

void append_utf8(std::string& out, char32_t cp) {
  if (cp < 0x80) {
    out += static_cast<char>(cp);
  } else if (cp < 0x800) {
    out += static_cast<char>(0xC0 | (cp >> 6));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else if (cp < 0x10000) {
    out += static_cast<char>(0xE0 | (cp >> 12));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else {
    out += static_cast<char>(0xF0 | (cp >> 18));
    out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  }
}

std::vector<Token> tokenize(std::string_view text) {
  const auto cps = code_points(text);
  std::vector<Token> tokens;
  std::string pending_space;
  bool at_start = true;
  std::size_t i = 0;
  while (i < cps.size()) {
    if (is_space(cps[i].cp)) {
      pending_space += std::string(text.substr(cps[i].begin, cps[i].end - cps[i].begin));
      ++i;
      continue;
    }
    // A chunk is a maximal run of non-space characters.
    std::size_t end = i;
    while (end < cps.size() && !is_space(cps[end].cp)) ++end;
    bool first_in_chunk = true;
    while (i < end) {
      std::size_t len = 0;
      std::string protect;
      const char32_t c = cps[i].cp;
      if ((len = match_url(cps, i, end)) > 0) {
        protect = "__ent_url";
      } else if ((len = match_number(cps, i, end)) > 0 &&
                 (is_digit(c) || first_in_chunk || !is_word_char(cps[i - 1].cp))) {
        protect = "__ent_numeric";
      } else if (is_word_char(c)) {
        len = 1;
        while (i + len < end && is_word_char(cps[i + len].cp)) ++len;
      } else {
        len = 1;
      }
      Token tok;
      tok.surface = std::string(text.substr(cps[i].begin, cps[i + len - 1].end - cps[i].begin));
      tok.protected_as = protect;
      tok.case_value = protect.empty() ? classify_case(tok.surface) : CaseValue::kNone;
      if (first_in_chunk) {
        if (at_start || pending_space != " ") tok.space_before = pending_space;
        pending_space.clear();
      } else {
        tok.joiner_left = true;
        tokens.back().joiner_right = true;
      }
      tokens.push_back(std::move(tok));
      at_start = false;
      first_in_chunk = false;
      i += len;
    }
  }
  if (!tokens.empty()) tokens.back().space_after = pending_space;
  return tokens;
}

std::string detokenize(const std::vector<Token>& tokens) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const Token& t = tokens[i];
    if (!t.space_before.empty()) {
      out += t.space_before;
    } else if (i > 0 && !t.joiner_left && !tokens[i - 1].joiner_right) {
      out += ' ';
    }
    out += t.surface;
  }
  if (!tokens.empty()) out += tokens.back().space_after;
  return out;
}

std::string format_tokens(const std::vector<Token>& tokens) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out += ' ';
    if (tokens[i].joiner_left) out += kJoinerMarker;
    out += tokens[i].surface;
  }
  return out;
}

std::vector<Token> parse_tokens(std::string_view line) {
  const std::string_view marker = kJoinerMarker;
  std::vector<Token> tokens;
  for (auto& piece : split_whitespace(line)) {
    Token t;
    if (piece.size() > marker.size() && std::string_view(piece).substr(0, marker.size()) == marker) {
      t.joiner_left = true;
      piece.erase(0, marker.size());
      if (!tokens.empty()) tokens.back().joiner_right = true;
    }
    t.surface = std::move(piece);
    t.case_value = classify_case(t.surface);
    tokens.push_back(std::move(t));
  }
  return tokens;
}

std::vector<std::string> surfaces(const std::vector<Token>& tokens) {
  std::vector<std::string> out;
  out.reserve(tokens.size());
  for (const auto& t : tokens) out.push_back(t.surface);
  return out;
}

CaseValue classify_case(std::string_view word) {
  int upper = 0, lower = 0;
  bool first_upper = false, seen = false;
  for (const auto& p : code_points(word)) {
    const bool u = is_upper(p.cp), l = is_lower(p.cp);
    if (!u && !l) continue;
    if (!seen) first_upper = u;
    seen = true;
    upper += u;
    lower += l;
  }
  if (!seen) return CaseValue::kNone;
  if (upper == 0) return CaseValue::kLower;
  if (lower == 0 && upper >= 2) return CaseValue::kUpper;
  if (first_upper && upper == 1) return CaseValue::kCapitalized;
  return CaseValue::kMixed;
}

std::string to_lower(std::string_view word) { return map_case(word, false, false); }
std::string to_upper(std::string_view word) { return map_case(word, true, false); }

CaseSplit case_split(const std::vector<Token>& tokens) {
  CaseSplit out;
  out.tokens = tokens;
  for (auto& t : out.tokens) {
    const CaseValue v = classify_case(t.surface);
    if (v != CaseValue::kMixed) t.surface = to_lower(t.surface);
    t.case_value = v;
    out.cases.push_back(v);
  }
  return out;
}

std::string restore_case(std::string_view word, CaseValue value) {
  switch (value) {
    case CaseValue::kCapitalized:
      return map_case(word, true, true);
    case CaseValue::kUpper:
      return to_upper(word);
    default:
      return std::string(word);
  }
}

std::vector<Token> case_restore(const std::vector<Token>& tokens, const std::vector<CaseValue>& cases) {
  if (tokens.size() != cases.size())
    throw std::invalid_argument("case_restore: " + std::to_string(tokens.size()) + " tokens but " +
                                std::to_string(cases.size()) + " case values");
  std::vector<Token> out = tokens;
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i].surface = restore_case(out[i].surface, cases[i]);
    out[i].case_value = cases[i];
  }
  return out;
}

std::vector<std::string> split_whitespace(std::string_view line) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r' || line[i] == '\n')) ++i;
    std::size_t j = i;
    while (j < line.size() && !(line[j] == ' ' || line[j] == '\t' || line[j] == '\r' || line[j] == '\n')) ++j;
    if (j > i) out.emplace_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

std::string join(const std::vector<std::string>& items, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += sep;
    out += items[i];
  }
  return out;
}

SNMT_NAMESPACE_END
