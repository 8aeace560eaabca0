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

#include "snmt/placeholders.h"

#include <algorithm>
#include <fstream>
#include <regex>
#include <set>
#include <sstream>
#include <stdexcept>

#include "snmt/textproc.h"
#include "snmt/vocab.h"

SNMT_NAMESPACE_BEGIN

const std::vector<std::string>& placeholder_tokens() {
  static const std::vector<std::string> tokens = {
      "__ent_numeric",          "__ent_numex_measurement", "__ent_numex_money",     "__ent_person",
      "__ent_person_title",     "__ent_person_firstname",  "__ent_person_initials", "__ent_person_lastname",
      "__ent_person_middlename", "__ent_location",         "__ent_organization",    "__ent_product",
      "__ent_suffix",           "__ent_timex_expression",  "__ent_date",            "__ent_date_day",
      "__ent_date_month",       "__ent_date_year",         "__ent_hour",            "__ent_url",
  };
  return tokens;
}

const std::string& placeholder_token(EntityType type) {
  return placeholder_tokens().at(static_cast<std::size_t>(type));
}

std::optional<EntityType> entity_type_from_token(const std::string& token) {
  const auto& all = placeholder_tokens();
  auto it = std::find(all.begin(), all.end(), token);
  if (it == all.end()) return std::nullopt;
  return static_cast<EntityType>(it - all.begin());
}

bool is_placeholder_token(const std::string& token) { return entity_type_from_token(token).has_value(); }

namespace {

std::string strip_joiner(const std::string& token) {
  const std::string marker = kJoinerMarker;
  if (token.size() > marker.size() && token.compare(0, marker.size(), marker) == 0) return token.substr(marker.size());
  return token;
}

const std::regex& number_re() {
  static const std::regex re(R"([+-]?\d+([.,:/-]\d+)*)");
  return re;
}

bool is_number(const std::string& s) { return std::regex_match(s, number_re()); }

bool is_iso_date(const std::string& s) {
  static const std::regex re(R"(\d{4}-\d{1,2}-\d{1,2}|\d{1,2}/\d{1,2}/\d{2,4})");
  return std::regex_match(s, re);
}

bool is_hour(const std::string& s) {
  static const std::regex re(R"(([01]?\d|2[0-3]):[0-5]\d(:[0-5]\d)?)");
  return std::regex_match(s, re);
}

bool is_year(const std::string& s) {
  static const std::regex re(R"(1\d{3}|2\d{3})");
  return std::regex_match(s, re);
}

bool is_day_number(const std::string& s) {
  static const std::regex re(R"(0?[1-9]|[12]\d|3[01])");
  return std::regex_match(s, re);
}

bool in(const std::set<std::string>& words, const std::string& w) { return words.count(w) > 0; }

const std::set<std::string> kMonths = {"january", "february", "march",     "april",   "may",      "june",
                                       "july",    "august",   "september", "october", "november", "december",
                                       "jan",     "feb",      "mar",       "apr",     "jun",      "jul",
                                       "aug",     "sep",      "sept",      "oct",     "nov",      "dec"};
// Month names that are also common words need a following day or year.
const std::set<std::string> kAmbiguousMonths = {"may", "march", "mar", "jan", "dec", "sep", "oct", "nov",
                                                "aug", "jun",   "jul", "apr", "feb"};
const std::set<std::string> kWeekdays = {"monday", "tuesday", "wednesday", "thursday", "friday", "saturday", "sunday"};
const std::set<std::string> kTimex = {"today", "tomorrow", "yesterday", "tonight"};
const std::set<std::string> kCurrencySymbols = {"$", "€", "£", "¥", "₩"};
const std::set<std::string> kCurrencyWords = {"usd", "eur", "gbp", "jpy", "krw", "dollars", "dollar",
                                              "euros", "euro", "pounds", "yen",  "won"};
const std::set<std::string> kUnits = {"km", "m",     "cm",     "mm",   "kg",    "g",     "mg",   "l",
                                      "ml", "%",     "percent", "miles", "mile", "feet",  "ft",   "inches",
                                      "lb", "lbs",   "kilometers", "meters", "kilograms", "grams", "mph", "kmh",
                                      "°c", "°f",    "degrees", "hours", "minutes", "seconds", "tons", "gb",
                                      "mb", "kb",    "tb",     "ghz",  "mhz",   "kw",    "w",    "v"};
const std::set<std::string> kYearCues = {"in", "since", "until", "year", "by", "from"};

std::vector<std::string> lower_tokens(const std::vector<std::string>& tokens) {
  std::vector<std::string> out;
  out.reserve(tokens.size());
  for (const auto& t : tokens) out.push_back(to_lower(strip_joiner(t)));
  return out;
}

std::string join_range(const std::vector<std::string>& tokens, int b, int e) {
  std::string out;
  for (int i = b; i < e; ++i) {
    if (i > b) out += ' ';
    out += tokens[static_cast<std::size_t>(i)];
  }
  return out;
}

// Pattern match starting at i; returns (type, length) or length 0.
std::pair<EntityType, int> match_pattern(const std::vector<std::string>& low, int i) {
  const int n = static_cast<int>(low.size());
  const std::string& w = low[static_cast<std::size_t>(i)];
  auto at = [&](int k) -> const std::string& {
    static const std::string empty;
    return k < n ? low[static_cast<std::size_t>(k)] : empty;
  };
  if (w.rfind("http://", 0) == 0 || w.rfind("https://", 0) == 0 || w.rfind("ftp://", 0) == 0 ||
      w.rfind("www.", 0) == 0)
    return {EntityType::kUrl, 1};
  if (in(kCurrencySymbols, w) && is_number(at(i + 1))) return {EntityType::kMoney, 2};
  if (is_number(w)) {
    if (is_iso_date(w)) return {EntityType::kDate, 1};
    if (is_hour(w)) {
      const std::string& next = at(i + 1);
      return {EntityType::kHour, (next == "am" || next == "pm" || next == "a.m." || next == "p.m.") ? 2 : 1};
    }
    if (in(kCurrencySymbols, at(i + 1)) || in(kCurrencyWords, at(i + 1))) return {EntityType::kMoney, 2};
    if (in(kUnits, at(i + 1))) return {EntityType::kMeasurement, 2};
    if (is_year(w) && i > 0 && in(kYearCues, low[static_cast<std::size_t>(i - 1)])) return {EntityType::kDateYear, 1};
    return {EntityType::kNumeric, 1};
  }
  if (in(kMonths, w)) {
    if (is_day_number(at(i + 1))) {
      if (at(i + 2) == "," && is_year(at(i + 3))) return {EntityType::kDate, 4};
      if (is_year(at(i + 2))) return {EntityType::kDate, 3};
      return {EntityType::kDate, 2};
    }
    if (is_year(at(i + 1))) return {EntityType::kDate, 2};
    if (!in(kAmbiguousMonths, w)) return {EntityType::kDateMonth, 1};
  }
  if (in(kWeekdays, w)) return {EntityType::kDateDay, 1};
  if (in(kTimex, w)) return {EntityType::kTimexExpression, 1};
  return {EntityType::kNumeric, 0};
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '%') out += "%25";
    else if (c == ':') out += "%3A";
    else if (c == '\t') out += "%09";
    else out += c;
  }
  return out;
}

std::string unescape(const std::string& s) {
  std::string out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '%' && i + 2 < s.size()) {
      const std::string code = s.substr(i + 1, 2);
      if (code == "25") out += '%';
      else if (code == "3A") out += ':';
      else if (code == "09") out += '\t';
      else throw std::runtime_error("substitution record: bad escape %" + code);
      i += 2;
    } else {
      out += s[i];
    }
  }
  return out;
}

}  // namespace

void Lexicon::add(const std::string& surface, EntityType type, const std::string& translation) {
  LexiconEntry e;
  for (const auto& t : split_whitespace(surface)) e.tokens.push_back(to_lower(t));
  if (e.tokens.empty()) throw std::invalid_argument("lexicon: empty surface");
  e.type = type;
  e.translation = translation;
  entries_.push_back(std::move(e));
  std::stable_sort(entries_.begin(), entries_.end(),
                   [](const LexiconEntry& a, const LexiconEntry& b) { return a.tokens.size() > b.tokens.size(); });
}

Lexicon Lexicon::parse(const std::string& text) {
  Lexicon lex;
  std::istringstream is(text);
  std::string line;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::size_t start = 0;
    for (;;) {
      const auto tab = line.find('\t', start);
      fields.push_back(line.substr(start, tab - start));
      if (tab == std::string::npos) break;
      start = tab + 1;
    }
    if (fields.size() < 2 || fields.size() > 3)
      throw std::runtime_error("lexicon line " + std::to_string(line_no) + ": expected surface<TAB>type[<TAB>translation]");
    auto type = entity_type_from_token(fields[1]);
    if (!type) throw std::runtime_error("lexicon line " + std::to_string(line_no) + ": unknown type '" + fields[1] + "'");
    lex.add(fields[0], *type, fields.size() == 3 ? fields[2] : "");
  }
  return lex;
}

Lexicon Lexicon::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return parse(os.str());
}

std::vector<EntitySpan> recognize(const std::vector<std::string>& tokens, const Lexicon& lexicon) {
  const auto low = lower_tokens(tokens);
  const int n = static_cast<int>(tokens.size());
  std::vector<EntitySpan> spans;
  int i = 0;
  while (i < n) {
    const LexiconEntry* hit = nullptr;
    for (const auto& e : lexicon.entries()) {
      const int len = static_cast<int>(e.tokens.size());
      if (i + len > n) continue;
      if (std::equal(e.tokens.begin(), e.tokens.end(), low.begin() + i)) {
        hit = &e;
        break;
      }
    }
    if (hit) {
      const int len = static_cast<int>(hit->tokens.size());
      spans.push_back({hit->type, i, i + len, join_range(tokens, i, i + len), hit->translation});
      i += len;
      continue;
    }
    const auto [type, len] = match_pattern(low, i);
    if (len > 0) {
      spans.push_back({type, i, i + len, join_range(tokens, i, i + len), ""});
      i += len;
    } else {
      ++i;
    }
  }
  return spans;
}

std::vector<std::pair<int, int>> cross_validate(const std::vector<EntitySpan>& source,
                                                const std::vector<EntitySpan>& target,
                                                const AlignmentMatrix& alignment) {
  std::vector<std::pair<int, int>> out;
  std::vector<bool> used(target.size(), false);
  for (std::size_t i = 0; i < source.size(); ++i) {
    for (std::size_t j = 0; j < target.size(); ++j) {
      if (used[j] || source[i].type != target[j].type) continue;
      bool linked = false;
      for (int s = source[i].begin; s < source[i].end && !linked; ++s)
        for (int t = target[j].begin; t < target[j].end && !linked; ++t) linked = alignment.has_link(s, t);
      if (linked) {
        used[j] = true;
        out.emplace_back(static_cast<int>(i), static_cast<int>(j));
        break;
      }
    }
  }
  return out;
}

SubstitutionResult substitute(const std::vector<std::string>& tokens, std::vector<EntitySpan> spans) {
  std::sort(spans.begin(), spans.end(), [](const EntitySpan& a, const EntitySpan& b) { return a.begin < b.begin; });
  const int n = static_cast<int>(tokens.size());
  for (std::size_t k = 0; k < spans.size(); ++k) {
    if (spans[k].begin < 0 || spans[k].end > n || spans[k].begin >= spans[k].end)
      throw std::invalid_argument("substitute: invalid span");
    if (k > 0 && spans[k].begin < spans[k - 1].end) throw std::invalid_argument("substitute: overlapping spans");
  }
  SubstitutionResult out;
  int i = 0;
  for (const auto& span : spans) {
    for (; i < span.begin; ++i) out.tokens.push_back(tokens[static_cast<std::size_t>(i)]);
    Substitution sub;
    sub.index = static_cast<int>(out.tokens.size());
    sub.type = span.type;
    sub.value = join_range(tokens, span.begin, span.end);
    sub.translation = span.translation;
    out.record.push_back(std::move(sub));
    out.tokens.push_back(placeholder_token(span.type));
    i = span.end;
  }
  for (; i < n; ++i) out.tokens.push_back(tokens[static_cast<std::size_t>(i)]);
  return out;
}

std::string format_record(const std::vector<Substitution>& record) {
  std::string out;
  for (std::size_t k = 0; k < record.size(); ++k) {
    if (k) out += '\t';
    out += std::to_string(record[k].index) + ":" + placeholder_token(record[k].type) + ":" + escape(record[k].value);
    if (!record[k].translation.empty()) out += ":" + escape(record[k].translation);
  }
  return out;
}

std::vector<Substitution> parse_record(const std::string& line) {
  std::vector<Substitution> out;
  if (line.empty()) return out;
  std::size_t start = 0;
  for (;;) {
    const auto tab = line.find('\t', start);
    const std::string field = line.substr(start, tab - start);
    std::vector<std::string> parts;
    std::size_t p = 0;
    for (;;) {
      const auto colon = field.find(':', p);
      parts.push_back(field.substr(p, colon - p));
      if (colon == std::string::npos) break;
      p = colon + 1;
    }
    if (parts.size() < 3 || parts.size() > 4) throw std::runtime_error("substitution record: malformed field '" + field + "'");
    Substitution s;
    try {
      s.index = std::stoi(parts[0]);
    } catch (const std::exception&) {
      throw std::runtime_error("substitution record: bad index '" + parts[0] + "'");
    }
    auto type = entity_type_from_token(parts[1]);
    if (!type) throw std::runtime_error("substitution record: unknown type '" + parts[1] + "'");
    s.type = *type;
    s.value = unescape(parts[2]);
    if (parts.size() == 4) s.translation = unescape(parts[3]);
    out.push_back(std::move(s));
    if (tab == std::string::npos) break;
    start = tab + 1;
  }
  return out;
}

std::string shift_decimal(const std::string& number, int shift) {
  std::string s = number;
  std::string sign;
  if (!s.empty() && (s[0] == '+' || s[0] == '-')) {
    if (s[0] == '-') sign = "-";
    s = s.substr(1);
  }
  s.erase(std::remove(s.begin(), s.end(), ','), s.end());
  const auto dot = s.find('.');
  std::string int_part = s.substr(0, dot);
  std::string frac_part = dot == std::string::npos ? "" : s.substr(dot + 1);
  if (int_part.empty() && frac_part.empty()) throw std::invalid_argument("shift_decimal: not a number");
  for (char c : int_part + frac_part)
    if (c < '0' || c > '9') throw std::invalid_argument("shift_decimal: not a number: " + number);
  std::string digits = int_part + frac_part;
  long point = static_cast<long>(int_part.size()) + shift;
  if (point < 0) {
    digits.insert(0, static_cast<std::size_t>(-point), '0');
    point = 0;
  }
  if (point > static_cast<long>(digits.size())) digits.append(static_cast<std::size_t>(point) - digits.size(), '0');
  std::string ip = digits.substr(0, static_cast<std::size_t>(point));
  std::string fp = digits.substr(static_cast<std::size_t>(point));
  while (ip.size() > 1 && ip[0] == '0') ip.erase(0, 1);
  if (ip.empty()) ip = "0";
  while (!fp.empty() && fp.back() == '0') fp.pop_back();
  std::string out = ip + (fp.empty() ? "" : "." + fp);
  if (out == "0") sign.clear();
  return sign + out;
}

DigitRegroupRule::DigitRegroupRule()
    : DigitRegroupRule({{"thousand", 3}, {"million", 6}, {"billion", 9}, {"trillion", 12}},
                       {{"만", 4}, {"억", 8}, {"조", 12}}) {}

DigitRegroupRule::DigitRegroupRule(std::map<std::string, int> source_scales, std::map<std::string, int> target_units)
    : source_scales_(std::move(source_scales)), target_units_(std::move(target_units)) {}

std::optional<std::string> DigitRegroupRule::rewrite(const std::string& value, const std::string& source_next,
                                                     const std::string& target_next) const {
  auto s = source_scales_.find(to_lower(strip_joiner(source_next)));
  auto t = target_units_.find(strip_joiner(target_next));
  if (s == source_scales_.end() || t == target_units_.end()) return std::nullopt;
  const std::string plain = strip_joiner(value);
  static const std::regex decimal(R"([+-]?\d{1,3}(,\d{3})*(\.\d+)?|[+-]?\d+(\.\d+)?)");
  if (!std::regex_match(plain, decimal)) return std::nullopt;
  return shift_decimal(plain, s->second - t->second);
}

RestoreResult restore(const std::vector<std::string>& target, const std::vector<std::string>& source_tokens,
                      const std::vector<Substitution>& record, const std::vector<std::vector<double>>& attention,
                      const std::vector<const StructuralRule*>& rules) {
  RestoreResult out;
  std::map<EntityType, int> emitted;
  for (std::size_t t = 0; t < target.size(); ++t) {
    const auto type = entity_type_from_token(strip_joiner(target[t]));
    if (!type) {
      out.tokens.push_back(target[t]);
      continue;
    }
    std::vector<const Substitution*> candidates;
    for (const auto& s : record)
      if (s.type == *type) candidates.push_back(&s);
    const int k = emitted[*type]++;
    if (candidates.empty()) {
      out.tokens.push_back(kUnkToken);
      out.unmatched.push_back(static_cast<int>(t));
      continue;
    }
    const Substitution* chosen = nullptr;
    if (t < attention.size() && !attention[t].empty()) {
      double best = -1;
      for (const auto* c : candidates) {
        const double a = c->index < static_cast<int>(attention[t].size())
                             ? attention[t][static_cast<std::size_t>(c->index)]
                             : -1.0;
        if (a > best) {
          best = a;
          chosen = c;
        }
      }
    }
    if (!chosen) chosen = candidates[static_cast<std::size_t>(std::min<int>(k, static_cast<int>(candidates.size()) - 1))];

    std::string value = chosen->translation.empty() ? chosen->value : chosen->translation;
    const std::string source_next = chosen->index + 1 < static_cast<int>(source_tokens.size())
                                        ? source_tokens[static_cast<std::size_t>(chosen->index) + 1]
                                        : std::string();
    const std::string target_next = t + 1 < target.size() ? target[t + 1] : std::string();
    for (const auto* rule : rules)
      if (auto rewritten = rule->rewrite(value, source_next, target_next)) value = *rewritten;

    auto pieces = split_whitespace(value);
    if (pieces.empty()) pieces.push_back(value);
    pieces.front() = strip_joiner(pieces.front());
    // A joined placeholder keeps its joiner on the restored value.
    if (strip_joiner(target[t]) != target[t]) pieces.front() = kJoinerMarker + pieces.front();
    out.tokens.insert(out.tokens.end(), pieces.begin(), pieces.end());
  }
  return out;
}

std::optional<std::pair<SubstitutionResult, SubstitutionResult>> substitute_pair(
    const std::vector<std::string>& source, const std::vector<std::string>& target,
    const AlignmentMatrix& alignment, const Lexicon& source_lexicon, const Lexicon& target_lexicon) {
  const auto src_spans = recognize(source, source_lexicon);
  const auto tgt_spans = recognize(target, target_lexicon);
  const auto pairs = cross_validate(src_spans, tgt_spans, alignment);
  if (pairs.empty()) return std::nullopt;
  std::vector<EntitySpan> keep_src, keep_tgt;
  for (const auto& [i, j] : pairs) {
    keep_src.push_back(src_spans[static_cast<std::size_t>(i)]);
    keep_tgt.push_back(tgt_spans[static_cast<std::size_t>(j)]);
  }
  return std::make_pair(substitute(source, keep_src), substitute(target, keep_tgt));
}

SNMT_NAMESPACE_END
