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
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "snmt/aligner.h"

SNMT_NAMESPACE_BEGIN

enum class EntityType {
  kNumeric,
  kMeasurement,
  kMoney,
  kPerson,
  kPersonTitle,
  kPersonFirstname,
  kPersonInitials,
  kPersonLastname,
  kPersonMiddlename,
  kLocation,
  kOrganization,
  kProduct,
  kSuffix,
  kTimexExpression,
  kDate,
  kDateDay,
  kDateMonth,
  kDateYear,
  kHour,
  kUrl,
};

inline constexpr int kEntityTypeCount = 20;

/// "__ent_numeric", "__ent_numex_money", ...
const std::string& placeholder_token(EntityType type);
std::optional<EntityType> entity_type_from_token(const std::string& token);
bool is_placeholder_token(const std::string& token);
/// All placeholder tokens in enumeration order.
const std::vector<std::string>& placeholder_tokens();

struct EntitySpan {
  EntityType type = EntityType::kNumeric;
  /// Token range [begin, end).
  int begin = 0;
  int end = 0;
  std::string value;
  std::string translation;

  bool operator==(const EntitySpan& other) const = default;
};

struct LexiconEntry {
  std::vector<std::string> tokens;
  EntityType type = EntityType::kPerson;
  std::string translation;
};

/// User lexicon of multi-token entities, matched longest first.
class Lexicon {
 public:
  void add(const std::string& surface, EntityType type, const std::string& translation = "");
  /// Lines of "surface<TAB>type[<TAB>translation]"; type is the
  /// placeholder token.
  static Lexicon load(const std::string& path);
  static Lexicon parse(const std::string& text);
  const std::vector<LexiconEntry>& entries() const { return entries_; }
  bool empty() const { return entries_.empty(); }

 private:
  std::vector<LexiconEntry> entries_;
};

/// Finds urls, numbers, money, measurements, dates, hours and time
/// expressions by pattern, then lexicon entries. Tokens may carry the
/// joiner marker. Spans never overlap.
std::vector<EntitySpan> recognize(const std::vector<std::string>& tokens, const Lexicon& lexicon = {});

/// Indices (source span, target span) of spans with equal type and at
/// least one alignment link between their ranges. Each span pairs at most
/// once.
std::vector<std::pair<int, int>> cross_validate(const std::vector<EntitySpan>& source,
                                                const std::vector<EntitySpan>& target,
                                                const AlignmentMatrix& alignment);

struct Substitution {
  /// Position of the placeholder token in the substituted sentence.
  int index = 0;
  EntityType type = EntityType::kNumeric;
  /// Original tokens joined by single spaces.
  std::string value;
  std::string translation;

  bool operator==(const Substitution& other) const = default;
};

struct SubstitutionResult {
  std::vector<std::string> tokens;
  std::vector<Substitution> record;
};

/// Replaces every span by its placeholder token. Overlapping or empty spans
/// are an error.
SubstitutionResult substitute(const std::vector<std::string>& tokens, std::vector<EntitySpan> spans);

/// Sidecar line: tab-separated "idx:type:value[:translation]" fields with
/// '%', ':' and tab percent-escaped inside values.
std::string format_record(const std::vector<Substitution>& record);
std::vector<Substitution> parse_record(const std::string& line);

/// Language-pair specific rewrite of a restored value.
class StructuralRule {
 public:
  virtual ~StructuralRule() = default;
  /// `source_next` is the source token after the entity, `target_next` the
  /// target token after the placeholder (empty when absent). Returns the
  /// rewritten value or nothing when the rule does not apply.
  virtual std::optional<std::string> rewrite(const std::string& value, const std::string& source_next,
                                             const std::string& target_next) const = 0;
};

/// Moves the decimal point of a number when the source scale word and the
/// target unit differ in magnitude, e.g. "1.4" + "billion" -> "억" gives
/// "14".
class DigitRegroupRule : public StructuralRule {
 public:
  DigitRegroupRule();
  DigitRegroupRule(std::map<std::string, int> source_scales, std::map<std::string, int> target_units);
  std::optional<std::string> rewrite(const std::string& value, const std::string& source_next,
                                     const std::string& target_next) const override;

 private:
  std::map<std::string, int> source_scales_;
  std::map<std::string, int> target_units_;
};

/// Multiplies a plain decimal string by 10^shift without going through
/// floating point. Grouping commas are dropped.
std::string shift_decimal(const std::string& number, int shift);

struct RestoreResult {
  std::vector<std::string> tokens;
  /// Target positions whose placeholder had no source occurrence.
  std::vector<int> unmatched;
};

/// Replaces target placeholders with source values. `attention[t]` is the
/// attention over the substituted source at target step t; it may be empty,
/// in which case occurrence order decides. `source_tokens` is the
/// substituted source sentence.
RestoreResult restore(const std::vector<std::string>& target, const std::vector<std::string>& source_tokens,
                      const std::vector<Substitution>& record, const std::vector<std::vector<double>>& attention,
                      const std::vector<const StructuralRule*>& rules = {});

/// Substitutes cross-validated entities on both sides of a sentence pair.
/// Returns nothing when the pair has no validated entity.
std::optional<std::pair<SubstitutionResult, SubstitutionResult>> substitute_pair(
    const std::vector<std::string>& source, const std::vector<std::string>& target,
    const AlignmentMatrix& alignment, const Lexicon& source_lexicon = {}, const Lexicon& target_lexicon = {});

SNMT_NAMESPACE_END
