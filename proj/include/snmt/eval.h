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

#include <array>
#include <string>
#include <vector>

#include "snmt/abi.h"

SNMT_NAMESPACE_BEGIN

using TokenLine = std::vector<std::string>;

struct BleuStats {
  /// Clipped matches and hypothesis n-gram counts for n = 1..4.
  std::array<long long, 4> matches{};
  std::array<long long, 4> totals{};
  long long hypothesis_length = 0;
  long long reference_length = 0;

  void add(const BleuStats& other);
};

BleuStats bleu_stats(const TokenLine& hypothesis, const TokenLine& reference);

struct BleuScore {
  double score = 0;
  std::array<double, 4> precisions{};
  double brevity_penalty = 1;
  BleuStats stats;
};

/// Corpus BLEU-4 in [0, 100] over whitespace tokens. Line counts must match
/// and the set must be non-empty.
BleuScore corpus_bleu(const std::vector<TokenLine>& hypotheses, const std::vector<TokenLine>& references,
                      bool lowercase = false);

/// Sentence BLEU with add-one smoothing of every n-gram precision, in
/// [0, 1].
double sentence_bleu(const TokenLine& hypothesis, const TokenLine& reference);

SNMT_NAMESPACE_END
