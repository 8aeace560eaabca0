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

#include "snmt/eval.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include "snmt/textproc.h"

SNMT_NAMESPACE_BEGIN

void BleuStats::add(const BleuStats& other) {
  for (int n = 0; n < 4; ++n) {
    matches[static_cast<std::size_t>(n)] += other.matches[static_cast<std::size_t>(n)];
    totals[static_cast<std::size_t>(n)] += other.totals[static_cast<std::size_t>(n)];
  }
  hypothesis_length += other.hypothesis_length;
  reference_length += other.reference_length;
}

namespace {

std::map<std::vector<std::string>, int> ngrams(const TokenLine& line, int n) {
  std::map<std::vector<std::string>, int> out;
  for (std::size_t i = 0; i + static_cast<std::size_t>(n) <= line.size(); ++i)
    ++out[std::vector<std::string>(line.begin() + static_cast<std::ptrdiff_t>(i),
                                   line.begin() + static_cast<std::ptrdiff_t>(i) + n)];
  return out;
}

}  // namespace

BleuStats bleu_stats(const TokenLine& hypothesis, const TokenLine& reference) {
  BleuStats s;
  s.hypothesis_length = static_cast<long long>(hypothesis.size());
  s.reference_length = static_cast<long long>(reference.size());
  for (int n = 1; n <= 4; ++n) {
    const auto h = ngrams(hypothesis, n);
    const auto r = ngrams(reference, n);
    long long match = 0, total = 0;
    for (const auto& [gram, count] : h) {
      total += count;
      auto it = r.find(gram);
      if (it != r.end()) match += std::min(count, it->second);
    }
    s.matches[static_cast<std::size_t>(n - 1)] = match;
    s.totals[static_cast<std::size_t>(n - 1)] = total;
  }
  return s;
}

BleuScore corpus_bleu(const std::vector<TokenLine>& hypotheses, const std::vector<TokenLine>& references,
                      bool lowercase) {
  if (hypotheses.empty()) throw std::invalid_argument("bleu: empty hypothesis set");
  if (hypotheses.size() != references.size())
    throw std::invalid_argument("bleu: " + std::to_string(hypotheses.size()) + " hypotheses vs " +
                                std::to_string(references.size()) + " references");
  BleuScore out;
  for (std::size_t i = 0; i < hypotheses.size(); ++i) {
    if (lowercase) {
      TokenLine h, r;
      for (const auto& t : hypotheses[i]) h.push_back(to_lower(t));
      for (const auto& t : references[i]) r.push_back(to_lower(t));
      out.stats.add(bleu_stats(h, r));
    } else {
      out.stats.add(bleu_stats(hypotheses[i], references[i]));
    }
  }
  // Orders with no hypothesis n-gram at all (every line shorter than n)
  // are left out of the geometric mean.
  double log_sum = 0;
  int orders = 0;
  bool zero = false;
  for (int n = 0; n < 4; ++n) {
    const auto m = out.stats.matches[static_cast<std::size_t>(n)];
    const auto t = out.stats.totals[static_cast<std::size_t>(n)];
    out.precisions[static_cast<std::size_t>(n)] = t ? static_cast<double>(m) / static_cast<double>(t) : 0.0;
    if (t == 0) continue;
    ++orders;
    if (m == 0) zero = true;
    else log_sum += std::log(static_cast<double>(m) / static_cast<double>(t));
  }
  if (orders == 0) zero = true;
  const double c = static_cast<double>(out.stats.hypothesis_length);
  const double r = static_cast<double>(out.stats.reference_length);
  out.brevity_penalty = c >= r ? 1.0 : (c == 0 ? 0.0 : std::exp(1.0 - r / c));
  out.score = zero ? 0.0 : 100.0 * out.brevity_penalty * std::exp(log_sum / orders);
  return out;
}

double sentence_bleu(const TokenLine& hypothesis, const TokenLine& reference) {
  if (hypothesis.empty()) return 0.0;
  const BleuStats s = bleu_stats(hypothesis, reference);
  double log_sum = 0;
  for (int n = 0; n < 4; ++n)
    log_sum += std::log((static_cast<double>(s.matches[static_cast<std::size_t>(n)]) + 1.0) /
                        (static_cast<double>(s.totals[static_cast<std::size_t>(n)]) + 1.0));
  const double c = static_cast<double>(s.hypothesis_length), r = static_cast<double>(s.reference_length);
  const double bp = c >= r ? 1.0 : std::exp(1.0 - r / c);
  return bp * std::exp(log_sum / 4.0);
}

SNMT_NAMESPACE_END
