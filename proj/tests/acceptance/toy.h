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

// Toy corpora and helpers shared by the acceptance checks.

#pragma once

#include <chrono>
#include <string>
#include <vector>

#include "snmt/decoding.h"
#include "snmt/training.h"

namespace toy {

using snmt::Example;
using snmt::NmtModel;
using snmt::Rng;
using snmt::Vocab;
using Corpus = std::vector<std::vector<std::string>>;

/// Sentences of uniform random words "w0".."w{n-1}".
inline Corpus random_sentences(Rng& rng, int count, int words, int min_len, int max_len) {
  Corpus out;
  for (int i = 0; i < count; ++i) {
    const int n = min_len + static_cast<int>(rng.below(static_cast<std::uint64_t>(max_len - min_len + 1)));
    std::vector<std::string> s;
    for (int j = 0; j < n; ++j) s.push_back("w" + std::to_string(rng.below(static_cast<std::uint64_t>(words))));
    out.push_back(std::move(s));
  }
  return out;
}

/// Vocabulary holding "w0".."w{n-1}" regardless of corpus counts.
inline Vocab word_vocab(int words) {
  std::vector<std::string> tokens;
  for (int i = 0; i < words; ++i) tokens.push_back("w" + std::to_string(i));
  return Vocab::from_tokens(tokens);
}

inline std::vector<Example> pair_examples(const Vocab& src, const Vocab& tgt, const Corpus& source,
                                          const Corpus& target) {
  std::vector<Example> out;
  for (std::size_t i = 0; i < source.size(); ++i) {
    Example e;
    e.source.ids = src.encode(source[i]);
    e.target.ids = tgt.encode(target[i]);
    out.push_back(std::move(e));
  }
  return out;
}

/// Diagonal links for copy pairs.
inline void add_diagonal_alignments(std::vector<Example>& corpus) {
  for (auto& e : corpus) {
    std::vector<std::pair<int, int>> links;
    for (int i = 0; i < e.source.size(); ++i) links.emplace_back(i, i);
    e.alignment = snmt::AlignmentMatrix(e.source.size(), e.target.size(), links);
  }
}

inline std::vector<snmt::DecodeInput> inputs_of(const std::vector<Example>& corpus) {
  std::vector<snmt::DecodeInput> in;
  for (const auto& e : corpus) in.push_back({e.source, {}});
  return in;
}

/// Fraction of sentences whose best output equals the reference exactly.
inline double sequence_accuracy(const snmt::Ensemble& model, const std::vector<Example>& corpus, int beam = 1,
                                int max_length = 0) {
  snmt::DecodeOptions opt;
  opt.beam_size = beam;
  int longest = 0;
  for (const auto& e : corpus) longest = std::max(longest, e.target.size());
  opt.max_length = max_length > 0 ? max_length : longest + 5;
  const auto res = snmt::batch_translate(model, inputs_of(corpus), 64, opt);
  int ok = 0;
  for (std::size_t i = 0; i < corpus.size(); ++i) ok += res[i].best().ids == corpus[i].target.ids;
  return static_cast<double>(ok) / static_cast<double>(corpus.size());
}

inline double sequence_accuracy(const NmtModel& model, const std::vector<Example>& corpus, int beam = 1) {
  return sequence_accuracy(snmt::Ensemble(model), corpus, beam);
}

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

}  // namespace toy
