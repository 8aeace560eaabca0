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
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "snmt/tensor.h"

SNMT_NAMESPACE_BEGIN

class AlignmentParseError : public std::runtime_error {
 public:
  AlignmentParseError(int line, const std::string& what)
      : std::runtime_error("alignment line " + std::to_string(line) + ": " + what), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

/// Word links of one sentence pair, kept in compressed column storage with
/// one column per source position. The dense view is T x S and gives
/// A[t][s] = 1 / (number of source words linked to t) on links, 0 elsewhere.
class AlignmentMatrix {
 public:
  using Link = std::pair<int, int>;  // (source, target)

  AlignmentMatrix() = default;
  AlignmentMatrix(int source_len, int target_len, std::vector<Link> links);

  /// Parses "s-t s-t ...". Lengths of -1 are inferred from the largest
  /// index.
  static AlignmentMatrix from_pharaoh(std::string_view line, int source_len = -1, int target_len = -1,
                                      int line_no = 1);
  std::string to_pharaoh() const;

  static AlignmentMatrix from_dense(const Tensor& dense);
  Tensor to_dense() const;

  int source_len() const { return source_len_; }
  int target_len() const { return target_len_; }
  std::vector<Link> links() const;
  std::size_t link_count() const { return row_index_.size(); }
  bool has_link(int source, int target) const;
  /// Number of source words linked to a target position.
  int fertility(int target) const;

  const std::vector<int>& column_pointers() const { return col_ptr_; }
  const std::vector<int>& row_indices() const { return row_index_; }

  std::size_t storage_bytes() const;
  std::size_t dense_bytes() const;

  bool operator==(const AlignmentMatrix& other) const;

 private:
  int source_len_ = 0;
  int target_len_ = 0;
  std::vector<int> col_ptr_;
  std::vector<int> row_index_;
};

std::vector<AlignmentMatrix> read_pharaoh_file(const std::string& path);
void write_pharaoh_file(const std::string& path, const std::vector<AlignmentMatrix>& alignments);

struct SentencePair {
  std::vector<std::string> source;
  std::vector<std::string> target;
};

/// Lexical translation probabilities t(target | source).
class TranslationTable {
 public:
  double prob(const std::string& source, const std::string& target) const;
  std::unordered_map<std::string, std::unordered_map<std::string, double>>& entries() { return table_; }
  const std::unordered_map<std::string, std::unordered_map<std::string, double>>& entries() const {
    return table_;
  }

 private:
  std::unordered_map<std::string, std::unordered_map<std::string, double>> table_;
};

inline constexpr double kDefaultDiagonalStrength = 4.0;

/// Unnormalized alignment prior exp(-lambda * |s/S - t/T|).
double diagonal_prior(int s, int source_len, int t, int target_len, double lambda);

/// IBM Model 1 EM with a diagonal alignment prior; lambda = 0 is plain
/// Model 1. Empty sentence pairs are skipped.
TranslationTable ibm1_train(const std::vector<SentencePair>& corpus, int iterations,
                            double lambda = kDefaultDiagonalStrength);
double ibm1_log_likelihood(const std::vector<SentencePair>& corpus, const TranslationTable& table,
                           double lambda = kDefaultDiagonalStrength);

/// Links every target word to argmax_s t(target | source_s) * prior(s, t),
/// ties to the smallest s. Unknown words fall back to the prior.
AlignmentMatrix viterbi_align(const SentencePair& pair, const TranslationTable& table,
                              double lambda = kDefaultDiagonalStrength);

SNMT_NAMESPACE_END
