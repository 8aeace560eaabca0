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

#include "snmt/aligner.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "snmt/textproc.h"

SNMT_NAMESPACE_BEGIN

AlignmentMatrix::AlignmentMatrix(int source_len, int target_len, std::vector<Link> links)
    : source_len_(source_len), target_len_(target_len) {
  if (source_len < 0 || target_len < 0) throw std::invalid_argument("alignment lengths must be >= 0");
  std::sort(links.begin(), links.end());
  links.erase(std::unique(links.begin(), links.end()), links.end());
  col_ptr_.assign(static_cast<std::size_t>(source_len) + 1, 0);
  for (const auto& [s, t] : links) {
    if (s < 0 || s >= source_len || t < 0 || t >= target_len)
      throw std::out_of_range("alignment link " + std::to_string(s) + "-" + std::to_string(t) + " out of range");
    ++col_ptr_[static_cast<std::size_t>(s) + 1];
    row_index_.push_back(t);
  }
  for (std::size_t i = 1; i < col_ptr_.size(); ++i) col_ptr_[i] += col_ptr_[i - 1];
}

AlignmentMatrix AlignmentMatrix::from_pharaoh(std::string_view line, int source_len, int target_len,
                                              int line_no) {
  std::vector<Link> links;
  int max_s = -1, max_t = -1;
  for (const auto& item : split_whitespace(line)) {
    const auto dash = item.find('-');
    if (dash == std::string::npos || dash == 0 || dash + 1 == item.size())
      throw AlignmentParseError(line_no, "malformed pair '" + item + "'");
    int s, t;
    try {
      std::size_t used = 0;
      s = std::stoi(item.substr(0, dash), &used);
      if (used != dash) throw std::invalid_argument("");
      t = std::stoi(item.substr(dash + 1), &used);
      if (used != item.size() - dash - 1) throw std::invalid_argument("");
    } catch (const std::exception&) {
      throw AlignmentParseError(line_no, "malformed pair '" + item + "'");
    }
    if (s < 0 || t < 0) throw AlignmentParseError(line_no, "negative index in '" + item + "'");
    if ((source_len >= 0 && s >= source_len) || (target_len >= 0 && t >= target_len))
      throw AlignmentParseError(line_no, "index out of range in '" + item + "'");
    max_s = std::max(max_s, s);
    max_t = std::max(max_t, t);
    links.emplace_back(s, t);
  }
  return AlignmentMatrix(source_len >= 0 ? source_len : max_s + 1, target_len >= 0 ? target_len : max_t + 1,
                         std::move(links));
}

std::string AlignmentMatrix::to_pharaoh() const {
  std::ostringstream os;
  bool first = true;
  for (const auto& [s, t] : links()) {
    if (!first) os << ' ';
    os << s << '-' << t;
    first = false;
  }
  return os.str();
}

AlignmentMatrix AlignmentMatrix::from_dense(const Tensor& dense) {
  if (dense.rank() != 2) throw ShapeError("alignment: dense view must be T x S");
  std::vector<Link> links;
  for (int t = 0; t < dense.rows(); ++t)
    for (int s = 0; s < dense.cols(); ++s)
      if (dense.at(t, s) != Real(0)) links.emplace_back(s, t);
  return AlignmentMatrix(dense.cols(), dense.rows(), std::move(links));
}

Tensor AlignmentMatrix::to_dense() const {
  if (source_len_ == 0 || target_len_ == 0) throw ShapeError("alignment: empty sentence has no dense view");
  Tensor dense = Tensor::matrix(target_len_, source_len_);
  std::vector<int> fert(static_cast<std::size_t>(target_len_), 0);
  for (int t : row_index_) ++fert[static_cast<std::size_t>(t)];
  for (int s = 0; s < source_len_; ++s)
    for (int k = col_ptr_[static_cast<std::size_t>(s)]; k < col_ptr_[static_cast<std::size_t>(s) + 1]; ++k) {
      const int t = row_index_[static_cast<std::size_t>(k)];
      dense.at(t, s) = Real(1) / static_cast<Real>(fert[static_cast<std::size_t>(t)]);
    }
  return dense;
}

std::vector<AlignmentMatrix::Link> AlignmentMatrix::links() const {
  std::vector<Link> out;
  out.reserve(row_index_.size());
  for (int s = 0; s < source_len_; ++s)
    for (int k = col_ptr_[static_cast<std::size_t>(s)]; k < col_ptr_[static_cast<std::size_t>(s) + 1]; ++k)
      out.emplace_back(s, row_index_[static_cast<std::size_t>(k)]);
  return out;
}

bool AlignmentMatrix::has_link(int source, int target) const {
  if (source < 0 || source >= source_len_) return false;
  const auto b = row_index_.begin() + col_ptr_[static_cast<std::size_t>(source)];
  const auto e = row_index_.begin() + col_ptr_[static_cast<std::size_t>(source) + 1];
  return std::binary_search(b, e, target);
}

int AlignmentMatrix::fertility(int target) const {
  return static_cast<int>(std::count(row_index_.begin(), row_index_.end(), target));
}

std::size_t AlignmentMatrix::storage_bytes() const {
  return (col_ptr_.size() + row_index_.size()) * sizeof(int);
}

std::size_t AlignmentMatrix::dense_bytes() const {
  return static_cast<std::size_t>(source_len_) * static_cast<std::size_t>(target_len_) * sizeof(Real);
}

bool AlignmentMatrix::operator==(const AlignmentMatrix& other) const {
  return source_len_ == other.source_len_ && target_len_ == other.target_len_ && col_ptr_ == other.col_ptr_ &&
         row_index_ == other.row_index_;
}

std::vector<AlignmentMatrix> read_pharaoh_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::vector<AlignmentMatrix> out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) out.push_back(AlignmentMatrix::from_pharaoh(line, -1, -1, ++line_no));
  return out;
}

void write_pharaoh_file(const std::string& path, const std::vector<AlignmentMatrix>& alignments) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  for (const auto& a : alignments) out << a.to_pharaoh() << '\n';
}

double TranslationTable::prob(const std::string& source, const std::string& target) const {
  auto it = table_.find(source);
  if (it == table_.end()) return 0.0;
  auto jt = it->second.find(target);
  return jt == it->second.end() ? 0.0 : jt->second;
}

double diagonal_prior(int s, int source_len, int t, int target_len, double lambda) {
  const double d = std::fabs(static_cast<double>(s) / source_len - static_cast<double>(t) / target_len);
  return std::exp(-lambda * d);
}

namespace {

// Prior over source positions for each target position, normalized.
std::vector<double> prior_row(int source_len, int t, int target_len, double lambda) {
  std::vector<double> p(static_cast<std::size_t>(source_len));
  double z = 0;
  for (int s = 0; s < source_len; ++s) z += p[static_cast<std::size_t>(s)] = diagonal_prior(s, source_len, t, target_len, lambda);
  for (auto& v : p) v /= z;
  return p;
}

}  // namespace

TranslationTable ibm1_train(const std::vector<SentencePair>& corpus, int iterations, double lambda) {
  if (iterations < 0) throw std::invalid_argument("iterations must be >= 0");
  if (corpus.empty()) throw std::invalid_argument("ibm1_train: empty corpus");
  TranslationTable table;
  auto& t = table.entries();

  // Uniform start over co-occurring target words.
  std::map<std::string, std::set<std::string>> cooc;
  for (const auto& p : corpus) {
    if (p.source.empty() || p.target.empty()) continue;
    for (const auto& e : p.source) cooc[e].insert(p.target.begin(), p.target.end());
  }
  for (const auto& [e, fs] : cooc)
    for (const auto& f : fs) t[e][f] = 1.0 / static_cast<double>(fs.size());

  for (int it = 0; it < iterations; ++it) {
    // Counts are accumulated in corpus order; ordered maps make the
    // normalization order deterministic too.
    std::map<std::string, std::map<std::string, double>> counts;
    for (const auto& p : corpus) {
      const int S = static_cast<int>(p.source.size()), T = static_cast<int>(p.target.size());
      if (S == 0 || T == 0) continue;
      std::vector<double> post(static_cast<std::size_t>(S));
      for (int j = 0; j < T; ++j) {
        const auto prior = prior_row(S, j, T, lambda);
        double z = 0;
        for (int s = 0; s < S; ++s) {
          post[static_cast<std::size_t>(s)] =
              prior[static_cast<std::size_t>(s)] * t[p.source[static_cast<std::size_t>(s)]][p.target[static_cast<std::size_t>(j)]];
          z += post[static_cast<std::size_t>(s)];
        }
        if (z <= 0) continue;
        for (int s = 0; s < S; ++s)
          counts[p.source[static_cast<std::size_t>(s)]][p.target[static_cast<std::size_t>(j)]] +=
              post[static_cast<std::size_t>(s)] / z;
      }
    }
    for (auto& [e, row] : counts) {
      double total = 0;
      for (const auto& [f, c] : row) total += c;
      auto& dst = t[e];
      for (auto& [f, v] : dst) v = 0;
      for (const auto& [f, c] : row) dst[f] = c / total;
    }
  }
  return table;
}

double ibm1_log_likelihood(const std::vector<SentencePair>& corpus, const TranslationTable& table, double lambda) {
  double ll = 0;
  for (const auto& p : corpus) {
    const int S = static_cast<int>(p.source.size()), T = static_cast<int>(p.target.size());
    if (S == 0 || T == 0) continue;
    for (int j = 0; j < T; ++j) {
      const auto prior = prior_row(S, j, T, lambda);
      double z = 0;
      for (int s = 0; s < S; ++s)
        z += prior[static_cast<std::size_t>(s)] *
             table.prob(p.source[static_cast<std::size_t>(s)], p.target[static_cast<std::size_t>(j)]);
      ll += std::log(std::max(z, 1e-300));
    }
  }
  return ll;
}

AlignmentMatrix viterbi_align(const SentencePair& pair, const TranslationTable& table, double lambda) {
  const int S = static_cast<int>(pair.source.size()), T = static_cast<int>(pair.target.size());
  std::vector<AlignmentMatrix::Link> links;
  if (S == 0 || T == 0) return AlignmentMatrix(S, T, {});
  for (int j = 0; j < T; ++j) {
    int best = 0;
    double best_score = -1;
    bool any_lexical = false;
    for (int s = 0; s < S; ++s)
      if (table.prob(pair.source[static_cast<std::size_t>(s)], pair.target[static_cast<std::size_t>(j)]) > 0)
        any_lexical = true;
    for (int s = 0; s < S; ++s) {
      const double prior = diagonal_prior(s, S, j, T, lambda);
      const double score =
          any_lexical
              ? table.prob(pair.source[static_cast<std::size_t>(s)], pair.target[static_cast<std::size_t>(j)]) * prior
              : prior;
      if (score > best_score) {
        best_score = score;
        best = s;
      }
    }
    links.emplace_back(best, j);
  }
  return AlignmentMatrix(S, T, std::move(links));
}

SNMT_NAMESPACE_END
