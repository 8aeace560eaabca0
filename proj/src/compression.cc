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

#include "snmt/compression.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

SNMT_NAMESPACE_BEGIN

SparseCCS SparseCCS::from_dense(const Tensor& dense) {
  if (dense.rank() != 2) throw ShapeError("SparseCCS: expected a matrix, got " + dense.shape_string());
  SparseCCS s;
  s.rows_ = dense.rows();
  s.cols_ = dense.cols();
  s.col_ptr_.assign(static_cast<std::size_t>(s.cols_) + 1, 0);
  for (int c = 0; c < s.cols_; ++c) {
    for (int r = 0; r < s.rows_; ++r) {
      const Real v = dense.at(r, c);
      if (v == Real(0)) continue;
      s.row_index_.push_back(r);
      s.values_.push_back(v);
    }
    s.col_ptr_[static_cast<std::size_t>(c) + 1] = static_cast<int>(s.values_.size());
  }
  return s;
}

Tensor SparseCCS::to_dense() const {
  Tensor dense = Tensor::matrix(rows_, cols_);
  for (int c = 0; c < cols_; ++c)
    for (int k = col_ptr_[static_cast<std::size_t>(c)]; k < col_ptr_[static_cast<std::size_t>(c) + 1]; ++k)
      dense.at(row_index_[static_cast<std::size_t>(k)], c) = values_[static_cast<std::size_t>(k)];
  return dense;
}

void SparseCCS::matvec(std::span<const Real> x, std::span<Real> y) const {
  if (static_cast<int>(x.size()) != cols_ || static_cast<int>(y.size()) != rows_)
    throw ShapeError("SparseCCS::matvec: dimension mismatch");
  std::fill(y.begin(), y.end(), Real(0));
  for (int c = 0; c < cols_; ++c) {
    const Real xc = x[static_cast<std::size_t>(c)];
    if (xc == Real(0)) continue;
    for (int k = col_ptr_[static_cast<std::size_t>(c)]; k < col_ptr_[static_cast<std::size_t>(c) + 1]; ++k)
      y[static_cast<std::size_t>(row_index_[static_cast<std::size_t>(k)])] += values_[static_cast<std::size_t>(k)] * xc;
  }
}

void SparseCCS::vecmat(std::span<const Real> x, std::span<Real> y) const {
  if (static_cast<int>(x.size()) != rows_ || static_cast<int>(y.size()) != cols_)
    throw ShapeError("SparseCCS::vecmat: dimension mismatch");
  for (int c = 0; c < cols_; ++c) {
    Real acc = 0;
    for (int k = col_ptr_[static_cast<std::size_t>(c)]; k < col_ptr_[static_cast<std::size_t>(c) + 1]; ++k) {
      const Real xv = x[static_cast<std::size_t>(row_index_[static_cast<std::size_t>(k)])];
      if (xv == Real(0)) continue;
      acc += xv * values_[static_cast<std::size_t>(k)];
    }
    y[static_cast<std::size_t>(c)] = acc;
  }
}

std::size_t SparseCCS::memory_bytes() const {
  return values_.size() * (sizeof(Real) + sizeof(int)) + col_ptr_.size() * sizeof(int);
}

std::size_t SparseCCS::dense_bytes() const {
  return static_cast<std::size_t>(rows_) * static_cast<std::size_t>(cols_) * sizeof(Real);
}

double ccs_break_even_sparsity(int rows, int cols) {
  // nnz * (v + i) + (cols + 1) * i == rows * cols * v
  const double n = static_cast<double>(rows) * cols;
  const double v = sizeof(Real), i = sizeof(int);
  const double nnz = (n * v - (cols + 1.0) * i) / (v + i);
  return std::clamp(1.0 - nnz / n, 0.0, 1.0);
}

bool is_prunable(const Parameter& p) { return !p.frozen && p.value.rank() == 2 && p.value.rows() > 1; }

namespace {

// Indices of the k smallest magnitudes, ties by position.
std::vector<std::size_t> smallest(const std::vector<Real>& mags, std::size_t k) {
  std::vector<std::size_t> order(mags.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return mags[a] < mags[b]; });
  order.resize(k);
  return order;
}

void zero_positions(Parameter& p, const std::vector<std::size_t>& positions) {
  if (p.keep.empty()) p.keep.assign(p.value.size(), 1);
  for (std::size_t i : positions) {
    p.keep[i] = 0;
    p.value[i] = 0;
  }
}

}  // namespace

PruneReport magnitude_prune(ParameterSet& params, double fraction, PruneScope scope) {
  if (!(fraction >= 0.0) || fraction >= 1.0) throw std::invalid_argument("prune fraction must be in [0, 1)");
  PruneReport report;
  std::vector<Parameter*> targets;
  for (auto& p : params)
    if (is_prunable(p)) {
      targets.push_back(&p);
      report.prunable += p.value.size();
    }

  if (scope == PruneScope::kClassBlind) {
    std::vector<Real> mags;
    mags.reserve(report.prunable);
    for (Parameter* p : targets)
      for (std::size_t i = 0; i < p->value.size(); ++i) mags.push_back(std::fabs(p->value[i]));
    const auto k = static_cast<std::size_t>(std::floor(fraction * static_cast<double>(mags.size())));
    auto chosen = smallest(mags, k);
    std::sort(chosen.begin(), chosen.end());
    std::size_t offset = 0, c = 0;
    for (Parameter* p : targets) {
      std::vector<std::size_t> local;
      while (c < chosen.size() && chosen[c] < offset + p->value.size()) local.push_back(chosen[c++] - offset);
      if (!local.empty() || fraction > 0) zero_positions(*p, local);
      offset += p->value.size();
    }
  } else {
    for (Parameter* p : targets) {
      std::vector<Real> mags(p->value.size());
      for (std::size_t i = 0; i < mags.size(); ++i) mags[i] = std::fabs(p->value[i]);
      const auto k = static_cast<std::size_t>(std::floor(fraction * static_cast<double>(mags.size())));
      zero_positions(*p, smallest(mags, k));
    }
  }

  for (Parameter* p : targets)
    if (!p->keep.empty()) report.pruned += static_cast<std::size_t>(std::count(p->keep.begin(), p->keep.end(), 0));
  report.kept_fraction =
      report.prunable ? 1.0 - static_cast<double>(report.pruned) / static_cast<double>(report.prunable) : 1.0;
  return report;
}

std::size_t masked_count(const ParameterSet& params) {
  std::size_t n = 0;
  for (const auto& p : params) n += static_cast<std::size_t>(std::count(p.keep.begin(), p.keep.end(), 0));
  return n;
}

bool mask_respected(const ParameterSet& params) {
  for (const auto& p : params)
    for (std::size_t i = 0; i < p.keep.size(); ++i)
      if (!p.keep[i] && p.value[i] != Real(0)) return false;
  return true;
}

SNMT_NAMESPACE_END
