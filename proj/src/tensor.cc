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

#include "snmt/tensor.h"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace snmt {
inline namespace SNMT_ABI_NAMESPACE {

std::size_t element_count(const std::vector<int>& dims) {
  std::size_t n = 1;
  for (int d : dims) {
    if (d <= 0) throw ShapeError("tensor dimensions must be positive");
    n *= static_cast<std::size_t>(d);
  }
  return n;
}

Tensor::Tensor(std::vector<int> dims, Real fill) : dims_(std::move(dims)) {
  if (dims_.empty()) throw ShapeError("tensor needs at least one dimension");
  data_.assign(element_count(dims_), fill);
}

Tensor::Tensor(std::vector<int> dims, std::vector<Real> data)
    : dims_(std::move(dims)), data_(std::move(data)) {
  if (dims_.empty()) throw ShapeError("tensor needs at least one dimension");
  if (element_count(dims_) != data_.size())
    throw ShapeError("data length does not match dims " + shape_string());
}

Tensor Tensor::from_rows(std::initializer_list<std::initializer_list<Real>> rows) {
  const int r = static_cast<int>(rows.size());
  if (r == 0) throw ShapeError("from_rows needs at least one row");
  const int c = static_cast<int>(rows.begin()->size());
  std::vector<Real> data;
  data.reserve(static_cast<std::size_t>(r) * c);
  for (const auto& row : rows) {
    if (static_cast<int>(row.size()) != c) throw ShapeError("ragged rows");
    data.insert(data.end(), row.begin(), row.end());
  }
  return Tensor({r, c}, std::move(data));
}

int Tensor::rows() const {
  if (dims_.size() == 1) return 1;
  int r = 1;
  for (std::size_t i = 0; i + 1 < dims_.size(); ++i) r *= dims_[i];
  return r;
}

int Tensor::cols() const { return dims_.back(); }

std::span<Real> Tensor::row(int r) {
  const std::size_t c = static_cast<std::size_t>(cols());
  return {data_.data() + static_cast<std::size_t>(r) * c, c};
}

std::span<const Real> Tensor::row(int r) const {
  const std::size_t c = static_cast<std::size_t>(cols());
  return {data_.data() + static_cast<std::size_t>(r) * c, c};
}

void Tensor::fill(Real v) { std::fill(data_.begin(), data_.end(), v); }

bool Tensor::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](Real v) { return std::isfinite(v); });
}

std::string Tensor::shape_string() const {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < dims_.size(); ++i) os << (i ? "x" : "") << dims_[i];
  os << ']';
  return os.str();
}

std::uint64_t Rng::next_u64() {
  std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

double Rng::uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

std::uint64_t Rng::below(std::uint64_t n) {
  if (n == 0) return 0;
  // Rejection sampling keeps the result unbiased.
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  std::uint64_t v;
  do {
    v = next_u64();
  } while (v >= limit);
  return v % n;
}

namespace kernels {

namespace {

constexpr int kTileRows = 2;
constexpr int kTileCols = 16;

// C[i0:i0+MR, j0:j0+NR] over the full inner dimension. Every element sums
// its products in ascending p starting from 0 or its old value, so the
// result does not depend on the tiling.
template <int MR, int NR>
void gemm_tile(const Real* a, const Real* b, Real* c, int k, int n, int i0, int j0, bool accumulate) {
  Real acc[MR][NR];
  for (int r = 0; r < MR; ++r)
    for (int j = 0; j < NR; ++j)
      acc[r][j] = accumulate ? c[static_cast<std::size_t>(i0 + r) * n + j0 + j] : Real(0);
  for (int p = 0; p < k; ++p) {
    const Real* brow = b + static_cast<std::size_t>(p) * n + j0;
    for (int r = 0; r < MR; ++r) {
      const Real av = a[static_cast<std::size_t>(i0 + r) * k + p];
      for (int j = 0; j < NR; ++j) acc[r][j] += av * brow[j];
    }
  }
  for (int r = 0; r < MR; ++r)
    for (int j = 0; j < NR; ++j) c[static_cast<std::size_t>(i0 + r) * n + j0 + j] = acc[r][j];
}

void gemm_edge(const Real* a, const Real* b, Real* c, int k, int n, int i0, int rows, int j0, int cols,
               bool accumulate) {
  for (int i = i0; i < i0 + rows; ++i) {
    Real* crow = c + static_cast<std::size_t>(i) * n;
    if (!accumulate) std::fill(crow + j0, crow + j0 + cols, Real(0));
    const Real* arow = a + static_cast<std::size_t>(i) * k;
    for (int p = 0; p < k; ++p) {
      const Real av = arow[p];
      const Real* brow = b + static_cast<std::size_t>(p) * n;
      for (int j = j0; j < j0 + cols; ++j) crow[j] += av * brow[j];
    }
  }
}

}  // namespace

void gemm_nn(const Real* a, const Real* b, Real* c, int m, int k, int n, bool accumulate) {
  const int full_rows = m - m % kTileRows;
  const int full_cols = n - n % kTileCols;
  for (int i = 0; i < full_rows; i += kTileRows)
    for (int j = 0; j < full_cols; j += kTileCols) gemm_tile<kTileRows, kTileCols>(a, b, c, k, n, i, j, accumulate);
  for (int i = full_rows; i < m; ++i)
    for (int j = 0; j < full_cols; j += kTileCols) gemm_tile<1, kTileCols>(a, b, c, k, n, i, j, accumulate);
  if (full_cols < n) gemm_edge(a, b, c, k, n, 0, m, full_cols, n - full_cols, accumulate);
}

void gemm_nt(const Real* a, const Real* b, Real* c, int m, int n, int k) {
  // Transpose B once so the inner loop runs over contiguous memory.
  std::vector<Real> bt(static_cast<std::size_t>(n) * k);
  for (int p = 0; p < k; ++p)
    for (int j = 0; j < n; ++j) bt[static_cast<std::size_t>(j) * k + p] = b[static_cast<std::size_t>(p) * n + j];
  gemm_nn(a, bt.data(), c, m, n, k, true);
}

void gemm_tn(const Real* a, const Real* b, Real* c, int m, int k, int n) {
  for (int i = 0; i < m; ++i) {
    const Real* arow = a + static_cast<std::size_t>(i) * k;
    const Real* brow = b + static_cast<std::size_t>(i) * n;
    for (int p = 0; p < k; ++p) {
      const Real av = arow[p];
      if (av == Real(0)) continue;
      Real* crow = c + static_cast<std::size_t>(p) * n;
      for (int j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
}

}  // namespace kernels

}  // namespace SNMT_ABI_NAMESPACE
}  // namespace snmt
