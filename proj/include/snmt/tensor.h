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

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "snmt/abi.h"

namespace snmt {
inline namespace SNMT_ABI_NAMESPACE {

#ifdef SNMT_REAL_DOUBLE
using Real = double;
#else
using Real = float;
#endif

class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Dense row-major array. Rank 2 is the common case; rank 3 is used for
/// batched encoder states laid out as [batch, time, hidden].
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::vector<int> dims, Real fill = 0);
  Tensor(std::vector<int> dims, std::vector<Real> data);

  static Tensor matrix(int rows, int cols, Real fill = 0) { return Tensor({rows, cols}, fill); }
  static Tensor scalar(Real v) { return Tensor({1}, {v}); }
  static Tensor from_rows(std::initializer_list<std::initializer_list<Real>> rows);

  const std::vector<int>& dims() const { return dims_; }
  int rank() const { return static_cast<int>(dims_.size()); }
  int dim(int i) const { return dims_.at(static_cast<std::size_t>(i)); }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  // Rank-1 tensors are viewed as a single row.
  int rows() const;
  int cols() const;

  Real* data() { return data_.data(); }
  const Real* data() const { return data_.data(); }
  std::span<Real> values() { return data_; }
  std::span<const Real> values() const { return data_; }

  Real& operator[](std::size_t i) { return data_[i]; }
  Real operator[](std::size_t i) const { return data_[i]; }
  Real& at(int r, int c) { return data_[static_cast<std::size_t>(r) * cols() + c]; }
  Real at(int r, int c) const { return data_[static_cast<std::size_t>(r) * cols() + c]; }
  std::span<Real> row(int r);
  std::span<const Real> row(int r) const;

  void fill(Real v);
  bool same_shape(const Tensor& other) const { return dims_ == other.dims_; }
  bool all_finite() const;
  std::string shape_string() const;

 private:
  std::vector<int> dims_;
  std::vector<Real> data_;
};

std::size_t element_count(const std::vector<int>& dims);

/// SplitMix64. Every source of randomness (init, dropout, shuffling) is
/// seeded from one of these.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : state_(seed) {}
  std::uint64_t next_u64();
  /// Uniform in [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n);
  std::uint64_t state() const { return state_; }

  template <typename T>
  void shuffle(std::vector<T>& items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(below(i));
      std::swap(items[i - 1], items[j]);
    }
  }

 private:
  std::uint64_t state_;
};

namespace kernels {
// C[m x n] (+)= A[m x k] * B[k x n]. Each output element accumulates over k
// in increasing order regardless of m, so a row of a batched product is
// bit-identical to the same row computed alone.
void gemm_nn(const Real* a, const Real* b, Real* c, int m, int k, int n, bool accumulate);
// C[m x k] += A[m x n] * B[k x n]^T
void gemm_nt(const Real* a, const Real* b, Real* c, int m, int n, int k);
// C[k x n] += A[m x k]^T * B[m x n]
void gemm_tn(const Real* a, const Real* b, Real* c, int m, int k, int n);
}  // namespace kernels

}  // namespace SNMT_ABI_NAMESPACE
}  // namespace snmt
