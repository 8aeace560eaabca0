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

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "snmt/graph.h"
#include "snmt/tensor.h"

SNMT_NAMESPACE_BEGIN

/// Compressed column storage of a rows x cols matrix.
class SparseCCS {
 public:
  SparseCCS() = default;
  /// Keeps the nonzero entries of a rank-2 tensor.
  static SparseCCS from_dense(const Tensor& dense);
  Tensor to_dense() const;

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  std::size_t nnz() const { return values_.size(); }

  /// y = A x, with x of length cols and y of length rows.
  void matvec(std::span<const Real> x, std::span<Real> y) const;
  /// y = x^T A, with x of length rows and y of length cols. Each output
  /// accumulates over rows in increasing order, matching the dense kernel.
  void vecmat(std::span<const Real> x, std::span<Real> y) const;

  /// nnz * (value + index) + column pointers.
  std::size_t memory_bytes() const;
  std::size_t dense_bytes() const;

  const std::vector<int>& column_pointers() const { return col_ptr_; }
  const std::vector<int>& row_indices() const { return row_index_; }
  const std::vector<Real>& nonzero_values() const { return values_; }

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<int> col_ptr_;
  std::vector<int> row_index_;
  std::vector<Real> values_;
};

/// Fraction of zeros above which CCS is smaller than the dense layout for a
/// rows x cols matrix.
double ccs_break_even_sparsity(int rows, int cols);

enum class PruneScope { kClassBlind, kClassUniform };

struct PruneReport {
  std::size_t prunable = 0;
  std::size_t pruned = 0;
  /// Kept fraction over prunable weights.
  double kept_fraction = 1;
};

/// Weight matrices are prunable; biases (single-row tensors) and frozen
/// parameters are not.
bool is_prunable(const Parameter& p);

/// Zeroes the `fraction` smallest-magnitude prunable weights, either under
/// one global threshold (class-blind) or per tensor (class-uniform), and
/// records the result in each parameter's mask. Ties are resolved by
/// position so exactly floor(fraction * n) weights are removed.
PruneReport magnitude_prune(ParameterSet& params, double fraction, PruneScope scope = PruneScope::kClassBlind);

/// Number of masked-out positions across the set.
std::size_t masked_count(const ParameterSet& params);

/// True when every masked position holds exactly zero.
bool mask_respected(const ParameterSet& params);

SNMT_NAMESPACE_END
