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

#include <utility>
#include <vector>

#include "snmt/graph.h"

namespace snmt {
inline namespace SNMT_ABI_NAMESPACE {

class SparseCCS;

enum class Activation { kSigmoid, kTanh, kSoftmaxRows, kRelu };

Var matmul(Var a, Var b);
/// x * W where W is held in compressed column storage. Values only, no
/// gradient flows into W.
Var sparse_matmul(Var x, const SparseCCS& w);

Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
Var scale(Var a, Real s);
/// Adds a 1 x C bias to every row.
Var add_bias(Var a, Var bias);

Var activation(Var x, Activation kind);
Var sigmoid(Var x);
Var tanh(Var x);
Var relu(Var x);
Var softmax_rows(Var x);
/// Softmax over the entries with `mask` set (row-major, same size as x);
/// masked entries come out exactly zero. A row with no valid entry is an
/// error.
Var masked_softmax_rows(Var x, const std::vector<std::uint8_t>& mask);
/// Log-softmax over the columns allowed by `col_mask` (empty = all), given
/// either per column or per element. Masked entries are -inf and must not
/// be selected by a loss.
Var log_softmax_rows(Var x, const std::vector<std::uint8_t>& col_mask = {});

Var concat_cols(const std::vector<Var>& parts);
Var slice_cols(Var a, int begin, int width);
/// Rows of `table` selected by `ids`.
Var lookup(Var table, const std::vector<int>& ids);
Var gather_rows(Var a, const std::vector<int>& rows);
/// Row r is taken from `a` when take_a[r] is set, else from `b`.
Var select_rows(Var a, Var b, const std::vector<std::uint8_t>& take_a);
/// Copy of `base` with row rows[i] replaced by row i of `update`. Rows must
/// be distinct.
Var scatter_rows(Var base, Var update, const std::vector<int>& rows);
Var sum(Var a);
/// Inverted dropout; identity outside training or when p == 0.
Var dropout(Var a, Real p);

/// Fused LSTM cell. Gates are laid out [input | forget | output | cell]
/// along columns. Returns (h, c).
std::pair<Var, Var> lstm_cell(Var gates, Var c_prev);

/// keys: [B, S, d]; stacks `steps` (each B x d) along time.
Var stack_steps(const std::vector<Var>& steps);
/// scores[r, s] = query[r] . keys[row_batch[r], s]
Var attention_scores(Var keys, Var query, const std::vector<int>& row_batch);
/// context[r] = sum_s alpha[r, s] * keys[row_batch[r], s]
Var attention_context(Var keys, Var alpha, const std::vector<int>& row_batch);

/// sum_r weight[r] * -x[r, ids[r]]
Var pick_nll(Var log_probs, const std::vector<int>& ids, const std::vector<Real>& weights);
/// sum_r weight[r] * sum_c (x[r, c] - target[r, c])^2
Var weighted_sq_error(Var x, const Tensor& target, const std::vector<Real>& weights);

}  // namespace SNMT_ABI_NAMESPACE
}  // namespace snmt
