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

#include <deque>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "snmt/tensor.h"

namespace snmt {
inline namespace SNMT_ABI_NAMESPACE {

/// A named trainable tensor.
///
/// `keep` is the pruning mask (empty means dense); pruned positions stay
/// exactly zero. `frozen_rows` marks embedding rows that must not be
/// updated (empty means none). A fully frozen parameter never receives a
/// gradient.
struct Parameter {
  std::string name;
  Tensor value;
  Tensor grad;
  std::vector<std::uint8_t> keep;
  std::vector<std::uint8_t> frozen_rows;
  bool frozen = false;

  bool is_pruned() const { return !keep.empty(); }
  bool has_frozen_rows() const { return !frozen_rows.empty(); }
  /// Zeroes gradient entries at pruned positions and frozen rows.
  void mask_gradient();
  /// Re-zeroes pruned weights.
  void apply_mask();
};

/// Parameter registry keyed by unique name, iterated in insertion order.
class ParameterSet {
 public:
  Parameter& add(const std::string& name, std::vector<int> dims);
  Parameter& get(const std::string& name);
  const Parameter& get(const std::string& name) const;
  Parameter* find(const std::string& name);
  const Parameter* find(const std::string& name) const;
  bool contains(const std::string& name) const { return index_.count(name) > 0; }

  std::size_t size() const { return params_.size(); }
  bool empty() const { return params_.empty(); }
  Parameter& operator[](std::size_t i) { return params_[i]; }
  const Parameter& operator[](std::size_t i) const { return params_[i]; }
  auto begin() { return params_.begin(); }
  auto end() { return params_.end(); }
  auto begin() const { return params_.begin(); }
  auto end() const { return params_.end(); }

  void zero_grad();
  std::size_t total_elements() const;
  /// Uniform initialization in [-range, range] in registration order.
  void init_uniform(Rng& rng, Real range);

 private:
  std::deque<Parameter> params_;
  std::map<std::string, std::size_t> index_;
};

class Graph;

/// Handle to a node of a Graph.
class Var {
 public:
  Var() = default;
  Var(Graph* graph, int id) : graph_(graph), id_(id) {}

  bool valid() const { return graph_ != nullptr; }
  int id() const { return id_; }
  Graph* graph() const { return graph_; }
  const Tensor& value() const;
  int rows() const { return value().rows(); }
  int cols() const { return value().cols(); }

 private:
  Graph* graph_ = nullptr;
  int id_ = -1;
};

/// Tape of operations recorded in topological (creation) order.
///
/// Backward walks the tape in exact reverse order. With gradients disabled
/// the tape keeps values only, which is what decoding uses.
class Graph {
 public:
  /// Receives the gradient of the node's output and propagates it into its
  /// parents via `grad_of`.
  using BackwardFn = std::function<void(Graph&, const Tensor& out_grad)>;

  explicit Graph(ParameterSet* params = nullptr, std::uint64_t seed = 0);

  void set_training(bool training) { training_ = training; }
  bool training() const { return training_; }
  void set_grad_enabled(bool enabled) { grad_enabled_ = enabled; }
  bool grad_enabled() const { return grad_enabled_; }
  Rng& rng() { return rng_; }
  ParameterSet* params() const { return params_; }

  Var input(Tensor value);
  Var param(Parameter& p);
  Var param(const std::string& name);

  /// Records an operation. `backward` may be empty for non-differentiable
  /// results; it is dropped when no parent needs a gradient.
  Var record(Tensor value, std::vector<Var> parents, BackwardFn backward);

  const Tensor& value(Var v) const { return nodes_[static_cast<std::size_t>(v.id())].value; }
  bool needs_grad(Var v) const { return nodes_[static_cast<std::size_t>(v.id())].needs_grad; }
  /// Gradient buffer of a node, allocated as zeros on first use.
  Tensor& grad_of(Var v);

  /// Reverse-mode pass from a scalar loss. Zeroes every registered
  /// parameter gradient first, so unreachable parameters end with zeros.
  void backward(Var loss);

  std::size_t size() const { return nodes_.size(); }

  /// Frees the values of nodes with id >= `from` except parameters and
  /// `keep`. Only allowed without gradients; released nodes must not be
  /// read again.
  void release_values(int from, const std::vector<Var>& keep);

 private:
  struct Node {
    Tensor value;
    Tensor grad;
    BackwardFn backward;
    Parameter* param = nullptr;
    bool needs_grad = false;
  };

  std::deque<Node> nodes_;
  std::map<const Parameter*, int> param_nodes_;
  ParameterSet* params_;
  Rng rng_;
  bool training_ = false;
  bool grad_enabled_ = true;
};

inline const Tensor& Var::value() const { return graph_->value(*this); }

}  // namespace SNMT_ABI_NAMESPACE
}  // namespace snmt
