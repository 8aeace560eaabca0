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

#include "snmt/graph.h"

#include <cmath>

namespace snmt {
inline namespace SNMT_ABI_NAMESPACE {

void Parameter::mask_gradient() {
  if (grad.empty()) return;
  if (is_pruned())
    for (std::size_t i = 0; i < keep.size(); ++i)
      if (!keep[i]) grad[i] = 0;
  if (has_frozen_rows()) {
    const int c = grad.cols();
    for (int r = 0; r < grad.rows(); ++r)
      if (frozen_rows[static_cast<std::size_t>(r)])
        for (int j = 0; j < c; ++j) grad.at(r, j) = 0;
  }
}

void Parameter::apply_mask() {
  if (!is_pruned()) return;
  for (std::size_t i = 0; i < keep.size(); ++i)
    if (!keep[i]) value[i] = 0;
}

Parameter& ParameterSet::add(const std::string& name, std::vector<int> dims) {
  if (index_.count(name)) throw std::invalid_argument("duplicate parameter name: " + name);
  Parameter p;
  p.name = name;
  p.value = Tensor(dims);
  p.grad = Tensor(std::move(dims));
  index_[name] = params_.size();
  params_.push_back(std::move(p));
  return params_.back();
}

Parameter& ParameterSet::get(const std::string& name) {
  auto* p = find(name);
  if (!p) throw std::out_of_range("unknown parameter: " + name);
  return *p;
}

const Parameter& ParameterSet::get(const std::string& name) const {
  const auto* p = find(name);
  if (!p) throw std::out_of_range("unknown parameter: " + name);
  return *p;
}

Parameter* ParameterSet::find(const std::string& name) {
  auto it = index_.find(name);
  return it == index_.end() ? nullptr : &params_[it->second];
}

const Parameter* ParameterSet::find(const std::string& name) const {
  auto it = index_.find(name);
  return it == index_.end() ? nullptr : &params_[it->second];
}

void ParameterSet::zero_grad() {
  for (auto& p : params_) p.grad.fill(0);
}

std::size_t ParameterSet::total_elements() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += p.value.size();
  return n;
}

void ParameterSet::init_uniform(Rng& rng, Real range) {
  for (auto& p : params_) {
    for (auto& v : p.value.values()) v = static_cast<Real>(rng.uniform(-range, range));
    p.apply_mask();
  }
}

Graph::Graph(ParameterSet* params, std::uint64_t seed) : params_(params), rng_(seed) {}

Var Graph::input(Tensor value) {
  Node n;
  n.value = std::move(value);
  nodes_.push_back(std::move(n));
  return Var(this, static_cast<int>(nodes_.size() - 1));
}

Var Graph::param(Parameter& p) {
  auto it = param_nodes_.find(&p);
  if (it != param_nodes_.end()) return Var(this, it->second);
  Node n;
  // Parameter values are copied so that later in-place updates of the
  // registry cannot change a recorded tape.
  n.value = p.value;
  n.param = &p;
  n.needs_grad = grad_enabled_ && !p.frozen;
  nodes_.push_back(std::move(n));
  const int id = static_cast<int>(nodes_.size() - 1);
  param_nodes_[&p] = id;
  return Var(this, id);
}

Var Graph::param(const std::string& name) {
  if (!params_) throw std::logic_error("graph has no parameter registry");
  return param(params_->get(name));
}

Var Graph::record(Tensor value, std::vector<Var> parents, BackwardFn backward) {
  Node n;
  n.value = std::move(value);
  if (grad_enabled_ && backward) {
    for (const Var& p : parents)
      if (needs_grad(p)) {
        n.needs_grad = true;
        break;
      }
    if (n.needs_grad) n.backward = std::move(backward);
  }
  nodes_.push_back(std::move(n));
  return Var(this, static_cast<int>(nodes_.size() - 1));
}

Tensor& Graph::grad_of(Var v) {
  Node& n = nodes_[static_cast<std::size_t>(v.id())];
  if (n.grad.empty()) n.grad = Tensor(n.value.dims(), 0);
  return n.grad;
}

void Graph::release_values(int from, const std::vector<Var>& keep) {
  if (grad_enabled_) throw std::logic_error("Graph::release_values: gradients are enabled");
  const int n = static_cast<int>(nodes_.size());
  if (from < 0 || from > n) throw std::out_of_range("Graph::release_values: bad start node");
  std::vector<std::uint8_t> kept(static_cast<std::size_t>(n - from), 0);
  for (const Var& v : keep)
    if (v.graph() == this && v.id() >= from) kept[static_cast<std::size_t>(v.id() - from)] = 1;
  for (int i = from; i < n; ++i) {
    Node& node = nodes_[static_cast<std::size_t>(i)];
    if (!kept[static_cast<std::size_t>(i - from)] && node.param == nullptr) node.value = Tensor();
  }
}

void Graph::backward(Var loss) {
  const Tensor& lv = value(loss);
  if (lv.size() != 1) throw ShapeError("backward needs a scalar loss, got " + lv.shape_string());
  if (!std::isfinite(lv[0])) throw NumericError("loss is not finite");
  if (params_) params_->zero_grad();
  if (!needs_grad(loss)) return;
  grad_of(loss)[0] = 1;
  for (int i = loss.id(); i >= 0; --i) {
    Node& n = nodes_[static_cast<std::size_t>(i)];
    if (n.grad.empty()) continue;
    if (n.backward) {
      n.backward(*this, n.grad);
    } else if (n.param) {
      Tensor& g = n.param->grad;
      if (g.size() != n.grad.size()) g = Tensor(n.value.dims(), 0);
      for (std::size_t k = 0; k < g.size(); ++k) g[k] += n.grad[k];
      n.param->mask_gradient();
    }
  }
}

}  // namespace SNMT_ABI_NAMESPACE
}  // namespace snmt
