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

#include "doctest.h"

#include <cmath>

#include "snmt/compression.h"
#include "snmt/ops.h"

using namespace snmt;

TEST_CASE("tensor shapes and access") {
  Tensor t = Tensor::from_rows({{1, 2, 3}, {4, 5, 6}});
  CHECK(t.rows() == 2);
  CHECK(t.cols() == 3);
  CHECK(t.at(1, 2) == 6);
  CHECK(t.size() == 6);
  CHECK(t.shape_string() == "[2x3]");
  t.fill(0.5f);
  CHECK(t[4] == Real(0.5));
  CHECK_THROWS(Tensor({2, 2}, std::vector<Real>{1, 2, 3}));
}

TEST_CASE("rng is reproducible") {
  Rng a(9), b(9);
  for (int i = 0; i < 10; ++i) CHECK(a.next_u64() == b.next_u64());
  Rng c(1);
  for (int i = 0; i < 1000; ++i) {
    const double u = c.uniform();
    CHECK(u >= 0);
    CHECK(u < 1);
    CHECK(c.below(7) < 7);
  }
}

TEST_CASE("matmul and softmax forward") {
  Graph g;
  Var a = g.input(Tensor::from_rows({{1, 2}, {3, 4}}));
  Var b = g.input(Tensor::from_rows({{5, 6}, {7, 8}}));
  const Tensor& c = matmul(a, b).value();
  CHECK(c.at(0, 0) == 19);
  CHECK(c.at(1, 1) == 50);
  const Tensor& s = softmax_rows(a).value();
  CHECK(s.at(0, 0) + s.at(0, 1) == doctest::Approx(1));
  CHECK(s.at(0, 1) > s.at(0, 0));
}

TEST_CASE("matmul rows do not depend on the batch") {
  Rng rng(4);
  Tensor x({7, 5}), w({5, 9});
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = static_cast<Real>(rng.uniform(-1, 1));
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = static_cast<Real>(rng.uniform(-1, 1));
  Graph g;
  const Tensor all = matmul(g.input(x), g.input(w)).value();
  for (int r = 0; r < 7; ++r) {
    Tensor row({1, 5});
    for (int c = 0; c < 5; ++c) row.at(0, c) = x.at(r, c);
    const Tensor one = matmul(g.input(row), g.input(w)).value();
    for (int c = 0; c < 9; ++c) CHECK(one.at(0, c) == all.at(r, c));
  }
}

TEST_CASE("masked log softmax") {
  Graph g;
  Var x = g.input(Tensor::from_rows({{1, 2, 3}}));
  const Tensor& y = log_softmax_rows(x, {1, 0, 1}).value();
  CHECK(std::isinf(y[1]));
  CHECK(std::exp(y[0]) + std::exp(y[2]) == doctest::Approx(1));
  CHECK_THROWS(log_softmax_rows(x, {0, 0, 0}));
  const Tensor& m = masked_softmax_rows(x, {0, 1, 1}).value();
  CHECK(m[0] == 0);
}

TEST_CASE("dropout is the identity outside training") {
  Graph g;
  Var x = g.input(Tensor::from_rows({{1, 2, 3, 4}}));
  const Tensor& y = dropout(x, Real(0.5)).value();
  for (int i = 0; i < 4; ++i) CHECK(y[static_cast<std::size_t>(i)] == x.value()[static_cast<std::size_t>(i)]);
}

TEST_CASE("backward accumulates into parameters") {
  ParameterSet params;
  Parameter& w = params.add("w", {2, 2});
  w.value = Tensor::from_rows({{1, 2}, {3, 4}});
  Graph g(&params);
  Var x = g.input(Tensor::from_rows({{1, 1}}));
  g.backward(sum(matmul(x, g.param("w"))));
  for (std::size_t i = 0; i < 4; ++i) CHECK(w.grad[i] == 1);
  params.zero_grad();
  CHECK(w.grad[0] == 0);
}

TEST_CASE("pruned gradients stay masked") {
  Parameter p;
  p.value = Tensor::from_rows({{1, 0}, {0, 4}});
  p.grad = Tensor::from_rows({{1, 1}, {1, 1}});
  p.keep = {1, 0, 0, 1};
  p.mask_gradient();
  CHECK(p.grad[1] == 0);
  CHECK(p.grad[3] == 1);
  p.value[1] = 5;
  p.apply_mask();
  CHECK(p.value[1] == 0);
}

TEST_CASE("sparse products match dense ones exactly") {
  Rng rng(8);
  Tensor w({6, 4}), x({3, 6});
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = rng.uniform() < 0.5 ? 0 : static_cast<Real>(rng.uniform(-1, 1));
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = static_cast<Real>(rng.uniform(-1, 1));
  const SparseCCS s = SparseCCS::from_dense(w);
  Graph g;
  const Tensor dense = matmul(g.input(x), g.input(w)).value();
  const Tensor sparse = sparse_matmul(g.input(x), s).value();
  for (std::size_t i = 0; i < dense.size(); ++i) CHECK(dense[i] == sparse[i]);
}
