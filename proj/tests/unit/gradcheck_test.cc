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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <functional>
#include <numeric>

#include "snmt/gradcheck.h"
#include "snmt/ops.h"

using namespace snmt;

namespace {

using OpBuilder = std::function<Var(Graph&, std::vector<Var>&)>;

int dim(Rng& rng) { return 1 + static_cast<int>(rng.below(16)); }

// Random projection of the op output so that the loss is not a plain sum.
double check_op(const OpBuilder& op, const std::vector<std::vector<int>>& shapes, std::uint64_t seed,
                double away_from_zero = 0) {
  ParameterSet params;
  for (std::size_t i = 0; i < shapes.size(); ++i) params.add("p" + std::to_string(i), shapes[i]);
  Rng rng(seed);
  params.init_uniform(rng, 1.0);
  if (away_from_zero > 0)
    for (Parameter& p : params)
      for (std::size_t k = 0; k < p.value.size(); ++k)
        if (std::abs(p.value[k]) < away_from_zero) p.value[k] = p.value[k] < 0 ? -away_from_zero : away_from_zero;
  auto loss = [&](Graph& g) {
    std::vector<Var> in;
    for (Parameter& p : params) in.push_back(g.param(p));
    Var out = op(g, in);
    Tensor w(out.value().dims());
    Rng wr(seed + 17);
    for (std::size_t k = 0; k < w.size(); ++k) w[k] = static_cast<Real>(wr.uniform(-1, 1));
    return sum(mul(out, g.input(w)));
  };
  GradCheckOptions opt;
  opt.eps = 1e-3;
  opt.fourth_order = true;
  opt.max_coords = 24;
  opt.seed = seed;
  return grad_check(params, loss, opt).max_rel_error();
}

void sweep(const char* name, const std::function<double(Rng&, std::uint64_t)>& trial) {
  Rng rng(std::hash<std::string>{}(name));
  double worst = 0;
  for (int i = 0; i < 100; ++i) worst = std::max(worst, trial(rng, static_cast<std::uint64_t>(i + 1)));
  INFO(std::string(name));
  CHECK(worst <= 1e-4);
}

}  // namespace

TEST_CASE("tanh of a linear map matches finite differences") {
  ParameterSet params;
  params.add("W", {5, 4});
  params.add("x", {3, 5});
  Rng rng(1);
  params.init_uniform(rng, 1.0);
  const auto report = grad_check(params, [&](Graph& g) { return sum(tanh(matmul(g.param("x"), g.param("W")))); });
  CHECK(report.max_rel_error() <= 1e-6);
  CHECK(report.entries.size() == 2);
}

TEST_CASE("relative error") {
  CHECK(relative_error(1.0, 1.0) == 0);
  CHECK(relative_error(0, 0) == 0);
  CHECK(relative_error(2.0, 1.0) == doctest::Approx(0.5));
  CHECK(relative_error(0, 1e-13) == doctest::Approx(0.1));
}

TEST_CASE("frozen and pruned coordinates are skipped") {
  ParameterSet params;
  params.add("a", {2, 2}).frozen = true;
  Parameter& b = params.add("b", {2, 2});
  b.keep = {1, 0, 1, 0};
  Rng rng(2);
  params.init_uniform(rng, 1.0);
  b.apply_mask();
  const auto report = grad_check(params, [&](Graph& g) { return sum(tanh(matmul(g.param("a"), g.param("b")))); });
  REQUIRE(report.entries.size() == 1);
  CHECK(report.entries[0].name == "b");
  CHECK(report.entries[0].checked == 2);
}

TEST_CASE("a broken backward rule is flagged") {
  ParameterSet params;
  params.add("x", {2, 3});
  Rng rng(4);
  params.init_uniform(rng, 1.0);
  auto doubled_grad = [](Var x) {
    Graph& g = *x.graph();
    Tensor y = x.value();
    for (std::size_t i = 0; i < y.size(); ++i) y[i] = y[i] * y[i];
    return g.record(std::move(y), {x}, [x](Graph& g, const Tensor& gy) {
      Tensor& gx = g.grad_of(x);
      for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += 4 * x.value()[i] * gy[i];
    });
  };
  const auto report = grad_check(params, [&](Graph& g) { return sum(doubled_grad(g.param("x"))); });
  CHECK(report.max_rel_error() > 1e-2);
  CHECK(report.flagged(1e-2) == std::vector<std::string>{"x"});
  ParameterSet empty;
  CHECK(grad_check(empty, [](Graph& g) { return sum(g.input(Tensor::scalar(1))); }).entries.empty());
}

TEST_CASE("fourth order stencil is exact on constants") {
  ParameterSet params;
  params.add("unused", {1, 3});
  params.add("x", {1, 3});
  Rng rng(3);
  params.init_uniform(rng, 1.0);
  GradCheckOptions opt;
  opt.eps = 1e-3;
  opt.fourth_order = true;
  const auto report = grad_check(params, [&](Graph& g) { return sum(tanh(g.param("x"))); }, opt);
  CHECK(report.entries[0].max_rel_error == 0);
  CHECK(report.entries[1].max_rel_error <= 1e-8);
}

TEST_CASE("differentiable ops over random shapes") {
  sweep("matmul", [](Rng& r, std::uint64_t s) {
    const int a = dim(r), b = dim(r), c = dim(r);
    return check_op([](Graph&, std::vector<Var>& v) { return matmul(v[0], v[1]); }, {{a, b}, {b, c}}, s);
  });
  sweep("add/sub/mul", [](Rng& r, std::uint64_t s) {
    const int a = dim(r), b = dim(r);
    return check_op([](Graph&, std::vector<Var>& v) { return mul(add(v[0], v[1]), sub(v[1], v[2])); },
                    {{a, b}, {a, b}, {a, b}}, s);
  });
  sweep("scale/add_bias", [](Rng& r, std::uint64_t s) {
    const int a = dim(r), b = dim(r);
    return check_op([](Graph&, std::vector<Var>& v) { return scale(add_bias(v[0], v[1]), Real(-1.7)); },
                    {{a, b}, {1, b}}, s);
  });
  sweep("sigmoid/tanh", [](Rng& r, std::uint64_t s) {
    const int a = dim(r), b = dim(r);
    return check_op([](Graph&, std::vector<Var>& v) { return add(sigmoid(v[0]), tanh(v[0])); }, {{a, b}}, s);
  });
  sweep("relu", [](Rng& r, std::uint64_t s) {
    const int a = dim(r), b = dim(r);
    return check_op([](Graph&, std::vector<Var>& v) { return relu(v[0]); }, {{a, b}}, s, 0.05);
  });
  sweep("softmax", [](Rng& r, std::uint64_t s) {
    const int a = dim(r), b = dim(r);
    return check_op([](Graph&, std::vector<Var>& v) { return add(softmax_rows(v[0]), log_softmax_rows(v[0])); },
                    {{a, b}}, s);
  });
  sweep("masked softmax", [](Rng& r, std::uint64_t s) {
    const int a = dim(r), b = dim(r);
    std::vector<std::uint8_t> mask(static_cast<std::size_t>(a * b));
    for (int i = 0; i < a; ++i)
      for (int j = 0; j < b; ++j) mask[static_cast<std::size_t>(i * b + j)] = j == 0 || r.below(2);
    return check_op([mask](Graph&, std::vector<Var>& v) { return masked_softmax_rows(v[0], mask); }, {{a, b}}, s);
  });
  sweep("masked log softmax", [](Rng& r, std::uint64_t s) {
    const int a = dim(r), b = dim(r);
    std::vector<std::uint8_t> cols(static_cast<std::size_t>(b));
    for (int j = 0; j < b; ++j) cols[static_cast<std::size_t>(j)] = j == 0 || r.below(2);
    std::vector<int> ids(static_cast<std::size_t>(a), 0);
    std::vector<Real> w(static_cast<std::size_t>(a), 1);
    return check_op([=](Graph&, std::vector<Var>& v) { return pick_nll(log_softmax_rows(v[0], cols), ids, w); },
                    {{a, b}}, s);
  });
  sweep("concat/slice", [](Rng& r, std::uint64_t s) {
    const int a = dim(r), b = dim(r), c = dim(r);
    const int begin = static_cast<int>(r.below(static_cast<std::uint64_t>(b + c)));
    const int width = 1 + static_cast<int>(r.below(static_cast<std::uint64_t>(b + c - begin)));
    return check_op(
        [=](Graph&, std::vector<Var>& v) { return slice_cols(concat_cols({v[0], v[1]}), begin, width); },
        {{a, b}, {a, c}}, s);
  });
  sweep("lookup/gather/select", [](Rng& r, std::uint64_t s) {
    const int n = dim(r), d = dim(r), k = dim(r);
    std::vector<int> ids, rows;
    std::vector<std::uint8_t> take;
    for (int i = 0; i < k; ++i) {
      ids.push_back(static_cast<int>(r.below(static_cast<std::uint64_t>(n))));
      rows.push_back(static_cast<int>(r.below(static_cast<std::uint64_t>(k))));
      take.push_back(static_cast<std::uint8_t>(r.below(2)));
    }
    return check_op(
        [=](Graph&, std::vector<Var>& v) { return select_rows(gather_rows(lookup(v[0], ids), rows), v[1], take); },
        {{n, d}, {k, d}}, s);
  });
  sweep("scatter", [](Rng& r, std::uint64_t s) {
    const int n = dim(r), d = dim(r);
    std::vector<int> rows(static_cast<std::size_t>(n));
    std::iota(rows.begin(), rows.end(), 0);
    r.shuffle(rows);
    rows.resize(1 + r.below(static_cast<std::uint64_t>(n)));
    const int k = static_cast<int>(rows.size());
    return check_op([=](Graph&, std::vector<Var>& v) { return scatter_rows(v[0], tanh(v[1]), rows); },
                    {{n, d}, {k, d}}, s);
  });
  sweep("lstm cell", [](Rng& r, std::uint64_t s) {
    const int b = dim(r), h = dim(r);
    return check_op(
        [](Graph&, std::vector<Var>& v) {
          auto [hh, cc] = lstm_cell(v[0], v[1]);
          return concat_cols({hh, cc});
        },
        {{b, 4 * h}, {b, h}}, s);
  });
  sweep("attention", [](Rng& r, std::uint64_t s) {
    const int batch = 1 + static_cast<int>(r.below(4)), len = dim(r), d = dim(r), rows = dim(r);
    std::vector<int> row_batch;
    for (int i = 0; i < rows; ++i) row_batch.push_back(static_cast<int>(r.below(static_cast<std::uint64_t>(batch))));
    std::vector<std::vector<int>> shapes(static_cast<std::size_t>(len), std::vector<int>{batch, d});
    shapes.push_back({rows, d});
    return check_op(
        [=](Graph&, std::vector<Var>& v) {
          Var query = v.back();
          Var keys = stack_steps(std::vector<Var>(v.begin(), v.end() - 1));
          Var alpha = softmax_rows(attention_scores(keys, query, row_batch));
          return attention_context(keys, alpha, row_batch);
        },
        shapes, s);
  });
  sweep("losses", [](Rng& r, std::uint64_t s) {
    const int a = dim(r), b = dim(r);
    std::vector<int> ids;
    std::vector<Real> w;
    Tensor target({a, b});
    for (int i = 0; i < a; ++i) {
      ids.push_back(static_cast<int>(r.below(static_cast<std::uint64_t>(b))));
      w.push_back(static_cast<Real>(r.uniform()));
      target.at(i, ids.back()) = 1;
    }
    return check_op(
        [=](Graph&, std::vector<Var>& v) {
          return add(pick_nll(log_softmax_rows(v[0]), ids, w), weighted_sq_error(softmax_rows(v[0]), target, w));
        },
        {{a, b}}, s);
  });
  sweep("dropout", [](Rng& r, std::uint64_t s) {
    const int a = dim(r), b = dim(r);
    return check_op(
        [](Graph& g, std::vector<Var>& v) {
          g.set_training(true);
          return dropout(v[0], Real(0.3));
        },
        {{a, b}}, s);
  });
}
