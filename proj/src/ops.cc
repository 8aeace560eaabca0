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

#include "snmt/ops.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "snmt/compression.h"

namespace snmt {
inline namespace SNMT_ABI_NAMESPACE {

namespace {

Graph& graph_of(Var a) {
  if (!a.valid()) throw std::invalid_argument("operation on an empty Var");
  return *a.graph();
}

void require_same(const Tensor& a, const Tensor& b, const char* op) {
  if (!a.same_shape(b))
    throw ShapeError(std::string(op) + ": shape mismatch " + a.shape_string() + " vs " + b.shape_string());
}

void require_matrix(const Tensor& a, const char* op) {
  if (a.rank() != 2) throw ShapeError(std::string(op) + ": expected a matrix, got " + a.shape_string());
}

Real sigmoid_scalar(Real x) {
  // Split by sign so exp never overflows.
  if (x >= 0) {
    const Real z = std::exp(-x);
    return Real(1) / (Real(1) + z);
  }
  const Real z = std::exp(x);
  return z / (Real(1) + z);
}

// Elementwise op with derivative evaluated at the input.
template <typename F, typename D>
Var unary(Var x, F f, D dfdy) {
  Graph& g = graph_of(x);
  const Tensor& xv = x.value();
  Tensor y(xv.dims());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = f(xv[i]);
  return g.record(std::move(y), {x}, [x, dfdy](Graph& g, const Tensor& gy) {
    if (!g.needs_grad(x)) return;
    const Tensor& xv = g.value(x);
    Tensor& gx = g.grad_of(x);
    for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += gy[i] * dfdy(xv[i]);
  });
}

}  // namespace

Var matmul(Var a, Var b) {
  Graph& g = graph_of(a);
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  require_matrix(av, "matmul");
  require_matrix(bv, "matmul");
  const int m = av.rows(), k = av.cols(), n = bv.cols();
  if (bv.rows() != k)
    throw ShapeError("matmul: inner dimensions differ " + av.shape_string() + " x " + bv.shape_string());
  Tensor c = Tensor::matrix(m, n);
  kernels::gemm_nn(av.data(), bv.data(), c.data(), m, k, n, false);
  return g.record(std::move(c), {a, b}, [a, b, m, k, n](Graph& g, const Tensor& gc) {
    if (g.needs_grad(a)) kernels::gemm_nt(gc.data(), g.value(b).data(), g.grad_of(a).data(), m, n, k);
    if (g.needs_grad(b)) kernels::gemm_tn(g.value(a).data(), gc.data(), g.grad_of(b).data(), m, k, n);
  });
}

Var sparse_matmul(Var x, const SparseCCS& w) {
  Graph& g = graph_of(x);
  const Tensor& xv = x.value();
  require_matrix(xv, "sparse_matmul");
  if (xv.cols() != w.rows())
    throw ShapeError("sparse_matmul: inner dimensions differ");
  Tensor y = Tensor::matrix(xv.rows(), w.cols());
  for (int r = 0; r < xv.rows(); ++r) w.vecmat(xv.row(r), y.row(r));
  return g.record(std::move(y), {x}, {});
}

Var add(Var a, Var b) {
  Graph& g = graph_of(a);
  require_same(a.value(), b.value(), "add");
  Tensor c = a.value();
  const Tensor& bv = b.value();
  for (std::size_t i = 0; i < c.size(); ++i) c[i] += bv[i];
  return g.record(std::move(c), {a, b}, [a, b](Graph& g, const Tensor& gc) {
    for (Var v : {a, b}) {
      if (!g.needs_grad(v)) continue;
      Tensor& gv = g.grad_of(v);
      for (std::size_t i = 0; i < gv.size(); ++i) gv[i] += gc[i];
    }
  });
}

Var sub(Var a, Var b) {
  Graph& g = graph_of(a);
  require_same(a.value(), b.value(), "sub");
  Tensor c = a.value();
  const Tensor& bv = b.value();
  for (std::size_t i = 0; i < c.size(); ++i) c[i] -= bv[i];
  return g.record(std::move(c), {a, b}, [a, b](Graph& g, const Tensor& gc) {
    if (g.needs_grad(a)) {
      Tensor& ga = g.grad_of(a);
      for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += gc[i];
    }
    if (g.needs_grad(b)) {
      Tensor& gb = g.grad_of(b);
      for (std::size_t i = 0; i < gb.size(); ++i) gb[i] -= gc[i];
    }
  });
}

Var mul(Var a, Var b) {
  Graph& g = graph_of(a);
  require_same(a.value(), b.value(), "mul");
  Tensor c = a.value();
  const Tensor& bv = b.value();
  for (std::size_t i = 0; i < c.size(); ++i) c[i] *= bv[i];
  return g.record(std::move(c), {a, b}, [a, b](Graph& g, const Tensor& gc) {
    if (g.needs_grad(a)) {
      Tensor& ga = g.grad_of(a);
      const Tensor& bv = g.value(b);
      for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += gc[i] * bv[i];
    }
    if (g.needs_grad(b)) {
      Tensor& gb = g.grad_of(b);
      const Tensor& av = g.value(a);
      for (std::size_t i = 0; i < gb.size(); ++i) gb[i] += gc[i] * av[i];
    }
  });
}

Var scale(Var a, Real s) {
  Graph& g = graph_of(a);
  Tensor c = a.value();
  for (auto& v : c.values()) v *= s;
  return g.record(std::move(c), {a}, [a, s](Graph& g, const Tensor& gc) {
    if (!g.needs_grad(a)) return;
    Tensor& ga = g.grad_of(a);
    for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += gc[i] * s;
  });
}

Var add_bias(Var a, Var bias) {
  Graph& g = graph_of(a);
  const Tensor& bv = bias.value();
  Tensor c = a.value();
  const int cols = c.cols();
  if (static_cast<int>(bv.size()) != cols)
    throw ShapeError("add_bias: bias " + bv.shape_string() + " vs " + c.shape_string());
  for (int r = 0; r < c.rows(); ++r) {
    auto row = c.row(r);
    for (int j = 0; j < cols; ++j) row[static_cast<std::size_t>(j)] += bv[static_cast<std::size_t>(j)];
  }
  return g.record(std::move(c), {a, bias}, [a, bias, cols](Graph& g, const Tensor& gc) {
    if (g.needs_grad(a)) {
      Tensor& ga = g.grad_of(a);
      for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += gc[i];
    }
    if (g.needs_grad(bias)) {
      Tensor& gb = g.grad_of(bias);
      for (int r = 0; r < gc.rows(); ++r)
        for (int j = 0; j < cols; ++j) gb[static_cast<std::size_t>(j)] += gc.at(r, j);
    }
  });
}

Var sigmoid(Var x) {
  Graph& g = graph_of(x);
  const Tensor& xv = x.value();
  Tensor y(xv.dims());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = sigmoid_scalar(xv[i]);
  return g.record(std::move(y), {x}, [x, id = static_cast<int>(g.size())](Graph& g, const Tensor& gy) {
    if (!g.needs_grad(x)) return;
    const Tensor& yv = g.value(Var(&g, id));
    Tensor& gx = g.grad_of(x);
    for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += gy[i] * yv[i] * (Real(1) - yv[i]);
  });
}

Var tanh(Var x) {
  Graph& g = graph_of(x);
  const Tensor& xv = x.value();
  Tensor y(xv.dims());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = std::tanh(xv[i]);
  return g.record(std::move(y), {x}, [x, id = static_cast<int>(g.size())](Graph& g, const Tensor& gy) {
    if (!g.needs_grad(x)) return;
    const Tensor& yv = g.value(Var(&g, id));
    Tensor& gx = g.grad_of(x);
    for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += gy[i] * (Real(1) - yv[i] * yv[i]);
  });
}

Var relu(Var x) {
  return unary(
      x, [](Real v) { return v > 0 ? v : Real(0); }, [](Real v) { return v > 0 ? Real(1) : Real(0); });
}

Var activation(Var x, Activation kind) {
  switch (kind) {
    case Activation::kSigmoid:
      return sigmoid(x);
    case Activation::kTanh:
      return tanh(x);
    case Activation::kSoftmaxRows:
      return softmax_rows(x);
    case Activation::kRelu:
      return relu(x);
  }
  throw std::invalid_argument("unknown activation");
}

namespace {

Var softmax_impl(Var x, const std::vector<std::uint8_t>* mask) {
  Graph& g = graph_of(x);
  const Tensor& xv = x.value();
  require_matrix(xv, "softmax_rows");
  if (mask && mask->size() != xv.size()) throw ShapeError("masked_softmax_rows: mask size mismatch");
  Tensor y(xv.dims(), 0);
  const int cols = xv.cols();
  for (int r = 0; r < xv.rows(); ++r) {
    const std::size_t base = static_cast<std::size_t>(r) * cols;
    Real mx = -std::numeric_limits<Real>::infinity();
    bool any = false;
    for (int j = 0; j < cols; ++j) {
      if (mask && !(*mask)[base + j]) continue;
      mx = std::max(mx, xv[base + j]);
      any = true;
    }
    if (!any) throw std::invalid_argument("masked_softmax_rows: row " + std::to_string(r) + " is fully masked");
    Real total = 0;
    for (int j = 0; j < cols; ++j) {
      if (mask && !(*mask)[base + j]) continue;
      y[base + j] = std::exp(xv[base + j] - mx);
      total += y[base + j];
    }
    for (int j = 0; j < cols; ++j) y[base + j] /= total;
  }
  return g.record(std::move(y), {x}, [x, cols, id = static_cast<int>(g.size())](Graph& g, const Tensor& gy) {
    if (!g.needs_grad(x)) return;
    const Tensor& yv = g.value(Var(&g, id));
    Tensor& gx = g.grad_of(x);
    for (int r = 0; r < yv.rows(); ++r) {
      const std::size_t base = static_cast<std::size_t>(r) * cols;
      Real dot = 0;
      for (int j = 0; j < cols; ++j) dot += gy[base + j] * yv[base + j];
      for (int j = 0; j < cols; ++j) gx[base + j] += yv[base + j] * (gy[base + j] - dot);
    }
  });
}

}  // namespace

Var softmax_rows(Var x) { return softmax_impl(x, nullptr); }

Var masked_softmax_rows(Var x, const std::vector<std::uint8_t>& mask) { return softmax_impl(x, &mask); }

Var log_softmax_rows(Var x, const std::vector<std::uint8_t>& col_mask) {
  Graph& g = graph_of(x);
  const Tensor& xv = x.value();
  require_matrix(xv, "log_softmax_rows");
  const int cols = xv.cols();
  const bool per_element = !col_mask.empty() && col_mask.size() == xv.size() && xv.rows() > 1;
  if (!col_mask.empty() && !per_element && static_cast<int>(col_mask.size()) != cols)
    throw ShapeError("log_softmax_rows: mask size mismatch");
  auto allowed = [col_mask, per_element, cols](int r, int j) {
    if (col_mask.empty()) return true;
    return col_mask[per_element ? static_cast<std::size_t>(r) * cols + j : static_cast<std::size_t>(j)] != 0;
  };
  Tensor y(xv.dims(), -std::numeric_limits<Real>::infinity());
  for (int r = 0; r < xv.rows(); ++r) {
    auto in = xv.row(r);
    auto out = y.row(r);
    Real mx = -std::numeric_limits<Real>::infinity();
    for (int j = 0; j < cols; ++j)
      if (allowed(r, j)) mx = std::max(mx, in[static_cast<std::size_t>(j)]);
    if (mx == -std::numeric_limits<Real>::infinity())
      throw std::invalid_argument("log_softmax_rows: row " + std::to_string(r) + " is fully masked");
    Real total = 0;
    for (int j = 0; j < cols; ++j)
      if (allowed(r, j)) total += std::exp(in[static_cast<std::size_t>(j)] - mx);
    const Real lse = mx + std::log(total);
    for (int j = 0; j < cols; ++j)
      if (allowed(r, j)) out[static_cast<std::size_t>(j)] = in[static_cast<std::size_t>(j)] - lse;
  }
  return g.record(std::move(y), {x}, [x, cols, allowed, id = static_cast<int>(g.size())](Graph& g, const Tensor& gy) {
    if (!g.needs_grad(x)) return;
    const Tensor& yv = g.value(Var(&g, id));
    Tensor& gx = g.grad_of(x);
    for (int r = 0; r < yv.rows(); ++r) {
      const std::size_t base = static_cast<std::size_t>(r) * cols;
      Real total = 0;
      for (int j = 0; j < cols; ++j)
        if (allowed(r, j)) total += gy[base + j];
      for (int j = 0; j < cols; ++j)
        if (allowed(r, j)) gx[base + j] += gy[base + j] - std::exp(yv[base + j]) * total;
    }
  });
}

Var concat_cols(const std::vector<Var>& parts) {
  if (parts.empty()) throw std::invalid_argument("concat_cols: nothing to concatenate");
  Graph& g = graph_of(parts.front());
  const int rows = parts.front().value().rows();
  int total = 0;
  std::vector<int> offsets;
  for (const Var& p : parts) {
    require_matrix(p.value(), "concat_cols");
    if (p.value().rows() != rows) throw ShapeError("concat_cols: row counts differ");
    offsets.push_back(total);
    total += p.value().cols();
  }
  Tensor y = Tensor::matrix(rows, total);
  for (std::size_t k = 0; k < parts.size(); ++k) {
    const Tensor& pv = parts[k].value();
    for (int r = 0; r < rows; ++r) std::copy(pv.row(r).begin(), pv.row(r).end(), y.row(r).begin() + offsets[k]);
  }
  return g.record(std::move(y), parts, [parts, offsets](Graph& g, const Tensor& gy) {
    for (std::size_t k = 0; k < parts.size(); ++k) {
      if (!g.needs_grad(parts[k])) continue;
      Tensor& gp = g.grad_of(parts[k]);
      const int c = gp.cols();
      for (int r = 0; r < gp.rows(); ++r) {
        auto src = gy.row(r);
        auto dst = gp.row(r);
        for (int j = 0; j < c; ++j)
          dst[static_cast<std::size_t>(j)] += src[static_cast<std::size_t>(offsets[k] + j)];
      }
    }
  });
}

Var slice_cols(Var a, int begin, int width) {
  Graph& g = graph_of(a);
  const Tensor& av = a.value();
  require_matrix(av, "slice_cols");
  if (begin < 0 || width <= 0 || begin + width > av.cols()) throw ShapeError("slice_cols: range out of bounds");
  Tensor y = Tensor::matrix(av.rows(), width);
  for (int r = 0; r < av.rows(); ++r)
    std::copy_n(av.row(r).begin() + begin, width, y.row(r).begin());
  return g.record(std::move(y), {a}, [a, begin, width](Graph& g, const Tensor& gy) {
    if (!g.needs_grad(a)) return;
    Tensor& ga = g.grad_of(a);
    for (int r = 0; r < ga.rows(); ++r)
      for (int j = 0; j < width; ++j) ga.at(r, begin + j) += gy.at(r, j);
  });
}

Var lookup(Var table, const std::vector<int>& ids) {
  Graph& g = graph_of(table);
  const Tensor& tv = table.value();
  require_matrix(tv, "lookup");
  if (ids.empty()) throw ShapeError("lookup: no ids");
  const int cols = tv.cols();
  Tensor y = Tensor::matrix(static_cast<int>(ids.size()), cols);
  for (std::size_t r = 0; r < ids.size(); ++r) {
    if (ids[r] < 0 || ids[r] >= tv.rows())
      throw std::out_of_range("lookup: id " + std::to_string(ids[r]) + " outside table of " +
                              std::to_string(tv.rows()) + " rows");
    std::copy(tv.row(ids[r]).begin(), tv.row(ids[r]).end(), y.row(static_cast<int>(r)).begin());
  }
  return g.record(std::move(y), {table}, [table, ids, cols](Graph& g, const Tensor& gy) {
    if (!g.needs_grad(table)) return;
    Tensor& gt = g.grad_of(table);
    for (std::size_t r = 0; r < ids.size(); ++r)
      for (int j = 0; j < cols; ++j) gt.at(ids[r], j) += gy.at(static_cast<int>(r), j);
  });
}

Var gather_rows(Var a, const std::vector<int>& rows) {
  Graph& g = graph_of(a);
  const Tensor& av = a.value();
  require_matrix(av, "gather_rows");
  if (rows.empty()) throw ShapeError("gather_rows: no rows");
  Tensor y = Tensor::matrix(static_cast<int>(rows.size()), av.cols());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r] < 0 || rows[r] >= av.rows()) throw std::out_of_range("gather_rows: row index out of range");
    std::copy(av.row(rows[r]).begin(), av.row(rows[r]).end(), y.row(static_cast<int>(r)).begin());
  }
  return g.record(std::move(y), {a}, [a, rows](Graph& g, const Tensor& gy) {
    if (!g.needs_grad(a)) return;
    Tensor& ga = g.grad_of(a);
    for (std::size_t r = 0; r < rows.size(); ++r)
      for (int j = 0; j < ga.cols(); ++j) ga.at(rows[r], j) += gy.at(static_cast<int>(r), j);
  });
}

Var select_rows(Var a, Var b, const std::vector<std::uint8_t>& take_a) {
  Graph& g = graph_of(a);
  require_same(a.value(), b.value(), "select_rows");
  const Tensor& av = a.value();
  if (static_cast<int>(take_a.size()) != av.rows()) throw ShapeError("select_rows: selector length mismatch");
  Tensor y = b.value();
  for (int r = 0; r < av.rows(); ++r)
    if (take_a[static_cast<std::size_t>(r)]) std::copy(av.row(r).begin(), av.row(r).end(), y.row(r).begin());
  return g.record(std::move(y), {a, b}, [a, b, take_a](Graph& g, const Tensor& gy) {
    for (int which = 0; which < 2; ++which) {
      Var v = which == 0 ? a : b;
      if (!g.needs_grad(v)) continue;
      Tensor& gv = g.grad_of(v);
      for (int r = 0; r < gv.rows(); ++r) {
        if (static_cast<bool>(take_a[static_cast<std::size_t>(r)]) != (which == 0)) continue;
        for (int j = 0; j < gv.cols(); ++j) gv.at(r, j) += gy.at(r, j);
      }
    }
  });
}

Var scatter_rows(Var base, Var update, const std::vector<int>& rows) {
  Graph& g = graph_of(base);
  const Tensor& bv = base.value();
  const Tensor& uv = update.value();
  require_matrix(bv, "scatter_rows");
  require_matrix(uv, "scatter_rows");
  if (uv.cols() != bv.cols() || uv.rows() != static_cast<int>(rows.size()))
    throw ShapeError("scatter_rows: update " + uv.shape_string() + " does not fit " + bv.shape_string());
  std::vector<std::uint8_t> replaced(static_cast<std::size_t>(bv.rows()), 0);
  Tensor y = bv;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i] < 0 || rows[i] >= bv.rows()) throw std::out_of_range("scatter_rows: row index out of range");
    if (replaced[static_cast<std::size_t>(rows[i])]++) throw std::invalid_argument("scatter_rows: repeated row");
    std::copy(uv.row(static_cast<int>(i)).begin(), uv.row(static_cast<int>(i)).end(), y.row(rows[i]).begin());
  }
  return g.record(std::move(y), {base, update}, [base, update, rows, replaced](Graph& g, const Tensor& gy) {
    if (g.needs_grad(base)) {
      Tensor& gb = g.grad_of(base);
      for (int r = 0; r < gb.rows(); ++r)
        if (!replaced[static_cast<std::size_t>(r)])
          for (int j = 0; j < gb.cols(); ++j) gb.at(r, j) += gy.at(r, j);
    }
    if (g.needs_grad(update)) {
      Tensor& gu = g.grad_of(update);
      for (std::size_t i = 0; i < rows.size(); ++i)
        for (int j = 0; j < gu.cols(); ++j) gu.at(static_cast<int>(i), j) += gy.at(rows[i], j);
    }
  });
}

Var sum(Var a) {
  Graph& g = graph_of(a);
  Real total = 0;
  for (Real v : a.value().values()) total += v;
  return g.record(Tensor::scalar(total), {a}, [a](Graph& g, const Tensor& gy) {
    if (!g.needs_grad(a)) return;
    Tensor& ga = g.grad_of(a);
    for (auto& v : ga.values()) v += gy[0];
  });
}

Var dropout(Var a, Real p) {
  Graph& g = graph_of(a);
  if (!g.training() || p <= 0) return a;
  if (p >= 1) throw std::invalid_argument("dropout rate must be below 1");
  const Tensor& av = a.value();
  Tensor keep(av.dims(), 0);
  const Real kept_scale = Real(1) / (Real(1) - p);
  for (auto& v : keep.values()) v = g.rng().uniform() >= p ? kept_scale : Real(0);
  Tensor y = av;
  for (std::size_t i = 0; i < y.size(); ++i) y[i] *= keep[i];
  return g.record(std::move(y), {a}, [a, keep = std::move(keep)](Graph& g, const Tensor& gy) {
    if (!g.needs_grad(a)) return;
    Tensor& ga = g.grad_of(a);
    for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += gy[i] * keep[i];
  });
}

std::pair<Var, Var> lstm_cell(Var gates, Var c_prev) {
  Graph& g = graph_of(gates);
  const Tensor& gv = gates.value();
  const Tensor& cp = c_prev.value();
  require_matrix(gv, "lstm_cell");
  const int rows = cp.rows(), d = cp.cols();
  if (gv.rows() != rows || gv.cols() != 4 * d) throw ShapeError("lstm_cell: gates must be R x 4d");

  // Activated gates are kept for the backward pass.
  Tensor act = Tensor::matrix(rows, 4 * d);
  Tensor c = Tensor::matrix(rows, d);
  Tensor h = Tensor::matrix(rows, d);
  for (int r = 0; r < rows; ++r) {
    auto gr = gv.row(r);
    auto ar = act.row(r);
    for (int j = 0; j < d; ++j) {
      const Real i = sigmoid_scalar(gr[static_cast<std::size_t>(j)]);
      const Real f = sigmoid_scalar(gr[static_cast<std::size_t>(d + j)]);
      const Real o = sigmoid_scalar(gr[static_cast<std::size_t>(2 * d + j)]);
      const Real u = std::tanh(gr[static_cast<std::size_t>(3 * d + j)]);
      ar[static_cast<std::size_t>(j)] = i;
      ar[static_cast<std::size_t>(d + j)] = f;
      ar[static_cast<std::size_t>(2 * d + j)] = o;
      ar[static_cast<std::size_t>(3 * d + j)] = u;
      const Real cn = f * cp.at(r, j) + i * u;
      c.at(r, j) = cn;
      h.at(r, j) = o * std::tanh(cn);
    }
  }

  Var c_var = g.record(std::move(c), {gates, c_prev}, [gates, c_prev, act, d](Graph& g, const Tensor& gc) {
    const Tensor& cp = g.value(c_prev);
    Tensor* ggates = g.needs_grad(gates) ? &g.grad_of(gates) : nullptr;
    Tensor* gcp = g.needs_grad(c_prev) ? &g.grad_of(c_prev) : nullptr;
    for (int r = 0; r < cp.rows(); ++r) {
      for (int j = 0; j < d; ++j) {
        const Real i = act.at(r, j), f = act.at(r, d + j), u = act.at(r, 3 * d + j);
        const Real dc = gc.at(r, j);
        if (gcp) gcp->at(r, j) += dc * f;
        if (ggates) {
          ggates->at(r, j) += dc * u * i * (Real(1) - i);
          ggates->at(r, d + j) += dc * cp.at(r, j) * f * (Real(1) - f);
          ggates->at(r, 3 * d + j) += dc * i * (Real(1) - u * u);
        }
      }
    }
  });

  Var h_var = g.record(std::move(h), {gates, c_var}, [gates, c_var, act, d](Graph& g, const Tensor& gh) {
    const Tensor& cv = g.value(c_var);
    Tensor* ggates = g.needs_grad(gates) ? &g.grad_of(gates) : nullptr;
    Tensor* gcv = g.needs_grad(c_var) ? &g.grad_of(c_var) : nullptr;
    for (int r = 0; r < cv.rows(); ++r) {
      for (int j = 0; j < d; ++j) {
        const Real o = act.at(r, 2 * d + j);
        const Real tc = std::tanh(cv.at(r, j));
        const Real dh = gh.at(r, j);
        if (ggates) ggates->at(r, 2 * d + j) += dh * tc * o * (Real(1) - o);
        if (gcv) gcv->at(r, j) += dh * o * (Real(1) - tc * tc);
      }
    }
  });
  return {h_var, c_var};
}

Var stack_steps(const std::vector<Var>& steps) {
  if (steps.empty()) throw ShapeError("stack_steps: no steps");
  Graph& g = graph_of(steps.front());
  const int b = steps.front().value().rows();
  const int d = steps.front().value().cols();
  const int s = static_cast<int>(steps.size());
  Tensor y({b, s, d});
  for (int t = 0; t < s; ++t) {
    const Tensor& sv = steps[static_cast<std::size_t>(t)].value();
    if (sv.rows() != b || sv.cols() != d) throw ShapeError("stack_steps: step shapes differ");
    for (int r = 0; r < b; ++r)
      std::copy(sv.row(r).begin(), sv.row(r).end(), y.data() + (static_cast<std::size_t>(r) * s + t) * d);
  }
  return g.record(std::move(y), steps, [steps, b, s, d](Graph& g, const Tensor& gy) {
    for (int t = 0; t < s; ++t) {
      Var v = steps[static_cast<std::size_t>(t)];
      if (!g.needs_grad(v)) continue;
      Tensor& gv = g.grad_of(v);
      for (int r = 0; r < b; ++r) {
        const Real* src = gy.data() + (static_cast<std::size_t>(r) * s + t) * d;
        auto dst = gv.row(r);
        for (int j = 0; j < d; ++j) dst[static_cast<std::size_t>(j)] += src[j];
      }
    }
  });
}

namespace {

void check_attention_shapes(const Tensor& keys, int rows, int d, const std::vector<int>& row_batch) {
  if (keys.rank() != 3) throw ShapeError("attention: keys must be [B, S, d]");
  if (keys.dim(2) != d) throw ShapeError("attention: hidden sizes differ");
  if (static_cast<int>(row_batch.size()) != rows) throw ShapeError("attention: row_batch length mismatch");
  for (int b : row_batch)
    if (b < 0 || b >= keys.dim(0)) throw std::out_of_range("attention: batch index out of range");
}

}  // namespace

Var attention_scores(Var keys, Var query, const std::vector<int>& row_batch) {
  Graph& g = graph_of(keys);
  const Tensor& kv = keys.value();
  const Tensor& qv = query.value();
  const int rows = qv.rows(), d = qv.cols();
  check_attention_shapes(kv, rows, d, row_batch);
  const int s = kv.dim(1);
  Tensor y = Tensor::matrix(rows, s);
  for (int r = 0; r < rows; ++r) {
    const Real* q = qv.data() + static_cast<std::size_t>(r) * d;
    for (int t = 0; t < s; ++t) {
      const Real* k = kv.data() + (static_cast<std::size_t>(row_batch[static_cast<std::size_t>(r)]) * s + t) * d;
      Real acc = 0;
      for (int j = 0; j < d; ++j) acc += q[j] * k[j];
      y.at(r, t) = acc;
    }
  }
  return g.record(std::move(y), {keys, query}, [keys, query, row_batch, s, d](Graph& g, const Tensor& gy) {
    const Tensor& kv = g.value(keys);
    const Tensor& qv = g.value(query);
    Tensor* gk = g.needs_grad(keys) ? &g.grad_of(keys) : nullptr;
    Tensor* gq = g.needs_grad(query) ? &g.grad_of(query) : nullptr;
    for (int r = 0; r < qv.rows(); ++r) {
      const std::size_t kb = static_cast<std::size_t>(row_batch[static_cast<std::size_t>(r)]) * s;
      for (int t = 0; t < s; ++t) {
        const Real w = gy.at(r, t);
        if (w == Real(0)) continue;
        const std::size_t koff = (kb + t) * d;
        for (int j = 0; j < d; ++j) {
          if (gq) gq->at(r, j) += w * kv[koff + j];
          if (gk) (*gk)[koff + j] += w * qv.at(r, j);
        }
      }
    }
  });
}

Var attention_context(Var keys, Var alpha, const std::vector<int>& row_batch) {
  Graph& g = graph_of(keys);
  const Tensor& kv = keys.value();
  const Tensor& av = alpha.value();
  if (kv.rank() != 3) throw ShapeError("attention_context: keys must be [B, S, d]");
  const int rows = av.rows(), s = kv.dim(1), d = kv.dim(2);
  check_attention_shapes(kv, rows, d, row_batch);
  if (av.cols() != s) throw ShapeError("attention_context: alpha width differs from source length");
  Tensor y = Tensor::matrix(rows, d);
  for (int r = 0; r < rows; ++r) {
    Real* out = y.data() + static_cast<std::size_t>(r) * d;
    const std::size_t kb = static_cast<std::size_t>(row_batch[static_cast<std::size_t>(r)]) * s;
    for (int t = 0; t < s; ++t) {
      const Real w = av.at(r, t);
      if (w == Real(0)) continue;
      const Real* k = kv.data() + (kb + t) * d;
      for (int j = 0; j < d; ++j) out[j] += w * k[j];
    }
  }
  return g.record(std::move(y), {keys, alpha}, [keys, alpha, row_batch, s, d](Graph& g, const Tensor& gy) {
    const Tensor& kv = g.value(keys);
    const Tensor& av = g.value(alpha);
    Tensor* gk = g.needs_grad(keys) ? &g.grad_of(keys) : nullptr;
    Tensor* ga = g.needs_grad(alpha) ? &g.grad_of(alpha) : nullptr;
    for (int r = 0; r < av.rows(); ++r) {
      const std::size_t kb = static_cast<std::size_t>(row_batch[static_cast<std::size_t>(r)]) * s;
      const Real* go = gy.data() + static_cast<std::size_t>(r) * d;
      for (int t = 0; t < s; ++t) {
        const std::size_t koff = (kb + t) * d;
        if (ga) {
          Real acc = 0;
          for (int j = 0; j < d; ++j) acc += go[j] * kv[koff + j];
          ga->at(r, t) += acc;
        }
        if (gk) {
          const Real w = av.at(r, t);
          if (w == Real(0)) continue;
          for (int j = 0; j < d; ++j) (*gk)[koff + j] += w * go[j];
        }
      }
    }
  });
}

Var pick_nll(Var log_probs, const std::vector<int>& ids, const std::vector<Real>& weights) {
  Graph& g = graph_of(log_probs);
  const Tensor& lp = log_probs.value();
  require_matrix(lp, "pick_nll");
  if (static_cast<int>(ids.size()) != lp.rows() || weights.size() != ids.size())
    throw ShapeError("pick_nll: ids/weights must have one entry per row");
  Real total = 0;
  for (std::size_t r = 0; r < ids.size(); ++r) {
    if (weights[r] == Real(0)) continue;
    if (ids[r] < 0 || ids[r] >= lp.cols()) throw std::out_of_range("pick_nll: id out of range");
    total -= weights[r] * lp.at(static_cast<int>(r), ids[r]);
  }
  return g.record(Tensor::scalar(total), {log_probs}, [log_probs, ids, weights](Graph& g, const Tensor& gy) {
    if (!g.needs_grad(log_probs)) return;
    Tensor& gl = g.grad_of(log_probs);
    for (std::size_t r = 0; r < ids.size(); ++r)
      if (weights[r] != Real(0)) gl.at(static_cast<int>(r), ids[r]) -= gy[0] * weights[r];
  });
}

Var weighted_sq_error(Var x, const Tensor& target, const std::vector<Real>& weights) {
  Graph& g = graph_of(x);
  const Tensor& xv = x.value();
  require_same(xv, target, "weighted_sq_error");
  if (static_cast<int>(weights.size()) != xv.rows()) throw ShapeError("weighted_sq_error: one weight per row");
  Real total = 0;
  for (int r = 0; r < xv.rows(); ++r) {
    const Real w = weights[static_cast<std::size_t>(r)];
    if (w == Real(0)) continue;
    Real row = 0;
    for (int c = 0; c < xv.cols(); ++c) {
      const Real diff = xv.at(r, c) - target.at(r, c);
      row += diff * diff;
    }
    total += w * row;
  }
  return g.record(Tensor::scalar(total), {x}, [x, target, weights](Graph& g, const Tensor& gy) {
    if (!g.needs_grad(x)) return;
    const Tensor& xv = g.value(x);
    Tensor& gx = g.grad_of(x);
    for (int r = 0; r < xv.rows(); ++r) {
      const Real w = weights[static_cast<std::size_t>(r)];
      if (w == Real(0)) continue;
      for (int c = 0; c < xv.cols(); ++c) gx.at(r, c) += gy[0] * w * Real(2) * (xv.at(r, c) - target.at(r, c));
    }
  });
}

}  // namespace SNMT_ABI_NAMESPACE
}  // namespace snmt
