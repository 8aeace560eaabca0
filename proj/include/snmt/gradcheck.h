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
#include <functional>
#include <string>
#include <vector>

#include "snmt/graph.h"

SNMT_NAMESPACE_BEGIN

struct GradCheckEntry {
  std::string name;
  double max_rel_error = 0;
  int checked = 0;
};

struct GradCheckReport {
  std::vector<GradCheckEntry> entries;
  double max_rel_error() const;
  /// Parameters whose error exceeds the threshold.
  std::vector<std::string> flagged(double threshold) const;
};

/// |a - n| / max(|a|, |n|, 1e-12)
double relative_error(double analytic, double numeric);

/// Builds a scalar loss on a fresh graph over `params`.
using LossBuilder = std::function<Var(Graph&)>;

struct GradCheckOptions {
  double eps = 1e-5;
  /// At most this many coordinates per parameter are sampled (0 = all).
  int max_coords = 0;
  /// The graph is reseeded with this value for every evaluation.
  std::uint64_t seed = 1;
  /// Fourth-order stencil (f(-2e), f(-e), f(e), f(2e)) instead of the
  /// two-point central difference.
  bool fourth_order = false;
};

/// Compares backward gradients with finite differences.
GradCheckReport grad_check(ParameterSet& params, const LossBuilder& loss, const GradCheckOptions& options = {});

SNMT_NAMESPACE_END
