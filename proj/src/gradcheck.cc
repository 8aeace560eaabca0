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

#include "snmt/gradcheck.h"

#include <algorithm>
#include <cmath>
#include <numeric>

SNMT_NAMESPACE_BEGIN

double GradCheckReport::max_rel_error() const {
  double m = 0;
  for (const auto& e : entries) m = std::max(m, e.max_rel_error);
  return m;
}

std::vector<std::string> GradCheckReport::flagged(double threshold) const {
  std::vector<std::string> out;
  for (const auto& e : entries)
    if (e.max_rel_error > threshold) out.push_back(e.name);
  return out;
}

double relative_error(double analytic, double numeric) {
  return std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), 1e-12});
}

namespace {

double evaluate(ParameterSet& params, const LossBuilder& loss, std::uint64_t seed) {
  Graph g(&params, seed);
  g.set_training(true);
  g.set_grad_enabled(false);
  return static_cast<double>(loss(g).value()[0]);
}

}  // namespace

GradCheckReport grad_check(ParameterSet& params, const LossBuilder& loss, const GradCheckOptions& options) {
  const double eps = options.eps;
  const int max_coords = options.max_coords;
  const std::uint64_t seed = options.seed;
  GradCheckReport report;
  if (params.empty()) return report;
  {
    Graph g(&params, seed);
    g.set_training(true);
    g.backward(loss(g));
  }
  Rng pick(seed ^ 0x9e3779b97f4a7c15ULL);
  for (Parameter& p : params) {
    if (p.frozen) continue;
    GradCheckEntry entry;
    entry.name = p.name;
    std::vector<std::size_t> coords(p.value.size());
    std::iota(coords.begin(), coords.end(), 0);
    if (max_coords > 0 && coords.size() > static_cast<std::size_t>(max_coords)) {
      pick.shuffle(coords);
      coords.resize(static_cast<std::size_t>(max_coords));
      std::sort(coords.begin(), coords.end());
    }
    for (std::size_t i : coords) {
      if (p.is_pruned() && !p.keep[i]) continue;
      const Real saved = p.value[i];
      auto at = [&](double k) {
        p.value[i] = saved + static_cast<Real>(k * eps);
        return evaluate(params, loss, seed);
      };
      double numeric = 0;
      if (options.fourth_order)
        numeric = (8 * (at(1) - at(-1)) - (at(2) - at(-2))) / (12 * eps);
      else
        numeric = (at(1) - at(-1)) / (2 * eps);
      p.value[i] = saved;
      entry.max_rel_error = std::max(entry.max_rel_error, relative_error(static_cast<double>(p.grad[i]), numeric));
      ++entry.checked;
    }
    report.entries.push_back(entry);
  }
  return report;
}

SNMT_NAMESPACE_END
