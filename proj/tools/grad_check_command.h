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
#include <ostream>
#include <string>
#include <vector>

namespace snmt_cli {

struct GradCheckRequest {
  std::vector<std::string> source_lines;
  std::vector<std::string> target_lines;
  /// Pharaoh lines, empty when no guided alignment is used.
  std::vector<std::string> alignment_lines;
  /// key=value lines of the run configuration.
  std::string config;
  double eps = 1e-3;
  int max_coords = 0;
  double threshold = 1e-4;
  bool fourth_order = true;
  std::uint64_t seed = 1;
};

/// Checks the training loss gradients of a freshly initialized model in
/// double precision. Returns true when every tensor is within threshold.
bool run_grad_check(const GradCheckRequest& request, std::ostream& out);

}  // namespace snmt_cli
