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

#include <chrono>
#include <cstdio>

#include "criteria.h"
#include "snmt/gradcheck.h"
#include "snmt/textproc.h"
#include "snmt/training.h"

namespace acceptance {

using namespace snmt;

Outcome check_gradients() {
  const auto start = std::chrono::steady_clock::now();
  const std::vector<std::vector<std::string>> src = {{"The", "cat", "sat"}, {"a", "Dog"}};
  const std::vector<std::vector<std::string>> tgt = {{"Le", "chat", "était", "ASSIS"}, {"un", "Chien"}};
  auto lowered = [](const std::vector<std::vector<std::string>>& corpus) {
    std::vector<std::vector<std::string>> out;
    for (const auto& s : corpus) {
      std::vector<std::string> l;
      for (const auto& w : s) l.push_back(to_lower(w));
      out.push_back(l);
    }
    return out;
  };
  const Vocab vs = Vocab::build(lowered(src));
  const Vocab vt = Vocab::build(lowered(tgt));

  ModelConfig mc;
  mc.layers = 2;
  mc.rnn_size = 8;
  mc.embed_size = 6;
  mc.bidirectional = true;
  mc.dropout = 0;
  mc.source_features = {kCaseFeatureSize};
  mc.target_features = {kCaseFeatureSize};
  NmtModel model(mc, vs, vt);
  model.initialize(3, 0.5);

  std::vector<Example> ex(2);
  for (int i = 0; i < 2; ++i) {
    ex[i].source = make_sentence(vs, src[i], 1);
    ex[i].target = make_sentence(vt, tgt[i], 1);
  }
  ex[0].alignment = AlignmentMatrix::from_pharaoh("0-0 1-1 2-2 2-3", 3, 4);
  ex[1].alignment = AlignmentMatrix::from_pharaoh("0-0 1-1", 2, 2);
  const std::vector<const Example*> batch = {&ex[0], &ex[1]};

  GradCheckOptions opt;
  opt.eps = 1e-3;
  opt.fourth_order = true;
  const GradCheckReport report = grad_check(
      model.params(), [&](Graph& g) { return compute_loss(g, model, batch, 0.5, 1.0).total; }, opt);
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  int checked = 0;
  for (const auto& e : report.entries) checked += e.checked;
  const double err = report.max_rel_error();
  char buf[160];
  std::snprintf(buf, sizeof buf, "max rel err %.2e over %d coordinates in %zu tensors, %.1fs", err, checked,
                report.entries.size(), seconds);
  return {err <= 1e-4 && seconds < 60 && checked > 0, buf};
}

}  // namespace acceptance
