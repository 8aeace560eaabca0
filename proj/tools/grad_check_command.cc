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

#include "grad_check_command.h"

#include <cstdio>
#include <stdexcept>

#include "snmt/config.h"
#include "snmt/gradcheck.h"
#include "snmt/textproc.h"
#include "snmt/training.h"

namespace snmt_cli {

using namespace snmt;

bool run_grad_check(const GradCheckRequest& request, std::ostream& out) {
  if (request.source_lines.size() != request.target_lines.size())
    throw std::runtime_error("source and target line counts differ");
  if (!request.alignment_lines.empty() && request.alignment_lines.size() != request.source_lines.size())
    throw std::runtime_error("alignment line count differs from the corpus");
  if (request.source_lines.empty()) throw std::runtime_error("empty corpus");

  const RunConfig cfg = RunConfig::parse(request.config, "config");
  const ModelConfig mc = cfg.model_config();
  const TrainConfig tc = cfg.train_config();
  const int features = static_cast<int>(mc.target_features.size());

  std::vector<std::vector<std::string>> src, tgt;
  for (std::size_t i = 0; i < request.source_lines.size(); ++i) {
    src.push_back(split_whitespace(request.source_lines[i]));
    tgt.push_back(split_whitespace(request.target_lines[i]));
  }
  auto vocab_corpus = [&](const std::vector<std::vector<std::string>>& corpus) {
    if (features == 0) return corpus;
    std::vector<std::vector<std::string>> lowered;
    for (const auto& s : corpus) {
      std::vector<std::string> l;
      for (const auto& w : s) l.push_back(to_lower(w));
      lowered.push_back(std::move(l));
    }
    return lowered;
  };
  VocabOptions vo;
  vo.placeholders = cfg.get_bool("placeholders");
  NmtModel model(mc, Vocab::build(vocab_corpus(src), vo), Vocab::build(vocab_corpus(tgt), vo));
  model.initialize(request.seed, static_cast<Real>(cfg.get_double("param_init")));

  std::vector<Example> corpus(src.size());
  for (std::size_t i = 0; i < src.size(); ++i) {
    corpus[i].source = make_sentence(model.source_vocab(), src[i], features);
    corpus[i].target = make_sentence(model.target_vocab(), tgt[i], features);
    if (!request.alignment_lines.empty())
      corpus[i].alignment = AlignmentMatrix::from_pharaoh(request.alignment_lines[i], corpus[i].source.size(),
                                                          corpus[i].target.size(), static_cast<int>(i) + 1);
  }
  std::vector<const Example*> batch;
  for (const auto& e : corpus) batch.push_back(&e);

  GradCheckOptions opt;
  opt.eps = request.eps;
  opt.max_coords = request.max_coords;
  opt.seed = request.seed;
  opt.fourth_order = request.fourth_order;
  const double w_ga = request.alignment_lines.empty() ? 0.0 : tc.guided_weight;
  const GradCheckReport report = grad_check(
      model.params(), [&](Graph& g) { return compute_loss(g, model, batch, w_ga, tc.feature_weight).total; }, opt);

  char line[256];
  for (const auto& e : report.entries) {
    std::snprintf(line, sizeof line, "%-32s %6d  %.3e%s\n", e.name.c_str(), e.checked, e.max_rel_error,
                  e.max_rel_error > request.threshold ? "  FLAGGED" : "");
    out << line;
  }
  std::snprintf(line, sizeof line, "max relative error %.3e\n", report.max_rel_error());
  out << line;
  return report.flagged(request.threshold).empty();
}

}  // namespace snmt_cli
