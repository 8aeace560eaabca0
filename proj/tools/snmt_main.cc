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

// snmt command-line front end.

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "grad_check_command.h"
#include "snmt/aligner.h"
#include "snmt/bpe.h"
#include "snmt/compression.h"
#include "snmt/config.h"
#include "snmt/decoding.h"
#include "snmt/eval.h"
#include "snmt/placeholders.h"
#include "snmt/serialize.h"
#include "snmt/textproc.h"
#include "snmt/training.h"

namespace {

using namespace snmt;
using Lines = std::vector<std::string>;
using Corpus = std::vector<std::vector<std::string>>;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

Lines read_lines(const std::string& path) {
  Lines out;
  std::string line;
  if (path == "-") {
    while (std::getline(std::cin, line)) out.push_back(line);
    return out;
  }
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  while (std::getline(in, line)) out.push_back(line);
  return out;
}

Corpus read_tokens(const std::string& path) {
  Corpus out;
  for (const auto& line : read_lines(path)) out.push_back(split_whitespace(line));
  return out;
}

/// Writes to a file, or to stdout for "-".
class Output {
 public:
  explicit Output(const std::string& path) {
    if (path != "-") {
      file_ = std::make_unique<std::ofstream>(path);
      if (!*file_) throw std::runtime_error("cannot write " + path);
    }
  }
  std::ostream& stream() { return file_ ? *file_ : std::cout; }
  void line(const std::string& text) { stream() << text << '\n'; }

 private:
  std::unique_ptr<std::ofstream> file_;
};

void require_same_size(const Corpus& a, const Corpus& b, const char* what) {
  if (a.size() != b.size())
    throw std::runtime_error(std::string(what) + ": line counts differ (" + std::to_string(a.size()) + " vs " +
                             std::to_string(b.size()) + ")");
}

std::string config_flag(const std::string& key) {
  std::string flag = "--" + key;
  std::replace(flag.begin(), flag.end(), '_', '-');
  return flag;
}

/// --config FILE, --set KEY=VALUE and one flag per configuration key.
struct ConfigArgs {
  std::string file;
  std::vector<std::string> sets;
  std::map<std::string, std::string> flags;

  void attach(CLI::App* cmd, const std::vector<std::string>& skip = {}) {
    cmd->add_option("--config", file, "key=value configuration file")->check(CLI::ExistingFile);
    cmd->add_option("--set", sets, "KEY=VALUE override, repeatable");
    for (const ConfigKey& k : config_keys()) {
      if (std::find(skip.begin(), skip.end(), k.name) != skip.end()) continue;
      cmd->add_option(config_flag(k.name), flags[k.name], std::string(k.help) + " (default " + k.default_value + ")")
          ->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    }
  }

  RunConfig resolve() const {
    RunConfig cfg = file.empty() ? RunConfig() : RunConfig::load(file);
    for (const auto& s : sets) {
      const auto eq = s.find('=');
      if (eq == std::string::npos) throw UsageError("--set expects KEY=VALUE, got '" + s + "'");
      try {
        cfg.set(s.substr(0, eq), s.substr(eq + 1));
      } catch (const ConfigError& e) {
        throw UsageError(e.what());
      }
    }
    for (const auto& [k, v] : flags)
      if (!v.empty()) cfg.set(k, v);
    return cfg;
  }
};

Corpus lowered(const Corpus& corpus) {
  Corpus out;
  for (const auto& s : corpus) {
    std::vector<std::string> l;
    for (const auto& w : s) l.push_back(to_lower(w));
    out.push_back(std::move(l));
  }
  return out;
}

int feature_count(const NmtModel& model) { return static_cast<int>(model.config().target_features.size()); }

std::vector<Example> make_examples(const NmtModel& model, const Corpus& src, const Corpus& tgt,
                                   const std::string& align_path) {
  require_same_size(src, tgt, "corpus");
  Lines align;
  if (!align_path.empty()) {
    align = read_lines(align_path);
    if (align.size() != src.size()) throw std::runtime_error("alignment file: line count differs from the corpus");
  }
  const int nf = feature_count(model);
  std::vector<Example> out(src.size());
  for (std::size_t i = 0; i < src.size(); ++i) {
    out[i].source = make_sentence(model.source_vocab(), src[i], nf);
    out[i].target = make_sentence(model.target_vocab(), tgt[i], nf);
    if (!align.empty())
      out[i].alignment = AlignmentMatrix::from_pharaoh(align[i], out[i].source.size(), out[i].target.size(),
                                                       static_cast<int>(i) + 1);
  }
  return out;
}

/// Training, dev and log plumbing shared by train, adapt and retrain.
struct CorpusArgs {
  std::string src, tgt, align, dev_src, dev_tgt;

  void attach(CLI::App* cmd, bool with_dev = true) {
    cmd->add_option("--src", src, "tokenized source file")->required()->check(CLI::ExistingFile);
    cmd->add_option("--tgt", tgt, "tokenized target file")->required()->check(CLI::ExistingFile);
    cmd->add_option("--align", align, "Pharaoh alignments for guided alignment")->check(CLI::ExistingFile);
    if (with_dev) {
      cmd->add_option("--dev-src", dev_src, "dev source file")->check(CLI::ExistingFile);
      cmd->add_option("--dev-tgt", dev_tgt, "dev target file")->check(CLI::ExistingFile);
    }
  }

  std::vector<Example> train(const NmtModel& model) const {
    return make_examples(model, read_tokens(src), read_tokens(tgt), align);
  }
  std::vector<Example> dev(const NmtModel& model) const {
    if (dev_src.empty() != dev_tgt.empty()) throw UsageError("--dev-src and --dev-tgt go together");
    if (dev_src.empty()) return {};
    return make_examples(model, read_tokens(dev_src), read_tokens(dev_tgt), "");
  }
};

void log_epoch(const EpochReport& r) { std::cerr << format_epoch_log(r) << std::endl; }

// ---------------------------------------------------------------- commands

int cmd_tokenize(const std::string& in, const std::string& out) {
  Output o(out);
  for (const auto& line : read_lines(in)) o.line(format_tokens(tokenize(line)));
  return 0;
}

int cmd_detokenize(const std::string& in, const std::string& out) {
  Output o(out);
  for (const auto& line : read_lines(in)) o.line(detokenize(parse_tokens(line)));
  return 0;
}

int cmd_bpe_learn(const std::string& in, const std::string& out, int merges) {
  std::map<std::string, long long> counts;
  for (const auto& s : read_tokens(in))
    for (const auto& w : s) ++counts[w];
  const MergeTable table = bpe_learn(counts, merges);
  Output o(out);
  o.stream() << table.to_text();
  return 0;
}

int cmd_bpe_apply(const std::string& in, const std::string& out, const std::string& merges) {
  const MergeTable table = MergeTable::load(merges);
  Output o(out);
  for (const auto& s : read_tokens(in)) o.line(join(bpe_apply_sequence(s, table)));
  return 0;
}

int cmd_align(const std::string& src_path, const std::string& tgt_path, const std::string& out, int iterations,
              double lambda) {
  const Corpus src = read_tokens(src_path), tgt = read_tokens(tgt_path);
  require_same_size(src, tgt, "align");
  std::vector<SentencePair> pairs;
  for (std::size_t i = 0; i < src.size(); ++i) pairs.push_back({src[i], tgt[i]});
  const TranslationTable table = ibm1_train(pairs, iterations, lambda);
  Output o(out);
  for (const auto& p : pairs) o.line(viterbi_align(p, table, lambda).to_pharaoh());
  return 0;
}

struct PhPrepareArgs {
  std::string src, tgt, align, out_src, out_tgt, out_record, src_lexicon, tgt_lexicon;
};

int cmd_ph_prepare(const PhPrepareArgs& a) {
  const Corpus src = read_tokens(a.src), tgt = read_tokens(a.tgt);
  require_same_size(src, tgt, "ph-prepare");
  const Lines align = read_lines(a.align);
  if (align.size() != src.size()) throw std::runtime_error("alignment file: line count differs from the corpus");
  const Lexicon sl = a.src_lexicon.empty() ? Lexicon() : Lexicon::load(a.src_lexicon);
  const Lexicon tl = a.tgt_lexicon.empty() ? Lexicon() : Lexicon::load(a.tgt_lexicon);
  Output os(a.out_src), ot(a.out_tgt);
  std::optional<Output> orec;
  if (!a.out_record.empty()) orec.emplace(a.out_record);
  int substituted = 0;
  for (std::size_t i = 0; i < src.size(); ++i) {
    const auto links = AlignmentMatrix::from_pharaoh(align[i], static_cast<int>(src[i].size()),
                                                     static_cast<int>(tgt[i].size()), static_cast<int>(i) + 1);
    const auto pair = substitute_pair(src[i], tgt[i], links, sl, tl);
    if (pair) {
      ++substituted;
      os.line(join(pair->first.tokens));
      ot.line(join(pair->second.tokens));
      if (orec) orec->line(format_record(pair->first.record));
    } else {
      os.line(join(src[i]));
      ot.line(join(tgt[i]));
      if (orec) orec->line("");
    }
  }
  std::cerr << "ph-prepare: " << substituted << " of " << src.size() << " pairs substituted" << std::endl;
  return 0;
}

struct TrainArgs {
  CorpusArgs corpus;
  ConfigArgs config;
  std::string out, src_embeddings, tgt_embeddings;
  bool freeze_embeddings = false;
};

int cmd_train(const TrainArgs& a) {
  const RunConfig cfg = a.config.resolve();
  const ModelConfig mc = cfg.model_config();
  const TrainConfig tc = cfg.train_config();
  const Corpus src = read_tokens(a.corpus.src), tgt = read_tokens(a.corpus.tgt);
  require_same_size(src, tgt, "train");

  VocabOptions so, to;
  so.control_tokens = politeness_tokens();
  so.control_tokens.push_back(kSeparatorToken);
  so.placeholders = to.placeholders = cfg.get_bool("placeholders");
  so.max_size = cfg.get_int("source_vocab_size");
  to.max_size = cfg.get_int("target_vocab_size");
  const bool cased = !mc.target_features.empty();
  NmtModel model(mc, Vocab::build(cased ? lowered(src) : src, so), Vocab::build(cased ? lowered(tgt) : tgt, to));
  model.initialize(tc.seed, static_cast<Real>(cfg.get_double("param_init")));
  if (!a.src_embeddings.empty())
    std::cerr << "loaded " << model.load_external_embeddings(a.src_embeddings, true, a.freeze_embeddings)
              << " source embeddings" << std::endl;
  if (!a.tgt_embeddings.empty())
    std::cerr << "loaded " << model.load_external_embeddings(a.tgt_embeddings, false, a.freeze_embeddings)
              << " target embeddings" << std::endl;

  const auto train = make_examples(model, src, tgt, a.corpus.align);
  const auto dev = a.corpus.dev(model);
  Trainer(model, tc).train(train, dev.empty() ? nullptr : &dev, log_epoch);
  save_model(model, a.out);
  return 0;
}

struct ContinueArgs {
  CorpusArgs corpus;
  ConfigArgs config;
  std::string model, out;
  std::string generic_dev_src, generic_dev_tgt;
};

/// Training options for continued training: configuration keys given
/// explicitly override, the rest keep their defaults.
TrainConfig continue_config(const ContinueArgs& a) { return a.config.resolve().train_config(); }

int cmd_adapt(const ContinueArgs& a) {
  NmtModel model = load_model(a.model);
  const TrainConfig tc = continue_config(a);
  const auto in_domain = a.corpus.train(model);
  const auto dev = a.corpus.dev(model);
  std::vector<Example> generic;
  if (!a.generic_dev_src.empty() || !a.generic_dev_tgt.empty()) {
    if (a.generic_dev_src.empty() || a.generic_dev_tgt.empty())
      throw UsageError("--generic-dev-src and --generic-dev-tgt go together");
    generic = make_examples(model, read_tokens(a.generic_dev_src), read_tokens(a.generic_dev_tgt), "");
  }
  const AdaptReport r = adapt(model, in_domain, tc.epochs, tc, dev, generic);
  for (const auto& e : r.epochs) log_epoch(e);
  char buf[200];
  if (!dev.empty()) {
    std::snprintf(buf, sizeof buf, "in-domain ppl %.3f -> %.3f", r.in_domain_before, r.in_domain_after);
    std::cerr << buf << std::endl;
  }
  if (!generic.empty()) {
    std::snprintf(buf, sizeof buf, "generic ppl %.3f -> %.3f", r.generic_before, r.generic_after);
    std::cerr << buf << std::endl;
  }
  save_model(model, a.out);
  return 0;
}

int cmd_retrain(const ContinueArgs& a) {
  NmtModel model = load_model(a.model);
  if (masked_count(model.params()) == 0) std::cerr << "retrain: model has no pruning mask" << std::endl;
  const TrainConfig tc = continue_config(a);
  const auto train = a.corpus.train(model);
  const auto dev = a.corpus.dev(model);
  Trainer(model, tc).train(train, dev.empty() ? nullptr : &dev, log_epoch);
  if (!mask_respected(model.params())) throw std::runtime_error("pruned weights changed during retraining");
  save_model(model, a.out);
  return 0;
}

int cmd_prune(const std::string& in, const std::string& out, double fraction, const std::string& scope) {
  NmtModel model = load_model(in);
  const PruneReport r =
      magnitude_prune(model.params(), fraction, scope == "class-uniform" ? PruneScope::kClassUniform
                                                                         : PruneScope::kClassBlind);
  char buf[160];
  std::snprintf(buf, sizeof buf, "pruned %zu of %zu weights, kept %.4f", r.pruned, r.prunable, r.kept_fraction);
  std::cerr << buf << std::endl;
  save_model(model, out);
  return 0;
}

struct TranslateArgs {
  ConfigArgs config;
  std::string model, ensemble, input = "-", output = "-", lm, dict, politeness, lexicon;
  int beam = 0;
  int nbest = 0;
  bool tokenized = false;
  bool replace_unk = false;
  bool placeholders = false;
  bool regroup = false;
};

int cmd_translate(const TranslateArgs& a) {
  RunConfig cfg = a.config.resolve();
  if (a.beam > 0) cfg.set("beam_size", std::to_string(a.beam));
  if (a.nbest > 0) cfg.set("n_best", std::to_string(a.nbest));
  const DecodeOptions base = cfg.decode_options();
  const int batch = cfg.get_int("batch");
  if (batch < 1) throw UsageError("--batch must be positive");

  std::vector<std::string> paths;
  if (!a.model.empty()) paths.push_back(a.model);
  if (!a.ensemble.empty()) {
    std::stringstream ss(a.ensemble);
    std::string p;
    while (std::getline(ss, p, ','))
      if (!p.empty()) paths.push_back(p);
  }
  if (paths.empty()) throw UsageError("translate needs --model or --ensemble");
  std::vector<NmtModel> models;
  models.reserve(paths.size());
  for (const auto& p : paths) models.push_back(load_model(p));
  std::vector<const NmtModel*> members;
  for (const auto& m : models) members.push_back(&m);
  const Ensemble ensemble(members);
  const NmtModel& front = models.front();

  std::optional<NGramLM> lm;
  std::optional<Dictionary> dict;
  DecodeOptions opt = base;
  if (!a.lm.empty()) opt.lm = &lm.emplace(NGramLM::load(a.lm));
  if (!a.dict.empty()) opt.dictionary = &dict.emplace(load_dictionary(a.dict));
  const Lexicon lexicon = a.lexicon.empty() ? Lexicon() : Lexicon::load(a.lexicon);

  const Lines lines = read_lines(a.input);
  std::vector<DecodeInput> inputs;
  std::vector<std::vector<Substitution>> records;
  for (const auto& line : lines) {
    std::vector<std::string> tokens = a.tokenized ? split_whitespace(line) : split_whitespace(format_tokens(tokenize(line)));
    std::vector<Substitution> record;
    if (a.placeholders) {
      SubstitutionResult sub = substitute(tokens, recognize(tokens, lexicon));
      tokens = std::move(sub.tokens);
      record = std::move(sub.record);
    }
    if (!a.politeness.empty()) tokens = prepend_control_token(tokens, a.politeness);
    DecodeInput in;
    in.sentence = make_sentence(front.source_vocab(), tokens, feature_count(front));
    in.tokens = tokens;
    inputs.push_back(std::move(in));
    records.push_back(std::move(record));
  }

  BatchStats stats;
  const auto results = batch_translate(ensemble, inputs, batch, opt, &stats);
  const DigitRegroupRule regroup_rule;
  std::vector<const StructuralRule*> rules;
  if (a.regroup) rules.push_back(&regroup_rule);

  Output out(a.output);
  for (std::size_t i = 0; i < results.size(); ++i) {
    for (const Hypothesis& h : results[i].nbest) {
      std::vector<std::string> words = output_words(front, h);
      if (a.replace_unk || opt.dictionary) words = replace_unknown(words, h.attention, inputs[i].tokens, dict ? *dict : Dictionary{});
      if (a.placeholders) {
        std::vector<std::vector<double>> attention;
        for (const auto& row : h.attention) attention.emplace_back(row.begin(), row.end());
        words = restore(words, inputs[i].tokens, records[i], attention, rules).tokens;
      }
      if (opt.n_best > 1) {
        Hypothesis shown = h;
        shown.words = words;
        out.line(format_nbest(static_cast<int>(i), shown));
      } else {
        out.line(detokenize(parse_tokens(join(words))));
      }
    }
  }
  char buf[160];
  std::snprintf(buf, sizeof buf, "translated %zu sentences, %ld tokens in %.2fs (%.1f tokens/s)", results.size(),
                stats.tokens, stats.seconds, stats.tokens_per_second());
  std::cerr << buf << std::endl;
  return 0;
}

struct DistillArgs {
  std::string model, src, tgt, out_src, out_tgt;
  int nbest = 5;
  int max_length = 100;
};

int cmd_distill_prepare(const DistillArgs& a) {
  const NmtModel teacher = load_model(a.model);
  const auto corpus = make_examples(teacher, read_tokens(a.src), read_tokens(a.tgt), "");
  DistillStats stats;
  const auto picked = distill_prepare(Ensemble(teacher), corpus, a.nbest, a.max_length, &stats);
  Output os(a.out_src), ot(a.out_tgt);
  const Vocab& sv = teacher.source_vocab();
  const Vocab& tv = teacher.target_vocab();
  auto words = [](const Vocab& v, const Sentence& s) {
    std::vector<std::string> w = v.decode(s.ids);
    if (s.features.size() == 1)
      for (std::size_t i = 0; i < w.size(); ++i) w[i] = restore_case(w[i], case_from_index(s.features[0][i]));
    return w;
  };
  for (const auto& e : picked) {
    os.line(join(words(sv, e.source)));
    ot.line(join(words(tv, e.target)));
  }
  std::cerr << "distill-prepare: " << picked.size() << " pairs, " << stats.reranked << " reranked, "
            << stats.skipped << " skipped" << std::endl;
  return 0;
}

int cmd_lm_train(const std::string& in, const std::string& out, int order) {
  NGramLM::train(read_tokens(in), order).save(out);
  return 0;
}

int cmd_eval_bleu(const std::string& hyp, const std::string& ref, bool lowercase) {
  const BleuScore s = corpus_bleu(read_tokens(hyp), read_tokens(ref), lowercase);
  std::printf("BLEU = %.2f, %.1f/%.1f/%.1f/%.1f (BP=%.3f)\n", s.score, 100 * s.precisions[0], 100 * s.precisions[1],
              100 * s.precisions[2], 100 * s.precisions[3], s.brevity_penalty);
  return 0;
}

int cmd_eval_ppl(const std::string& model_path, const std::string& src, const std::string& tgt) {
  const NmtModel model = load_model(model_path);
  const auto corpus = make_examples(model, read_tokens(src), read_tokens(tgt), "");
  const PerplexityReport r = evaluate_perplexity(model, corpus);
  std::printf("ppl = %.4f over %ld tokens\n", r.ppl, r.tokens);
  return 0;
}

struct GradCheckArgs {
  ConfigArgs config;
  std::string src, tgt, align;
  snmt_cli::GradCheckRequest request;
};

int cmd_grad_check(GradCheckArgs& a) {
  RunConfig cfg = a.config.resolve();
  auto& r = a.request;
  r.config = cfg.dump();
  r.source_lines = read_lines(a.src);
  r.target_lines = read_lines(a.tgt);
  if (!a.align.empty()) r.alignment_lines = read_lines(a.align);
  return snmt_cli::run_grad_check(r, std::cout) ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"snmt: neural machine translation toolkit"};
  app.require_subcommand(1);
  std::function<int()> run;

  std::string in = "-", out = "-";
  auto io = [&](CLI::App* cmd) {
    cmd->add_option("-i,--input", in, "input file, - for stdin");
    cmd->add_option("-o,--output", out, "output file, - for stdout");
  };

  auto* tok = app.add_subcommand("tokenize", "raw text to joiner-annotated tokens");
  io(tok);
  tok->callback([&] { run = [&] { return cmd_tokenize(in, out); }; });

  auto* detok = app.add_subcommand("detokenize", "joiner-annotated tokens to text");
  io(detok);
  detok->callback([&] { run = [&] { return cmd_detokenize(in, out); }; });

  int merges = 1000;
  std::string merges_path;
  auto* bl = app.add_subcommand("bpe-learn", "learn BPE merges from tokenized text");
  io(bl);
  bl->add_option("--merges", merges, "number of merges")->check(CLI::NonNegativeNumber);
  bl->callback([&] { run = [&] { return cmd_bpe_learn(in, out, merges); }; });

  auto* ba = app.add_subcommand("bpe-apply", "segment tokenized text with a merge table");
  io(ba);
  ba->add_option("--merges", merges_path, "merge table")->required()->check(CLI::ExistingFile);
  ba->callback([&] { run = [&] { return cmd_bpe_apply(in, out, merges_path); }; });

  std::string src, tgt;
  int iterations = 5;
  double lambda = kDefaultDiagonalStrength;
  auto* al = app.add_subcommand("align", "IBM Model 1 word alignment, Pharaoh output");
  al->add_option("--src", src)->required()->check(CLI::ExistingFile);
  al->add_option("--tgt", tgt)->required()->check(CLI::ExistingFile);
  al->add_option("-o,--output", out);
  al->add_option("--iterations", iterations, "EM iterations")->check(CLI::PositiveNumber);
  al->add_option("--lambda", lambda, "diagonal prior strength, 0 for plain Model 1")->check(CLI::NonNegativeNumber);
  al->callback([&] { run = [&] { return cmd_align(src, tgt, out, iterations, lambda); }; });

  PhPrepareArgs ph;
  auto* pp = app.add_subcommand("ph-prepare", "substitute aligned entities with placeholders");
  pp->add_option("--src", ph.src)->required()->check(CLI::ExistingFile);
  pp->add_option("--tgt", ph.tgt)->required()->check(CLI::ExistingFile);
  pp->add_option("--align", ph.align)->required()->check(CLI::ExistingFile);
  pp->add_option("--out-src", ph.out_src)->required();
  pp->add_option("--out-tgt", ph.out_tgt)->required();
  pp->add_option("--out-record", ph.out_record, "source substitution records");
  pp->add_option("--src-lexicon", ph.src_lexicon)->check(CLI::ExistingFile);
  pp->add_option("--tgt-lexicon", ph.tgt_lexicon)->check(CLI::ExistingFile);
  pp->callback([&] { run = [&] { return cmd_ph_prepare(ph); }; });

  TrainArgs ta;
  auto* tr = app.add_subcommand("train", "train a model");
  ta.corpus.attach(tr);
  ta.config.attach(tr);
  tr->add_option("--out", ta.out, "model file")->required();
  tr->add_option("--src-embeddings", ta.src_embeddings, "pretrained source embeddings, word2vec text")->check(CLI::ExistingFile);
  tr->add_option("--tgt-embeddings", ta.tgt_embeddings, "pretrained target embeddings, word2vec text")->check(CLI::ExistingFile);
  tr->add_flag("--freeze-embeddings", ta.freeze_embeddings, "keep pretrained embeddings fixed");
  tr->callback([&] { run = [&] { return cmd_train(ta); }; });

  ContinueArgs aa;
  auto* ad = app.add_subcommand("adapt", "continue training on in-domain data");
  aa.corpus.attach(ad);
  aa.config.attach(ad);
  ad->add_option("--model", aa.model, "model file")->required()->check(CLI::ExistingFile);
  ad->add_option("--out", aa.out)->required();
  ad->add_option("--generic-dev-src", aa.generic_dev_src)->check(CLI::ExistingFile);
  ad->add_option("--generic-dev-tgt", aa.generic_dev_tgt)->check(CLI::ExistingFile);
  ad->callback([&] { run = [&] { return cmd_adapt(aa); }; });

  ContinueArgs ra;
  auto* rt = app.add_subcommand("retrain", "retrain a pruned model, keeping its mask");
  ra.corpus.attach(rt);
  ra.config.attach(rt);
  rt->add_option("--model", ra.model, "pruned model file")->required()->check(CLI::ExistingFile);
  rt->add_option("--out", ra.out)->required();
  rt->callback([&] { run = [&] { return cmd_retrain(ra); }; });

  std::string model_path;
  double fraction = 0.5;
  std::string scope = "class-blind";
  auto* pr = app.add_subcommand("prune", "magnitude pruning");
  pr->add_option("--model", model_path, "model file")->required()->check(CLI::ExistingFile);
  pr->add_option("--out", out)->required();
  pr->add_option("--fraction", fraction, "fraction of weights removed")->check(CLI::Range(0.0, 1.0));
  pr->add_option("--scope", scope)->check(CLI::IsMember({"class-blind", "class-uniform"}));
  pr->callback([&] { run = [&] { return cmd_prune(model_path, out, fraction, scope); }; });

  TranslateArgs xa;
  auto* tl = app.add_subcommand("translate", "translate text");
  xa.config.attach(tl, {"beam_size", "n_best", "placeholders"});
  tl->add_option("--model", xa.model, "model file")->check(CLI::ExistingFile);
  tl->add_option("--ensemble", xa.ensemble, "comma separated model files");
  tl->add_option("-i,--input", xa.input, "input file, - for stdin");
  tl->add_option("-o,--output", xa.output, "output file, - for stdout");
  tl->add_option("--beam", xa.beam, "beam size")->check(CLI::PositiveNumber);
  tl->add_option("--nbest", xa.nbest, "hypotheses printed per sentence")->check(CLI::PositiveNumber);
  tl->add_option("--lm", xa.lm, "n-gram language model for shallow fusion")->check(CLI::ExistingFile);
  tl->add_option("--dict", xa.dict, "source<TAB>target dictionary")->check(CLI::ExistingFile);
  tl->add_option("--politeness", xa.politeness, "politeness control token prepended to each source")
      ->check(CLI::IsMember({"formal", "informal", "neutral"}));
  tl->add_option("--lexicon", xa.lexicon, "entity lexicon")->check(CLI::ExistingFile);
  tl->add_flag("--tokenized", xa.tokenized, "input is already tokenized");
  tl->add_flag("--replace-unk", xa.replace_unk, "copy the most attended source word for <unk>");
  tl->add_flag("--placeholders", xa.placeholders, "substitute entities and restore them after decoding");
  tl->add_flag("--regroup", xa.regroup, "regroup digits of restored numbers");
  tl->callback([&] { run = [&] { return cmd_translate(xa); }; });

  DistillArgs da;
  auto* dp = app.add_subcommand("distill-prepare", "teacher n-best reranked by sentence BLEU");
  dp->add_option("--model", da.model, "teacher model file")->required()->check(CLI::ExistingFile);
  dp->add_option("--src", da.src)->required()->check(CLI::ExistingFile);
  dp->add_option("--tgt", da.tgt)->required()->check(CLI::ExistingFile);
  dp->add_option("--out-src", da.out_src)->required();
  dp->add_option("--out-tgt", da.out_tgt)->required();
  dp->add_option("--nbest", da.nbest)->check(CLI::PositiveNumber);
  dp->add_option("--max-length", da.max_length)->check(CLI::PositiveNumber);
  dp->callback([&] { run = [&] { return cmd_distill_prepare(da); }; });

  int order = 3;
  auto* lt = app.add_subcommand("lm-train", "train an n-gram language model");
  io(lt);
  lt->add_option("--order", order)->check(CLI::PositiveNumber);
  lt->callback([&] {
    if (out == "-") throw CLI::ValidationError("--output", "lm-train needs an output file");
    run = [&] { return cmd_lm_train(in, out, order); };
  });

  std::string hyp, ref;
  bool lowercase = false;
  auto* eb = app.add_subcommand("eval-bleu", "corpus BLEU");
  eb->add_option("--hyp", hyp)->required()->check(CLI::ExistingFile);
  eb->add_option("--ref", ref)->required()->check(CLI::ExistingFile);
  eb->add_flag("--lowercase", lowercase);
  eb->callback([&] { run = [&] { return cmd_eval_bleu(hyp, ref, lowercase); }; });

  auto* ep = app.add_subcommand("eval-ppl", "perplexity of a model on a corpus");
  ep->add_option("--model", model_path, "model file")->required()->check(CLI::ExistingFile);
  ep->add_option("--src", src)->required()->check(CLI::ExistingFile);
  ep->add_option("--tgt", tgt)->required()->check(CLI::ExistingFile);
  ep->callback([&] { run = [&] { return cmd_eval_ppl(model_path, src, tgt); }; });

  GradCheckArgs ga;
  auto* gc = app.add_subcommand("grad-check", "finite-difference check of the training gradients");
  ga.config.attach(gc, {"seed"});
  gc->add_option("--src", ga.src)->required()->check(CLI::ExistingFile);
  gc->add_option("--tgt", ga.tgt)->required()->check(CLI::ExistingFile);
  gc->add_option("--align", ga.align)->check(CLI::ExistingFile);
  gc->add_option("--eps", ga.request.eps)->check(CLI::PositiveNumber);
  gc->add_option("--coords", ga.request.max_coords, "coordinates sampled per tensor, 0 = all");
  gc->add_option("--threshold", ga.request.threshold);
  gc->add_option("--seed", ga.request.seed);
  gc->callback([&] { run = [&] { return cmd_grad_check(ga); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }
  try {
    return run();
  } catch (const UsageError& e) {
    std::cerr << "snmt: " << e.what() << std::endl;
    return 2;
  } catch (const ConfigError& e) {
    std::cerr << "snmt: " << e.what() << std::endl;
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "snmt: error: " << e.what() << std::endl;
    return 1;
  }
}
