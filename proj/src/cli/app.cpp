#include "hme/cli/app.hpp"

#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "hme/cli/config.hpp"
#include "hme/cli/pipeline.hpp"
#include "hme/model/checkpoint.hpp"
#include "hme/synth/toy_corpus.hpp"
#include "hme/train/ensemble.hpp"
#include "hme/train/metrics.hpp"
#include "hme/train/trainer.hpp"
#include "hme/util/error.hpp"

namespace hme::cli {

namespace fs = std::filesystem;

namespace {

std::vector<std::vector<std::string>> tags_of(const std::vector<text::TokenizedSentence>& sentences) {
  std::vector<std::vector<std::string>> out;
  for (const auto& s : sentences) out.push_back(s.labels);
  return out;
}

void write_text(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  out << content;
  if (!out) throw InputError("cannot write " + path.string());
}

void write_report(const fs::path& dir, const std::string& stem, const train::EvalReport& report) {
  write_text(dir / (stem + "_report.txt"), report.to_text());
  write_text(dir / (stem + "_report.json"), report.to_json().dump(2) + "\n");
}

int cmd_train(const fs::path& config_path, std::optional<std::uint64_t> seed,
              std::optional<fs::path> output, std::ostream& out) {
  auto cfg = load_run_config(config_path);
  if (seed) cfg.seed = cfg.train.seed = *seed;
  if (output) cfg.output_dir = *output;
  check_paths(cfg);

  auto tagger = build_tagger(cfg);
  const auto train_set = load_dataset(tagger, cfg.train_path, true);
  const auto dev_set = load_dataset(tagger, cfg.dev_path, true);

  fs::create_directories(cfg.output_dir);
  std::ofstream metrics(cfg.output_dir / "metrics.jsonl", std::ios::binary);
  const auto result = train::train(tagger, train_set.features, dev_set.features, cfg.train,
                                   [&](const train::EpochLog& log) {
                                     metrics << log.to_json().dump() << '\n';
                                     metrics.flush();
                                   });
  model::save_checkpoint(cfg.output_dir / "model.ckpt", tagger, cfg.manifest, cfg.to_json());

  std::vector<std::vector<std::string>> predictions;
  const auto dev_report = with_counters(train::evaluate(tagger, dev_set.features, &predictions), dev_set);
  text::write_conll(cfg.output_dir / "dev_predictions.conll", dev_set.sentences, predictions);
  write_report(cfg.output_dir, "dev", dev_report);
  out << "best_epoch " << result.best_epoch << '\n' << dev_report.to_text();

  if (cfg.test_path) {
    const auto test_set = load_dataset(tagger, *cfg.test_path, true);
    const auto test_report =
        with_counters(train::evaluate(tagger, test_set.features, &predictions), test_set);
    text::write_conll(cfg.output_dir / "test_predictions.conll", test_set.sentences, predictions);
    write_report(cfg.output_dir, "test", test_report);
  }
  return kExitOk;
}

int cmd_eval(const fs::path& checkpoint, const fs::path& data, const std::optional<fs::path>& json_out,
             std::ostream& out) {
  const auto loaded = model::load_checkpoint(checkpoint);
  const auto set = load_dataset(loaded.tagger, data, true);
  const auto report = with_counters(train::evaluate(loaded.tagger, set.features), set);
  out << report.to_text();
  if (json_out) write_text(*json_out, report.to_json().dump(2) + "\n");
  return kExitOk;
}

int cmd_score(const fs::path& gold_path, const fs::path& pred_path,
              const std::optional<fs::path>& json_out, std::ostream& out) {
  const auto gold = text::read_conll(gold_path);
  text::ConllOptions raw;
  const auto pred = text::read_conll(pred_path, raw);
  if (gold.sentences.size() != pred.sentences.size())
    throw InputError(pred_path.string() + ": " + std::to_string(pred.sentences.size()) +
                     " sentences, gold has " + std::to_string(gold.sentences.size()));
  for (std::size_t s = 0; s < gold.sentences.size(); ++s)
    if (gold.sentences[s].raw_tokens != pred.sentences[s].raw_tokens)
      throw InputError(pred_path.string() + ": tokens of sentence " + std::to_string(s + 1) +
                       " differ from the gold file");
  auto report = train::entity_f1(tags_of(gold.sentences), tags_of(pred.sentences));
  report.repairs = gold.repairs + pred.repairs;
  out << report.to_text();
  if (json_out) write_text(*json_out, report.to_json().dump(2) + "\n");
  return kExitOk;
}

void emit_conll(const std::optional<fs::path>& path, std::ostream& out,
                const std::vector<text::TokenizedSentence>& sentences,
                const std::vector<std::vector<std::string>>& tags) {
  if (path) text::write_conll(*path, sentences, tags);
  else text::write_conll(out, sentences, tags);
}

int cmd_predict(const fs::path& checkpoint, const fs::path& input, bool raw,
                const std::optional<fs::path>& output, std::ostream& out) {
  const auto loaded = model::load_checkpoint(checkpoint);
  Dataset set;
  if (raw) {
    set.sentences = text::read_raw_text(input);
    for (const auto& s : set.sentences) set.features.push_back(loaded.tagger.featurize(s));
  } else {
    set = load_dataset(loaded.tagger, input, false);
  }
  emit_conll(output, out, set.sentences, train::predict_all(loaded.tagger, set.features));
  return kExitOk;
}

int cmd_ensemble(const std::vector<fs::path>& inputs, const std::vector<double>& scores,
                 const std::optional<fs::path>& output, std::ostream& out) {
  if (inputs.empty()) throw InputError("ensemble needs at least one prediction file");
  if (!scores.empty() && scores.size() != inputs.size())
    throw InputError("--scores has " + std::to_string(scores.size()) + " values for " +
                     std::to_string(inputs.size()) + " prediction files");
  std::vector<text::ConllData> runs;
  for (const auto& p : inputs) runs.push_back(text::read_conll(p));
  const auto& first = runs.front().sentences;
  for (std::size_t k = 1; k < runs.size(); ++k) {
    const auto& other = runs[k].sentences;
    bool same = other.size() == first.size();
    for (std::size_t s = 0; same && s < first.size(); ++s)
      same = other[s].raw_tokens == first[s].raw_tokens;
    if (!same)
      throw InputError(inputs[k].string() + ": tokens differ from " + inputs[0].string());
  }
  std::vector<std::vector<std::string>> voted;
  for (std::size_t s = 0; s < first.size(); ++s) {
    std::vector<std::vector<std::string>> votes;
    for (const auto& run : runs) votes.push_back(run.sentences[s].labels);
    voted.push_back(train::majority_vote(votes, scores));
  }
  emit_conll(output, out, first, voted);
  return kExitOk;
}

int cmd_export_attention(const fs::path& checkpoint, const fs::path& data, const fs::path& output,
                         const std::optional<fs::path>& summary_path, std::ostream& out) {
  const auto loaded = model::load_checkpoint(checkpoint);
  const auto& tagger = loaded.tagger;
  const auto variant = tagger.config().variant;
  if (variant != model::Variant::hme && variant != model::Variant::mme_word)
    throw InputError("variant '" + std::string(model::variant_name(variant)) +
                     "' has no attention weights");
  const auto set = load_dataset(tagger, data, false);
  std::vector<std::string> word_langs, sub_langs;
  for (const auto& e : loaded.manifest.at_level(embedding::Level::word)) word_langs.push_back(e.language);
  for (const auto& e : loaded.manifest.at_level(embedding::Level::subword)) sub_langs.push_back(e.language);

  std::ostringstream tsv;
  tsv.precision(17);
  tsv << "sentence_index\ttoken_index\ttoken\tlevel\tlanguage\tweight\n";
  std::vector<train::TokenAttention> tokens;
  for (std::size_t s = 0; s < set.features.size(); ++s) {
    const auto& f = set.features[s];
    const auto result = tagger.infer(f);
    const auto tags = tagger.predict(f);
    const auto& sentence = set.sentences[s];
    auto emit = [&](const ad::Tensor& alpha, const std::vector<std::string>& langs, const char* level,
                    bool collect) {
      const auto a = alpha.values();
      for (std::size_t i = 0; i < f.n; ++i) {
        train::TokenAttention t{tags[i], {}};
        for (std::size_t j = 0; j < langs.size(); ++j) {
          const double w = a[i * langs.size() + j];
          tsv << s << '\t' << i << '\t' << sentence.raw_tokens[i] << '\t' << level << '\t' << langs[j]
              << '\t' << w << '\n';
          t.weights.push_back(w);
        }
        if (collect) tokens.push_back(std::move(t));
      }
    };
    emit(result.alpha_word, word_langs, "word", true);
    if (tagger.config().subword_enabled()) emit(result.alpha_subword, sub_langs, "subword", false);
  }
  write_text(output, tsv.str());
  const auto summary = train::attention_summary(word_langs, tokens).to_tsv();
  if (summary_path) write_text(*summary_path, summary);
  else out << summary;
  return kExitOk;
}

int cmd_synth_toy(const fs::path& dir, std::size_t sentences, std::uint64_t seed) {
  synth::ToyOptions opts;
  opts.sentences = sentences;
  opts.seed = seed;
  synth::write_toy_corpus(synth::generate_toy_corpus(opts), dir, seed);
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Hierarchical meta-embedding NER tagger", "hme"};
  app.require_subcommand(1);

  fs::path config, checkpoint, data, output_path, gold, pred;
  std::optional<fs::path> output, json_out, summary;
  std::optional<std::uint64_t> seed;
  bool raw = false;
  std::vector<fs::path> inputs;
  std::vector<double> scores;
  std::size_t sentences = 2000;
  std::uint64_t toy_seed = 13;

  auto* train_cmd = app.add_subcommand("train", "Train a model from a run config");
  train_cmd->add_option("--config,-c", config, "YAML run config")->required();
  train_cmd->add_option("--seed", seed, "Override the config seed");
  train_cmd->add_option("--output,-o", output, "Override the output directory");

  auto* eval_cmd = app.add_subcommand("eval", "Score a model on tagged data, or score a prediction file");
  eval_cmd->add_option("--checkpoint", checkpoint, "Model checkpoint");
  eval_cmd->add_option("data", data, "Tagged CoNLL file");
  eval_cmd->add_option("--gold", gold, "Gold CoNLL file (with --pred)");
  eval_cmd->add_option("--pred", pred, "Predicted CoNLL file (with --gold)");
  eval_cmd->add_option("--json", json_out, "Also write the report as JSON");

  auto* predict_cmd = app.add_subcommand("predict", "Tag sentences");
  predict_cmd->add_option("--checkpoint", checkpoint, "Model checkpoint")->required();
  predict_cmd->add_option("input", data, "CoNLL file, or raw text with --raw")->required();
  predict_cmd->add_flag("--raw", raw, "Input is one whitespace-tokenized sentence per line");
  predict_cmd->add_option("--output,-o", output, "Output CoNLL file (default stdout)");

  auto* ens_cmd = app.add_subcommand("ensemble", "Majority vote over prediction files");
  ens_cmd->add_option("predictions", inputs, "CoNLL prediction files")->required();
  ens_cmd->add_option("--scores", scores, "Dev F1 per file, used to break ties")->delimiter(',');
  ens_cmd->add_option("--output,-o", output, "Output CoNLL file (default stdout)");

  auto* att_cmd = app.add_subcommand("export-attention", "Write per-token attention weights");
  att_cmd->add_option("--checkpoint", checkpoint, "Model checkpoint")->required();
  att_cmd->add_option("data", data, "CoNLL file (tags optional)")->required();
  att_cmd->add_option("--output,-o", output_path, "Per-token TSV")->required();
  att_cmd->add_option("--summary", summary, "Per-tag summary TSV (default stdout)");

  auto* toy_cmd = app.add_subcommand("synth-toy", "Generate the synthetic toy corpus and config");
  toy_cmd->add_option("--output,-o", output_path, "Directory")->required();
  toy_cmd->add_option("--sentences", sentences, "Number of sentences");
  toy_cmd->add_option("--seed", toy_seed, "Generator seed");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error:usage: " << e.what() << '\n';
    return kExitInput;
  }

  auto report = [&](const char* kind, const std::string& what, int code) {
    err << "error:" << kind << ": " << what << '\n';
    return code;
  };
  try {
    if (train_cmd->parsed()) return cmd_train(config, seed, output, out);
    if (eval_cmd->parsed()) {
      const bool scoring = !gold.empty() || !pred.empty();
      if (scoring) {
        if (gold.empty() || pred.empty() || !checkpoint.empty() || !data.empty())
          return report("usage", "use either --checkpoint with a data file, or --gold with --pred", kExitInput);
        return cmd_score(gold, pred, json_out, out);
      }
      if (checkpoint.empty() || data.empty())
        return report("usage", "eval needs --checkpoint and a data file", kExitInput);
      return cmd_eval(checkpoint, data, json_out, out);
    }
    if (predict_cmd->parsed()) return cmd_predict(checkpoint, data, raw, output, out);
    if (ens_cmd->parsed()) return cmd_ensemble(inputs, scores, output, out);
    if (att_cmd->parsed()) return cmd_export_attention(checkpoint, data, output_path, summary, out);
    if (toy_cmd->parsed()) return cmd_synth_toy(output_path, sentences, toy_seed);
  } catch (const InputError& e) {
    const std::string what = e.what();
    if (what.rfind("config: ", 0) == 0) return report("config", what.substr(8), kExitInput);
    return report("input", what, kExitInput);
  } catch (const NumericError& e) {
    return report("numeric", e.what(), kExitNumeric);
  } catch (const std::exception& e) {
    return report("internal", e.what(), kExitInternal);
  }
  return kExitInternal;
}

int run_cli(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run_cli(args, std::cout, std::cerr);
}

}  // namespace hme::cli
