#include "hme/cli/pipeline.hpp"

namespace hme::cli {

std::vector<std::vector<std::string>> Dataset::gold() const {
  std::vector<std::vector<std::string>> out;
  for (const auto& s : sentences) out.push_back(s.labels);
  return out;
}

Dataset load_dataset(const model::Tagger& tagger, const std::filesystem::path& path, bool tagged) {
  text::ConllOptions opts;
  if (tagged) {
    const auto& tags = tagger.labels().tags();
    opts.label_vocabulary = std::set<std::string>(tags.begin(), tags.end());
  } else {
    opts.allow_untagged = true;
  }
  auto conll = text::read_conll(path, opts);
  Dataset d;
  d.repairs = conll.repairs;
  d.sentences = std::move(conll.sentences);
  for (const auto& s : d.sentences) d.features.push_back(tagger.featurize(s));
  return d;
}

model::Tagger build_tagger(const RunConfig& config) {
  const auto train_conll = text::read_conll(config.train_path);
  const auto dev_conll = text::read_conll(config.dev_path);
  std::set<std::string> tags;
  for (const auto* part : {&train_conll, &dev_conll})
    for (const auto& s : part->sentences) tags.insert(s.labels.begin(), s.labels.end());
  return model::Tagger(config.model, model::LabelSet::from_tags(tags),
                       model::load_resources(config.manifest),
                       model::collect_alphabet(train_conll.sentences),
                       model::collect_vocabulary(train_conll.sentences), config.seed);
}

train::EvalReport with_counters(train::EvalReport report, const Dataset& data) {
  report.repairs = data.repairs;
  report.oov_words = 0;
  for (const auto& f : data.features) report.oov_words += f.oov_words;
  return report;
}

}  // namespace hme::cli
