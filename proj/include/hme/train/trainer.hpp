#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hme/model/tagger.hpp"
#include "hme/train/metrics.hpp"
#include "hme/train/optimizer.hpp"
#include "json.hpp"

namespace hme::train {

enum class PatienceUnit { epochs, steps };

std::string_view patience_unit_name(PatienceUnit unit);
PatienceUnit parse_patience_unit(std::string_view name);

struct TrainConfig {
  double learning_rate = 0.1;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::size_t patience = 15;
  PatienceUnit patience_unit = PatienceUnit::epochs;
  std::size_t batch_size = 32;
  std::size_t max_epochs = 100;
  std::uint64_t seed = 1;
  double clip_norm = 5.0;
  std::optional<double> lr_decay;  // multiply lr by this after a non-improving epoch

  // Throws InputError on out-of-range values.
  void validate() const;
  AdamConfig adam() const;
};

// Dev-F1 patience bookkeeping. An epoch improves only on a strictly higher F1.
class EarlyStopping {
 public:
  EarlyStopping(std::size_t patience, PatienceUnit unit) : patience_(patience), unit_(unit) {}

  // Records one epoch; returns whether it improved on the best so far.
  bool observe(double dev_f1, std::size_t steps_in_epoch);
  bool should_stop() const;
  double best_f1() const { return best_f1_; }
  std::size_t best_epoch() const { return best_epoch_; }

 private:
  std::size_t patience_;
  PatienceUnit unit_;
  double best_f1_ = -1.0;
  std::size_t epoch_ = 0, best_epoch_ = 0;
  std::size_t epochs_since_best_ = 0, steps_since_best_ = 0;
};

struct EpochLog {
  std::size_t epoch = 0;
  std::size_t steps = 0;  // optimizer steps so far
  double train_nll = 0.0;  // mean per sentence
  double dev_precision = 0.0;
  double dev_recall = 0.0;
  double dev_f1 = 0.0;
  double learning_rate = 0.0;
  bool improved = false;
  double elapsed_seconds = 0.0;

  nlohmann::json to_json() const;
};

struct TrainResult {
  std::vector<EpochLog> history;
  std::size_t best_epoch = 0;
  double best_dev_f1 = 0.0;
  bool stopped_early = false;
};

// Trains `model` in place and leaves it holding the parameters of the best
// dev epoch. `on_epoch` runs after each epoch's dev evaluation. Throws
// InputError on empty data and NumericError on divergence.
TrainResult train(model::Tagger& model, const std::vector<model::Features>& train_set,
                  const std::vector<model::Features>& dev_set, const TrainConfig& config,
                  const std::function<void(const EpochLog&)>& on_epoch = {});

// Viterbi predictions for every sentence.
std::vector<std::vector<std::string>> predict_all(const model::Tagger& model,
                                                  const std::vector<model::Features>& data);

// Entity scores against the gold tags stored in the features.
EvalReport evaluate(const model::Tagger& model, const std::vector<model::Features>& data,
                    std::vector<std::vector<std::string>>* predictions = nullptr);

// Mean CRF negative log-likelihood in eval mode.
double mean_nll(const model::Tagger& model, const std::vector<model::Features>& data);

}  // namespace hme::train
