#include "hme/train/trainer.hpp"

#include <chrono>
#include <cmath>
#include <numeric>

#include "hme/util/error.hpp"
#include "hme/util/random.hpp"

namespace hme::train {

std::string_view patience_unit_name(PatienceUnit unit) {
  return unit == PatienceUnit::epochs ? "epochs" : "steps";
}

PatienceUnit parse_patience_unit(std::string_view name) {
  if (name == "epochs") return PatienceUnit::epochs;
  if (name == "steps") return PatienceUnit::steps;
  throw InputError("unknown patience_unit '" + std::string(name) + "' (expected epochs or steps)");
}

void TrainConfig::validate() const {
  auto need = [](bool ok, const std::string& what) {
    if (!ok) throw InputError("train: " + what);
  };
  need(learning_rate > 0.0, "learning_rate must be positive");
  need(beta1 >= 0.0 && beta1 < 1.0 && beta2 >= 0.0 && beta2 < 1.0, "betas must lie in [0, 1)");
  need(eps > 0.0, "eps must be positive");
  need(patience >= 1, "patience must be at least 1");
  need(batch_size >= 1, "batch_size must be at least 1");
  need(max_epochs >= 1, "max_epochs must be at least 1");
  need(clip_norm >= 0.0, "clip_norm must be non-negative");
  if (lr_decay) need(*lr_decay > 0.0 && *lr_decay <= 1.0, "lr_decay must lie in (0, 1]");
}

AdamConfig TrainConfig::adam() const { return {learning_rate, beta1, beta2, eps, clip_norm}; }

bool EarlyStopping::observe(double dev_f1, std::size_t steps_in_epoch) {
  ++epoch_;
  if (dev_f1 > best_f1_) {
    best_f1_ = dev_f1;
    best_epoch_ = epoch_;
    epochs_since_best_ = steps_since_best_ = 0;
    return true;
  }
  ++epochs_since_best_;
  steps_since_best_ += steps_in_epoch;
  return false;
}

bool EarlyStopping::should_stop() const {
  return (unit_ == PatienceUnit::epochs ? epochs_since_best_ : steps_since_best_) >= patience_;
}

nlohmann::json EpochLog::to_json() const {
  return {{"epoch", epoch},
          {"steps", steps},
          {"train_nll", train_nll},
          {"dev_precision", dev_precision},
          {"dev_recall", dev_recall},
          {"dev_f1", dev_f1},
          {"learning_rate", learning_rate},
          {"improved", improved},
          {"elapsed_seconds", elapsed_seconds}};
}

std::vector<std::vector<std::string>> predict_all(const model::Tagger& model,
                                                  const std::vector<model::Features>& data) {
  std::vector<std::vector<std::string>> out;
  out.reserve(data.size());
  for (const auto& f : data) out.push_back(model.predict(f));
  return out;
}

EvalReport evaluate(const model::Tagger& model, const std::vector<model::Features>& data,
                    std::vector<std::vector<std::string>>* predictions) {
  auto pred = predict_all(model, data);
  std::vector<std::vector<std::string>> gold;
  gold.reserve(data.size());
  std::size_t oov = 0;
  for (const auto& f : data) {
    if (f.gold.size() != f.n) throw InputError("evaluation data must be tagged");
    gold.push_back(model.labels().decode(f.gold));
    oov += f.oov_words;
  }
  EvalReport report = entity_f1(gold, pred);
  report.oov_words = oov;
  if (predictions) *predictions = std::move(pred);
  return report;
}

double mean_nll(const model::Tagger& model, const std::vector<model::Features>& data) {
  ad::NoGradGuard guard;
  double total = 0.0;
  for (const auto& f : data) {
    model::ForwardMode eval;
    total += model.loss(f, eval).item();
  }
  return data.empty() ? 0.0 : total / static_cast<double>(data.size());
}

namespace {

std::vector<std::size_t> shuffled(std::size_t n, std::uint64_t seed) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
  return order;
}

std::vector<std::vector<double>> snapshot(const model::ParameterList& params) {
  std::vector<std::vector<double>> out;
  for (const auto& p : params) out.push_back(p.tensor.values());
  return out;
}

void restore(model::ParameterList& params, const std::vector<std::vector<double>>& values) {
  for (std::size_t k = 0; k < params.size(); ++k) {
    auto dst = params[k].tensor.mutable_data();
    std::copy(values[k].begin(), values[k].end(), dst.begin());
  }
}

}  // namespace

TrainResult train(model::Tagger& model, const std::vector<model::Features>& train_set,
                  const std::vector<model::Features>& dev_set, const TrainConfig& config,
                  const std::function<void(const EpochLog&)>& on_epoch) {
  config.validate();
  if (train_set.empty()) throw InputError("training set is empty");
  if (dev_set.empty()) throw InputError("dev set is empty");
  for (const auto& f : train_set)
    if (f.gold.size() != f.n) throw InputError("training data must be tagged");

  auto params = model.parameters();
  Adam adam(params, config.adam());
  const auto start = std::chrono::steady_clock::now();
  TrainResult result;
  std::vector<std::vector<double>> best = snapshot(params);
  EarlyStopping stopper(config.patience, config.patience_unit);

  for (std::size_t epoch = 1; epoch <= config.max_epochs; ++epoch) {
    const auto order = shuffled(train_set.size(), hash_key(config.seed, 0x5eed, epoch));
    double nll = 0.0;
    std::size_t steps_this_epoch = 0;
    for (std::size_t b = 0; b < order.size(); b += config.batch_size) {
      const std::size_t e = std::min(order.size(), b + config.batch_size);
      const double weight = 1.0 / static_cast<double>(e - b);
      adam.zero_grad();
      model::ForwardMode mode{true, config.seed, adam.steps()};
      for (std::size_t k = b; k < e; ++k) {
        ad::Tape::current().clear();
        const ad::Tensor loss = model.loss(train_set[order[k]], mode);
        const double value = loss.item();
        if (!std::isfinite(value))
          throw NumericError("training diverged: loss is " + std::to_string(value) + " at epoch " +
                             std::to_string(epoch));
        nll += value;
        ad::backward(ad::scale(loss, weight));
      }
      ad::Tape::current().clear();
      adam.step();
      ++steps_this_epoch;
    }

    const EvalReport dev = evaluate(model, dev_set);
    EpochLog log;
    log.epoch = epoch;
    log.steps = adam.steps();
    log.train_nll = nll / static_cast<double>(train_set.size());
    log.dev_precision = dev.precision();
    log.dev_recall = dev.recall();
    log.dev_f1 = dev.f1();
    log.learning_rate = adam.learning_rate();
    log.improved = stopper.observe(log.dev_f1, steps_this_epoch);
    log.elapsed_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (log.improved) {
      best = snapshot(params);
    } else if (config.lr_decay) {
      adam.set_learning_rate(adam.learning_rate() * *config.lr_decay);
    }
    result.history.push_back(log);
    if (on_epoch) on_epoch(log);
    if (stopper.should_stop()) {
      result.stopped_early = epoch < config.max_epochs;
      break;
    }
  }
  restore(params, best);
  result.best_epoch = stopper.best_epoch();
  result.best_dev_f1 = stopper.best_f1();
  return result;
}

}  // namespace hme::train
