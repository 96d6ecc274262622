#pragma once

#include <vector>

#include "hme/model/layers.hpp"

namespace hme::train {

struct AdamConfig {
  double learning_rate = 0.1;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double clip_norm = 5.0;  // 0 disables clipping
};

// L2 norm over every gradient entry; parameters without a gradient count as zero.
double global_grad_norm(const model::ParameterList& params);

// Rescales all gradients so their global norm is at most `max_norm`.
// Returns the norm before clipping. Throws NumericError naming the first
// parameter holding a non-finite gradient.
double clip_gradients(model::ParameterList& params, double max_norm);

// Adam with bias correction, applied after global-norm clipping.
class Adam {
 public:
  Adam(model::ParameterList params, AdamConfig config);

  // One update from the accumulated gradients. Returns the pre-clip norm.
  double step();
  void zero_grad();

  double learning_rate() const { return config_.learning_rate; }
  void set_learning_rate(double lr) { config_.learning_rate = lr; }
  std::size_t steps() const { return t_; }
  const model::ParameterList& parameters() const { return params_; }
  const std::vector<double>& first_moment(std::size_t k) const { return m_[k]; }
  const std::vector<double>& second_moment(std::size_t k) const { return v_[k]; }

 private:
  model::ParameterList params_;
  AdamConfig config_;
  std::vector<std::vector<double>> m_, v_;
  std::size_t t_ = 0;
};

}  // namespace hme::train
