#include "hme/train/optimizer.hpp"

#include <cmath>

#include "hme/util/error.hpp"

namespace hme::train {

double global_grad_norm(const model::ParameterList& params) {
  double sq = 0.0;
  for (const auto& p : params)
    for (double g : p.tensor.grad()) sq += g * g;
  return std::sqrt(sq);
}

double clip_gradients(model::ParameterList& params, double max_norm) {
  for (const auto& p : params)
    for (double g : p.tensor.grad())
      if (!std::isfinite(g)) throw NumericError("non-finite gradient in parameter '" + p.name + "'");
  const double norm = global_grad_norm(params);
  if (max_norm > 0.0 && norm > max_norm) {
    const double factor = max_norm / norm;
    for (auto& p : params)
      if (p.tensor.has_grad())
        for (double& g : p.tensor.mutable_grad()) g *= factor;
  }
  return norm;
}

Adam::Adam(model::ParameterList params, AdamConfig config)
    : params_(std::move(params)), config_(config) {
  if (!(config_.learning_rate > 0.0)) throw InputError("adam: learning rate must be positive");
  for (const auto& p : params_) {
    m_.emplace_back(p.tensor.size(), 0.0);
    v_.emplace_back(p.tensor.size(), 0.0);
  }
}

double Adam::step() {
  const double norm = clip_gradients(params_, config_.clip_norm);
  ++t_;
  const double b1 = config_.beta1, b2 = config_.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(t_));
  for (std::size_t k = 0; k < params_.size(); ++k) {
    auto& tensor = params_[k].tensor;
    const auto grad = tensor.grad();
    auto value = tensor.mutable_data();
    auto& m = m_[k];
    auto& v = v_[k];
    for (std::size_t i = 0; i < value.size(); ++i) {
      const double g = grad.empty() ? 0.0 : grad[i];
      m[i] = b1 * m[i] + (1.0 - b1) * g;
      v[i] = b2 * v[i] + (1.0 - b2) * g * g;
      value[i] -= config_.learning_rate * (m[i] / c1) / (std::sqrt(v[i] / c2) + config_.eps);
    }
  }
  return norm;
}

void Adam::zero_grad() {
  for (auto& p : params_) p.tensor.zero_grad();
}

}  // namespace hme::train
