#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "cmi/ndmath/autodiff.hpp"

namespace cmi {

enum class OptimizerKind { SgdMomentum, Adam };

struct OptimizerConfig {
  OptimizerKind kind = OptimizerKind::SgdMomentum;
  double learning_rate = 0.03;
  double momentum = 0.9;
  double weight_decay = 0.0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// Momentum SGD (heavy-ball, buffer = mu * buffer + g) and Adam with bias
/// correction. Weight decay is an L2 term added to the gradient in both.
class Optimizer {
 public:
  Optimizer(OptimizerConfig config, std::vector<Parameter*> params)
      : config_(config), params_(std::move(params)) {
    for (Parameter* p : params_) {
      first_.emplace_back(p->value.shape());
      second_.emplace_back(p->value.shape());
    }
  }

  const OptimizerConfig& config() const { return config_; }
  std::size_t step_count() const { return steps_; }

  void zero_grad() {
    for (Parameter* p : params_) p->zero_grad();
  }

  void step() {
    ++steps_;
    for (std::size_t k = 0; k < params_.size(); ++k) {
      Parameter& p = *params_[k];
      if (!p.grad.same_shape(p.value) || !first_[k].same_shape(p.value)) {
        throw std::domain_error("Optimizer::step: gradient/moment shape mismatch for " + p.name);
      }
      if (config_.kind == OptimizerKind::SgdMomentum) {
        sgd_update(p, first_[k]);
      } else {
        adam_update(p, first_[k], second_[k]);
      }
      p.value.require_finite("Optimizer::step(" + p.name + ")");
    }
  }

  void set_learning_rate(double lr) { config_.learning_rate = lr; }

 private:
  void sgd_update(Parameter& p, Tensor& buf) const {
    for (std::size_t i = 0; i < p.value.size(); ++i) {
      const double g = p.grad[i] + config_.weight_decay * p.value[i];
      buf[i] = config_.momentum * buf[i] + g;
      p.value[i] -= config_.learning_rate * buf[i];
    }
  }

  void adam_update(Parameter& p, Tensor& m, Tensor& v) const {
    const double t = static_cast<double>(steps_);
    const double c1 = 1.0 - std::pow(config_.beta1, t);
    const double c2 = 1.0 - std::pow(config_.beta2, t);
    for (std::size_t i = 0; i < p.value.size(); ++i) {
      const double g = p.grad[i] + config_.weight_decay * p.value[i];
      m[i] = config_.beta1 * m[i] + (1.0 - config_.beta1) * g;
      v[i] = config_.beta2 * v[i] + (1.0 - config_.beta2) * g * g;
      const double mhat = m[i] / c1;
      const double vhat = v[i] / c2;
      p.value[i] -= config_.learning_rate * mhat / (std::sqrt(vhat) + config_.epsilon);
    }
  }

  OptimizerConfig config_;
  std::vector<Parameter*> params_;
  std::vector<Tensor> first_;
  std::vector<Tensor> second_;
  std::size_t steps_ = 0;
};

}  // namespace cmi
