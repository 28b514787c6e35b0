#include "dcmi/train/adam.hpp"

#include <cmath>
#include <stdexcept>

namespace dcmi::train {

Adam::Adam(std::vector<ad::Parameter*> params, AdamOptions options)
    : params_(std::move(params)), options_(options) {
  if (!(options_.lr > 0.0)) throw std::invalid_argument("learning rate must be positive");
  for (auto* p : params_) {
    m_.push_back(ad::Tensor::zeros_like(p->value));
    v_.push_back(ad::Tensor::zeros_like(p->value));
  }
}

void Adam::step() {
  for (auto* p : params_) {
    if (!p->grad.all_finite()) throw ad::NumericError("non-finite gradient for '" + p->name() + "'");
  }
  ++step_;
  const double t = static_cast<double>(step_);
  const double c1 = 1.0 - std::pow(options_.beta1, t);
  const double c2 = 1.0 - std::pow(options_.beta2, t);
  for (std::size_t k = 0; k < params_.size(); ++k) {
    auto& value = params_[k]->value;
    const auto& grad = params_[k]->grad;
    auto& m = m_[k];
    auto& v = v_[k];
    for (std::size_t i = 0; i < value.size(); ++i) {
      const double g = grad[i];
      m[i] = options_.beta1 * m[i] + (1.0 - options_.beta1) * g;
      v[i] = options_.beta2 * v[i] + (1.0 - options_.beta2) * g * g;
      value[i] -= options_.lr * (m[i] / c1) / (std::sqrt(v[i] / c2) + options_.eps);
    }
  }
}

void Adam::zero_grad() {
  for (auto* p : params_) p->zero_grad();
}

}  // namespace dcmi::train
