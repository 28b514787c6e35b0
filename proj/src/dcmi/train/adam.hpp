#pragma once

#include <cstddef>
#include <vector>

#include "dcmi/autodiff/graph.hpp"

namespace dcmi::train {

struct AdamOptions {
  double lr = 3e-5;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Adam with bias-corrected moments. Reads Parameter::grad, updates
// Parameter::value in place.
class Adam {
 public:
  Adam(std::vector<ad::Parameter*> params, AdamOptions options);

  // Throws ad::NumericError naming the parameter when a gradient is not finite.
  void step();
  void zero_grad();

  std::size_t steps() const { return step_; }
  const AdamOptions& options() const { return options_; }
  const std::vector<ad::Tensor>& first_moments() const { return m_; }
  const std::vector<ad::Tensor>& second_moments() const { return v_; }

 private:
  std::vector<ad::Parameter*> params_;
  AdamOptions options_;
  std::vector<ad::Tensor> m_, v_;
  std::size_t step_ = 0;
};

}  // namespace dcmi::train
