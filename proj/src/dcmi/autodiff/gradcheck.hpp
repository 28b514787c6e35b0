#pragma once

#include <functional>
#include <span>
#include <string>

#include "dcmi/autodiff/graph.hpp"

namespace dcmi::ad {

struct GradCheckReport {
  double max_rel_error = 0.0;
  std::size_t coordinates = 0;
  std::string worst;  // "param[index]" of the worst coordinate
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
  bool passed = true;
};

// Builds a fresh graph per evaluation. Must be a deterministic function of
// the parameter values (replay any dropout stream from a fixed seed).
using LossBuilder = std::function<Var(Graph&)>;

// Compares the analytic gradient (gradient transforms disabled) against the
// central difference (f(x+eps) - f(x-eps)) / 2eps for every coordinate of
// every parameter. Relative error per coordinate is
// |a - n| / max(|a|, |n|, floor). The floor keeps coordinates whose true
// gradient sits below the difference quotient's roundoff (about
// machine-eps * |f| / eps) from reporting noise as error. Parameter
// gradients are left zeroed.
GradCheckReport check_gradients(const LossBuilder& build, std::span<Parameter* const> params,
                                double epsilon = 1e-5, double tolerance = 1e-4, double floor = 1e-8);

}  // namespace dcmi::ad
