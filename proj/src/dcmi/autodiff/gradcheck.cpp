#include "dcmi/autodiff/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace dcmi::ad {

namespace {

double evaluate(const LossBuilder& build) {
  Graph g;
  return build(g).value().item();
}

}  // namespace

GradCheckReport check_gradients(const LossBuilder& build, std::span<Parameter* const> params,
                                double epsilon, double tolerance, double floor) {
  if (!(epsilon > 0.0)) throw std::invalid_argument("check_gradients: epsilon must be positive");

  for (auto* p : params) p->zero_grad();
  std::vector<Tensor> analytic;
  {
    Graph g;
    Var loss = build(g);
    g.backward(loss, BackwardOptions{.apply_transforms = false});
    for (auto* p : params) {
      analytic.push_back(p->grad);
      p->zero_grad();
    }
  }

  GradCheckReport report;
  for (std::size_t k = 0; k < params.size(); ++k) {
    auto& value = params[k]->value;
    for (std::size_t i = 0; i < value.size(); ++i) {
      const double saved = value[i];
      value[i] = saved + epsilon;
      const double up = evaluate(build);
      value[i] = saved - epsilon;
      const double down = evaluate(build);
      value[i] = saved;

      const double numeric = (up - down) / (2.0 * epsilon);
      const double a = analytic[k][i];
      const double denom = std::max({std::abs(a), std::abs(numeric), floor});
      const double rel = std::abs(a - numeric) / denom;
      ++report.coordinates;
      if (rel > report.max_rel_error || report.worst.empty()) {
        report.max_rel_error = rel;
        report.worst = params[k]->name() + "[" + std::to_string(i) + "]";
        report.worst_analytic = a;
        report.worst_numeric = numeric;
      }
    }
  }
  report.passed = report.max_rel_error < tolerance;
  return report;
}

}  // namespace dcmi::ad
