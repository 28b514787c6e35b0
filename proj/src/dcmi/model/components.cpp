#include "dcmi/model/components.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "dcmi/autodiff/ops.hpp"

namespace dcmi::model {

namespace {

// log(cosh(x) + 1) without overflow:
// cosh(x) + 1 = e^|x| / 2 * (1 + e^-|x|)^2
double log_cosh_plus_one(double x) {
  const double a = std::abs(x);
  return a - std::numbers::ln2 + 2.0 * std::log1p(std::exp(-a));
}

double clamp_arg(double x, std::size_t& clamped) {
  if (std::abs(x) > kCoshClamp) {
    ++clamped;
    return std::copysign(kCoshClamp, x);
  }
  return x;
}

}  // namespace

ad::Var domain_mask(const ad::Var& v, double tau) {
  if (!(tau > 0.0)) throw std::invalid_argument("mask temperature must be positive");
  return ad::sigmoid(ad::scale(v, 1.0 / tau));
}

ad::Var mask_representation(const ad::Var& h, const ad::Var& m) {
  if (h.shape() == m.shape()) return ad::mul(h, m);
  if (m.value().size() == h.value().cols() && (m.value().rank() == 1 || m.value().rows() == 1)) {
    return ad::mul_row(h, m);
  }
  throw ad::ShapeError("mask_representation: mask " + ad::shape_string(m.shape()) +
                       " does not fit representation " + ad::shape_string(h.shape()));
}

Compensation compensation_multiplier(const ad::Tensor& v, double tau, double tau_min) {
  if (!(tau > 0.0) || !(tau_min > 0.0)) throw std::invalid_argument("compensation needs tau, tau_min > 0");
  Compensation c{ad::Tensor::zeros_like(v), 0};
  const double log_ratio = std::log(tau) - std::log(tau_min);
  for (std::size_t i = 0; i < v.size(); ++i) {
    // A coordinate counts once even when both arguments are clamped.
    std::size_t hits = 0;
    const double scaled = clamp_arg(v[i] / tau, hits);
    const double raw = clamp_arg(v[i], hits);
    c.clamped += hits > 0 ? 1 : 0;
    c.multiplier[i] = std::exp(log_ratio + log_cosh_plus_one(scaled) - log_cosh_plus_one(raw));
  }
  return c;
}

ad::Tensor compensate_gradient(const ad::Tensor& grad, const ad::Tensor& v, double tau, double tau_min,
                               std::size_t* clamped) {
  if (!grad.same_shape(v)) throw ad::ShapeError("compensate_gradient: gradient and embedding shapes differ");
  auto c = compensation_multiplier(v, tau, tau_min);
  if (clamped) *clamped = c.clamped;
  ad::Tensor out = grad;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= c.multiplier[i];
  return out;
}

double anneal_temperature(std::size_t batch_index, std::size_t batches_per_epoch, double tau_min) {
  if (batches_per_epoch < 2) return tau_min;
  if (batch_index >= batches_per_epoch) throw std::out_of_range("batch index past the end of the epoch");
  const double t = static_cast<double>(batch_index) / static_cast<double>(batches_per_epoch - 1);
  return 1.0 - (1.0 - tau_min) * t;
}

ad::Tensor relevance_weights(const ad::Tensor& relevance) {
  const std::size_t n = relevance.rows(), m = relevance.cols();
  ad::Tensor w = relevance;
  for (std::size_t r = 0; r < n; ++r) {
    double s = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      if (relevance[r * m + j] < 0.0) throw std::invalid_argument("relevance scores must be non-negative");
      s += relevance[r * m + j];
    }
    if (!(s > 0.0)) throw std::invalid_argument("relevance scores of a sample sum to zero");
    for (std::size_t j = 0; j < m; ++j) w[r * m + j] /= s;
  }
  return w;
}

ad::Var augmented_view(const std::vector<ad::Var>& hhat, const ad::Tensor& relevance) {
  if (hhat.empty() || hhat.size() != relevance.cols()) {
    throw ad::ShapeError("augmented_view: need one representation per relevance column");
  }
  const ad::Tensor w = relevance_weights(relevance);
  const std::size_t n = w.rows(), m = w.cols();
  ad::Var total;
  for (std::size_t j = 0; j < m; ++j) {
    std::vector<double> col(n);
    for (std::size_t r = 0; r < n; ++r) col[r] = w[r * m + j];
    ad::Var term = ad::scale_rows(hhat[j], col);
    total = total.valid() ? ad::add(total, term) : term;
  }
  return total;
}

ad::Var contrastive_loss_from_dots(const ad::Var& dots, const ad::Tensor& relevance) {
  if (dots.value().size() != relevance.size()) throw ad::ShapeError("contrastive_loss: dots/relevance mismatch");
  // bce_with_logits averages over batch*M entries; the objective sums over M.
  return ad::scale(ad::bce_with_logits(dots, relevance), static_cast<double>(relevance.cols()));
}

ad::Var contrastive_loss(const ad::Var& hbar, const std::vector<ad::Var>& hhat, const ad::Tensor& relevance) {
  if (hhat.size() != relevance.cols()) throw ad::ShapeError("contrastive_loss: one representation per domain");
  ad::Var view = ad::l2_normalize_rows(hbar);
  std::vector<ad::Var> dots;
  dots.reserve(hhat.size());
  for (const auto& h : hhat) dots.push_back(ad::row_dot(view, ad::l2_normalize_rows(h)));
  return contrastive_loss_from_dots(ad::concat_cols(dots), relevance);
}

ad::Var supervised_loss(const ad::Var& logits, std::span<const int> labels) {
  return ad::softmax_cross_entropy(logits, labels);
}

ad::Tensor one_hot(std::span<const int> ids, std::size_t classes) {
  ad::Tensor t({ids.size(), classes});
  for (std::size_t r = 0; r < ids.size(); ++r) {
    if (ids[r] < 0 || static_cast<std::size_t>(ids[r]) >= classes) {
      throw std::out_of_range("id " + std::to_string(ids[r]) + " outside [0," + std::to_string(classes) + ")");
    }
    t[r * classes + static_cast<std::size_t>(ids[r])] = 1.0;
  }
  return t;
}

ad::Var domain_loss(const ad::Var& domain_logits, std::span<const int> domains) {
  const auto& v = domain_logits.value();
  if (v.rows() != domains.size()) throw ad::ShapeError("domain_loss: one domain id per row required");
  return ad::bce_with_logits(domain_logits, one_hot(domains, v.cols()));
}

}  // namespace dcmi::model
