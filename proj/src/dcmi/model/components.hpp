#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "dcmi/autodiff/graph.hpp"

namespace dcmi::model {

// m = sigmoid(v / tau), elementwise. Works on a single embedding or the whole
// (M x d) table. Throws std::invalid_argument when tau <= 0.
ad::Var domain_mask(const ad::Var& v, double tau);

// h (.) m. `m` may have the same shape as `h`, or be a single length-d mask
// applied to every row of a (batch x d) `h`.
ad::Var mask_representation(const ad::Var& h, const ad::Var& m);

struct Compensation {
  ad::Tensor multiplier;
  std::size_t clamped = 0;  // coordinates where |v/tau| or |v| exceeded kCoshClamp
};

inline constexpr double kCoshClamp = 50.0;

// Elementwise  tau [cosh(v/tau) + 1] / (tau_min [cosh(v) + 1]).
// Arguments of cosh are clamped to +-kCoshClamp and the ratio is evaluated as
// exp(log-numerator - log-denominator) so it never overflows.
Compensation compensation_multiplier(const ad::Tensor& v, double tau, double tau_min);
ad::Tensor compensate_gradient(const ad::Tensor& grad, const ad::Tensor& v, double tau, double tau_min,
                               std::size_t* clamped = nullptr);

// Linear schedule from 1 at the first batch of an epoch to tau_min at the last.
double anneal_temperature(std::size_t batch_index, std::size_t batches_per_epoch, double tau_min);

// Weighted average of per-domain representations with row-normalized
// weights a / sum(a). `hhat[j]` is (batch x d); `relevance` is (batch x M)
// and is treated as a constant.
ad::Var augmented_view(const std::vector<ad::Var>& hhat, const ad::Tensor& relevance);

// Normalized weights used by augmented_view.
ad::Tensor relevance_weights(const ad::Tensor& relevance);

// Soft binary cross-entropy between sigmoid(hbar . hhat_j) and a_j, summed
// over domains and averaged over the batch. hbar and every hhat_j are l2
// normalized first.
ad::Var contrastive_loss(const ad::Var& hbar, const std::vector<ad::Var>& hhat, const ad::Tensor& relevance);

// Same objective from precomputed similarities: dots is (batch x M).
ad::Var contrastive_loss_from_dots(const ad::Var& dots, const ad::Tensor& relevance);

// Batch-mean softmax cross-entropy.
ad::Var supervised_loss(const ad::Var& logits, std::span<const int> labels);

// Mean over the M outputs (and the batch) of BCE against one-hot(domain).
ad::Var domain_loss(const ad::Var& domain_logits, std::span<const int> domains);

ad::Tensor one_hot(std::span<const int> ids, std::size_t classes);

}  // namespace dcmi::model
