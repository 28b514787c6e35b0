#include "dcmi/text/encoder.hpp"

#include <cmath>
#include <stdexcept>

#include "dcmi/autodiff/ops.hpp"

namespace dcmi::text {

ad::Tensor glorot(std::size_t fan_in, std::size_t fan_out, std::mt19937_64& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  std::uniform_real_distribution<double> u(-limit, limit);
  ad::Tensor t({fan_in, fan_out});
  for (auto& v : t.values()) v = u(rng);
  return t;
}

namespace {

ad::Tensor normal_matrix(std::size_t rows, std::size_t cols, double std, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, std);
  ad::Tensor t({rows, cols});
  for (auto& v : t.values()) v = n(rng);
  return t;
}

const EncoderConfig& checked(const EncoderConfig& c) {
  if (c.vocab_size < 1 || c.embedding_dim < 1 || c.hidden_dim < 1 || c.output_dim < 1) {
    throw std::invalid_argument("encoder dimensions must be positive");
  }
  if (c.dropout < 0.0 || c.dropout >= 1.0) throw std::invalid_argument("dropout must be in [0,1)");
  return c;
}

}  // namespace

Encoder::Encoder(const EncoderConfig& config, std::mt19937_64& init_rng)
    : embedding("encoder.embedding",
                normal_matrix(checked(config).vocab_size, config.embedding_dim, config.embedding_init_std, init_rng)),
      w1("encoder.w1", glorot(config.embedding_dim, config.hidden_dim, init_rng)),
      b1("encoder.b1", ad::Tensor({config.hidden_dim})),
      w2("encoder.w2", glorot(config.hidden_dim, config.output_dim, init_rng)),
      b2("encoder.b2", ad::Tensor({config.output_dim})),
      config_(config) {}

ad::Var Encoder::encode(ad::Graph& g, const TokenBatch& tokens, Mode mode, std::mt19937_64* dropout_rng) {
  for (const auto& seq : tokens) {
    if (seq.empty()) throw std::invalid_argument("cannot encode an empty token sequence");
  }
  ad::Var pooled = ad::embedding_bag_mean(g.param(embedding), tokens);
  ad::Var hidden = ad::tanh(ad::add_row(ad::matmul(pooled, g.param(w1)), g.param(b1)));
  if (mode == Mode::train && config_.dropout > 0.0) {
    if (!dropout_rng) throw std::invalid_argument("train-mode encode needs a dropout stream");
    hidden = ad::dropout(hidden, config_.dropout, *dropout_rng);
  }
  return ad::tanh(ad::add_row(ad::matmul(hidden, g.param(w2)), g.param(b2)));
}

std::vector<ad::Parameter*> Encoder::parameters() { return {&embedding, &w1, &b1, &w2, &b2}; }

}  // namespace dcmi::text
