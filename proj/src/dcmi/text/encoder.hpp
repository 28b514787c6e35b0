#pragma once

#include <cstddef>
#include <random>
#include <vector>

#include "dcmi/autodiff/graph.hpp"

namespace dcmi::text {

struct EncoderConfig {
  std::size_t vocab_size = 0;
  std::size_t embedding_dim = 32;
  std::size_t hidden_dim = 64;
  std::size_t output_dim = 64;  // d, the representation size seen by masks and heads
  double dropout = 0.5;
  double embedding_init_std = 1.0;
};

enum class Mode { train, eval };

using TokenBatch = std::vector<std::vector<std::size_t>>;

// Mean-pooled token embeddings followed by two tanh feed-forward layers, with
// dropout between them in train mode:
//   h = tanh(W2 . dropout(tanh(W1 . mean(E[tokens]) + b1)) + b2)
class Encoder {
 public:
  Encoder(const EncoderConfig& config, std::mt19937_64& init_rng);

  const EncoderConfig& config() const { return config_; }

  // Returns the (batch x output_dim) body output. `dropout_rng` is consumed
  // only in train mode. Throws std::invalid_argument on an empty sequence.
  ad::Var encode(ad::Graph& g, const TokenBatch& tokens, Mode mode, std::mt19937_64* dropout_rng);

  std::vector<ad::Parameter*> parameters();

  ad::Parameter embedding;
  ad::Parameter w1, b1, w2, b2;

 private:
  EncoderConfig config_;
};

// Glorot-uniform (fan_in x fan_out) matrix.
ad::Tensor glorot(std::size_t fan_in, std::size_t fan_out, std::mt19937_64& rng);

}  // namespace dcmi::text
