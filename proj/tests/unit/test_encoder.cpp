#include "doctest.h"

#include <cmath>

#include "dcmi/autodiff/ops.hpp"
#include "dcmi/text/encoder.hpp"

namespace ad = dcmi::ad;
using namespace dcmi::text;

namespace {

EncoderConfig small() {
  return EncoderConfig{.vocab_size = 10, .embedding_dim = 4, .hidden_dim = 5, .output_dim = 3, .dropout = 0.5,
                       .embedding_init_std = 1.0};
}

}  // namespace

TEST_CASE("encoder output shape and range") {
  std::mt19937_64 rng(1);
  Encoder enc(small(), rng);
  ad::Graph g;
  const auto h = enc.encode(g, {{1, 2, 3}, {4}}, Mode::eval, nullptr);
  CHECK(h.shape() == ad::Shape{2, 3});
  for (double x : h.value().values()) CHECK(std::abs(x) < 1.0);
  CHECK(enc.parameters().size() == 5);
}

TEST_CASE("eval mode is deterministic, train mode uses dropout") {
  std::mt19937_64 rng(1);
  Encoder enc(small(), rng);
  const TokenBatch tokens{{1, 2}, {3, 4}};
  ad::Graph g1, g2;
  CHECK(enc.encode(g1, tokens, Mode::eval, nullptr).value() == enc.encode(g2, tokens, Mode::eval, nullptr).value());

  std::mt19937_64 d1(5), d2(5);
  ad::Graph g3, g4, g5;
  const auto a = enc.encode(g3, tokens, Mode::train, &d1).value();
  CHECK(a == enc.encode(g4, tokens, Mode::train, &d2).value());
  CHECK_FALSE(a == enc.encode(g5, tokens, Mode::eval, nullptr).value());
}

TEST_CASE("encoder initialization depends only on the rng") {
  std::mt19937_64 r1(9), r2(9);
  Encoder a(small(), r1), b(small(), r2);
  CHECK(a.embedding.value == b.embedding.value);
  CHECK(a.w2.value == b.w2.value);
}

TEST_CASE("encoder rejects empty sequences") {
  std::mt19937_64 rng(1);
  Encoder enc(small(), rng);
  ad::Graph g;
  CHECK_THROWS_AS(enc.encode(g, {{1}, {}}, Mode::eval, nullptr), std::invalid_argument);
}

TEST_CASE("glorot stays inside its bound") {
  std::mt19937_64 rng(2);
  const auto w = glorot(6, 10, rng);
  const double bound = std::sqrt(6.0 / 16.0);
  CHECK(w.shape() == ad::Shape{6, 10});
  for (double x : w.values()) CHECK(std::abs(x) <= bound);
}
