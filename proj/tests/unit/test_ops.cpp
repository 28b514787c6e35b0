#include "doctest.h"

#include <cmath>
#include <random>
#include <vector>

#include "dcmi/autodiff/graph.hpp"
#include "dcmi/autodiff/ops.hpp"

namespace ad = dcmi::ad;
using ad::Tensor;

TEST_CASE("forward values of elementwise ops") {
  ad::Graph g;
  auto x = g.constant(Tensor::vector({-1.0, 0.0, 2.0}));
  CHECK(ad::relu(x).value() == Tensor::vector({0.0, 0.0, 2.0}));
  CHECK(ad::sigmoid(x).value()[1] == doctest::Approx(0.5));
  CHECK(ad::tanh(x).value()[2] == doctest::Approx(std::tanh(2.0)));
  CHECK(ad::sum(x).value().item() == doctest::Approx(1.0));
  CHECK(ad::mean(x).value().item() == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("matmul and row broadcasting") {
  ad::Graph g;
  auto a = g.constant(Tensor::matrix(2, 2, {1, 2, 3, 4}));
  auto b = g.constant(Tensor::matrix(2, 1, {1, 1}));
  CHECK(ad::matmul(a, b).value() == Tensor::matrix(2, 1, {3, 7}));
  auto r = g.constant(Tensor::vector({10, 20}));
  CHECK(ad::add_row(a, r).value() == Tensor::matrix(2, 2, {11, 22, 13, 24}));
  CHECK(ad::mul_row(a, r).value() == Tensor::matrix(2, 2, {10, 40, 30, 80}));
  CHECK_THROWS_AS(ad::matmul(a, g.constant(Tensor::matrix(3, 1, {1, 1, 1}))), ad::ShapeError);
}

TEST_CASE("l2 normalization gives unit rows") {
  ad::Graph g;
  auto x = g.constant(Tensor::matrix(2, 2, {3, 4, 0, 2}));
  auto n = ad::l2_normalize_rows(x).value();
  CHECK(n.at(0, 0) == doctest::Approx(0.6));
  CHECK(n.at(0, 1) == doctest::Approx(0.8));
  CHECK(n.at(1, 1) == doctest::Approx(1.0));
}

TEST_CASE("embedding bag mean averages rows") {
  ad::Graph g;
  auto table = g.constant(Tensor::matrix(3, 2, {0, 0, 2, 4, 4, 8}));
  auto out = ad::embedding_bag_mean(table, {{1, 2}, {0}}).value();
  CHECK(out == Tensor::matrix(2, 2, {3, 6, 0, 0}));
}

TEST_CASE("softmax cross-entropy matches the closed form") {
  ad::Graph g;
  auto logits = g.constant(Tensor::matrix(1, 2, {0.0, std::log(3.0)}));
  const int labels[] = {1};
  CHECK(ad::softmax_cross_entropy(logits, labels).value().item() == doctest::Approx(-std::log(0.75)));
}

TEST_CASE("bce with logits is stable for large logits") {
  ad::Graph g;
  auto logits = g.constant(Tensor::vector({800.0, -800.0}));
  auto loss = ad::bce_with_logits(logits, Tensor::vector({1.0, 0.0}));
  CHECK(loss.value().item() == doctest::Approx(0.0));
  auto wrong = ad::bce_with_logits(logits, Tensor::vector({0.0, 1.0}));
  CHECK(wrong.value().item() == doctest::Approx(800.0));
  CHECK_THROWS(ad::bce_with_logits(logits, Tensor::vector({1.5, 0.0})));
}

TEST_CASE("stop_gradient blocks gradient flow") {
  ad::Parameter p("p", Tensor::vector({1.0, 2.0}));
  ad::Graph g;
  auto x = g.param(p);
  auto loss = ad::sum(ad::add(ad::square(x), ad::stop_gradient(ad::scale(x, 5.0))));
  g.backward(loss);
  CHECK(p.grad == Tensor::vector({2.0, 4.0}));
}

TEST_CASE("gradients accumulate over shared inputs") {
  ad::Parameter p("p", Tensor::scalar(3.0));
  ad::Graph g;
  auto x = g.param(p);
  g.backward(ad::mul(x, x));
  CHECK(p.grad.item() == doctest::Approx(6.0));
}

TEST_CASE("parameter gradient transform is applied unless disabled") {
  ad::Parameter p("p", Tensor::scalar(1.0));
  p.set_gradient_transform([](Tensor& gr) { gr *= 10.0; });
  {
    ad::Graph g;
    g.backward(ad::scale(g.param(p), 2.0));
    CHECK(p.grad.item() == doctest::Approx(20.0));
  }
  p.zero_grad();
  {
    ad::Graph g;
    g.backward(ad::scale(g.param(p), 2.0), ad::BackwardOptions{.apply_transforms = false});
    CHECK(p.grad.item() == doctest::Approx(2.0));
  }
}

TEST_CASE("non-finite values are rejected at the op") {
  ad::Graph g;
  auto x = g.constant(Tensor::vector({-1.0}));
  CHECK_THROWS_AS(ad::log(x), ad::NumericError);
  CHECK_THROWS_AS(ad::exp(g.constant(Tensor::vector({1000.0}))), ad::NumericError);
}

TEST_CASE("backward requires a scalar loss; grad requires backward") {
  ad::Parameter p("p", Tensor::vector({1.0, 2.0}));
  ad::Graph g;
  auto x = g.param(p);
  CHECK_THROWS(g.grad(x));
  CHECK_THROWS(g.backward(x));
}

TEST_CASE("dropout keeps expectation and is identity at rate 0") {
  std::mt19937_64 rng(1);
  ad::Graph g;
  auto x = g.constant(Tensor(ad::Shape{1, 20000}, 1.0));
  const double m = ad::mean(ad::dropout(x, 0.5, rng)).value().item();
  CHECK(m == doctest::Approx(1.0).epsilon(0.03));
  CHECK(ad::dropout(x, 0.0, rng).value() == x.value());
  CHECK_THROWS(ad::dropout(x, 1.0, rng));
}
