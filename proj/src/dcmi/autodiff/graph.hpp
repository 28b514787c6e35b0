#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "dcmi/autodiff/tensor.hpp"

namespace dcmi::ad {

// Applied in place to an incoming parameter gradient before it is accumulated.
// Must preserve shape.
using GradientTransform = std::function<void(Tensor& grad)>;

// A trainable tensor with its gradient slot. Owned by the model; graphs only
// hold pointers, so a Parameter must outlive every graph that references it.
class Parameter {
 public:
  Parameter(std::string name, Tensor init);

  const std::string& name() const { return name_; }
  Tensor value;
  Tensor grad;

  void zero_grad() { grad.fill(0.0); }
  void set_gradient_transform(GradientTransform transform) { transform_ = std::move(transform); }
  const GradientTransform& gradient_transform() const { return transform_; }

 private:
  std::string name_;
  GradientTransform transform_;
};

class Graph;

// Handle to a node of a Graph. Cheap to copy; valid while the graph lives.
class Var {
 public:
  Var() = default;
  Var(Graph* graph, std::size_t id) : graph_(graph), id_(id) {}

  bool valid() const { return graph_ != nullptr; }
  Graph& graph() const;
  std::size_t id() const { return id_; }
  const Tensor& value() const;
  const Shape& shape() const { return value().shape(); }
  bool requires_grad() const;

 private:
  Graph* graph_ = nullptr;
  std::size_t id_ = 0;
};

struct BackwardOptions {
  bool apply_transforms = true;
};

// Define-by-run tape. Nodes are appended in creation order, which is a
// topological order, so backward is a single reverse sweep.
class Graph {
 public:
  using BackwardFn = std::function<void(Graph&, const Tensor& grad_out)>;

  Graph() = default;
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  Var constant(Tensor value);
  Var param(Parameter& p);

  // Records an operation node. `backward` receives the node's output gradient
  // and calls accumulate() on the inputs. Throws NumericError when the value
  // is not finite.
  Var record(const char* op, Tensor value, std::vector<Var> inputs, BackwardFn backward);

  void accumulate(const Var& target, const Tensor& grad);

  void backward(const Var& loss, BackwardOptions options = {});

  const Tensor& value(const Var& v) const;
  bool requires_grad(const Var& v) const;
  // Gradient of the last backward pass w.r.t. any node; zero if unreached.
  Tensor grad(const Var& v) const;
  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Tensor value;
    bool requires_grad = false;
    Parameter* parameter = nullptr;
    BackwardFn backward;
  };

  void check_owned(const Var& v) const;

  std::vector<Node> nodes_;
  std::vector<Tensor> grads_;
  bool backward_done_ = false;
};

}  // namespace dcmi::ad
