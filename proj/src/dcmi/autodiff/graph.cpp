#include "dcmi/autodiff/graph.hpp"

#include <stdexcept>

namespace dcmi::ad {

Parameter::Parameter(std::string name, Tensor init)
    : value(std::move(init)), name_(std::move(name)) {
  grad = Tensor::zeros_like(value);
}

Graph& Var::graph() const {
  if (!graph_) throw std::logic_error("use of an unbound Var");
  return *graph_;
}

const Tensor& Var::value() const { return graph().value(*this); }

bool Var::requires_grad() const { return graph().requires_grad(*this); }

void Graph::check_owned(const Var& v) const {
  if (!v.valid() || &v.graph() != this || v.id() >= nodes_.size()) {
    throw std::logic_error("Var does not belong to this graph");
  }
}

Var Graph::constant(Tensor value) {
  if (!value.all_finite()) throw NumericError("non-finite constant");
  nodes_.push_back(Node{std::move(value), false, nullptr, {}});
  return {this, nodes_.size() - 1};
}

Var Graph::param(Parameter& p) {
  if (!p.value.all_finite()) throw NumericError("parameter '" + p.name() + "' is not finite");
  nodes_.push_back(Node{p.value, true, &p, {}});
  return {this, nodes_.size() - 1};
}

Var Graph::record(const char* op, Tensor value, std::vector<Var> inputs, BackwardFn backward) {
  if (!value.all_finite()) {
    throw NumericError(std::string("non-finite value produced by '") + op + "'");
  }
  bool needs = false;
  for (const auto& in : inputs) {
    check_owned(in);
    needs = needs || nodes_[in.id()].requires_grad;
  }
  nodes_.push_back(Node{std::move(value), needs, nullptr, needs ? std::move(backward) : BackwardFn{}});
  return {this, nodes_.size() - 1};
}

void Graph::accumulate(const Var& target, const Tensor& grad) {
  check_owned(target);
  auto& node = nodes_[target.id()];
  if (!node.requires_grad) return;
  auto& slot = grads_[target.id()];
  if (slot.empty()) {
    if (!grad.same_shape(node.value)) {
      throw ShapeError("gradient " + shape_string(grad.shape()) + " for node of shape " +
                       shape_string(node.value.shape()));
    }
    slot = grad;
  } else {
    slot += grad;
  }
}

void Graph::backward(const Var& loss, BackwardOptions options) {
  check_owned(loss);
  const auto& out = nodes_[loss.id()].value;
  if (out.size() != 1) {
    throw std::invalid_argument("backward requires a scalar loss, got shape " +
                                shape_string(out.shape()));
  }
  grads_.assign(nodes_.size(), Tensor{});
  backward_done_ = true;
  if (!nodes_[loss.id()].requires_grad) return;
  grads_[loss.id()] = Tensor(out.shape(), 1.0);

  for (std::size_t i = loss.id() + 1; i-- > 0;) {
    auto& node = nodes_[i];
    if (!node.requires_grad || grads_[i].empty()) continue;
    if (node.parameter) {
      Tensor g = grads_[i];
      if (options.apply_transforms && node.parameter->gradient_transform()) {
        node.parameter->gradient_transform()(g);
        if (!g.same_shape(node.value)) {
          throw ShapeError("gradient transform changed the shape of '" + node.parameter->name() + "'");
        }
      }
      node.parameter->grad += g;
    } else if (node.backward) {
      node.backward(*this, grads_[i]);
    }
  }
}

const Tensor& Graph::value(const Var& v) const {
  check_owned(v);
  return nodes_[v.id()].value;
}

bool Graph::requires_grad(const Var& v) const {
  check_owned(v);
  return nodes_[v.id()].requires_grad;
}

Tensor Graph::grad(const Var& v) const {
  check_owned(v);
  if (!backward_done_) throw std::logic_error("grad() requested before backward()");
  const auto& g = grads_[v.id()];
  return g.empty() ? Tensor::zeros_like(nodes_[v.id()].value) : g;
}

}  // namespace dcmi::ad
