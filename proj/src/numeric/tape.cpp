#include "qctc/numeric/tape.hpp"

#include <stdexcept>

namespace qctc {

Var Tape::push(Node node) {
  nodes_.push_back(std::move(node));
  return Var(this, nodes_.size() - 1);
}

Var Tape::constant(Tensor value) {
  Node n;
  n.value = std::move(value);
  return push(std::move(n));
}

Var Tape::parameter(Parameter& p) {
  if (auto it = param_nodes_.find(&p); it != param_nodes_.end()) return Var(this, it->second);
  Node n;
  n.param = &p;
  n.requires_grad = record_gradients_;
  Var v = push(std::move(n));
  param_nodes_.emplace(&p, v.id());
  return v;
}

Var Tape::record(Tensor value, std::initializer_list<Var> parents, Backward backward) {
  return record(std::move(value), std::span<const Var>(parents.begin(), parents.size()),
                std::move(backward));
}

Var Tape::record(Tensor value, std::span<const Var> parents, Backward backward) {
  Node n;
  n.value = std::move(value);
  if (record_gradients_) {
    for (const Var& p : parents) {
      if (&p.tape() != this) throw std::invalid_argument("operands recorded on different tapes");
      n.requires_grad = n.requires_grad || nodes_[p.id()].requires_grad;
    }
    if (n.requires_grad) n.backward = std::move(backward);
  }
  return push(std::move(n));
}

Tensor& Tape::grad_slot(std::size_t id) {
  Node& n = nodes_[id];
  const Tensor& v = value(id);
  if (!n.grad.same_shape(v)) n.grad = Tensor(v.rows(), v.cols());
  return n.grad;
}

void Tape::accumulate(std::size_t id, const Tensor& g) {
  if (!nodes_[id].requires_grad) return;
  grad_slot(id).accumulate(g);
}

void Tape::backward(Var loss) {
  if (!record_gradients_) throw std::logic_error("backward on a tape that does not record gradients");
  if (loss.value().size() != 1) throw std::invalid_argument("backward expects a scalar loss");
  grad_slot(loss.id()).fill(1.0);
  for (std::size_t id = loss.id() + 1; id-- > 0;) {
    Node& n = nodes_[id];
    if (!n.requires_grad || !n.backward || n.grad.empty()) continue;
    n.backward(*this, id);
  }
}

void Tape::flush_parameter_grads() const {
  for (const auto& [param, id] : param_nodes_) {
    const Node& n = nodes_[id];
    if (!n.grad.empty()) n.param->grad.accumulate(n.grad);
  }
}

}  // namespace qctc
