#pragma once

#include <cstddef>
#include <deque>
#include <functional>
#include <initializer_list>
#include <span>
#include <unordered_map>

#include "qctc/numeric/parameter.hpp"
#include "qctc/numeric/tensor.hpp"

namespace qctc {

class Tape;

// Handle to a value recorded on a tape. Cheap to copy; only valid while the
// owning tape is alive.
class Var {
 public:
  Var() = default;

  const Tensor& value() const;
  std::size_t rows() const { return value().rows(); }
  std::size_t cols() const { return value().cols(); }
  Tape& tape() const { return *tape_; }
  std::size_t id() const { return id_; }
  bool valid() const { return tape_ != nullptr; }

 private:
  friend class Tape;
  Var(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}

  Tape* tape_ = nullptr;
  std::size_t id_ = 0;
};

// Reverse-mode recording of one forward pass. Each op appends a node holding
// its value and a closure that pushes the node's gradient into its parents.
// A tape is single-threaded; independent tapes may run concurrently.
class Tape {
 public:
  using Backward = std::function<void(Tape&, std::size_t self)>;

  explicit Tape(bool record_gradients = true) : record_gradients_(record_gradients) {}
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var constant(Tensor value);
  // Leaf bound to a parameter. Repeated calls for the same parameter return
  // the same node. The leaf reads the parameter's storage directly, so
  // parameters must not change while the tape is alive.
  Var parameter(Parameter& p);
  Var record(Tensor value, std::initializer_list<Var> parents, Backward backward);
  Var record(Tensor value, std::span<const Var> parents, Backward backward);

  const Tensor& value(std::size_t id) const {
    const Node& n = nodes_[id];
    return n.param ? n.param->value : n.value;
  }
  bool requires_grad(std::size_t id) const { return nodes_[id].requires_grad; }
  // Gradient of the node; empty tensor if nothing flowed into it.
  const Tensor& grad(std::size_t id) const { return nodes_[id].grad; }
  // Zero-initialised gradient slot; callers add into it.
  Tensor& grad_slot(std::size_t id);
  void accumulate(std::size_t id, const Tensor& g);

  // Seeds d(loss)/d(loss) = 1 and runs every recorded closure in reverse.
  void backward(Var loss);
  // Adds the gradients collected at parameter leaves into Parameter::grad.
  void flush_parameter_grads() const;

  std::size_t node_count() const { return nodes_.size(); }
  bool recording() const { return record_gradients_; }

 private:
  struct Node {
    Tensor value;  // unused for parameter leaves
    Tensor grad;
    Backward backward;
    Parameter* param = nullptr;
    bool requires_grad = false;
  };

  Var push(Node node);

  bool record_gradients_;
  std::deque<Node> nodes_;
  std::unordered_map<const Parameter*, std::size_t> param_nodes_;
};

inline const Tensor& Var::value() const { return tape_->value(id_); }

}  // namespace qctc
