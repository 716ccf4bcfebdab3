#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "cfp/numerics/tensor.hpp"

namespace cfp::numerics {

class Tape;

// Handle to one node on a Tape. Cheap to copy; valid while the Tape lives.
class Var {
 public:
  Var() = default;
  Var(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}

  [[nodiscard]] Tape& tape() const;
  [[nodiscard]] std::size_t id() const noexcept { return id_; }
  [[nodiscard]] bool valid() const noexcept { return tape_ != nullptr; }

  [[nodiscard]] const Tensor& value() const;
  [[nodiscard]] const Shape& shape() const;
  [[nodiscard]] bool requires_grad() const;
  // Gradient after Tape::backward. Nodes that received no contribution report
  // an all-zero tensor of the node's shape.
  [[nodiscard]] Tensor grad() const;

 private:
  Tape* tape_ = nullptr;
  std::size_t id_ = 0;
};

// Reverse-mode tape. Nodes are appended in evaluation order, so every node's
// inputs precede it; backward walks the list once in reverse.
class Tape {
 public:
  // Called during backward with the node's own id. Implementations read
  // input values via value() and push contributions via grad_of().
  using BackwardFn = std::function<void(Tape&, std::size_t self)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var leaf(Tensor value, bool requires_grad);
  Var constant(Tensor value) { return leaf(std::move(value), false); }

  // Records the output of a primitive. `op` names the primitive for error
  // messages; the value must be finite or NumericError is thrown.
  Var record(const char* op, Tensor value, std::vector<std::size_t> inputs, BackwardFn backward);

  // Seeds d(loss)=1 and propagates. Gradient buffers from any previous call
  // are cleared first, so repeated calls are idempotent.
  void backward(const Var& loss);

  [[nodiscard]] std::size_t size() const noexcept { return nodes_.size(); }
  [[nodiscard]] const Tensor& value(std::size_t id) const { return nodes_.at(id).value; }
  [[nodiscard]] bool requires_grad(std::size_t id) const { return nodes_.at(id).requires_grad; }
  [[nodiscard]] const std::vector<std::size_t>& inputs(std::size_t id) const { return nodes_.at(id).inputs; }

  // Gradient of node `id` accumulated so far (valid inside BackwardFn for the
  // node being processed, and for every node once backward returns).
  [[nodiscard]] const Tensor& grad(std::size_t id) const;
  [[nodiscard]] bool has_grad(std::size_t id) const { return nodes_.at(id).has_grad; }

  // Mutable gradient buffer of an input, zero-initialised on first touch.
  // Returns nullptr when the node does not require a gradient.
  Tensor* grad_of(std::size_t id);

 private:
  struct Node {
    Tensor value;
    Tensor grad;
    bool requires_grad = false;
    bool has_grad = false;
    std::vector<std::size_t> inputs;
    BackwardFn backward;
  };
  std::vector<Node> nodes_;
};

}  // namespace cfp::numerics
