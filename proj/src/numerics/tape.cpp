#include "cfp/numerics/tape.hpp"

#include "cfp/errors.hpp"

namespace cfp::numerics {

Tape& Var::tape() const {
  if (!tape_) throw ContractError("use of an unbound Var");
  return *tape_;
}

const Tensor& Var::value() const { return tape().value(id_); }
const Shape& Var::shape() const { return value().shape(); }
bool Var::requires_grad() const { return tape().requires_grad(id_); }

Tensor Var::grad() const {
  const Tape& t = tape();
  if (t.has_grad(id_)) return t.grad(id_);
  return Tensor(value().shape());
}

Var Tape::leaf(Tensor value, bool requires_grad) {
  if (!all_finite(value.data())) throw NumericError("leaf tensor contains NaN/Inf");
  Node node;
  node.value = std::move(value);
  node.requires_grad = requires_grad;
  nodes_.push_back(std::move(node));
  return Var(this, nodes_.size() - 1);
}

Var Tape::record(const char* op, Tensor value, std::vector<std::size_t> inputs, BackwardFn backward) {
  if (!all_finite(value.data())) {
    throw NumericError(std::string(op) + " produced NaN/Inf (output shape " + shape_to_string(value.shape()) + ")");
  }
  bool needs = false;
  for (std::size_t in : inputs) {
    if (in >= nodes_.size()) throw ContractError(std::string(op) + ": input from another tape");
    needs = needs || nodes_[in].requires_grad;
  }
  Node node;
  node.value = std::move(value);
  node.requires_grad = needs;
  node.inputs = std::move(inputs);
  if (needs) node.backward = std::move(backward);
  nodes_.push_back(std::move(node));
  return Var(this, nodes_.size() - 1);
}

const Tensor& Tape::grad(std::size_t id) const {
  const Node& n = nodes_.at(id);
  if (!n.has_grad) throw ContractError("node has no gradient");
  return n.grad;
}

Tensor* Tape::grad_of(std::size_t id) {
  Node& n = nodes_.at(id);
  if (!n.requires_grad) return nullptr;
  if (!n.has_grad) {
    n.grad = Tensor(n.value.shape());
    n.has_grad = true;
  }
  return &n.grad;
}

void Tape::backward(const Var& loss) {
  if (&loss.tape() != this) throw ContractError("backward: loss belongs to another tape");
  const std::size_t root = loss.id();
  if (nodes_.at(root).value.size() != 1) {
    throw ContractError("backward: loss must be scalar, got shape " + shape_to_string(nodes_[root].value.shape()));
  }
  for (Node& n : nodes_) {
    n.has_grad = false;
    n.grad = Tensor();
  }
  if (!nodes_[root].requires_grad) return;
  Tensor* seed = grad_of(root);
  (*seed)[0] = 1.0;
  for (std::size_t i = root + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (!n.has_grad || !n.backward) continue;
    n.backward(*this, i);
  }
}

}  // namespace cfp::numerics
