#include "cfp/objectives/losses.hpp"

#include "cfp/errors.hpp"

namespace cfp::objectives {

namespace ops = numerics;

Var mlm_loss(const Var& logits, std::span<const int> targets, Reduction reduction) {
  if (targets.empty()) throw ContractError("mlm_loss: the masked set Y is empty");
  return ops::softmax_cross_entropy(logits, targets, reduction);
}

Var ppi_loss(const Var& logits, const Tensor& labels) { return ops::bce_with_logits(logits, labels); }

Var injection_loss(Tape& tape, std::span<const WeightedLoss> tasks) {
  if (tasks.empty()) return tape.constant(Tensor::scalar(0.0));
  Var acc;
  for (const WeightedLoss& t : tasks) {
    if (t.alpha < 0.0) throw ConfigError("alpha for task " + t.name + " must be nonnegative");
    const Var term = ops::scale(t.loss, t.alpha);
    acc = acc.valid() ? ops::add(acc, term) : term;
  }
  return acc;
}

Var total_loss(const Var& conservation, const Var& injection, double lambda) {
  if (lambda < 0.0) throw ConfigError("lambda must be nonnegative");
  return ops::add(conservation, ops::scale(injection, lambda));
}

double injection_loss(std::span<const TaskValue> tasks) {
  double acc = 0.0;
  bool first = true;
  for (const TaskValue& t : tasks) {
    if (t.alpha < 0.0) throw ConfigError("alpha must be nonnegative");
    const double term = t.value * t.alpha;
    acc = first ? term : acc + term;
    first = false;
  }
  return acc;
}

double total_loss(double conservation, double injection, double lambda) {
  if (lambda < 0.0) throw ConfigError("lambda must be nonnegative");
  return conservation + injection * lambda;
}

}  // namespace cfp::objectives
