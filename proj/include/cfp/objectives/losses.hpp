#pragma once

#include <span>
#include <string>
#include <vector>

#include "cfp/numerics/ops.hpp"

namespace cfp::objectives {

using numerics::Reduction;
using numerics::Tape;
using numerics::Tensor;
using numerics::Var;

// L_C = sum over targets of -log softmax(logits)[target]. One logits row per
// masked position. Sum is the default; Mean divides by |Y|.
Var mlm_loss(const Var& logits, std::span<const int> targets, Reduction reduction = Reduction::Sum);

// Mean binary cross-entropy with logits over every label slot. Works for the
// single-logit interaction head and the 7-type head alike.
Var ppi_loss(const Var& logits, const Tensor& labels);

struct WeightedLoss {
  std::string name;
  Var loss;
  double alpha = 1.0;
};

// L_I = sum_tau alpha_tau * L_tau, accumulated left to right. An empty task
// list yields a constant zero on `tape`.
Var injection_loss(Tape& tape, std::span<const WeightedLoss> tasks);
// L = L_C + lambda * L_I
Var total_loss(const Var& conservation, const Var& injection, double lambda);

// Plain-double versions using the same operation order as the tape versions,
// so a report's parts reproduce the taped total bit for bit.
struct TaskValue {
  double value = 0.0;
  double alpha = 1.0;
};
double injection_loss(std::span<const TaskValue> tasks);
double total_loss(double conservation, double injection, double lambda);

}  // namespace cfp::objectives
