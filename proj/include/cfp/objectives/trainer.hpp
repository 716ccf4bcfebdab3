#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "cfp/model/encoder.hpp"
#include "cfp/objectives/adam.hpp"
#include "cfp/objectives/losses.hpp"
#include "cfp/objectives/routing.hpp"
#include "cfp/tokenizer/mlm.hpp"

namespace cfp::objectives {

using model::PromptSelection;
using tokenizer::TokenSequence;

// Knowledge-conservation batch: already corrupted sequences.
struct MlmStepBatch {
  std::vector<tokenizer::MlmBatch> items;
  Reduction reduction = Reduction::Sum;
  PromptSelection prompts = {"Seq", "IC"};
};

struct PairExample {
  std::size_t p = 0;  // indices into PairStepBatch::proteins
  std::size_t q = 0;
  std::vector<double> labels;
};

// Pair task ("ppi"): proteins are encoded once per pass and pooled.
struct PairStepBatch {
  std::vector<TokenSequence> proteins;
  std::vector<PairExample> pairs;
  PromptSelection prompts = {"Seq", "IC"};
};

struct ContactExample {
  TokenSequence seq;
  std::vector<std::uint8_t> bits;  // residue_count^2, row-major
};

struct ContactStepBatch {
  std::vector<ContactExample> items;
  PromptSelection prompts;
};

struct TokenClassExample {
  TokenSequence seq;
  std::vector<int> labels;  // one per residue
};

// "ss3" or "ss8"
struct TokenClassStepBatch {
  std::size_t classes = 3;
  std::vector<TokenClassExample> items;
  PromptSelection prompts;
};

struct RegressExample {
  TokenSequence seq;
  double target = 0.0;
};

struct RegressStepBatch {
  std::vector<RegressExample> items;
  PromptSelection prompts;
};

// One step's worth of data. Injection tasks are forwarded in the fixed order
// ppi, contact, ss, regress.
struct StepBatches {
  std::optional<MlmStepBatch> mlm;
  std::optional<PairStepBatch> ppi;
  std::optional<ContactStepBatch> contact;
  std::optional<TokenClassStepBatch> ss;
  std::optional<RegressStepBatch> regress;

  [[nodiscard]] bool empty() const noexcept { return !mlm && !ppi && !contact && !ss && !regress; }
};

struct TaskLoss {
  std::string name;
  double value = 0.0;
  double alpha = 1.0;
};

struct LossReport {
  std::uint64_t step = 0;
  bool has_conservation = false;
  double conservation = 0.0;
  std::vector<TaskLoss> tasks;
  double injection = 0.0;
  double total = 0.0;
  double lambda = 1.0;

  // L_C + lambda * sum alpha * L_tau from the stored parts.
  [[nodiscard]] double recompute_total() const;
  [[nodiscard]] const TaskLoss* task(const std::string& name) const;
};

std::string task_name(const TokenClassStepBatch& batch);

// Forward state for one step: owns the tape and one parameter binding per
// task, each built with that task's routing predicate.
class ForwardPass {
 public:
  ForwardPass(const model::Model& model, const RoutingPolicy& policy);
  ForwardPass(const ForwardPass&) = delete;
  ForwardPass& operator=(const ForwardPass&) = delete;

  [[nodiscard]] numerics::Tape& tape() noexcept { return *tape_; }
  // Binding for `loss`, created on first request.
  model::Binding& binding(const std::string& loss);
  [[nodiscard]] const std::vector<std::pair<std::string, std::unique_ptr<model::Binding>>>& bindings() const {
    return bindings_;
  }
  [[nodiscard]] bool trainable(const std::string& loss, const model::Parameter& p) const;

 private:
  const model::Model& model_;
  const RoutingPolicy& policy_;
  std::unique_ptr<numerics::Tape> tape_;
  std::vector<std::pair<std::string, std::unique_ptr<model::Binding>>> bindings_;
};

struct Objective {
  Var total;
  Var conservation;
  std::vector<WeightedLoss> tasks;
  Var injection;
  LossReport report;
};

// Builds L = L_C + lambda * L_I on the pass's tape.
Objective forward_objective(ForwardPass& pass, const model::Model& model, const StepBatches& batches);

// After backward on `total`: per-parameter gradients summed across task
// bindings in creation order. Parameters no binding trained are absent.
std::map<std::string, numerics::Tensor> collect_gradients(const ForwardPass& pass);

// Forward all tasks, backward, one Adam update. Throws NumericError (with
// the offending parts) when the loss is not finite.
LossReport train_step(const StepBatches& batches, model::Model& model, const RoutingPolicy& policy, Adam& optimizer);

// Loss values without any update.
LossReport evaluate_objective(const StepBatches& batches, const model::Model& model, const RoutingPolicy& policy);

// Per-task gradient of one named loss with respect to a parameter, taken on
// the routed tape (zero when the routing makes it a constant there).
numerics::Tensor routed_gradient(const StepBatches& batches, const model::Model& model, const RoutingPolicy& policy,
                                 const std::string& loss, const std::string& parameter);

}  // namespace cfp::objectives
