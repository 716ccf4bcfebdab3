#include "cfp/objectives/trainer.hpp"

#include <cmath>
#include <sstream>

#include "cfp/errors.hpp"
#include "cfp/model/heads.hpp"

namespace cfp::objectives {

namespace ops = numerics;
using model::Binding;
using model::EncoderOutput;

double LossReport::recompute_total() const {
  std::vector<TaskValue> values;
  values.reserve(tasks.size());
  for (const TaskLoss& t : tasks) values.push_back({t.value, t.alpha});
  return total_loss(has_conservation ? conservation : 0.0, injection_loss(values), lambda);
}

const TaskLoss* LossReport::task(const std::string& name) const {
  for (const TaskLoss& t : tasks) {
    if (t.name == name) return &t;
  }
  return nullptr;
}

std::string task_name(const TokenClassStepBatch& batch) { return batch.classes == 8 ? "ss8" : "ss3"; }

namespace {

// "head.<task>.<w|b>" -> "<task>"
std::string head_task(const std::string& name) {
  const std::size_t first = name.find('.');
  const std::size_t second = name.find('.', first + 1);
  return name.substr(first + 1, second - first - 1);
}

double alpha_for(const model::ModelConfig& cfg, const std::string& task) {
  const auto it = cfg.alpha.find(task);
  return it == cfg.alpha.end() ? 1.0 : it->second;
}

Var conservation_term(Binding& b, const MlmStepBatch& batch, std::size_t& target_count) {
  std::vector<Var> rows;
  std::vector<int> targets;
  for (const auto& item : batch.items) {
    if (item.positions.empty()) continue;
    const EncoderOutput out = model::encode(b, item.corrupted, batch.prompts);
    std::vector<std::size_t> picks;
    picks.reserve(item.positions.size());
    for (std::size_t pos : item.positions) picks.push_back(out.m + pos);
    rows.push_back(ops::gather_rows(out.hidden, picks));
    targets.insert(targets.end(), item.targets.begin(), item.targets.end());
  }
  target_count = targets.size();
  if (targets.empty()) return {};
  const Var hidden = rows.size() == 1 ? rows.front() : ops::concat_rows(rows);
  return mlm_loss(model::mlm_logits(b, hidden), targets, batch.reduction);
}

Var pair_term(Binding& b, const PairStepBatch& batch) {
  if (batch.pairs.empty()) throw ContractError("ppi batch without pairs");
  const std::size_t width = b.model().config().ppi_labels;
  std::vector<Var> pooled(batch.proteins.size());
  std::vector<Var> logits;
  Tensor labels({batch.pairs.size(), width});
  for (std::size_t k = 0; k < batch.pairs.size(); ++k) {
    const PairExample& ex = batch.pairs[k];
    if (ex.p >= batch.proteins.size() || ex.q >= batch.proteins.size()) throw ContractError("pair index out of range");
    if (ex.labels.size() != width) {
      throw DataError("pair label width " + std::to_string(ex.labels.size()) + " does not match head width " +
                      std::to_string(width));
    }
    for (std::size_t idx : {ex.p, ex.q}) {
      if (!pooled[idx].valid()) pooled[idx] = model::pool(model::encode(b, batch.proteins[idx], batch.prompts));
    }
    logits.push_back(model::pair_score(b, pooled[ex.p], pooled[ex.q]));
    for (std::size_t c = 0; c < width; ++c) labels(k, c) = ex.labels[c];
  }
  return ppi_loss(logits.size() == 1 ? logits.front() : ops::concat_rows(logits), labels);
}

Var contact_term(Binding& b, const ContactStepBatch& batch) {
  if (batch.items.empty()) throw ContractError("contact batch without examples");
  std::vector<Var> flat;
  std::vector<double> labels;
  for (const ContactExample& ex : batch.items) {
    const std::size_t n = ex.seq.residue_count();
    if (ex.bits.size() != n * n) throw DataError("contact map size does not match sequence " + ex.seq.source_id);
    const Var logits = model::contact_logits(b, model::encode(b, ex.seq, batch.prompts));
    flat.push_back(ops::reshape(logits, {1, n * n}));
    labels.insert(labels.end(), ex.bits.begin(), ex.bits.end());
  }
  const Var all = flat.size() == 1 ? flat.front() : ops::concat_cols(flat);
  const std::size_t count = labels.size();
  return ops::bce_with_logits(all, Tensor({1, count}, std::move(labels)));
}

Var token_class_term(Binding& b, const TokenClassStepBatch& batch) {
  if (batch.items.empty()) throw ContractError("secondary-structure batch without examples");
  std::vector<Var> rows;
  std::vector<int> labels;
  for (const TokenClassExample& ex : batch.items) {
    if (ex.labels.size() != ex.seq.residue_count()) {
      throw DataError("label count does not match residue count for " + ex.seq.source_id);
    }
    rows.push_back(model::token_classify(b, model::encode(b, ex.seq, batch.prompts), batch.classes));
    labels.insert(labels.end(), ex.labels.begin(), ex.labels.end());
  }
  return ops::softmax_cross_entropy(rows.size() == 1 ? rows.front() : ops::concat_rows(rows), labels,
                                    Reduction::Mean);
}

Var regress_term(Binding& b, const RegressStepBatch& batch) {
  if (batch.items.empty()) throw ContractError("regression batch without examples");
  std::vector<Var> preds;
  std::vector<double> targets;
  for (const RegressExample& ex : batch.items) {
    preds.push_back(model::sequence_regress(b, model::pool(model::encode(b, ex.seq, batch.prompts))));
    targets.push_back(ex.target);
  }
  const Var pred = preds.size() == 1 ? preds.front() : ops::concat_rows(preds);
  const std::size_t count = targets.size();
  const Var truth = b.tape().constant(Tensor({count, 1}, std::move(targets)));
  const Var diff = ops::sub(pred, truth);
  return ops::scale(ops::sum(ops::mul(diff, diff)), 1.0 / static_cast<double>(batch.items.size()));
}

}  // namespace

ForwardPass::ForwardPass(const model::Model& model, const RoutingPolicy& policy)
    : model_(model), policy_(policy), tape_(std::make_unique<numerics::Tape>()) {}

bool ForwardPass::trainable(const std::string& loss, const model::Parameter& p) const {
  switch (p.group) {
    case model::ParamGroup::Encoder:
      return policy_.encoder_trainable(loss);
    case model::ParamGroup::Prompt:
      return policy_.prompt_trainable(model_.config(), p.name.substr(std::string("prompt.").size()), loss);
    case model::ParamGroup::Head: {
      const std::string task = head_task(p.name);
      return task == loss && !policy_.frozen_heads.contains(task);
    }
  }
  return false;
}

Binding& ForwardPass::binding(const std::string& loss) {
  for (auto& [name, b] : bindings_) {
    if (name == loss) return *b;
  }
  auto b = std::make_unique<Binding>(*tape_, model_,
                                     [this, loss](const model::Parameter& p) { return trainable(loss, p); });
  bindings_.emplace_back(loss, std::move(b));
  return *bindings_.back().second;
}

Objective forward_objective(ForwardPass& pass, const model::Model& model, const StepBatches& batches) {
  if (batches.empty()) throw ContractError("train_step needs at least one task batch");
  const model::ModelConfig& cfg = model.config();
  Objective obj;
  obj.report.lambda = cfg.lambda;

  if (batches.mlm) {
    std::size_t count = 0;
    obj.conservation = conservation_term(pass.binding(kConservationLoss), *batches.mlm, count);
    obj.report.has_conservation = obj.conservation.valid();
  }
  if (!obj.conservation.valid()) obj.conservation = pass.tape().constant(Tensor::scalar(0.0));

  auto add_task = [&](const std::string& name, Var loss) {
    obj.tasks.push_back({name, loss, alpha_for(cfg, name)});
  };
  if (batches.ppi) add_task("ppi", pair_term(pass.binding("ppi"), *batches.ppi));
  if (batches.contact) add_task("contact", contact_term(pass.binding("contact"), *batches.contact));
  if (batches.ss) {
    const std::string name = task_name(*batches.ss);
    add_task(name, token_class_term(pass.binding(name), *batches.ss));
  }
  if (batches.regress) add_task("regress", regress_term(pass.binding("regress"), *batches.regress));

  obj.injection = injection_loss(pass.tape(), obj.tasks);
  obj.total = total_loss(obj.conservation, obj.injection, cfg.lambda);

  obj.report.conservation = obj.conservation.value().item();
  for (const WeightedLoss& t : obj.tasks) obj.report.tasks.push_back({t.name, t.loss.value().item(), t.alpha});
  obj.report.injection = obj.injection.value().item();
  obj.report.total = obj.total.value().item();
  return obj;
}

std::map<std::string, numerics::Tensor> collect_gradients(const ForwardPass& pass) {
  std::map<std::string, numerics::Tensor> grads;
  for (const auto& [loss, binding] : pass.bindings()) {
    for (const auto& [name, var] : binding->bound()) {
      if (!var.requires_grad()) continue;
      const Tensor g = var.grad();
      auto it = grads.find(name);
      if (it == grads.end()) {
        grads.emplace(name, g);
      } else {
        for (std::size_t i = 0; i < g.size(); ++i) it->second[i] += g[i];
      }
    }
  }
  return grads;
}

namespace {

void check_finite(const LossReport& r) {
  if (std::isfinite(r.total)) return;
  std::ostringstream msg;
  msg << "non-finite loss at step " << r.step << ": L_C=" << r.conservation;
  for (const TaskLoss& t : r.tasks) msg << " L_" << t.name << "=" << t.value;
  msg << " L=" << r.total;
  throw NumericError(msg.str());
}

}  // namespace

LossReport train_step(const StepBatches& batches, model::Model& model, const RoutingPolicy& policy, Adam& optimizer) {
  std::map<std::string, numerics::Tensor> grads;
  LossReport report;
  {
    ForwardPass pass(model, policy);
    Objective obj;
    try {
      obj = forward_objective(pass, model, batches);
    } catch (const NumericError& e) {
      throw NumericError(std::string("forward pass at step ") + std::to_string(optimizer.steps() + 1) + ": " +
                         e.what());
    }
    report = obj.report;
    report.step = optimizer.steps() + 1;
    check_finite(report);
    pass.tape().backward(obj.total);
    grads = collect_gradients(pass);
  }
  optimizer.step(model, grads);
  return report;
}

LossReport evaluate_objective(const StepBatches& batches, const model::Model& model, const RoutingPolicy& policy) {
  ForwardPass pass(model, policy);
  return forward_objective(pass, model, batches).report;
}

numerics::Tensor routed_gradient(const StepBatches& batches, const model::Model& model, const RoutingPolicy& policy,
                                 const std::string& loss, const std::string& parameter) {
  ForwardPass pass(model, policy);
  const Objective obj = forward_objective(pass, model, batches);
  Var target;
  if (loss == kConservationLoss) {
    target = obj.conservation;
  } else {
    for (const WeightedLoss& t : obj.tasks) {
      if (t.name == loss) target = t.loss;
    }
  }
  if (!target.valid()) throw LookupError("no loss named '" + loss + "' in this step");
  numerics::Tensor g(model.value(parameter).shape());
  if (!target.requires_grad()) return g;
  pass.tape().backward(target);
  for (const auto& [name, binding] : pass.bindings()) {
    for (const auto& [bound_name, var] : binding->bound()) {
      if (bound_name != parameter || !var.requires_grad()) continue;
      const Tensor part = var.grad();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += part[i];
    }
  }
  return g;
}

}  // namespace cfp::objectives
