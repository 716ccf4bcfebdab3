#include "cfp/objectives/adam.hpp"

#include <algorithm>
#include <cmath>

#include "cfp/errors.hpp"

namespace cfp::objectives {

void AdamConfig::validate() const {
  if (!(lr > 0.0 && lr <= 1.0)) throw ConfigError("optim.lr must lie in (0, 1]");
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) {
    throw ConfigError("optim.beta1/beta2 must lie in [0, 1)");
  }
  if (!(eps > 0.0)) throw ConfigError("optim.eps must be positive");
}

Adam::Adam(AdamConfig config) : config_(config) { config_.validate(); }

double Adam::learning_rate() const {
  if (config_.warmup == 0) return config_.lr;
  const double progress = static_cast<double>(steps_ + 1) / static_cast<double>(config_.warmup);
  return config_.lr * std::min(1.0, progress);
}

void Adam::step(model::Model& model, const std::map<std::string, numerics::Tensor>& grads) {
  const double lr = learning_rate();
  for (auto& p : model.parameters()) {
    const auto it = grads.find(p.name);
    if (it == grads.end()) continue;
    const numerics::Tensor& g = it->second;
    if (g.shape() != p.value.shape()) throw ShapeError("adam: gradient shape mismatch for " + p.name);
    Slot& s = slots_[p.name];
    if (s.m.empty() && !p.value.empty()) {
      s.m = numerics::Tensor(p.value.shape());
      s.v = numerics::Tensor(p.value.shape());
    }
    ++s.t;
    const double c1 = 1.0 - std::pow(config_.beta1, static_cast<double>(s.t));
    const double c2 = 1.0 - std::pow(config_.beta2, static_cast<double>(s.t));
    for (std::size_t i = 0; i < g.size(); ++i) {
      s.m[i] = config_.beta1 * s.m[i] + (1.0 - config_.beta1) * g[i];
      s.v[i] = config_.beta2 * s.v[i] + (1.0 - config_.beta2) * g[i] * g[i];
      const double mhat = s.m[i] / c1;
      const double vhat = s.v[i] / c2;
      p.value[i] -= lr * mhat / (std::sqrt(vhat) + config_.eps);
    }
    if (!numerics::all_finite(p.value.data())) throw NumericError("adam: parameter " + p.name + " became non-finite");
  }
  ++steps_;
}

void Adam::save(model::Checkpoint& ckpt, const model::Model& model) const {
  for (const auto& p : model.parameters()) {
    const auto it = slots_.find(p.name);
    if (it == slots_.end()) continue;
    ckpt.tensors.push_back({"adam.m." + p.name, it->second.m});
    ckpt.tensors.push_back({"adam.v." + p.name, it->second.v});
    ckpt.tensors.push_back({"adam.t." + p.name, numerics::Tensor::scalar(static_cast<double>(it->second.t))});
  }
}

void Adam::load(const model::Checkpoint& ckpt, const model::Model& model) {
  slots_.clear();
  steps_ = ckpt.step;
  for (const auto& p : model.parameters()) {
    const numerics::Tensor* m = ckpt.find("adam.m." + p.name);
    const numerics::Tensor* v = ckpt.find("adam.v." + p.name);
    const numerics::Tensor* t = ckpt.find("adam.t." + p.name);
    if (!m && !v && !t) continue;
    if (!m || !v || !t || m->shape() != p.value.shape() || v->shape() != p.value.shape() || t->size() != 1) {
      throw FormatError("checkpoint optimizer state for " + p.name + " is incomplete or misshapen");
    }
    slots_[p.name] = Slot{*m, *v, static_cast<std::uint64_t>(t->item())};
  }
}

}  // namespace cfp::objectives
