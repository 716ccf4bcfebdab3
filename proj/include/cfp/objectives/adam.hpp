#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "cfp/model/checkpoint.hpp"
#include "cfp/model/model.hpp"

namespace cfp::objectives {

struct AdamConfig {
  double lr = 1e-5;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  // Linear warmup over this many updates; 0 keeps the rate constant.
  std::size_t warmup = 0;

  void validate() const;
};

// Adam without weight decay. Moments and the per-parameter step count are
// kept by name; parameters absent from a gradient map are not touched.
class Adam {
 public:
  explicit Adam(AdamConfig config = {});

  void step(model::Model& model, const std::map<std::string, numerics::Tensor>& grads);

  [[nodiscard]] std::uint64_t steps() const noexcept { return steps_; }
  [[nodiscard]] double learning_rate() const;
  [[nodiscard]] const AdamConfig& config() const noexcept { return config_; }

  // "adam.m.<p>", "adam.v.<p>", "adam.t.<p>" entries in model order.
  void save(model::Checkpoint& ckpt, const model::Model& model) const;
  void load(const model::Checkpoint& ckpt, const model::Model& model);

 private:
  struct Slot {
    numerics::Tensor m;
    numerics::Tensor v;
    std::uint64_t t = 0;
  };
  AdamConfig config_;
  std::map<std::string, Slot> slots_;
  std::uint64_t steps_ = 0;
};

}  // namespace cfp::objectives
