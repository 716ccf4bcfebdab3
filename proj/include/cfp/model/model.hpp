#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "cfp/config_text.hpp"
#include "cfp/numerics/tensor.hpp"

namespace cfp::model {

using numerics::Tensor;

enum class MaskMode {
  // Disallowed keys are excluded before the softmax (-inf logits); rows stay
  // normalised.
  Additive,
  // softmax over all (non-pad) keys, then elementwise product with M.
  Literal,
};

std::string to_string(MaskMode mode);
MaskMode parse_mask_mode(std::string_view text);

struct ModelConfig {
  std::size_t d = 64;
  std::size_t layers = 2;
  std::size_t heads = 4;
  std::size_t max_len = 256;
  std::size_t ffn_mult = 4;
  MaskMode mask_mode = MaskMode::Additive;
  // Registration order; prompts attach in this order.
  std::vector<std::string> prompts = {"Seq", "IC"};
  std::set<std::string> frozen_prompts;
  // Width of the pair head: 1 (interaction) or 7 (interaction types).
  std::size_t ppi_labels = 1;
  double init_std = 0.02;
  // Objective weights; consumed by the objectives module.
  double lambda = 1.0;
  std::map<std::string, double> alpha = {{"ppi", 1.0}};

  [[nodiscard]] std::size_t head_dim() const { return d / heads; }
  void validate() const;

  // Keys: model.*, loss.lambda, loss.alpha.<task>.
  void write_to(ConfigMap& map) const;
  static ModelConfig from_map(const ConfigMap& map);
};

enum class ParamGroup { Encoder, Prompt, Head };

struct Parameter {
  std::string name;
  Tensor value;
  ParamGroup group = ParamGroup::Encoder;
};

// Named parameters in a fixed registration order:
//   embed.token [25 x d], embed.position [max_len x d], embed.segment [1 x d]
//   per layer l: layer<l>.attn.{q,k,v,o}.{w,b}, layer<l>.ln1.{gain,bias},
//                layer<l>.ffn.{in,out}.{w,b}, layer<l>.ln2.{gain,bias}
//   prompt.<name> [1 x d] for every prompt in config order
//   head.mlm.{w,b} [d x 25], head.ppi.{w,b} [d x ppi_labels],
//   head.contact.{w,b} [2d x 1], head.ss3.{w,b}, head.ss8.{w,b},
//   head.regress.{w,b} [d x 1]
// Weights are [in x out]; biases and gains are [1 x out].
class Model {
 public:
  // Normal(0, init_std) weights/embeddings/prompts, zero biases, unit gains.
  static Model create(const ModelConfig& config, std::uint64_t seed);
  // Same layout with every tensor zero; used when loading checkpoints.
  static Model skeleton(const ModelConfig& config);

  [[nodiscard]] const ModelConfig& config() const noexcept { return config_; }
  [[nodiscard]] const std::vector<Parameter>& parameters() const noexcept { return params_; }
  [[nodiscard]] std::vector<Parameter>& parameters() noexcept { return params_; }

  [[nodiscard]] bool has(std::string_view name) const;
  [[nodiscard]] const Parameter& param(std::string_view name) const;
  [[nodiscard]] Parameter& param(std::string_view name);
  [[nodiscard]] const Tensor& value(std::string_view name) const { return param(name).value; }

  [[nodiscard]] bool has_prompt(std::string_view name) const;
  static std::string prompt_param(std::string_view prompt) { return "prompt." + std::string(prompt); }
  // Appends a prompt (registration order) initialised from `seed`; name
  // collisions raise ConfigError.
  void add_prompt(const std::string& name, std::uint64_t seed, bool trainable = true);
  void set_prompt(std::string_view name, const Tensor& vector);

  // Total scalar count.
  [[nodiscard]] std::size_t parameter_count() const;

 private:
  explicit Model(ModelConfig config);
  void add(std::string name, Tensor value, ParamGroup group);
  void reindex();

  ModelConfig config_;
  std::vector<Parameter> params_;
  std::unordered_map<std::string, std::size_t> index_;
};

// Snapshot helpers used by the freeze and pluggability checks.
std::map<std::string, Tensor> snapshot(const Model& model, std::optional<ParamGroup> group = std::nullopt);
bool bitwise_equal(const std::map<std::string, Tensor>& a, const std::map<std::string, Tensor>& b);

}  // namespace cfp::model
