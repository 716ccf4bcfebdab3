#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cfp/config_text.hpp"
#include "cfp/model/model.hpp"
#include "cfp/numerics/ops.hpp"
#include "cfp/objectives/adam.hpp"
#include "cfp/objectives/routing.hpp"
#include "cfp/tokenizer/mlm.hpp"

namespace cfp::cli {

// Injection tasks a prompt can be trained on.
inline const std::vector<std::string> kInjectionTasks = {"ppi", "contact", "ss3", "ss8", "regress"};

// Everything a run depends on. Serialised in full (sorted key=value text)
// into every checkpoint and metrics log; the FNV-1a hash of that text is the
// run's identity.
//
//   run.seed run.steps run.out_dir
//   optim.lr optim.beta1 optim.beta2 optim.eps optim.warmup
//   mlm.rate mlm.mask_fraction mlm.random_fraction mlm.reduction
//   train.mlm_batch train.ppi_batch train.task_batch   (0 = everything)
//   task.<loss>.prompts                               prompts attached per task
//   checkpoint.every checkpoint.keep_last
//   data.fasta data.ppi data.contacts data.labels
//   inject.prompt inject.task inject.freeze_encoder inject.base
//   model.* loss.* routing.*
struct RunConfig {
  model::ModelConfig model;
  objectives::RoutingPolicy routing;
  objectives::AdamConfig optim;
  tokenizer::MlmPolicy mlm;
  numerics::Reduction mlm_reduction = numerics::Reduction::Sum;

  std::uint64_t seed = 0;
  std::size_t steps = 100;
  std::string out_dir = "run";

  std::size_t mlm_batch = 8;
  std::size_t ppi_batch = 16;
  std::size_t task_batch = 0;
  std::map<std::string, std::vector<std::string>> task_prompts;

  std::size_t checkpoint_every = 0;  // 0: final checkpoint only
  std::size_t keep_last = 3;

  std::string fasta;
  std::string ppi;
  std::string contacts;
  std::string labels;

  std::string inject_prompt;
  std::string inject_task = "ppi";
  bool freeze_encoder = true;
  std::string inject_base;

  RunConfig();

  // Prompts attached for `loss`; defaults to every registered prompt.
  [[nodiscard]] std::vector<std::string> prompts_for(const std::string& loss) const;

  void validate() const;
  [[nodiscard]] ConfigMap to_map() const;
  [[nodiscard]] std::string text() const { return to_config_text(to_map()); }
  [[nodiscard]] std::uint64_t hash() const { return fnv1a64(text()); }

  // Unknown keys raise ConfigError.
  static RunConfig from_map(const ConfigMap& map);
};

// Defaults, then the file (when given), then `overrides`.
RunConfig resolve_config(const std::optional<std::string>& file, const ConfigMap& overrides);
// "key=value" strings from the command line.
ConfigMap parse_overrides(const std::vector<std::string>& assignments);

}  // namespace cfp::cli
