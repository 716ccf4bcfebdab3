#pragma once

#include <map>
#include <set>
#include <string>

#include "cfp/model/model.hpp"

namespace cfp::objectives {

inline constexpr const char* kConservationLoss = "mlm";

// Which losses may update which parameters.
//
// With routing enabled, a prompt receives gradient only from the losses in
// its entry; inside any other loss's forward pass it enters as a constant.
// The encoder receives gradient from the losses in encoder_losses. A task
// head is updated by its own loss unless listed in frozen_heads.
struct RoutingPolicy {
  bool enabled = true;
  std::map<std::string, std::set<std::string>> prompt_losses;
  std::set<std::string> encoder_losses;
  std::set<std::string> frozen_heads;

  // Seq <- mlm, IC <- ppi, encoder <- {mlm, ppi}. Any other trainable prompt
  // is routed to ppi.
  static RoutingPolicy standard(const model::ModelConfig& config);

  // Every trainable prompt needs exactly one entry; entries must name
  // registered prompts. ConfigError otherwise.
  void validate(const model::ModelConfig& config) const;

  [[nodiscard]] bool prompt_trainable(const model::ModelConfig& config, const std::string& prompt,
                                      const std::string& loss) const;
  [[nodiscard]] bool encoder_trainable(const std::string& loss) const { return encoder_losses.contains(loss); }

  // Serialised as routing.enabled, routing.prompt.<name>, routing.encoder,
  // routing.frozen_heads.
  void write_to(ConfigMap& map) const;
  static RoutingPolicy from_map(const ConfigMap& map, const model::ModelConfig& config);
};

}  // namespace cfp::objectives
