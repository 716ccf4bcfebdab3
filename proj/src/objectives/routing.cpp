#include "cfp/objectives/routing.hpp"

#include "cfp/errors.hpp"

namespace cfp::objectives {

RoutingPolicy RoutingPolicy::standard(const model::ModelConfig& config) {
  RoutingPolicy p;
  for (const auto& name : config.prompts) {
    if (config.frozen_prompts.contains(name)) continue;
    p.prompt_losses[name] = {name == "Seq" ? kConservationLoss : "ppi"};
  }
  p.encoder_losses = {kConservationLoss, "ppi"};
  return p;
}

void RoutingPolicy::validate(const model::ModelConfig& config) const {
  for (const auto& [prompt, losses] : prompt_losses) {
    bool known = false;
    for (const auto& p : config.prompts) known = known || p == prompt;
    if (!known) throw ConfigError("routing entry for unregistered prompt '" + prompt + "'");
  }
  for (const auto& name : config.prompts) {
    if (config.frozen_prompts.contains(name)) continue;
    if (!prompt_losses.contains(name)) throw ConfigError("trainable prompt '" + name + "' has no routing entry");
  }
}

bool RoutingPolicy::prompt_trainable(const model::ModelConfig& config, const std::string& prompt,
                                     const std::string& loss) const {
  if (config.frozen_prompts.contains(prompt)) return false;
  if (!enabled) return true;
  const auto it = prompt_losses.find(prompt);
  return it != prompt_losses.end() && it->second.contains(loss);
}

void RoutingPolicy::write_to(ConfigMap& map) const {
  map["routing.enabled"] = enabled ? "true" : "false";
  for (const auto& [prompt, losses] : prompt_losses) {
    map["routing.prompt." + prompt] = join(std::vector<std::string>(losses.begin(), losses.end()));
  }
  map["routing.encoder"] = join(std::vector<std::string>(encoder_losses.begin(), encoder_losses.end()));
  map["routing.frozen_heads"] = join(std::vector<std::string>(frozen_heads.begin(), frozen_heads.end()));
}

RoutingPolicy RoutingPolicy::from_map(const ConfigMap& map, const model::ModelConfig& config) {
  RoutingPolicy p = standard(config);
  p.enabled = get_bool(map, "routing.enabled", p.enabled);
  const std::string prefix = "routing.prompt.";
  for (auto it = map.lower_bound(prefix); it != map.end() && it->first.starts_with(prefix); ++it) {
    const auto losses = split(it->second, ',');
    p.prompt_losses[it->first.substr(prefix.size())] = std::set<std::string>(losses.begin(), losses.end());
  }
  if (map.contains("routing.encoder")) {
    const auto losses = get_list(map, "routing.encoder", {});
    p.encoder_losses = std::set<std::string>(losses.begin(), losses.end());
  }
  const auto frozen = get_list(map, "routing.frozen_heads", {});
  p.frozen_heads = std::set<std::string>(frozen.begin(), frozen.end());
  p.validate(config);
  return p;
}

}  // namespace cfp::objectives
