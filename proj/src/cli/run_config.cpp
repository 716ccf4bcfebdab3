#include "cfp/cli/run_config.hpp"

#include <algorithm>
#include <set>

#include "cfp/errors.hpp"

namespace cfp::cli {

namespace {

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys = {
      "run.seed",          "run.steps",           "run.out_dir",        "optim.lr",
      "optim.beta1",       "optim.beta2",         "optim.eps",          "optim.warmup",
      "mlm.rate",          "mlm.mask_fraction",   "mlm.random_fraction", "mlm.reduction",
      "train.mlm_batch",   "train.ppi_batch",     "train.task_batch",   "checkpoint.every",
      "checkpoint.keep_last", "data.fasta",       "data.ppi",           "data.contacts",
      "data.labels",       "inject.prompt",       "inject.task",        "inject.freeze_encoder",
      "inject.base",       "model.d",             "model.layers",       "model.heads",
      "model.max_len",     "model.ffn_mult",      "model.mask_mode",    "model.prompts",
      "model.frozen_prompts", "model.ppi_labels", "model.init_std",     "loss.lambda",
      "routing.enabled",   "routing.encoder",     "routing.frozen_heads"};
  return keys;
}

bool known(const std::string& key) {
  if (known_keys().contains(key)) return true;
  if (key.starts_with("loss.alpha.") && key.size() > 11) return true;
  if (key.starts_with("routing.prompt.") && key.size() > 15) return true;
  return key.starts_with("task.") && key.ends_with(".prompts") && key.size() > 13;
}

std::uint64_t get_u64(const ConfigMap& map, const std::string& key, std::uint64_t fallback) {
  const auto it = map.find(key);
  if (it == map.end()) return fallback;
  try {
    std::size_t used = 0;
    const unsigned long long v = std::stoull(it->second, &used);
    if (used != it->second.size() || it->second.starts_with('-')) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config key " + key + ": expected an unsigned integer, got '" + it->second + "'");
  }
}

}  // namespace

RunConfig::RunConfig() : routing(objectives::RoutingPolicy::standard(model)) {}

std::vector<std::string> RunConfig::prompts_for(const std::string& loss) const {
  const auto it = task_prompts.find(loss);
  return it == task_prompts.end() ? model.prompts : it->second;
}

void RunConfig::validate() const {
  model.validate();
  routing.validate(model);
  optim.validate();
  mlm.validate();
  if (steps == 0 || steps > 10'000'000) throw ConfigError("run.steps must lie in [1, 1e7]");
  if (optim.warmup > 10'000) throw ConfigError("optim.warmup must lie in [0, 10000]");
  if (mlm_batch == 0 || mlm_batch > 2048) throw ConfigError("train.mlm_batch must lie in [1, 2048]");
  if (ppi_batch > 2048) throw ConfigError("train.ppi_batch must lie in [0, 2048]");
  if (task_batch > 2048) throw ConfigError("train.task_batch must lie in [0, 2048]");
  if (keep_last == 0) throw ConfigError("checkpoint.keep_last must be at least 1");
  if (out_dir.empty()) throw ConfigError("run.out_dir must not be empty");
  if (model.lambda < 0.0) throw ConfigError("loss.lambda must be nonnegative");
  for (const auto& [task, a] : model.alpha) {
    if (a < 0.0) throw ConfigError("loss.alpha." + task + " must be nonnegative");
  }
  if (std::find(kInjectionTasks.begin(), kInjectionTasks.end(), inject_task) == kInjectionTasks.end()) {
    throw ConfigError("inject.task must be one of ppi, contact, ss3, ss8, regress; got '" + inject_task + "'");
  }
  for (const auto& [loss, prompts] : task_prompts) {
    for (const auto& p : prompts) {
      if (std::find(model.prompts.begin(), model.prompts.end(), p) == model.prompts.end()) {
        throw ConfigError("task." + loss + ".prompts names unregistered prompt '" + p + "'");
      }
    }
  }
}

ConfigMap RunConfig::to_map() const {
  ConfigMap map;
  model.write_to(map);
  routing.write_to(map);
  map["run.seed"] = std::to_string(seed);
  map["run.steps"] = std::to_string(steps);
  map["run.out_dir"] = out_dir;
  map["optim.lr"] = format_double(optim.lr);
  map["optim.beta1"] = format_double(optim.beta1);
  map["optim.beta2"] = format_double(optim.beta2);
  map["optim.eps"] = format_double(optim.eps);
  map["optim.warmup"] = std::to_string(optim.warmup);
  map["mlm.rate"] = format_double(mlm.rate);
  map["mlm.mask_fraction"] = format_double(mlm.mask_fraction);
  map["mlm.random_fraction"] = format_double(mlm.random_fraction);
  map["mlm.reduction"] = mlm_reduction == numerics::Reduction::Sum ? "sum" : "mean";
  map["train.mlm_batch"] = std::to_string(mlm_batch);
  map["train.ppi_batch"] = std::to_string(ppi_batch);
  map["train.task_batch"] = std::to_string(task_batch);
  for (const auto& [loss, prompts] : task_prompts) map["task." + loss + ".prompts"] = join(prompts);
  map["checkpoint.every"] = std::to_string(checkpoint_every);
  map["checkpoint.keep_last"] = std::to_string(keep_last);
  map["data.fasta"] = fasta;
  map["data.ppi"] = ppi;
  map["data.contacts"] = contacts;
  map["data.labels"] = labels;
  map["inject.prompt"] = inject_prompt;
  map["inject.task"] = inject_task;
  map["inject.freeze_encoder"] = freeze_encoder ? "true" : "false";
  map["inject.base"] = inject_base;
  return map;
}

RunConfig RunConfig::from_map(const ConfigMap& map) {
  for (const auto& [key, value] : map) {
    if (!known(key)) throw ConfigError("unknown config key '" + key + "'");
  }
  RunConfig c;
  c.model = model::ModelConfig::from_map(map);
  c.routing = objectives::RoutingPolicy::from_map(map, c.model);
  c.seed = get_u64(map, "run.seed", c.seed);
  c.steps = get_size(map, "run.steps", c.steps);
  c.out_dir = get_string(map, "run.out_dir", c.out_dir);
  c.optim.lr = get_double(map, "optim.lr", c.optim.lr);
  c.optim.beta1 = get_double(map, "optim.beta1", c.optim.beta1);
  c.optim.beta2 = get_double(map, "optim.beta2", c.optim.beta2);
  c.optim.eps = get_double(map, "optim.eps", c.optim.eps);
  c.optim.warmup = get_size(map, "optim.warmup", c.optim.warmup);
  c.mlm.rate = get_double(map, "mlm.rate", c.mlm.rate);
  c.mlm.mask_fraction = get_double(map, "mlm.mask_fraction", c.mlm.mask_fraction);
  c.mlm.random_fraction = get_double(map, "mlm.random_fraction", c.mlm.random_fraction);
  const std::string reduction = get_string(map, "mlm.reduction", "sum");
  if (reduction == "sum") {
    c.mlm_reduction = numerics::Reduction::Sum;
  } else if (reduction == "mean") {
    c.mlm_reduction = numerics::Reduction::Mean;
  } else {
    throw ConfigError("mlm.reduction must be sum or mean, got '" + reduction + "'");
  }
  c.mlm_batch = get_size(map, "train.mlm_batch", c.mlm_batch);
  c.ppi_batch = get_size(map, "train.ppi_batch", c.ppi_batch);
  c.task_batch = get_size(map, "train.task_batch", c.task_batch);
  for (const auto& [key, value] : map) {
    if (key.starts_with("task.") && key.ends_with(".prompts")) {
      c.task_prompts[key.substr(5, key.size() - 5 - 8)] = split(value, ',');
    }
  }
  c.checkpoint_every = get_size(map, "checkpoint.every", c.checkpoint_every);
  c.keep_last = get_size(map, "checkpoint.keep_last", c.keep_last);
  c.fasta = get_string(map, "data.fasta", c.fasta);
  c.ppi = get_string(map, "data.ppi", c.ppi);
  c.contacts = get_string(map, "data.contacts", c.contacts);
  c.labels = get_string(map, "data.labels", c.labels);
  c.inject_prompt = get_string(map, "inject.prompt", c.inject_prompt);
  c.inject_task = get_string(map, "inject.task", c.inject_task);
  c.freeze_encoder = get_bool(map, "inject.freeze_encoder", c.freeze_encoder);
  c.inject_base = get_string(map, "inject.base", c.inject_base);
  c.validate();
  return c;
}

ConfigMap parse_overrides(const std::vector<std::string>& assignments) {
  ConfigMap map;
  for (const auto& a : assignments) {
    const auto eq = a.find('=');
    if (eq == std::string::npos || eq == 0) throw ConfigError("override '" + a + "' is not key=value");
    std::string key = a.substr(0, eq);
    std::string value = a.substr(eq + 1);
    map[std::move(key)] = std::move(value);
  }
  return map;
}

RunConfig resolve_config(const std::optional<std::string>& file, const ConfigMap& overrides) {
  ConfigMap map;
  if (file) map = read_config_file(*file);
  for (const auto& [k, v] : overrides) map[k] = v;
  return RunConfig::from_map(map);
}

}  // namespace cfp::cli
