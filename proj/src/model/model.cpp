#include "cfp/model/model.hpp"

#include <algorithm>

#include "cfp/errors.hpp"
#include "cfp/numerics/rng.hpp"
#include "cfp/tokenizer/vocabulary.hpp"

namespace cfp::model {

std::string to_string(MaskMode mode) { return mode == MaskMode::Additive ? "additive" : "literal"; }

MaskMode parse_mask_mode(std::string_view text) {
  if (text == "additive") return MaskMode::Additive;
  if (text == "literal") return MaskMode::Literal;
  throw ConfigError("mask_mode must be additive or literal, got '" + std::string(text) + "'");
}

void ModelConfig::validate() const {
  if (d == 0 || heads == 0 || d % heads != 0) {
    throw ConfigError("model.d (" + std::to_string(d) + ") must be a positive multiple of model.heads (" +
                      std::to_string(heads) + ")");
  }
  if (layers == 0) throw ConfigError("model.layers must be at least 1");
  if (max_len < 3 || max_len > 4096) throw ConfigError("model.max_len must lie in [3, 4096]");
  if (ffn_mult == 0) throw ConfigError("model.ffn_mult must be positive");
  if (ppi_labels != 1 && ppi_labels != 7) throw ConfigError("model.ppi_labels must be 1 or 7");
  if (!(init_std > 0.0)) throw ConfigError("model.init_std must be positive");
  if (lambda < 0.0) throw ConfigError("loss.lambda must be nonnegative");
  for (const auto& [task, a] : alpha) {
    if (a < 0.0) throw ConfigError("loss.alpha." + task + " must be nonnegative");
  }
  std::set<std::string> seen;
  const tokenizer::Vocabulary& vocab = tokenizer::Vocabulary::standard();
  for (const auto& p : prompts) {
    if (p.empty() || p.find_first_of(",= \t\n") != std::string::npos) {
      throw ConfigError("invalid prompt name '" + p + "'");
    }
    if (!seen.insert(p).second) throw ConfigError("duplicate prompt name '" + p + "'");
    for (std::size_t id = 0; id < vocab.size(); ++id) {
      if (vocab.symbol(static_cast<int>(id)) == p) throw ConfigError("prompt '" + p + "' collides with a vocabulary symbol");
    }
  }
  for (const auto& f : frozen_prompts) {
    if (!seen.contains(f)) throw ConfigError("frozen prompt '" + f + "' is not registered");
  }
}

void ModelConfig::write_to(ConfigMap& map) const {
  map["model.d"] = std::to_string(d);
  map["model.layers"] = std::to_string(layers);
  map["model.heads"] = std::to_string(heads);
  map["model.max_len"] = std::to_string(max_len);
  map["model.ffn_mult"] = std::to_string(ffn_mult);
  map["model.mask_mode"] = to_string(mask_mode);
  map["model.prompts"] = join(prompts);
  map["model.frozen_prompts"] = join(std::vector<std::string>(frozen_prompts.begin(), frozen_prompts.end()));
  map["model.ppi_labels"] = std::to_string(ppi_labels);
  map["model.init_std"] = format_double(init_std);
  map["loss.lambda"] = format_double(lambda);
  for (const auto& [task, a] : alpha) map["loss.alpha." + task] = format_double(a);
}

ModelConfig ModelConfig::from_map(const ConfigMap& map) {
  ModelConfig c;
  c.d = get_size(map, "model.d", c.d);
  c.layers = get_size(map, "model.layers", c.layers);
  c.heads = get_size(map, "model.heads", c.heads);
  c.max_len = get_size(map, "model.max_len", c.max_len);
  c.ffn_mult = get_size(map, "model.ffn_mult", c.ffn_mult);
  c.mask_mode = parse_mask_mode(get_string(map, "model.mask_mode", to_string(c.mask_mode)));
  c.prompts = get_list(map, "model.prompts", c.prompts);
  const auto frozen = get_list(map, "model.frozen_prompts", {});
  c.frozen_prompts = std::set<std::string>(frozen.begin(), frozen.end());
  c.ppi_labels = get_size(map, "model.ppi_labels", c.ppi_labels);
  c.init_std = get_double(map, "model.init_std", c.init_std);
  c.lambda = get_double(map, "loss.lambda", c.lambda);
  const std::string prefix = "loss.alpha.";
  for (auto it = map.lower_bound(prefix); it != map.end() && it->first.starts_with(prefix); ++it) {
    c.alpha[it->first.substr(prefix.size())] = get_double(map, it->first, 1.0);
  }
  c.validate();
  return c;
}

Model::Model(ModelConfig config) : config_(std::move(config)) { config_.validate(); }

void Model::add(std::string name, Tensor value, ParamGroup group) {
  params_.push_back(Parameter{std::move(name), std::move(value), group});
}

void Model::reindex() {
  index_.clear();
  for (std::size_t i = 0; i < params_.size(); ++i) index_[params_[i].name] = i;
}

Model Model::skeleton(const ModelConfig& config) {
  Model m(config);
  const std::size_t d = config.d;
  const std::size_t hidden = d * config.ffn_mult;
  const auto enc = [&m](std::string n, std::size_t r, std::size_t c, double fill = 0.0) {
    m.add(std::move(n), Tensor({r, c}, fill), ParamGroup::Encoder);
  };
  enc("embed.token", tokenizer::kVocabSize, d);
  enc("embed.position", config.max_len, d);
  enc("embed.segment", 1, d);
  for (std::size_t l = 0; l < config.layers; ++l) {
    const std::string p = "layer" + std::to_string(l) + ".";
    for (const char* proj : {"q", "k", "v", "o"}) {
      enc(p + "attn." + proj + ".w", d, d);
      enc(p + "attn." + proj + ".b", 1, d);
    }
    enc(p + "ln1.gain", 1, d, 1.0);
    enc(p + "ln1.bias", 1, d);
    enc(p + "ffn.in.w", d, hidden);
    enc(p + "ffn.in.b", 1, hidden);
    enc(p + "ffn.out.w", hidden, d);
    enc(p + "ffn.out.b", 1, d);
    enc(p + "ln2.gain", 1, d, 1.0);
    enc(p + "ln2.bias", 1, d);
  }
  for (const auto& name : config.prompts) m.add(prompt_param(name), Tensor({1, d}), ParamGroup::Prompt);
  const auto head = [&m](const std::string& n, std::size_t in, std::size_t out) {
    m.add("head." + n + ".w", Tensor({in, out}), ParamGroup::Head);
    m.add("head." + n + ".b", Tensor({1, out}), ParamGroup::Head);
  };
  head("mlm", d, tokenizer::kVocabSize);
  head("ppi", d, config.ppi_labels);
  head("contact", 2 * d, 1);
  head("ss3", d, 3);
  head("ss8", d, 8);
  head("regress", d, 1);
  m.reindex();
  return m;
}

Model Model::create(const ModelConfig& config, std::uint64_t seed) {
  Model m = skeleton(config);
  numerics::Rng rng(seed);
  for (Parameter& p : m.params_) {
    const std::string& n = p.name;
    const bool is_bias = n.ends_with(".b") || n.ends_with(".bias");
    const bool is_gain = n.ends_with(".gain");
    if (is_bias || is_gain) continue;
    for (double& v : p.value.data()) v = config.init_std * rng.normal();
  }
  return m;
}

bool Model::has(std::string_view name) const { return index_.contains(std::string(name)); }

const Parameter& Model::param(std::string_view name) const {
  const auto it = index_.find(std::string(name));
  if (it == index_.end()) throw LookupError("unknown parameter '" + std::string(name) + "'");
  return params_[it->second];
}

Parameter& Model::param(std::string_view name) {
  return const_cast<Parameter&>(static_cast<const Model&>(*this).param(name));
}

bool Model::has_prompt(std::string_view name) const {
  return std::find(config_.prompts.begin(), config_.prompts.end(), name) != config_.prompts.end();
}

void Model::add_prompt(const std::string& name, std::uint64_t seed, bool trainable) {
  if (has_prompt(name)) throw ConfigError("prompt '" + name + "' already exists");
  ModelConfig next = config_;
  next.prompts.push_back(name);
  if (!trainable) next.frozen_prompts.insert(name);
  next.validate();
  config_ = std::move(next);
  Tensor v({1, config_.d});
  numerics::Rng rng(seed);
  for (double& x : v.data()) x = config_.init_std * rng.normal();
  const auto first_head = std::find_if(params_.begin(), params_.end(),
                                       [](const Parameter& p) { return p.group == ParamGroup::Head; });
  params_.insert(first_head, Parameter{prompt_param(name), std::move(v), ParamGroup::Prompt});
  reindex();
}

void Model::set_prompt(std::string_view name, const Tensor& vector) {
  Parameter& p = param(prompt_param(name));
  if (vector.shape() != p.value.shape()) {
    throw ShapeError("prompt '" + std::string(name) + "' expects " + numerics::shape_to_string(p.value.shape()) +
                     ", got " + numerics::shape_to_string(vector.shape()));
  }
  p.value = vector;
}

std::size_t Model::parameter_count() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += p.value.size();
  return n;
}

std::map<std::string, Tensor> snapshot(const Model& model, std::optional<ParamGroup> group) {
  std::map<std::string, Tensor> out;
  for (const auto& p : model.parameters()) {
    if (!group || p.group == *group) out[p.name] = p.value;
  }
  return out;
}

bool bitwise_equal(const std::map<std::string, Tensor>& a, const std::map<std::string, Tensor>& b) {
  if (a.size() != b.size()) return false;
  for (const auto& [name, t] : a) {
    const auto it = b.find(name);
    if (it == b.end() || !numerics::bitwise_equal(t, it->second)) return false;
  }
  return true;
}

}  // namespace cfp::model
