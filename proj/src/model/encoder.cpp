#include "cfp/model/encoder.hpp"

#include <algorithm>
#include <cmath>

#include "cfp/errors.hpp"

namespace cfp::model {

namespace ops = numerics;

Binding::Binding(Tape& tape, const Model& model, Predicate trainable)
    : tape_(tape), model_(model), trainable_(std::move(trainable)) {}

Var Binding::get(std::string_view name) {
  const std::string key(name);
  if (const auto it = lookup_.find(key); it != lookup_.end()) return bound_[it->second].second;
  const Parameter& p = model_.param(name);
  const bool grad = trainable_ && trainable_(p);
  Var v = tape_.leaf(p.value, grad);
  lookup_[key] = bound_.size();
  bound_.emplace_back(key, v);
  return v;
}

void Binding::substitute(const std::string& name, Var var) {
  const Parameter& p = model_.param(name);
  if (var.shape() != p.value.shape()) {
    throw ShapeError("substitute " + name + ": expected " + numerics::shape_to_string(p.value.shape()) + ", got " +
                     numerics::shape_to_string(var.shape()));
  }
  if (const auto it = lookup_.find(name); it != lookup_.end()) {
    bound_[it->second].second = var;
    return;
  }
  lookup_[name] = bound_.size();
  bound_.emplace_back(name, var);
}

Var embed(Binding& binding, const tokenizer::TokenSequence& seq) {
  const std::size_t n = seq.ids.size();
  const ModelConfig& cfg = binding.model().config();
  if (n > cfg.max_len) {
    throw ContractError("embed: sequence of " + std::to_string(n) + " tokens exceeds max_len " +
                        std::to_string(cfg.max_len));
  }
  std::vector<int> positions(n);
  for (std::size_t i = 0; i < n; ++i) positions[i] = static_cast<int>(i);
  const std::vector<int> segments(n, 0);
  const Var tok = ops::embedding_lookup(binding.get("embed.token"), seq.ids);
  const Var seg = ops::embedding_lookup(binding.get("embed.segment"), segments);
  const Var pos = ops::embedding_lookup(binding.get("embed.position"), positions);
  return ops::add(ops::add(tok, seg), pos);
}

Var attach_prompts(const Var& x_in, std::span<const Var> prompts) {
  if (prompts.empty()) return x_in;
  const std::size_t d = x_in.value().cols();
  std::vector<Var> parts;
  parts.reserve(prompts.size() + 1);
  for (const Var& p : prompts) {
    if (p.value().rank() != 2 || p.value().rows() != 1 || p.value().cols() != d) {
      throw ShapeError("attach_prompts: prompt of shape " + numerics::shape_to_string(p.shape()) +
                       " for inputs of width " + std::to_string(d));
    }
    parts.push_back(p);
  }
  parts.push_back(x_in);
  return ops::concat_rows(parts);
}

Tensor AttentionMask::as_tensor() const {
  Tensor t({size(), size()});
  for (std::size_t i = 0; i < bits.size(); ++i) t[i] = bits[i];
  return t;
}

AttentionMask build_mask(std::size_t m, std::size_t n) {
  if (n == 0) throw ConfigError("build_mask: n must be at least 1");
  AttentionMask mask;
  mask.m = m;
  mask.n = n;
  const std::size_t s = m + n;
  mask.bits.assign(s * s, 1);
  // 0-based here: prompt rows are 0..m-1.
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < s; ++j) {
      if (j >= m || j != i) mask.bits[i * s + j] = 0;
    }
  }
  return mask;
}

Var masked_attention(Binding& binding, std::size_t layer, const Var& x, const AttentionMask& mask,
                     std::span<const std::uint8_t> key_valid, MaskMode mode, AttentionTrace* trace) {
  const ModelConfig& cfg = binding.model().config();
  const std::size_t rows = x.value().rows();
  if (mask.size() != rows) {
    throw ShapeError("masked_attention: mask of size " + std::to_string(mask.size()) + " for " +
                     std::to_string(rows) + " rows");
  }
  if (key_valid.size() != rows) {
    throw ShapeError("masked_attention: key mask of " + std::to_string(key_valid.size()) + " entries for " +
                     std::to_string(rows) + " rows");
  }
  const std::string p = "layer" + std::to_string(layer) + ".";
  const Var q = ops::affine(x, binding.get(p + "attn.q.w"), binding.get(p + "attn.q.b"));
  const Var k = ops::affine(x, binding.get(p + "attn.k.w"), binding.get(p + "attn.k.b"));
  const Var v = ops::affine(x, binding.get(p + "attn.v.w"), binding.get(p + "attn.v.b"));

  // Softmax support: M AND key_valid (additive) or key_valid alone (literal,
  // where M is applied after the softmax). Empty rows fall back to self.
  std::vector<std::uint8_t> allowed(rows * rows);
  for (std::size_t i = 0; i < rows; ++i) {
    bool any = false;
    for (std::size_t j = 0; j < rows; ++j) {
      const bool ok = key_valid[j] != 0 && (mode == MaskMode::Literal || mask(i, j));
      allowed[i * rows + j] = ok ? 1 : 0;
      any = any || ok;
    }
    if (!any) allowed[i * rows + i] = 1;
  }
  const Tensor mask_tensor = mode == MaskMode::Literal ? mask.as_tensor() : Tensor();

  const std::size_t dh = cfg.head_dim();
  const double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(dh));
  std::vector<Var> contexts;
  contexts.reserve(cfg.heads);
  for (std::size_t h = 0; h < cfg.heads; ++h) {
    const Var qh = ops::slice_cols(q, h * dh, dh);
    const Var kh = ops::slice_cols(k, h * dh, dh);
    const Var vh = ops::slice_cols(v, h * dh, dh);
    const Var scores = ops::scale(ops::matmul(qh, ops::transpose(kh)), inv_sqrt);
    const Var soft = ops::masked_softmax_rows(scores, allowed);
    const Var weights = mode == MaskMode::Literal ? ops::mul_constant(soft, mask_tensor) : soft;
    const Var ctx = ops::matmul(weights, vh);
    if (trace) {
      trace->weights.push_back(weights.value());
      if (mode == MaskMode::Literal) trace->raw_softmax.push_back(soft.value());
      trace->values.push_back(vh.value());
      trace->context.push_back(ctx.value());
    }
    contexts.push_back(ctx);
  }
  const Var merged = cfg.heads == 1 ? contexts.front() : ops::concat_cols(contexts);
  const Var attn = ops::affine(merged, binding.get(p + "attn.o.w"), binding.get(p + "attn.o.b"));
  const Var x1 = ops::layernorm(ops::add(x, attn), binding.get(p + "ln1.gain"), binding.get(p + "ln1.bias"));
  const Var inner = ops::gelu(ops::affine(x1, binding.get(p + "ffn.in.w"), binding.get(p + "ffn.in.b")));
  const Var ff = ops::affine(inner, binding.get(p + "ffn.out.w"), binding.get(p + "ffn.out.b"));
  return ops::layernorm(ops::add(x1, ff), binding.get(p + "ln2.gain"), binding.get(p + "ln2.bias"));
}

Var EncoderOutput::prompt_rows() const { return ops::slice_rows(hidden, 0, m); }
Var EncoderOutput::input_rows() const { return ops::slice_rows(hidden, m, n); }

Var EncoderOutput::residue_rows() const { return ops::slice_rows(hidden, m + 1, residue_count()); }

PromptSelection canonical_selection(const Model& model, const PromptSelection& selection) {
  for (const auto& name : selection) {
    if (!model.has_prompt(name)) throw LookupError("unknown prompt '" + name + "'");
  }
  PromptSelection out;
  for (const auto& name : model.config().prompts) {
    if (std::find(selection.begin(), selection.end(), name) != selection.end()) out.push_back(name);
  }
  return out;
}

EncoderOutput encode(Binding& binding, const tokenizer::TokenSequence& seq, const PromptSelection& selection,
                     const EncodeOptions& options) {
  const Model& model = binding.model();
  PromptSelection chosen = canonical_selection(model, selection);
  if (options.keep_selection_order) {
    if (chosen.size() != selection.size()) throw ContractError("encode: duplicate prompt in selection");
    chosen = selection;
  }
  if (seq.length < 2 || seq.length > seq.ids.size()) throw ContractError("encode: malformed token sequence");

  const Var x_in = embed(binding, seq);
  std::vector<Var> prompts;
  for (const auto& name : chosen) prompts.push_back(binding.get(Model::prompt_param(name)));
  Var x = attach_prompts(x_in, prompts);

  const std::size_t m = prompts.size();
  const std::size_t n = seq.ids.size();
  const AttentionMask mask = build_mask(m, n);
  std::vector<std::uint8_t> key_valid(m + n, 1);
  for (std::size_t j = 0; j < n; ++j) key_valid[m + j] = seq.ids[j] != tokenizer::token::kPad ? 1 : 0;

  for (std::size_t l = 0; l < model.config().layers; ++l) {
    AttentionTrace* trace = nullptr;
    if (options.traces) {
      options.traces->emplace_back();
      trace = &options.traces->back();
    }
    x = masked_attention(binding, l, x, mask, key_valid, model.config().mask_mode, trace);
  }
  return EncoderOutput{x, m, n, seq.length, std::move(chosen)};
}

Var pool(const EncoderOutput& out) {
  if (out.residue_count() == 0) throw ContractError("pool: sequence has no residues");
  return ops::mean_rows(out.residue_rows());
}

}  // namespace cfp::model
