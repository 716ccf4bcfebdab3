#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "cfp/model/model.hpp"
#include "cfp/numerics/ops.hpp"
#include "cfp/tokenizer/vocabulary.hpp"

namespace cfp::model {

using numerics::Tape;
using numerics::Var;

// Maps model parameters onto tape leaves for one forward pass. A parameter
// becomes a gradient-carrying leaf only when `trainable` approves it; every
// other parameter enters as a constant. Leaves are created on first use.
class Binding {
 public:
  using Predicate = std::function<bool(const Parameter&)>;

  Binding(Tape& tape, const Model& model, Predicate trainable = {});

  [[nodiscard]] Var get(std::string_view name);
  // Use `var` in place of the stored parameter (gradient checks, probes).
  void substitute(const std::string& name, Var var);

  [[nodiscard]] Tape& tape() noexcept { return tape_; }
  [[nodiscard]] const Model& model() const noexcept { return model_; }
  // Bound parameters in first-use order.
  [[nodiscard]] const std::vector<std::pair<std::string, Var>>& bound() const noexcept { return bound_; }

 private:
  Tape& tape_;
  const Model& model_;
  Predicate trainable_;
  std::unordered_map<std::string, std::size_t> lookup_;
  std::vector<std::pair<std::string, Var>> bound_;
};

// E(s) = E_tok(s) + E_seg(s) + E_pos(s), one row per token (including PAD).
Var embed(Binding& binding, const tokenizer::TokenSequence& seq);

// Prompts first, then input rows: [x_pt^1; ...; x_pt^m; x_in^1; ...; x_in^n].
Var attach_prompts(const Var& x_in, std::span<const Var> prompts);

// Binary (m+n) x (m+n) mask, prompts first. With 1-based indices,
// M[i][j] = 0 when (i <= m and j > m) or (i, j <= m and i != j); else 1.
struct AttentionMask {
  std::size_t m = 0;
  std::size_t n = 0;
  std::vector<std::uint8_t> bits;

  [[nodiscard]] std::size_t size() const noexcept { return m + n; }
  [[nodiscard]] bool operator()(std::size_t i, std::size_t j) const { return bits[i * size() + j] != 0; }
  [[nodiscard]] Tensor as_tensor() const;
};

AttentionMask build_mask(std::size_t m, std::size_t n);

// Optional capture of attention internals, one entry per head.
struct AttentionTrace {
  // Weights multiplied into V: A (additive) or A * M (literal).
  std::vector<Tensor> weights;
  // Unmasked softmax over valid keys (literal mode only; empty otherwise).
  std::vector<Tensor> raw_softmax;
  std::vector<Tensor> values;
  // weights * values, before the output projection and g().
  std::vector<Tensor> context;
};

// One encoder layer: multi-head attention under `mask` AND key_valid, then
// g() = residual + layernorm, feed-forward (d -> ffn_mult*d -> d, gelu),
// residual + layernorm. key_valid marks non-PAD key rows.
Var masked_attention(Binding& binding, std::size_t layer, const Var& x, const AttentionMask& mask,
                     std::span<const std::uint8_t> key_valid, MaskMode mode, AttentionTrace* trace = nullptr);

using PromptSelection = std::vector<std::string>;

struct EncoderOutput {
  Var hidden;  // (m+n) x d
  std::size_t m = 0;
  std::size_t n = 0;
  // Real tokens in the input (including <cls>/<eos>).
  std::size_t length = 0;
  std::vector<std::string> prompts;

  [[nodiscard]] Var prompt_rows() const;
  [[nodiscard]] Var input_rows() const;
  // Rows of real residues only (no <cls>, <eos>, PAD, prompts).
  [[nodiscard]] Var residue_rows() const;
  [[nodiscard]] std::size_t residue_count() const noexcept { return length >= 2 ? length - 2 : 0; }
};

// Selected prompts are attached in registration order regardless of the
// order given in `selection`. Unknown names raise LookupError.
PromptSelection canonical_selection(const Model& model, const PromptSelection& selection);

struct EncodeOptions {
  std::vector<AttentionTrace>* traces = nullptr;  // one per layer when set
  // Attach prompts in exactly the given order (permutation checks).
  bool keep_selection_order = false;
};

EncoderOutput encode(Binding& binding, const tokenizer::TokenSequence& seq, const PromptSelection& selection,
                     const EncodeOptions& options = {});

// Mean of residue rows; ContractError when the sequence has no residue.
Var pool(const EncoderOutput& out);

}  // namespace cfp::model
