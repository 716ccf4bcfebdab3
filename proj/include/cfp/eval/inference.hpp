#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cfp/model/encoder.hpp"

namespace cfp::eval {

using model::Model;
using model::PromptSelection;
using numerics::Tensor;
using tokenizer::TokenSequence;

// Forward passes on a frozen model; no parameter requires a gradient.
Tensor hidden_states(const Model& model, const TokenSequence& seq, const PromptSelection& selection);
Tensor residue_states(const Model& model, const TokenSequence& seq, const PromptSelection& selection);
Tensor pooled(const Model& model, const TokenSequence& seq, const PromptSelection& selection);

// 1 x ppi_labels logits from two pooled vectors.
Tensor pair_logits(const Model& model, const Tensor& pooled_p, const Tensor& pooled_q);
// residue_count x residue_count contact logits.
Tensor contact_scores(const Model& model, const TokenSequence& seq, const PromptSelection& selection);
// Arg-max class per residue.
std::vector<int> predict_ss(const Model& model, const TokenSequence& seq, const PromptSelection& selection,
                            std::size_t classes);
double predict_value(const Model& model, const TokenSequence& seq, const PromptSelection& selection);

// Thresholded at logit 0 (probability 0.5).
std::vector<std::uint8_t> logits_to_labels(const Tensor& logits);

}  // namespace cfp::eval
