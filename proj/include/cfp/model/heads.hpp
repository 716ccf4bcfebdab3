#pragma once

#include "cfp/model/encoder.hpp"

namespace cfp::model {

// Vocabulary logits for the given hidden rows (MLM head).
Var mlm_logits(Binding& binding, const Var& rows);

// (h_p * h_q) -> affine -> ppi_labels logits. Symmetric in p and q.
Var pair_score(Binding& binding, const Var& h_p, const Var& h_q);

// Residue-pair logits: feature(i, j) = [h_i * h_j, |h_i - h_j|] through one
// affine layer. n_real x n_real, exactly symmetric.
Var contact_logits(Binding& binding, const EncoderOutput& out);

// Per-residue secondary-structure logits; classes is 3 or 8.
Var token_classify(Binding& binding, const EncoderOutput& out, std::size_t classes);

// Scalar regression from a pooled 1 x d vector.
Var sequence_regress(Binding& binding, const Var& pooled);

}  // namespace cfp::model
