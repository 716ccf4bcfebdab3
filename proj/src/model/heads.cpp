#include "cfp/model/heads.hpp"

#include "cfp/errors.hpp"

namespace cfp::model {

namespace ops = numerics;

Var mlm_logits(Binding& binding, const Var& rows) {
  return ops::affine(rows, binding.get("head.mlm.w"), binding.get("head.mlm.b"));
}

Var pair_score(Binding& binding, const Var& h_p, const Var& h_q) {
  if (h_p.shape() != h_q.shape()) {
    throw ShapeError("pair_score: " + numerics::shape_to_string(h_p.shape()) + " vs " +
                     numerics::shape_to_string(h_q.shape()));
  }
  return ops::affine(ops::mul(h_p, h_q), binding.get("head.ppi.w"), binding.get("head.ppi.b"));
}

Var contact_logits(Binding& binding, const EncoderOutput& out) {
  const std::size_t n = out.residue_count();
  if (n == 0) throw ContractError("contact_logits: sequence has no residues");
  const Var features = ops::pairwise_symmetric_features(out.residue_rows());
  const Var flat = ops::affine(features, binding.get("head.contact.w"), binding.get("head.contact.b"));
  return ops::reshape(flat, {n, n});
}

Var token_classify(Binding& binding, const EncoderOutput& out, std::size_t classes) {
  if (classes != 3 && classes != 8) throw ContractError("token_classify: classes must be 3 or 8");
  const std::string head = classes == 3 ? "head.ss3" : "head.ss8";
  return ops::affine(out.residue_rows(), binding.get(head + ".w"), binding.get(head + ".b"));
}

Var sequence_regress(Binding& binding, const Var& pooled) {
  return ops::affine(pooled, binding.get("head.regress.w"), binding.get("head.regress.b"));
}

}  // namespace cfp::model
