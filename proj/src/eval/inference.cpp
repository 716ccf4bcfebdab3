#include "cfp/eval/inference.hpp"

#include "cfp/model/heads.hpp"

namespace cfp::eval {

Tensor hidden_states(const Model& model, const TokenSequence& seq, const PromptSelection& selection) {
  numerics::Tape tape;
  model::Binding b(tape, model);
  return model::encode(b, seq, selection).hidden.value();
}

Tensor residue_states(const Model& model, const TokenSequence& seq, const PromptSelection& selection) {
  numerics::Tape tape;
  model::Binding b(tape, model);
  return model::encode(b, seq, selection).residue_rows().value();
}

Tensor pooled(const Model& model, const TokenSequence& seq, const PromptSelection& selection) {
  numerics::Tape tape;
  model::Binding b(tape, model);
  return model::pool(model::encode(b, seq, selection)).value();
}

Tensor pair_logits(const Model& model, const Tensor& pooled_p, const Tensor& pooled_q) {
  numerics::Tape tape;
  model::Binding b(tape, model);
  return model::pair_score(b, tape.constant(pooled_p), tape.constant(pooled_q)).value();
}

Tensor contact_scores(const Model& model, const TokenSequence& seq, const PromptSelection& selection) {
  numerics::Tape tape;
  model::Binding b(tape, model);
  return model::contact_logits(b, model::encode(b, seq, selection)).value();
}

std::vector<int> predict_ss(const Model& model, const TokenSequence& seq, const PromptSelection& selection,
                            std::size_t classes) {
  numerics::Tape tape;
  model::Binding b(tape, model);
  const Tensor logits = model::token_classify(b, model::encode(b, seq, selection), classes).value();
  std::vector<int> out(logits.rows());
  for (std::size_t r = 0; r < logits.rows(); ++r) {
    std::size_t best = 0;
    for (std::size_t c = 1; c < logits.cols(); ++c) {
      if (logits(r, c) > logits(r, best)) best = c;
    }
    out[r] = static_cast<int>(best);
  }
  return out;
}

double predict_value(const Model& model, const TokenSequence& seq, const PromptSelection& selection) {
  numerics::Tape tape;
  model::Binding b(tape, model);
  return model::sequence_regress(b, model::pool(model::encode(b, seq, selection))).value().item();
}

std::vector<std::uint8_t> logits_to_labels(const Tensor& logits) {
  std::vector<std::uint8_t> out(logits.size());
  for (std::size_t i = 0; i < logits.size(); ++i) out[i] = logits[i] > 0.0 ? 1 : 0;
  return out;
}

}  // namespace cfp::eval
