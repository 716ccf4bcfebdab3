#include "cfp/eval/probe.hpp"

#include <cmath>

#include "cfp/config_text.hpp"
#include "cfp/errors.hpp"

namespace cfp::eval {

std::vector<std::size_t> ShiftReport::flagged() const {
  std::vector<std::size_t> out;
  for (const ShiftRow& r : rows) {
    if (r.flagged) out.push_back(r.index);
  }
  return out;
}

std::string ShiftReport::to_csv() const {
  std::string out = "index,residue,distance,flagged\n";
  for (const ShiftRow& r : rows) {
    out += std::to_string(r.index) + ',' + r.residue + ',' + format_double(r.distance) + ',' +
           (r.flagged ? "1" : "0") + '\n';
  }
  return out;
}

ShiftReport shift_between(const Model& model, const TokenSequence& seq, const PromptSelection& without,
                          const PromptSelection& with, double cutoff) {
  const Tensor a = residue_states(model, seq, without);
  const Tensor b = residue_states(model, seq, with);
  ShiftReport report;
  report.source_id = seq.source_id;
  report.cutoff = cutoff;
  const auto& vocab = tokenizer::Vocabulary::standard();
  for (std::size_t r = 0; r < a.rows(); ++r) {
    double sq = 0.0;
    for (std::size_t c = 0; c < a.cols(); ++c) {
      const double diff = a(r, c) - b(r, c);
      sq += diff * diff;
    }
    const double dist = std::sqrt(sq);
    const char letter = vocab.residue_letter(seq.ids[r + 1]);
    report.rows.push_back({r + 1, letter == '\0' ? 'X' : letter, dist, dist > cutoff});
  }
  return report;
}

ShiftReport embedding_shift_probe(const Model& model, const TokenSequence& seq, const std::string& prompt,
                                  double cutoff, const PromptSelection& base) {
  if (!model.has_prompt(prompt)) throw LookupError("unknown prompt '" + prompt + "'");
  PromptSelection with = base;
  bool present = false;
  for (const auto& p : base) present = present || p == prompt;
  if (!present) with.push_back(prompt);
  ShiftReport report = shift_between(model, seq, base, with, cutoff);
  report.prompt = prompt;
  return report;
}

std::string selection_label(const PromptSelection& selection) {
  if (selection.empty()) return "none";
  return join(selection, '+');
}

std::string MetricRecord::header() { return "task,metric,value,selection,config_hash,note"; }

std::string MetricRecord::to_csv() const {
  return task + ',' + metric + ',' + format_double(value) + ',' + selection + ',' + config_hash + ',' + note;
}

}  // namespace cfp::eval
