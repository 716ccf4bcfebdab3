#pragma once

#include <string>
#include <vector>

#include "cfp/eval/inference.hpp"

namespace cfp::eval {

struct ShiftRow {
  std::size_t index = 0;  // 1-based residue position
  char residue = 'X';
  double distance = 0.0;
  bool flagged = false;
};

struct ShiftReport {
  std::string source_id;
  std::string prompt;
  double cutoff = 0.0;
  std::vector<ShiftRow> rows;

  [[nodiscard]] std::vector<std::size_t> flagged() const;
  // "index,residue,distance,flagged" header plus one line per residue.
  [[nodiscard]] std::string to_csv() const;
};

// Final-layer residue representations with `base` prompts and with `base`
// plus `prompt`; per-residue Euclidean distance, flagged when above cutoff.
// LookupError for an unknown prompt.
ShiftReport embedding_shift_probe(const Model& model, const TokenSequence& seq, const std::string& prompt,
                                  double cutoff, const PromptSelection& base = {});

// Same comparison for two arbitrary selections.
ShiftReport shift_between(const Model& model, const TokenSequence& seq, const PromptSelection& without,
                          const PromptSelection& with, double cutoff);

// One comma-separated metric record.
struct MetricRecord {
  std::string task;
  std::string metric;
  double value = 0.0;
  std::string selection;  // prompt names joined with '+', "none" when empty
  std::string config_hash;
  std::string note;

  static std::string header();
  [[nodiscard]] std::string to_csv() const;
};

std::string selection_label(const PromptSelection& selection);

}  // namespace cfp::eval
