#pragma once

#include <cstdint>
#include <vector>

#include "cfp/tokenizer/vocabulary.hpp"

namespace cfp::tokenizer {

// Selection rate plus the replacement split for selected positions; whatever
// is left after mask_fraction + random_fraction keeps the original residue.
struct MlmPolicy {
  double rate = 0.15;
  double mask_fraction = 0.8;
  double random_fraction = 0.1;

  void validate() const;
};

struct MlmBatch {
  TokenSequence corrupted;
  // Token indices (into ids) of the selected positions, increasing.
  std::vector<std::size_t> positions;
  // Original ids at those positions.
  std::vector<int> targets;
  std::uint64_t seed = 0;
};

// Per real residue, in order: one uniform draw decides selection (< rate);
// a selected residue takes a second draw u: u < mask_fraction -> <mask>,
// u < mask_fraction + random_fraction -> a uniformly drawn standard residue
// (third draw), else unchanged. <cls>, <eos> and <pad> are never touched.
MlmBatch apply_mlm_mask(const TokenSequence& seq, const MlmPolicy& policy, std::uint64_t seed);
MlmBatch apply_mlm_mask(const TokenSequence& seq, double rate, std::uint64_t seed);

}  // namespace cfp::tokenizer
