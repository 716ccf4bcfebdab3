#include "cfp/tokenizer/mlm.hpp"

#include "cfp/errors.hpp"
#include "cfp/numerics/rng.hpp"

namespace cfp::tokenizer {

void MlmPolicy::validate() const {
  if (!(rate > 0.0 && rate < 1.0)) throw ConfigError("mlm rate must lie in (0, 1), got " + std::to_string(rate));
  if (mask_fraction < 0.0 || random_fraction < 0.0 || mask_fraction + random_fraction > 1.0) {
    throw ConfigError("mlm replacement fractions must be nonnegative and sum to at most 1");
  }
}

MlmBatch apply_mlm_mask(const TokenSequence& seq, const MlmPolicy& policy, std::uint64_t seed) {
  policy.validate();
  numerics::Rng rng(seed);
  MlmBatch batch;
  batch.corrupted = seq;
  batch.seed = seed;
  for (std::size_t i = 1; i + 1 < seq.length; ++i) {
    if (Vocabulary::is_special(seq.ids[i])) continue;
    if (rng.uniform() >= policy.rate) continue;
    batch.positions.push_back(i);
    batch.targets.push_back(seq.ids[i]);
    const double u = rng.uniform();
    if (u < policy.mask_fraction) {
      batch.corrupted.ids[i] = token::kMask;
    } else if (u < policy.mask_fraction + policy.random_fraction) {
      batch.corrupted.ids[i] = token::kFirstResidue + static_cast<int>(rng.below(kStandardResidues));
    }
  }
  return batch;
}

MlmBatch apply_mlm_mask(const TokenSequence& seq, double rate, std::uint64_t seed) {
  MlmPolicy policy;
  policy.rate = rate;
  return apply_mlm_mask(seq, policy, seed);
}

}  // namespace cfp::tokenizer
