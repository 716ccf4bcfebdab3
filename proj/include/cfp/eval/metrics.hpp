#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cfp/data/contact_map.hpp"
#include "cfp/numerics/tensor.hpp"

namespace cfp::eval {

// Sequence-separation classes on |i - j|; pairs closer than 6 belong to none.
struct RangeClass {
  std::string name;
  std::size_t min_sep = 0;
  std::size_t max_sep = 0;  // inclusive; 0 means unbounded

  [[nodiscard]] bool contains(std::size_t sep) const noexcept {
    return sep >= min_sep && (max_sep == 0 || sep <= max_sep);
  }

  static RangeClass short_range() { return {"short", 6, 11}; }
  static RangeClass medium_range() { return {"medium", 12, 23}; }
  static RangeClass long_range() { return {"long", 24, 0}; }
  static RangeClass parse(std::string_view name);
};

struct PrecisionResult {
  double precision = 0.0;
  std::size_t k = 0;          // floor(L/2)
  std::size_t evaluated = 0;  // pairs actually counted
  std::size_t eligible = 0;
  std::size_t hits = 0;
  // Fewer eligible pairs than k: precision is over all eligible pairs.
  bool short_of_k = false;
};

// Upper-triangle pairs of the class ranked by score (descending), ties by
// (i, j) ascending; precision of the top floor(L/2), L = n.
PrecisionResult precision_at_L_half(const numerics::Tensor& scores, const data::ContactMap& truth,
                                    const RangeClass& range);

// Pooled over every slot of every pair: 2TP / (2TP + FP + FN), 0 when empty.
double micro_f1(std::span<const std::vector<std::uint8_t>> pred, std::span<const std::vector<std::uint8_t>> truth);

struct F1Counts {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
};
F1Counts f1_counts(std::span<const std::vector<std::uint8_t>> pred, std::span<const std::vector<std::uint8_t>> truth);

// Fraction of positions whose labels agree; labels must lie in [0, classes).
double q_accuracy(std::span<const int> pred, std::span<const int> truth, std::size_t classes);

// Average ranks (1-based) with ties sharing the mean of their positions.
std::vector<double> average_ranks(std::span<const double> values);
// Pearson correlation of average ranks. 0 when either side is constant.
double spearman_rho(std::span<const double> pred, std::span<const double> truth);

}  // namespace cfp::eval
