#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "cfp/numerics/tape.hpp"

namespace cfp::numerics {

// Differentiable primitives. Every op records onto the tape of its first
// argument, validates shapes (ShapeError names both shapes), and checks its
// output for NaN/Inf. Rank-2 throughout; a "row" is a 1 x c tensor and a
// scalar is 1 x 1.

inline constexpr double kLayerNormEps = 1e-5;

enum class Reduction { Sum, Mean };

Var matmul(const Var& a, const Var& b);
Var transpose(const Var& a);

Var add(const Var& a, const Var& b);
Var sub(const Var& a, const Var& b);
Var mul(const Var& a, const Var& b);
Var scale(const Var& a, double factor);
// Elementwise product with a constant tensor (no gradient to `mask`).
Var mul_constant(const Var& a, const Tensor& mask);
Var abs(const Var& a);

// x[r x k] * W[k x c] + b[1 x c]
Var affine(const Var& x, const Var& weight, const Var& bias);

Var gelu(const Var& x);
Var layernorm(const Var& x, const Var& gain, const Var& bias, double eps = kLayerNormEps);

Var softmax_rows(const Var& x);
// Softmax restricted to entries with allowed != 0 (row-major, same size as x).
// Disallowed entries get weight exactly zero; this is the -inf-logit form.
// A row with no allowed entry is a ContractError; callers decide fallbacks.
Var masked_softmax_rows(const Var& x, std::span<const std::uint8_t> allowed);

// Rows of `table` selected by ids; out-of-range id -> LookupError.
Var embedding_lookup(const Var& table, std::span<const int> ids);

Var concat_rows(std::span<const Var> parts);
Var concat_cols(std::span<const Var> parts);
Var slice_rows(const Var& x, std::size_t begin, std::size_t count);
Var slice_cols(const Var& x, std::size_t begin, std::size_t count);
Var gather_rows(const Var& x, std::span<const std::size_t> rows);
Var reshape(const Var& x, Shape shape);

Var sum(const Var& x);
Var mean_rows(const Var& x);

// Row i*n+j of the result is [h_i * h_j, |h_i - h_j|] (width 2d); n = rows(h).
Var pairwise_symmetric_features(const Var& h);

// Negative log-softmax of each row at its target column, reduced over rows.
Var softmax_cross_entropy(const Var& logits, std::span<const int> targets, Reduction reduction);
// Mean binary cross-entropy with logits; labels must be 0 or 1 (DataError).
Var bce_with_logits(const Var& logits, const Tensor& labels);

// Copy of the value with no path back to `x`.
Var detach(const Var& x);

}  // namespace cfp::numerics
