#pragma once

#include <functional>
#include <span>
#include <vector>

#include "cfp/numerics/tape.hpp"

namespace cfp::numerics {

// Builds a scalar objective on the given tape from leaf variables.
using ScalarFn = std::function<Var(Tape&, std::span<const Var>)>;
using UnaryScalarFn = std::function<Var(Tape&, const Var&)>;

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::size_t worst_input = 0;
  std::size_t worst_index = 0;
  double analytic = 0.0;
  double numeric = 0.0;
  std::size_t checked = 0;
};

inline constexpr double kRelErrorFloor = 1e-8;

// Central differences against the tape gradient for every element of every
// input. Relative error is |a - n| / max(|a|, |n|, 1e-8). The objective is
// evaluated twice at the base point; differing results raise OracleError.
GradCheckResult finite_diff_check(const ScalarFn& f, const std::vector<Tensor>& inputs, double eps);
double finite_diff_check(const UnaryScalarFn& f, const Tensor& x, double eps);

}  // namespace cfp::numerics
