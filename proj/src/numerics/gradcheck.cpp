#include "cfp/numerics/gradcheck.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

#include "cfp/errors.hpp"

namespace cfp::numerics {
namespace {

double evaluate(const ScalarFn& f, const std::vector<Tensor>& inputs) {
  Tape tape;
  std::vector<Var> leaves;
  leaves.reserve(inputs.size());
  for (const Tensor& t : inputs) leaves.push_back(tape.constant(t));
  const Var out = f(tape, leaves);
  if (out.value().size() != 1) throw ContractError("finite_diff_check: objective is not scalar");
  return out.value()[0];
}

}  // namespace

GradCheckResult finite_diff_check(const ScalarFn& f, const std::vector<Tensor>& inputs, double eps) {
  if (!(eps > 0.0)) throw ContractError("finite_diff_check: eps must be positive");

  std::vector<Tensor> analytic;
  {
    Tape tape;
    std::vector<Var> leaves;
    for (const Tensor& t : inputs) leaves.push_back(tape.leaf(t, true));
    const Var out = f(tape, leaves);
    tape.backward(out);
    for (const Var& v : leaves) analytic.push_back(v.grad());
  }

  const double first = evaluate(f, inputs);
  const double second = evaluate(f, inputs);
  if (std::bit_cast<std::uint64_t>(first) != std::bit_cast<std::uint64_t>(second)) {
    throw OracleError("finite_diff_check: objective is not deterministic");
  }

  GradCheckResult result;
  std::vector<Tensor> probe = inputs;
  for (std::size_t k = 0; k < inputs.size(); ++k) {
    for (std::size_t i = 0; i < inputs[k].size(); ++i) {
      const double base = inputs[k][i];
      const double up = base + eps;
      const double down = base - eps;
      probe[k][i] = up;
      const double f_up = evaluate(f, probe);
      probe[k][i] = down;
      const double f_down = evaluate(f, probe);
      probe[k][i] = base;
      const double numeric = (f_up - f_down) / (up - down);
      const double a = analytic[k][i];
      const double denom = std::max({std::abs(a), std::abs(numeric), kRelErrorFloor});
      const double rel = std::abs(a - numeric) / denom;
      ++result.checked;
      if (rel > result.max_rel_error) {
        result.max_rel_error = rel;
        result.worst_input = k;
        result.worst_index = i;
        result.analytic = a;
        result.numeric = numeric;
      }
    }
  }
  return result;
}

double finite_diff_check(const UnaryScalarFn& f, const Tensor& x, double eps) {
  const ScalarFn wrapped = [&f](Tape& tape, std::span<const Var> vars) { return f(tape, vars[0]); };
  return finite_diff_check(wrapped, std::vector<Tensor>{x}, eps).max_rel_error;
}

}  // namespace cfp::numerics
