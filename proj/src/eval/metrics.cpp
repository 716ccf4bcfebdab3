#include "cfp/eval/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "cfp/errors.hpp"

namespace cfp::eval {

RangeClass RangeClass::parse(std::string_view name) {
  if (name == "short") return short_range();
  if (name == "medium") return medium_range();
  if (name == "long") return long_range();
  throw ConfigError("range class must be short, medium or long, got '" + std::string(name) + "'");
}

PrecisionResult precision_at_L_half(const numerics::Tensor& scores, const data::ContactMap& truth,
                                    const RangeClass& range) {
  const std::size_t n = truth.n;
  if (scores.rank() != 2 || scores.rows() != n || scores.cols() != n) {
    throw ShapeError("precision_at_L_half: scores are " + numerics::shape_to_string(scores.shape()) +
                     " for a map of length " + std::to_string(n));
  }
  struct Pair {
    double score;
    std::size_t i;
    std::size_t j;
  };
  std::vector<Pair> pairs;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (!range.contains(j - i)) continue;
      const double s = scores(i, j);
      if (std::isnan(s)) throw ContractError("precision_at_L_half: NaN score");
      pairs.push_back({s, i, j});
    }
  }
  PrecisionResult r;
  r.k = n / 2;
  r.eligible = pairs.size();
  r.short_of_k = pairs.size() < r.k;
  r.evaluated = std::min(r.k, pairs.size());
  std::partial_sort(pairs.begin(), pairs.begin() + static_cast<std::ptrdiff_t>(r.evaluated), pairs.end(),
                    [](const Pair& a, const Pair& b) {
                      if (a.score != b.score) return a.score > b.score;
                      if (a.i != b.i) return a.i < b.i;
                      return a.j < b.j;
                    });
  for (std::size_t t = 0; t < r.evaluated; ++t) r.hits += truth(pairs[t].i, pairs[t].j) ? 1 : 0;
  r.precision = r.evaluated == 0 ? 0.0 : static_cast<double>(r.hits) / static_cast<double>(r.evaluated);
  return r;
}

F1Counts f1_counts(std::span<const std::vector<std::uint8_t>> pred, std::span<const std::vector<std::uint8_t>> truth) {
  if (pred.size() != truth.size()) throw ContractError("micro_f1: prediction and truth counts differ");
  F1Counts c;
  for (std::size_t k = 0; k < pred.size(); ++k) {
    if (pred[k].size() != truth[k].size()) throw ContractError("micro_f1: label widths differ at pair " + std::to_string(k));
    for (std::size_t s = 0; s < pred[k].size(); ++s) {
      const bool p = pred[k][s] != 0;
      const bool t = truth[k][s] != 0;
      c.tp += p && t;
      c.fp += p && !t;
      c.fn += !p && t;
    }
  }
  return c;
}

double micro_f1(std::span<const std::vector<std::uint8_t>> pred, std::span<const std::vector<std::uint8_t>> truth) {
  const F1Counts c = f1_counts(pred, truth);
  const std::size_t denom = 2 * c.tp + c.fp + c.fn;
  return denom == 0 ? 0.0 : static_cast<double>(2 * c.tp) / static_cast<double>(denom);
}

double q_accuracy(std::span<const int> pred, std::span<const int> truth, std::size_t classes) {
  if (pred.size() != truth.size()) throw ContractError("q_accuracy: prediction and truth lengths differ");
  if (pred.empty()) throw ContractError("q_accuracy: no positions");
  const int limit = static_cast<int>(classes);
  std::size_t match = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (pred[i] < 0 || pred[i] >= limit || truth[i] < 0 || truth[i] >= limit) {
      throw ContractError("q_accuracy: label outside [0, " + std::to_string(classes) + ")");
    }
    match += pred[i] == truth[i];
  }
  return static_cast<double>(match) / static_cast<double>(pred.size());
}

std::vector<double> average_ranks(std::span<const double> values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(values.size());
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() && values[order[j + 1]] == values[order[i]]) ++j;
    const double rank = static_cast<double>(i + j) / 2.0 + 1.0;
    for (std::size_t t = i; t <= j; ++t) ranks[order[t]] = rank;
    i = j + 1;
  }
  return ranks;
}

double spearman_rho(std::span<const double> pred, std::span<const double> truth) {
  if (pred.size() != truth.size()) throw ContractError("spearman_rho: lengths differ");
  if (pred.size() < 2) throw ContractError("spearman_rho: needs at least two points");
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (!std::isfinite(pred[i]) || !std::isfinite(truth[i])) throw ContractError("spearman_rho: non-finite value");
  }
  const std::vector<double> a = average_ranks(pred);
  const std::vector<double> b = average_ranks(truth);
  const double n = static_cast<double>(a.size());
  const double mean_a = std::accumulate(a.begin(), a.end(), 0.0) / n;
  const double mean_b = std::accumulate(b.begin(), b.end(), 0.0) / n;
  double sab = 0.0;
  double saa = 0.0;
  double sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - mean_a) * (b[i] - mean_b);
    saa += (a[i] - mean_a) * (a[i] - mean_a);
    sbb += (b[i] - mean_b) * (b[i] - mean_b);
  }
  if (saa == 0.0 || sbb == 0.0) return 0.0;
  return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

}  // namespace cfp::eval
