#include "cfp/numerics/ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "cfp/errors.hpp"

namespace cfp::numerics {
namespace {

void require_rank2(const char* op, const Tensor& t) {
  if (t.rank() != 2) throw ShapeError(std::string(op) + ": expected rank-2 tensor, got " + shape_to_string(t.shape()));
}

void require_same_tape(const char* op, const Var& a, const Var& b) {
  if (&a.tape() != &b.tape()) throw ContractError(std::string(op) + ": operands live on different tapes");
}

void require_same_shape(const char* op, const Var& a, const Var& b) {
  require_same_tape(op, a, b);
  if (a.shape() != b.shape()) {
    throw ShapeError(std::string(op) + ": shape mismatch " + shape_to_string(a.shape()) + " vs " +
                     shape_to_string(b.shape()));
  }
}

// out[r x c] += a[r x k] * b[k x c]
void gemm_nn(const Tensor& a, const Tensor& b, Tensor& out) {
  const std::size_t r = a.rows(), k = a.cols(), c = b.cols();
  const double* pa = a.data().data();
  const double* pb = b.data().data();
  double* po = out.data().data();
  for (std::size_t i = 0; i < r; ++i) {
    double* orow = po + i * c;
    for (std::size_t p = 0; p < k; ++p) {
      const double av = pa[i * k + p];
      const double* brow = pb + p * c;
      for (std::size_t j = 0; j < c; ++j) orow[j] += av * brow[j];
    }
  }
}

// out[r x k] += g[r x c] * b[k x c]^T
void gemm_nt(const Tensor& g, const Tensor& b, Tensor& out) {
  const std::size_t r = g.rows(), c = g.cols(), k = b.rows();
  const double* pg = g.data().data();
  const double* pb = b.data().data();
  double* po = out.data().data();
  for (std::size_t i = 0; i < r; ++i) {
    for (std::size_t p = 0; p < k; ++p) {
      double s = 0.0;
      const double* grow = pg + i * c;
      const double* brow = pb + p * c;
      for (std::size_t j = 0; j < c; ++j) s += grow[j] * brow[j];
      po[i * k + p] += s;
    }
  }
}

// out[k x c] += a[r x k]^T * g[r x c]
void gemm_tn(const Tensor& a, const Tensor& g, Tensor& out) {
  const std::size_t r = a.rows(), k = a.cols(), c = g.cols();
  const double* pa = a.data().data();
  const double* pg = g.data().data();
  double* po = out.data().data();
  for (std::size_t i = 0; i < r; ++i) {
    const double* grow = pg + i * c;
    for (std::size_t p = 0; p < k; ++p) {
      const double av = pa[i * k + p];
      double* orow = po + p * c;
      for (std::size_t j = 0; j < c; ++j) orow[j] += av * grow[j];
    }
  }
}

void accumulate(Tensor* dst, const Tensor& src, double factor = 1.0) {
  if (!dst) return;
  for (std::size_t i = 0; i < src.size(); ++i) (*dst)[i] += factor * src[i];
}

double gelu_value(double x) { return 0.5 * x * (1.0 + std::erf(x / std::numbers::sqrt2)); }

double gelu_derivative(double x) {
  const double cdf = 0.5 * (1.0 + std::erf(x / std::numbers::sqrt2));
  const double pdf = std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
  return cdf + x * pdf;
}

Var concat_impl(const char* op, std::span<const Var> parts, bool by_rows) {
  if (parts.empty()) throw ContractError(std::string(op) + ": no inputs");
  Tape& tape = parts.front().tape();
  std::size_t total = 0;
  const std::size_t fixed = by_rows ? parts.front().value().cols() : parts.front().value().rows();
  std::vector<std::size_t> ids;
  for (const Var& p : parts) {
    require_same_tape(op, parts.front(), p);
    const Tensor& v = p.value();
    require_rank2(op, v);
    const std::size_t f = by_rows ? v.cols() : v.rows();
    if (f != fixed) {
      throw ShapeError(std::string(op) + ": shape mismatch " + shape_to_string(parts.front().shape()) + " vs " +
                       shape_to_string(v.shape()));
    }
    total += by_rows ? v.rows() : v.cols();
    ids.push_back(p.id());
  }
  const std::size_t rows = by_rows ? total : fixed;
  const std::size_t cols = by_rows ? fixed : total;
  Tensor out({rows, cols});
  std::size_t offset = 0;
  for (const Var& p : parts) {
    const Tensor& v = p.value();
    for (std::size_t r = 0; r < v.rows(); ++r) {
      for (std::size_t c = 0; c < v.cols(); ++c) {
        if (by_rows) out(offset + r, c) = v(r, c);
        else out(r, offset + c) = v(r, c);
      }
    }
    offset += by_rows ? v.rows() : v.cols();
  }
  return tape.record(op, std::move(out), ids, [ids, by_rows](Tape& t, std::size_t self) {
    const Tensor& g = t.grad(self);
    std::size_t off = 0;
    for (std::size_t id : ids) {
      const Shape& s = t.value(id).shape();
      if (Tensor* dst = t.grad_of(id)) {
        for (std::size_t r = 0; r < s[0]; ++r) {
          for (std::size_t c = 0; c < s[1]; ++c) (*dst)(r, c) += by_rows ? g(off + r, c) : g(r, off + c);
        }
      }
      off += by_rows ? s[0] : s[1];
    }
  });
}

}  // namespace

Var matmul(const Var& a, const Var& b) {
  require_same_tape("matmul", a, b);
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  require_rank2("matmul", av);
  require_rank2("matmul", bv);
  if (av.cols() != bv.rows()) {
    throw ShapeError("matmul: inner dimensions disagree, " + shape_to_string(av.shape()) + " x " +
                     shape_to_string(bv.shape()));
  }
  Tensor out({av.rows(), bv.cols()});
  gemm_nn(av, bv, out);
  const std::size_t ia = a.id(), ib = b.id();
  return a.tape().record("matmul", std::move(out), {ia, ib}, [ia, ib](Tape& t, std::size_t self) {
    const Tensor& g = t.grad(self);
    if (Tensor* da = t.grad_of(ia)) gemm_nt(g, t.value(ib), *da);
    if (Tensor* db = t.grad_of(ib)) gemm_tn(t.value(ia), g, *db);
  });
}

Var transpose(const Var& a) {
  const Tensor& av = a.value();
  require_rank2("transpose", av);
  Tensor out({av.cols(), av.rows()});
  for (std::size_t r = 0; r < av.rows(); ++r)
    for (std::size_t c = 0; c < av.cols(); ++c) out(c, r) = av(r, c);
  const std::size_t ia = a.id();
  return a.tape().record("transpose", std::move(out), {ia}, [ia](Tape& t, std::size_t self) {
    const Tensor& g = t.grad(self);
    if (Tensor* da = t.grad_of(ia)) {
      for (std::size_t r = 0; r < g.rows(); ++r)
        for (std::size_t c = 0; c < g.cols(); ++c) (*da)(c, r) += g(r, c);
    }
  });
}

Var add(const Var& a, const Var& b) {
  require_same_shape("add", a, b);
  Tensor out = a.value();
  const Tensor& bv = b.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += bv[i];
  const std::size_t ia = a.id(), ib = b.id();
  return a.tape().record("add", std::move(out), {ia, ib}, [ia, ib](Tape& t, std::size_t self) {
    const Tensor& g = t.grad(self);
    accumulate(t.grad_of(ia), g);
    accumulate(t.grad_of(ib), g);
  });
}

Var sub(const Var& a, const Var& b) {
  require_same_shape("sub", a, b);
  Tensor out = a.value();
  const Tensor& bv = b.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] -= bv[i];
  const std::size_t ia = a.id(), ib = b.id();
  return a.tape().record("sub", std::move(out), {ia, ib}, [ia, ib](Tape& t, std::size_t self) {
    const Tensor& g = t.grad(self);
    accumulate(t.grad_of(ia), g);
    accumulate(t.grad_of(ib), g, -1.0);
  });
}

Var mul(const Var& a, const Var& b) {
  require_same_shape("mul", a, b);
  Tensor out = a.value();
  const Tensor& bv = b.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= bv[i];
  const std::size_t ia = a.id(), ib = b.id();
  return a.tape().record("mul", std::move(out), {ia, ib}, [ia, ib](Tape& t, std::size_t self) {
    const Tensor& g = t.grad(self);
    const Tensor& av = t.value(ia);
    const Tensor& bv = t.value(ib);
    if (Tensor* da = t.grad_of(ia))
      for (std::size_t i = 0; i < g.size(); ++i) (*da)[i] += g[i] * bv[i];
    if (Tensor* db = t.grad_of(ib))
      for (std::size_t i = 0; i < g.size(); ++i) (*db)[i] += g[i] * av[i];
  });
}

Var scale(const Var& a, double factor) {
  Tensor out = a.value();
  for (double& v : out.data()) v *= factor;
  const std::size_t ia = a.id();
  return a.tape().record("scale", std::move(out), {ia}, [ia, factor](Tape& t, std::size_t self) {
    accumulate(t.grad_of(ia), t.grad(self), factor);
  });
}

Var mul_constant(const Var& a, const Tensor& mask) {
  if (a.shape() != mask.shape()) {
    throw ShapeError("mul_constant: shape mismatch " + shape_to_string(a.shape()) + " vs " +
                     shape_to_string(mask.shape()));
  }
  Tensor out = a.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= mask[i];
  const std::size_t ia = a.id();
  return a.tape().record("mul_constant", std::move(out), {ia}, [ia, mask](Tape& t, std::size_t self) {
    const Tensor& g = t.grad(self);
    if (Tensor* da = t.grad_of(ia))
      for (std::size_t i = 0; i < g.size(); ++i) (*da)[i] += g[i] * mask[i];
  });
}

Var abs(const Var& a) {
  Tensor out = a.value();
  for (double& v : out.data()) v = std::abs(v);
  const std::size_t ia = a.id();
  return a.tape().record("abs", std::move(out), {ia}, [ia](Tape& t, std::size_t self) {
    const Tensor& g = t.grad(self);
    const Tensor& av = t.value(ia);
    if (Tensor* da = t.grad_of(ia)) {
      for (std::size_t i = 0; i < g.size(); ++i) {
        if (av[i] > 0) (*da)[i] += g[i];
        else if (av[i] < 0) (*da)[i] -= g[i];
      }
    }
  });
}

Var affine(const Var& x, const Var& weight, const Var& bias) {
  require_same_tape("affine", x, weight);
  require_same_tape("affine", x, bias);
  const Tensor& xv = x.value();
  const Tensor& wv = weight.value();
  const Tensor& bv = bias.value();
  require_rank2("affine", xv);
  require_rank2("affine", wv);
  if (xv.cols() != wv.rows()) {
    throw ShapeError("affine: input " + shape_to_string(xv.shape()) + " does not match weight " +
                     shape_to_string(wv.shape()));
  }
  if (bv.shape() != Shape{1, wv.cols()}) {
    throw ShapeError("affine: bias " + shape_to_string(bv.shape()) + " does not match weight " +
                     shape_to_string(wv.shape()));
  }
  Tensor out({xv.rows(), wv.cols()});
  for (std::size_t r = 0; r < out.rows(); ++r)
    for (std::size_t c = 0; c < out.cols(); ++c) out(r, c) = bv[c];
  gemm_nn(xv, wv, out);
  const std::size_t ix = x.id(), iw = weight.id(), ib = bias.id();
  return x.tape().record("affine", std::move(out), {ix, iw, ib}, [ix, iw, ib](Tape& t, std::size_t self) {
    const Tensor& g = t.grad(self);
    if (Tensor* dx = t.grad_of(ix)) gemm_nt(g, t.value(iw), *dx);
    if (Tensor* dw = t.grad_of(iw)) gemm_tn(t.value(ix), g, *dw);
    if (Tensor* db = t.grad_of(ib)) {
      for (std::size_t r = 0; r < g.rows(); ++r)
        for (std::size_t c = 0; c < g.cols(); ++c) (*db)[c] += g(r, c);
    }
  });
}

Var gelu(const Var& x) {
  Tensor out = x.value();
  for (double& v : out.data()) v = gelu_value(v);
  const std::size_t ix = x.id();
  return x.tape().record("gelu", std::move(out), {ix}, [ix](Tape& t, std::size_t self) {
    const Tensor& g = t.grad(self);
    const Tensor& xv = t.value(ix);
    if (Tensor* dx = t.grad_of(ix))
      for (std::size_t i = 0; i < g.size(); ++i) (*dx)[i] += g[i] * gelu_derivative(xv[i]);
  });
}

Var layernorm(const Var& x, const Var& gain, const Var& bias, double eps) {
  require_same_tape("layernorm", x, gain);
  require_same_tape("layernorm", x, bias);
  const Tensor& xv = x.value();
  require_rank2("layernorm", xv);
  const std::size_t r = xv.rows(), c = xv.cols();
  if (gain.shape() != Shape{1, c} || bias.shape() != Shape{1, c}) {
    throw ShapeError("layernorm: input " + shape_to_string(xv.shape()) + " with gain " +
                     shape_to_string(gain.shape()) + " and bias " + shape_to_string(bias.shape()));
  }
  const Tensor& gv = gain.value();
  const Tensor& bv = bias.value();
  Tensor out({r, c});
  Tensor normalized({r, c});
  std::vector<double> inv_std(r);
  for (std::size_t i = 0; i < r; ++i) {
    double mean = 0.0;
    for (std::size_t j = 0; j < c; ++j) mean += xv(i, j);
    mean /= static_cast<double>(c);
    double var = 0.0;
    for (std::size_t j = 0; j < c; ++j) {
      const double d = xv(i, j) - mean;
      var += d * d;
    }
    var /= static_cast<double>(c);
    inv_std[i] = 1.0 / std::sqrt(var + eps);
    for (std::size_t j = 0; j < c; ++j) {
      normalized(i, j) = (xv(i, j) - mean) * inv_std[i];
      out(i, j) = gv[j] * normalized(i, j) + bv[j];
    }
  }
  const std::size_t ix = x.id(), ig = gain.id(), ib = bias.id();
  return x.tape().record(
      "layernorm", std::move(out), {ix, ig, ib},
      [ix, ig, ib, normalized = std::move(normalized), inv_std = std::move(inv_std)](Tape& t, std::size_t self) {
        const Tensor& g = t.grad(self);
        const Tensor& gv = t.value(ig);
        const std::size_t rows = g.rows(), cols = g.cols();
        if (Tensor* dx = t.grad_of(ix)) {
          for (std::size_t i = 0; i < rows; ++i) {
            double mean_d = 0.0, mean_dn = 0.0;
            for (std::size_t j = 0; j < cols; ++j) {
              const double d = g(i, j) * gv[j];
              mean_d += d;
              mean_dn += d * normalized(i, j);
            }
            mean_d /= static_cast<double>(cols);
            mean_dn /= static_cast<double>(cols);
            for (std::size_t j = 0; j < cols; ++j) {
              const double d = g(i, j) * gv[j];
              (*dx)(i, j) += inv_std[i] * (d - mean_d - normalized(i, j) * mean_dn);
            }
          }
        }
        if (Tensor* dg = t.grad_of(ig)) {
          for (std::size_t i = 0; i < rows; ++i)
            for (std::size_t j = 0; j < cols; ++j) (*dg)[j] += g(i, j) * normalized(i, j);
        }
        if (Tensor* db = t.grad_of(ib)) {
          for (std::size_t i = 0; i < rows; ++i)
            for (std::size_t j = 0; j < cols; ++j) (*db)[j] += g(i, j);
        }
      });
}

namespace {

Var softmax_impl(const char* op, const Var& x, std::span<const std::uint8_t> allowed) {
  const Tensor& xv = x.value();
  require_rank2(op, xv);
  const std::size_t r = xv.rows(), c = xv.cols();
  if (!allowed.empty() && allowed.size() != xv.size()) {
    throw ShapeError(std::string(op) + ": mask of " + std::to_string(allowed.size()) + " entries for input " +
                     shape_to_string(xv.shape()));
  }
  const auto is_allowed = [&](std::size_t i, std::size_t j) { return allowed.empty() || allowed[i * c + j] != 0; };
  Tensor out({r, c});
  for (std::size_t i = 0; i < r; ++i) {
    double mx = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < c; ++j)
      if (is_allowed(i, j)) mx = std::max(mx, xv(i, j));
    if (mx == -std::numeric_limits<double>::infinity()) {
      throw ContractError(std::string(op) + ": row " + std::to_string(i) + " has no unmasked entry");
    }
    double total = 0.0;
    for (std::size_t j = 0; j < c; ++j) {
      if (!is_allowed(i, j)) continue;
      out(i, j) = std::exp(xv(i, j) - mx);
      total += out(i, j);
    }
    for (std::size_t j = 0; j < c; ++j) out(i, j) /= total;
  }
  const std::size_t ix = x.id();
  return x.tape().record(op, std::move(out), {ix}, [ix](Tape& t, std::size_t self) {
    const Tensor& g = t.grad(self);
    const Tensor& a = t.value(self);
    Tensor* dx = t.grad_of(ix);
    if (!dx) return;
    for (std::size_t i = 0; i < a.rows(); ++i) {
      double dot = 0.0;
      for (std::size_t j = 0; j < a.cols(); ++j) dot += g(i, j) * a(i, j);
      for (std::size_t j = 0; j < a.cols(); ++j) (*dx)(i, j) += a(i, j) * (g(i, j) - dot);
    }
  });
}

}  // namespace

Var softmax_rows(const Var& x) { return softmax_impl("softmax_rows", x, {}); }

Var masked_softmax_rows(const Var& x, std::span<const std::uint8_t> allowed) {
  if (allowed.size() != x.value().size()) {
    throw ShapeError("masked_softmax_rows: mask of " + std::to_string(allowed.size()) + " entries for input " +
                     shape_to_string(x.shape()));
  }
  return softmax_impl("masked_softmax_rows", x, allowed);
}

Var embedding_lookup(const Var& table, std::span<const int> ids) {
  const Tensor& tv = table.value();
  require_rank2("embedding_lookup", tv);
  const std::size_t d = tv.cols();
  Tensor out({ids.size(), d});
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] < 0 || static_cast<std::size_t>(ids[i]) >= tv.rows()) {
      throw LookupError("embedding_lookup: id " + std::to_string(ids[i]) + " at position " + std::to_string(i) +
                        " outside table of " + std::to_string(tv.rows()) + " rows");
    }
    const auto src = tv.row_span(static_cast<std::size_t>(ids[i]));
    std::copy(src.begin(), src.end(), out.row_span(i).begin());
  }
  const std::size_t it = table.id();
  std::vector<int> id_copy(ids.begin(), ids.end());
  return table.tape().record("embedding_lookup", std::move(out), {it},
                             [it, id_copy = std::move(id_copy)](Tape& t, std::size_t self) {
                               const Tensor& g = t.grad(self);
                               Tensor* dt = t.grad_of(it);
                               if (!dt) return;
                               for (std::size_t i = 0; i < id_copy.size(); ++i) {
                                 auto dst = dt->row_span(static_cast<std::size_t>(id_copy[i]));
                                 auto src = g.row_span(i);
                                 for (std::size_t j = 0; j < src.size(); ++j) dst[j] += src[j];
                               }
                             });
}

Var concat_rows(std::span<const Var> parts) { return concat_impl("concat_rows", parts, true); }
Var concat_cols(std::span<const Var> parts) { return concat_impl("concat_cols", parts, false); }

Var slice_rows(const Var& x, std::size_t begin, std::size_t count) {
  const Tensor& xv = x.value();
  require_rank2("slice_rows", xv);
  if (begin + count > xv.rows()) {
    throw ShapeError("slice_rows: rows [" + std::to_string(begin) + ", " + std::to_string(begin + count) +
                     ") outside " + shape_to_string(xv.shape()));
  }
  std::vector<std::size_t> rows(count);
  for (std::size_t i = 0; i < count; ++i) rows[i] = begin + i;
  return gather_rows(x, rows);
}

Var slice_cols(const Var& x, std::size_t begin, std::size_t count) {
  const Tensor& xv = x.value();
  require_rank2("slice_cols", xv);
  if (begin + count > xv.cols()) {
    throw ShapeError("slice_cols: cols [" + std::to_string(begin) + ", " + std::to_string(begin + count) +
                     ") outside " + shape_to_string(xv.shape()));
  }
  Tensor out({xv.rows(), count});
  for (std::size_t r = 0; r < xv.rows(); ++r)
    for (std::size_t c = 0; c < count; ++c) out(r, c) = xv(r, begin + c);
  const std::size_t ix = x.id();
  return x.tape().record("slice_cols", std::move(out), {ix}, [ix, begin](Tape& t, std::size_t self) {
    const Tensor& g = t.grad(self);
    if (Tensor* dx = t.grad_of(ix)) {
      for (std::size_t r = 0; r < g.rows(); ++r)
        for (std::size_t c = 0; c < g.cols(); ++c) (*dx)(r, begin + c) += g(r, c);
    }
  });
}

Var gather_rows(const Var& x, std::span<const std::size_t> rows) {
  const Tensor& xv = x.value();
  require_rank2("gather_rows", xv);
  Tensor out({rows.size(), xv.cols()});
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i] >= xv.rows()) {
      throw ShapeError("gather_rows: row " + std::to_string(rows[i]) + " outside " + shape_to_string(xv.shape()));
    }
    const auto src = xv.row_span(rows[i]);
    std::copy(src.begin(), src.end(), out.row_span(i).begin());
  }
  const std::size_t ix = x.id();
  std::vector<std::size_t> idx(rows.begin(), rows.end());
  return x.tape().record("gather_rows", std::move(out), {ix}, [ix, idx = std::move(idx)](Tape& t, std::size_t self) {
    const Tensor& g = t.grad(self);
    Tensor* dx = t.grad_of(ix);
    if (!dx) return;
    for (std::size_t i = 0; i < idx.size(); ++i) {
      auto dst = dx->row_span(idx[i]);
      auto src = g.row_span(i);
      for (std::size_t j = 0; j < src.size(); ++j) dst[j] += src[j];
    }
  });
}

Var reshape(const Var& x, Shape shape) {
  Tensor out = x.value().reshaped(std::move(shape));
  const std::size_t ix = x.id();
  return x.tape().record("reshape", std::move(out), {ix}, [ix](Tape& t, std::size_t self) {
    accumulate(t.grad_of(ix), t.grad(self));
  });
}

Var sum(const Var& x) {
  double s = 0.0;
  for (double v : x.value().data()) s += v;
  const std::size_t ix = x.id();
  return x.tape().record("sum", Tensor::scalar(s), {ix}, [ix](Tape& t, std::size_t self) {
    const double g = t.grad(self)[0];
    if (Tensor* dx = t.grad_of(ix))
      for (double& v : dx->data()) v += g;
  });
}

Var mean_rows(const Var& x) {
  const Tensor& xv = x.value();
  require_rank2("mean_rows", xv);
  if (xv.rows() == 0) throw ContractError("mean_rows: no rows");
  const std::size_t r = xv.rows(), c = xv.cols();
  Tensor out({1, c});
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) out[j] += xv(i, j);
  for (double& v : out.data()) v /= static_cast<double>(r);
  const std::size_t ix = x.id();
  return x.tape().record("mean_rows", std::move(out), {ix}, [ix, r](Tape& t, std::size_t self) {
    const Tensor& g = t.grad(self);
    Tensor* dx = t.grad_of(ix);
    if (!dx) return;
    const double inv = 1.0 / static_cast<double>(r);
    for (std::size_t i = 0; i < r; ++i)
      for (std::size_t j = 0; j < g.cols(); ++j) (*dx)(i, j) += g[j] * inv;
  });
}

Var pairwise_symmetric_features(const Var& h) {
  const Tensor& hv = h.value();
  require_rank2("pairwise_symmetric_features", hv);
  const std::size_t n = hv.rows(), d = hv.cols();
  Tensor out({n * n, 2 * d});
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      auto row = out.row_span(i * n + j);
      for (std::size_t k = 0; k < d; ++k) {
        row[k] = hv(i, k) * hv(j, k);
        row[d + k] = std::abs(hv(i, k) - hv(j, k));
      }
    }
  }
  const std::size_t ih = h.id();
  return h.tape().record("pairwise_symmetric_features", std::move(out), {ih}, [ih, n, d](Tape& t, std::size_t self) {
    const Tensor& g = t.grad(self);
    const Tensor& hv = t.value(ih);
    Tensor* dh = t.grad_of(ih);
    if (!dh) return;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        auto row = g.row_span(i * n + j);
        for (std::size_t k = 0; k < d; ++k) {
          (*dh)(i, k) += row[k] * hv(j, k);
          (*dh)(j, k) += row[k] * hv(i, k);
          const double diff = hv(i, k) - hv(j, k);
          const double sign = diff > 0 ? 1.0 : (diff < 0 ? -1.0 : 0.0);
          (*dh)(i, k) += row[d + k] * sign;
          (*dh)(j, k) -= row[d + k] * sign;
        }
      }
    }
  });
}

Var softmax_cross_entropy(const Var& logits, std::span<const int> targets, Reduction reduction) {
  const Tensor& lv = logits.value();
  require_rank2("softmax_cross_entropy", lv);
  const std::size_t r = lv.rows(), c = lv.cols();
  if (targets.size() != r) {
    throw ShapeError("softmax_cross_entropy: " + std::to_string(targets.size()) + " targets for logits " +
                     shape_to_string(lv.shape()));
  }
  if (r == 0) throw ContractError("softmax_cross_entropy: no target rows");
  Tensor probs({r, c});
  double total = 0.0;
  for (std::size_t i = 0; i < r; ++i) {
    if (targets[i] < 0 || static_cast<std::size_t>(targets[i]) >= c) {
      throw LookupError("softmax_cross_entropy: target " + std::to_string(targets[i]) + " outside " +
                        std::to_string(c) + " classes");
    }
    double mx = lv(i, 0);
    for (std::size_t j = 1; j < c; ++j) mx = std::max(mx, lv(i, j));
    double z = 0.0;
    for (std::size_t j = 0; j < c; ++j) {
      probs(i, j) = std::exp(lv(i, j) - mx);
      z += probs(i, j);
    }
    for (std::size_t j = 0; j < c; ++j) probs(i, j) /= z;
    total += (mx + std::log(z)) - lv(i, static_cast<std::size_t>(targets[i]));
  }
  const double factor = reduction == Reduction::Mean ? 1.0 / static_cast<double>(r) : 1.0;
  const std::size_t il = logits.id();
  std::vector<int> tgt(targets.begin(), targets.end());
  return logits.tape().record(
      "softmax_cross_entropy", Tensor::scalar(total * factor), {il},
      [il, factor, probs = std::move(probs), tgt = std::move(tgt)](Tape& t, std::size_t self) {
        const double g = t.grad(self)[0] * factor;
        Tensor* dl = t.grad_of(il);
        if (!dl) return;
        for (std::size_t i = 0; i < probs.rows(); ++i) {
          for (std::size_t j = 0; j < probs.cols(); ++j) (*dl)(i, j) += g * probs(i, j);
          (*dl)(i, static_cast<std::size_t>(tgt[i])) -= g;
        }
      });
}

Var bce_with_logits(const Var& logits, const Tensor& labels) {
  const Tensor& lv = logits.value();
  if (lv.shape() != labels.shape()) {
    throw ShapeError("bce_with_logits: logits " + shape_to_string(lv.shape()) + " vs labels " +
                     shape_to_string(labels.shape()));
  }
  if (lv.size() == 0) throw ContractError("bce_with_logits: no label slots");
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] != 0.0 && labels[i] != 1.0) {
      throw DataError("bce_with_logits: label slot " + std::to_string(i) + " is " + std::to_string(labels[i]) +
                      ", expected 0 or 1");
    }
  }
  double total = 0.0;
  for (std::size_t i = 0; i < lv.size(); ++i) {
    const double x = lv[i];
    total += std::max(x, 0.0) - x * labels[i] + std::log1p(std::exp(-std::abs(x)));
  }
  const double inv = 1.0 / static_cast<double>(lv.size());
  const std::size_t il = logits.id();
  return logits.tape().record("bce_with_logits", Tensor::scalar(total * inv), {il},
                              [il, inv, labels](Tape& t, std::size_t self) {
                                const double g = t.grad(self)[0] * inv;
                                const Tensor& lv = t.value(il);
                                Tensor* dl = t.grad_of(il);
                                if (!dl) return;
                                for (std::size_t i = 0; i < lv.size(); ++i) {
                                  const double x = lv[i];
                                  const double sig = x >= 0 ? 1.0 / (1.0 + std::exp(-x))
                                                            : std::exp(x) / (1.0 + std::exp(x));
                                  (*dl)[i] += g * (sig - labels[i]);
                                }
                              });
}

Var detach(const Var& x) { return x.tape().constant(x.value()); }

}  // namespace cfp::numerics
