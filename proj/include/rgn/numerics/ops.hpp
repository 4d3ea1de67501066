#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rgn/numerics/tape.hpp"

namespace rgn {

enum class PoolKind { avg, max };
enum class Activation { relu, sigmoid, tanh };

inline std::string_view to_string(PoolKind k) { return k == PoolKind::avg ? "avg" : "max"; }

inline PoolKind parse_pool_kind(std::string_view s) {
  if (s == "avg" || s == "mean") return PoolKind::avg;
  if (s == "max") return PoolKind::max;
  throw ConfigError("unknown pooling kind '" + std::string(s) + "' (expected avg or max)");
}

/// Half-open index range [begin, end).
struct IndexRange {
  std::size_t begin = 0;
  std::size_t end = 0;
  std::size_t size() const noexcept { return end - begin; }
  bool operator==(const IndexRange&) const = default;
};

// Norms below this are treated as zero by cosine() and normalize_rows().
inline constexpr real kNormFloor = real(1e-12);

// ---------------------------------------------------------------------------
// Scalar helpers, no tape involved.

inline real sigmoid(real z) {
  if (z >= 0) return real(1) / (real(1) + std::exp(-z));
  const real e = std::exp(z);
  return e / (real(1) + e);
}

// -[y log s(z) + (1 - y) log(1 - s(z))] in log-sum-exp form.
inline real bce_with_logit(real z, real y) {
  return std::max(z, real(0)) - z * y + std::log1p(std::exp(-std::abs(z)));
}

inline real dot(std::span<const real> a, std::span<const real> b) {
  real s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline real cosine(std::span<const real> a, std::span<const real> b) {
  if (a.size() != b.size()) {
    throw DimensionError("cosine of vectors with lengths " + std::to_string(a.size()) + " and " +
                         std::to_string(b.size()));
  }
  const real na = std::sqrt(dot(a, a));
  const real nb = std::sqrt(dot(b, b));
  if (na < kNormFloor || nb < kNormFloor) return 0;
  return dot(a, b) / (na * nb);
}

inline std::vector<real> softmax(std::span<const real> logits) {
  if (logits.empty()) throw DimensionError("softmax of an empty vector");
  const real mx = *std::max_element(logits.begin(), logits.end());
  std::vector<real> out(logits.size());
  real total = 0;
  for (std::size_t i = 0; i < logits.size(); ++i) total += out[i] = std::exp(logits[i] - mx);
  for (auto& v : out) v /= total;
  return out;
}

// ---------------------------------------------------------------------------
// Differentiable operations. Every op records one node; the backward closure
// reads saved values back from the tape and accumulates into input grads.

namespace detail {

inline Tape& same_tape(std::initializer_list<Var> vars) {
  Tape* t = nullptr;
  for (const auto& v : vars) {
    if (!v.tape) throw Error("tape", "operation on an unbound value");
    if (t && v.tape != t) throw Error("tape", "operation mixes values from different tapes");
    t = v.tape;
  }
  return *t;
}

inline std::string dims(const Tensor& t) {
  return std::to_string(t.rows()) + "x" + std::to_string(t.cols());
}

inline void accumulate(Tape& t, std::size_t id, std::span<const real> g) {
  if (!t.needs_grad(id)) return;
  auto dst = t.grad(id);
  for (std::size_t i = 0; i < g.size(); ++i) dst[i] += g[i];
}

}  // namespace detail

inline Var matmul(Var a, Var b) {
  Tape& t = detail::same_tape({a, b});
  const Tensor& A = a.value();
  const Tensor& B = b.value();
  const std::size_t r = A.rows(), c = A.cols(), k = B.cols();
  if (B.rows() != c) {
    throw DimensionError("matmul shape mismatch: " + detail::dims(A) + " x " + detail::dims(B));
  }
  Tensor out({r, k});
  for (std::size_t i = 0; i < r; ++i) {
    for (std::size_t p = 0; p < c; ++p) {
      const real av = A[i * c + p];
      if (av == 0) continue;
      for (std::size_t j = 0; j < k; ++j) out[i * k + j] += av * B[p * k + j];
    }
  }
  return t.record(std::move(out), {a.id, b.id}, [ai = a.id, bi = b.id, r, c, k](Tape& t, std::size_t self) {
    auto g = t.grad(self);
    const auto& A = t.value(ai);
    const auto& B = t.value(bi);
    if (t.needs_grad(ai)) {
      auto ga = t.grad(ai);
      for (std::size_t i = 0; i < r; ++i)
        for (std::size_t p = 0; p < c; ++p) {
          real s = 0;
          for (std::size_t j = 0; j < k; ++j) s += g[i * k + j] * B[p * k + j];
          ga[i * c + p] += s;
        }
    }
    if (t.needs_grad(bi)) {
      auto gb = t.grad(bi);
      for (std::size_t i = 0; i < r; ++i)
        for (std::size_t p = 0; p < c; ++p) {
          const real av = A[i * c + p];
          if (av == 0) continue;
          for (std::size_t j = 0; j < k; ++j) gb[p * k + j] += av * g[i * k + j];
        }
    }
  });
}

inline Var add(Var a, Var b) {
  Tape& t = detail::same_tape({a, b});
  const Tensor& A = a.value();
  const Tensor& B = b.value();
  if (A.rows() != B.rows() || A.cols() != B.cols()) {
    throw DimensionError("add shape mismatch: " + detail::dims(A) + " vs " + detail::dims(B));
  }
  Tensor out({A.rows(), A.cols()});
  for (std::size_t i = 0; i < A.size(); ++i) out[i] = A[i] + B[i];
  return t.record(std::move(out), {a.id, b.id}, [ai = a.id, bi = b.id](Tape& t, std::size_t self) {
    detail::accumulate(t, ai, t.grad(self));
    detail::accumulate(t, bi, t.grad(self));
  });
}

// x (n x c) plus a 1 x c row added to every row.
inline Var add_bias(Var x, Var bias) {
  Tape& t = detail::same_tape({x, bias});
  const Tensor& X = x.value();
  const Tensor& B = bias.value();
  const std::size_t n = X.rows(), c = X.cols();
  if (B.size() != c) {
    throw DimensionError("bias of shape " + detail::dims(B) + " cannot be added to " + detail::dims(X));
  }
  Tensor out({n, c});
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < c; ++j) out[i * c + j] = X[i * c + j] + B[j];
  return t.record(std::move(out), {x.id, bias.id}, [xi = x.id, bi = bias.id, n, c](Tape& t, std::size_t self) {
    auto g = t.grad(self);
    detail::accumulate(t, xi, g);
    if (t.needs_grad(bi)) {
      auto gb = t.grad(bi);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < c; ++j) gb[j] += g[i * c + j];
    }
  });
}

inline Var elementwise(Activation kind, Var x) {
  Tape& t = detail::same_tape({x});
  const Tensor& X = x.value();
  Tensor out({X.rows(), X.cols()});
  for (std::size_t i = 0; i < X.size(); ++i) {
    switch (kind) {
      case Activation::relu: out[i] = X[i] > 0 ? X[i] : real(0); break;
      case Activation::sigmoid: out[i] = sigmoid(X[i]); break;
      case Activation::tanh: out[i] = std::tanh(X[i]); break;
    }
  }
  return t.record(std::move(out), {x.id}, [xi = x.id, kind](Tape& t, std::size_t self) {
    if (!t.needs_grad(xi)) return;
    auto g = t.grad(self);
    auto gx = t.grad(xi);
    const auto& X = t.value(xi);
    const auto& Y = t.value(self);
    for (std::size_t i = 0; i < g.size(); ++i) {
      switch (kind) {
        case Activation::relu: gx[i] += X[i] > 0 ? g[i] : real(0); break;
        case Activation::sigmoid: gx[i] += g[i] * Y[i] * (1 - Y[i]); break;
        case Activation::tanh: gx[i] += g[i] * (1 - Y[i] * Y[i]); break;
      }
    }
  });
}

inline Var relu(Var x) { return elementwise(Activation::relu, x); }
inline Var sigmoid(Var x) { return elementwise(Activation::sigmoid, x); }
inline Var tanh(Var x) { return elementwise(Activation::tanh, x); }

// axis 0 stacks rows, axis 1 joins columns.
inline Var concat(std::span<const Var> parts, std::size_t axis) {
  if (parts.empty()) throw DimensionError("concat of an empty list");
  if (axis > 1) throw DimensionError("concat axis must be 0 or 1");
  Tape& t = detail::same_tape({parts.front()});
  std::vector<std::size_t> ids;
  std::size_t rows = 0, cols = 0;
  for (const auto& p : parts) {
    detail::same_tape({parts.front(), p});
    const Tensor& v = p.value();
    ids.push_back(p.id);
    if (axis == 0) {
      if (cols == 0) cols = v.cols();
      if (v.cols() != cols) {
        throw DimensionError("concat along rows needs equal widths, got " + std::to_string(cols) +
                             " and " + detail::dims(v));
      }
      rows += v.rows();
    } else {
      if (rows == 0) rows = v.rows();
      if (v.rows() != rows) {
        throw DimensionError("concat along columns needs equal heights, got " + std::to_string(rows) +
                             " and " + detail::dims(v));
      }
      cols += v.cols();
    }
  }
  Tensor out({rows, cols});
  std::size_t offset = 0;
  for (const auto& p : parts) {
    const Tensor& v = p.value();
    for (std::size_t i = 0; i < v.rows(); ++i)
      for (std::size_t j = 0; j < v.cols(); ++j) {
        if (axis == 0) out[(offset + i) * cols + j] = v[i * v.cols() + j];
        else out[i * cols + offset + j] = v[i * v.cols() + j];
      }
    offset += axis == 0 ? v.rows() : v.cols();
  }
  auto inputs = ids;
  return t.record(std::move(out), std::move(inputs), [ids, axis, cols](Tape& t, std::size_t self) {
    auto g = t.grad(self);
    std::size_t offset = 0;
    for (auto id : ids) {
      const auto& v = t.value(id);
      const std::size_t r = v.rows(), c = v.cols();
      if (t.needs_grad(id)) {
        auto gi = t.grad(id);
        for (std::size_t i = 0; i < r; ++i)
          for (std::size_t j = 0; j < c; ++j)
            gi[i * c + j] += axis == 0 ? g[(offset + i) * cols + j] : g[i * cols + offset + j];
      }
      offset += axis == 0 ? r : c;
    }
  });
}

inline Var concat(std::initializer_list<Var> parts, std::size_t axis) {
  return concat(std::span<const Var>(parts.begin(), parts.size()), axis);
}

inline Var transpose(Var x) {
  Tape& t = detail::same_tape({x});
  const Tensor& X = x.value();
  const std::size_t r = X.rows(), c = X.cols();
  Tensor out({c, r});
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) out[j * r + i] = X[i * c + j];
  return t.record(std::move(out), {x.id}, [xi = x.id, r, c](Tape& t, std::size_t self) {
    if (!t.needs_grad(xi)) return;
    auto g = t.grad(self);
    auto gx = t.grad(xi);
    for (std::size_t i = 0; i < r; ++i)
      for (std::size_t j = 0; j < c; ++j) gx[i * c + j] += g[j * r + i];
  });
}

inline Var reshape(Var x, std::size_t rows, std::size_t cols) {
  Tape& t = detail::same_tape({x});
  const Tensor& X = x.value();
  if (rows * cols != X.size()) {
    throw DimensionError("cannot reshape " + detail::dims(X) + " to " + std::to_string(rows) + "x" +
                         std::to_string(cols));
  }
  Tensor out({rows, cols}, X.values());
  return t.record(std::move(out), {x.id}, [xi = x.id](Tape& t, std::size_t self) {
    detail::accumulate(t, xi, t.grad(self));
  });
}

// 1 x c row repeated n times.
inline Var repeat_rows(Var v, std::size_t n) {
  Tape& t = detail::same_tape({v});
  const Tensor& V = v.value();
  if (V.rows() != 1) throw DimensionError("repeat_rows expects a single row, got " + detail::dims(V));
  const std::size_t c = V.cols();
  Tensor out({n, c});
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < c; ++j) out[i * c + j] = V[j];
  return t.record(std::move(out), {v.id}, [vi = v.id, n, c](Tape& t, std::size_t self) {
    if (!t.needs_grad(vi)) return;
    auto g = t.grad(self);
    auto gv = t.grad(vi);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < c; ++j) gv[j] += g[i * c + j];
  });
}

// Pools each group of rows into one output row. Max routes the gradient to the
// lowest-index maximiser of every column.
inline Var segment_pool(PoolKind kind, Var x, std::span<const IndexRange> groups) {
  Tape& t = detail::same_tape({x});
  const Tensor& X = x.value();
  const std::size_t c = X.cols();
  const std::size_t n_groups = groups.size();
  if (n_groups == 0) throw DimensionError("pool over no groups");
  Tensor out({n_groups, c});
  std::vector<std::size_t> argmax;
  if (kind == PoolKind::max) argmax.resize(n_groups * c);
  for (std::size_t gidx = 0; gidx < n_groups; ++gidx) {
    const auto& grp = groups[gidx];
    if (grp.size() == 0) throw DimensionError("pool over an empty set of rows");
    if (grp.end > X.rows()) throw DimensionError("pool group exceeds row count of " + detail::dims(X));
    for (std::size_t j = 0; j < c; ++j) {
      if (kind == PoolKind::avg) {
        real s = 0;
        for (std::size_t i = grp.begin; i < grp.end; ++i) s += X[i * c + j];
        out[gidx * c + j] = s / real(grp.size());
      } else {
        std::size_t best = grp.begin;
        for (std::size_t i = grp.begin + 1; i < grp.end; ++i)
          if (X[i * c + j] > X[best * c + j]) best = i;
        argmax[gidx * c + j] = best;
        out[gidx * c + j] = X[best * c + j];
      }
    }
  }
  std::vector<IndexRange> saved(groups.begin(), groups.end());
  return t.record(std::move(out), {x.id},
                  [xi = x.id, kind, c, saved = std::move(saved), argmax = std::move(argmax)](Tape& t, std::size_t self) {
                    if (!t.needs_grad(xi)) return;
                    auto g = t.grad(self);
                    auto gx = t.grad(xi);
                    for (std::size_t gidx = 0; gidx < saved.size(); ++gidx) {
                      const auto& grp = saved[gidx];
                      for (std::size_t j = 0; j < c; ++j) {
                        const real gv = g[gidx * c + j];
                        if (kind == PoolKind::avg) {
                          const real share = gv / real(grp.size());
                          for (std::size_t i = grp.begin; i < grp.end; ++i) gx[i * c + j] += share;
                        } else {
                          gx[argmax[gidx * c + j] * c + j] += gv;
                        }
                      }
                    }
                  });
}

// Elementwise pooling over all rows of x; returns one row.
inline Var pool(PoolKind kind, Var x) {
  const IndexRange all{0, x.rows()};
  return segment_pool(kind, x, std::span<const IndexRange>(&all, 1));
}

inline Var gather_rows(Var x, std::span<const std::size_t> index) {
  Tape& t = detail::same_tape({x});
  const Tensor& X = x.value();
  const std::size_t c = X.cols();
  if (index.empty()) throw DimensionError("gather_rows with an empty index");
  Tensor out({index.size(), c});
  for (std::size_t i = 0; i < index.size(); ++i) {
    if (index[i] >= X.rows()) throw DimensionError("gather_rows index out of range for " + detail::dims(X));
    for (std::size_t j = 0; j < c; ++j) out[i * c + j] = X[index[i] * c + j];
  }
  std::vector<std::size_t> saved(index.begin(), index.end());
  return t.record(std::move(out), {x.id}, [xi = x.id, c, saved = std::move(saved)](Tape& t, std::size_t self) {
    if (!t.needs_grad(xi)) return;
    auto g = t.grad(self);
    auto gx = t.grad(xi);
    for (std::size_t i = 0; i < saved.size(); ++i)
      for (std::size_t j = 0; j < c; ++j) gx[saved[i] * c + j] += g[i * c + j];
  });
}

// Softmax within each group of a column of scores (n x 1 or 1 x n).
inline Var segment_softmax(Var scores, std::span<const IndexRange> groups) {
  Tape& t = detail::same_tape({scores});
  const Tensor& S = scores.value();
  if (S.rows() != 1 && S.cols() != 1) {
    throw DimensionError("softmax expects a vector, got " + detail::dims(S));
  }
  Tensor out({S.rows(), S.cols()});
  for (const auto& grp : groups) {
    if (grp.size() == 0) throw DimensionError("softmax over an empty group");
    if (grp.end > S.size()) throw DimensionError("softmax group exceeds vector length");
    auto y = softmax(S.data().subspan(grp.begin, grp.size()));
    std::copy(y.begin(), y.end(), out.values().begin() + std::ptrdiff_t(grp.begin));
  }
  std::vector<IndexRange> saved(groups.begin(), groups.end());
  return t.record(std::move(out), {scores.id}, [si = scores.id, saved = std::move(saved)](Tape& t, std::size_t self) {
    if (!t.needs_grad(si)) return;
    auto g = t.grad(self);
    auto gs = t.grad(si);
    const auto& Y = t.value(self);
    for (const auto& grp : saved) {
      real inner = 0;
      for (std::size_t i = grp.begin; i < grp.end; ++i) inner += Y[i] * g[i];
      for (std::size_t i = grp.begin; i < grp.end; ++i) gs[i] += Y[i] * (g[i] - inner);
    }
  });
}

inline Var softmax(Var logits) {
  const IndexRange all{0, logits.size()};
  if (all.size() == 0) throw DimensionError("softmax of an empty vector");
  return segment_softmax(logits, std::span<const IndexRange>(&all, 1));
}

// out[g] = sum over rows s in group g of weights[s] * x[s].
inline Var segment_weighted_sum(Var x, Var weights, std::span<const IndexRange> groups) {
  Tape& t = detail::same_tape({x, weights});
  const Tensor& X = x.value();
  const Tensor& W = weights.value();
  const std::size_t c = X.cols();
  if (W.size() != X.rows()) {
    throw DimensionError("weighted sum needs one weight per row: " + detail::dims(W) + " vs " +
                         detail::dims(X));
  }
  Tensor out({groups.size(), c});
  for (std::size_t gidx = 0; gidx < groups.size(); ++gidx) {
    const auto& grp = groups[gidx];
    if (grp.size() == 0 || grp.end > X.rows()) throw DimensionError("invalid group in weighted sum");
    for (std::size_t i = grp.begin; i < grp.end; ++i)
      for (std::size_t j = 0; j < c; ++j) out[gidx * c + j] += W[i] * X[i * c + j];
  }
  std::vector<IndexRange> saved(groups.begin(), groups.end());
  return t.record(std::move(out), {x.id, weights.id},
                  [xi = x.id, wi = weights.id, c, saved = std::move(saved)](Tape& t, std::size_t self) {
                    auto g = t.grad(self);
                    const auto& X = t.value(xi);
                    const auto& W = t.value(wi);
                    const bool gx_on = t.needs_grad(xi), gw_on = t.needs_grad(wi);
                    for (std::size_t gidx = 0; gidx < saved.size(); ++gidx) {
                      for (std::size_t i = saved[gidx].begin; i < saved[gidx].end; ++i) {
                        real dw = 0;
                        for (std::size_t j = 0; j < c; ++j) {
                          const real gv = g[gidx * c + j];
                          if (gx_on) t.grad(xi)[i * c + j] += W[i] * gv;
                          dw += X[i * c + j] * gv;
                        }
                        if (gw_on) t.grad(wi)[i] += dw;
                      }
                    }
                  });
}

// Each row divided by its Euclidean norm; rows with norm below kNormFloor map
// to zero with zero gradient.
inline Var normalize_rows(Var x) {
  Tape& t = detail::same_tape({x});
  const Tensor& X = x.value();
  const std::size_t r = X.rows(), c = X.cols();
  Tensor out({r, c});
  std::vector<real> norms(r);
  for (std::size_t i = 0; i < r; ++i) {
    const real n = std::sqrt(dot(X.row_span(i), X.row_span(i)));
    norms[i] = n;
    if (n < kNormFloor) continue;
    for (std::size_t j = 0; j < c; ++j) out[i * c + j] = X[i * c + j] / n;
  }
  return t.record(std::move(out), {x.id}, [xi = x.id, r, c, norms = std::move(norms)](Tape& t, std::size_t self) {
    if (!t.needs_grad(xi)) return;
    auto g = t.grad(self);
    auto gx = t.grad(xi);
    const auto& Y = t.value(self);
    for (std::size_t i = 0; i < r; ++i) {
      if (norms[i] < kNormFloor) continue;
      real yg = 0;
      for (std::size_t j = 0; j < c; ++j) yg += Y[i * c + j] * g[i * c + j];
      for (std::size_t j = 0; j < c; ++j) gx[i * c + j] += (g[i * c + j] - Y[i * c + j] * yg) / norms[i];
    }
  });
}

// Cosine similarity of two equal-length vectors as a 1 x 1 value.
inline Var cosine(Var a, Var b) {
  Tape& t = detail::same_tape({a, b});
  const Tensor& A = a.value();
  const Tensor& B = b.value();
  if (A.size() != B.size()) {
    throw DimensionError("cosine of vectors with shapes " + detail::dims(A) + " and " + detail::dims(B));
  }
  const real na = std::sqrt(dot(A.data(), A.data()));
  const real nb = std::sqrt(dot(B.data(), B.data()));
  const bool degenerate = na < kNormFloor || nb < kNormFloor;
  const real cs = degenerate ? real(0) : dot(A.data(), B.data()) / (na * nb);
  return t.record(Tensor::scalar(cs), {a.id, b.id},
                  [ai = a.id, bi = b.id, na, nb, cs, degenerate](Tape& t, std::size_t self) {
                    if (degenerate) return;
                    const real g = t.grad(self)[0];
                    const auto& A = t.value(ai);
                    const auto& B = t.value(bi);
                    if (t.needs_grad(ai)) {
                      auto ga = t.grad(ai);
                      for (std::size_t i = 0; i < A.size(); ++i)
                        ga[i] += g * (B[i] / (na * nb) - cs * A[i] / (na * na));
                    }
                    if (t.needs_grad(bi)) {
                      auto gb = t.grad(bi);
                      for (std::size_t i = 0; i < B.size(); ++i)
                        gb[i] += g * (A[i] / (na * nb) - cs * B[i] / (nb * nb));
                    }
                  });
}

inline Var sum(Var x) {
  Tape& t = detail::same_tape({x});
  real s = 0;
  for (auto v : x.value().data()) s += v;
  return t.record(Tensor::scalar(s), {x.id}, [xi = x.id](Tape& t, std::size_t self) {
    if (!t.needs_grad(xi)) return;
    const real g = t.grad(self)[0];
    for (auto& v : t.grad(xi)) v += g;
  });
}

inline Var scale(Var x, real factor) {
  Tape& t = detail::same_tape({x});
  const Tensor& X = x.value();
  Tensor out({X.rows(), X.cols()});
  for (std::size_t i = 0; i < X.size(); ++i) out[i] = X[i] * factor;
  return t.record(std::move(out), {x.id}, [xi = x.id, factor](Tape& t, std::size_t self) {
    if (!t.needs_grad(xi)) return;
    auto g = t.grad(self);
    auto gx = t.grad(xi);
    for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i] * factor;
  });
}

inline Var mean(Var x) { return scale(sum(x), real(1) / real(x.size())); }

// Mean binary cross-entropy of a vector of logits against 0/1 labels.
inline Var bce_with_logits(Var logits, std::span<const real> labels) {
  Tape& t = detail::same_tape({logits});
  const Tensor& Z = logits.value();
  if (Z.size() != labels.size()) {
    throw DimensionError("bce: " + std::to_string(Z.size()) + " logits vs " + std::to_string(labels.size()) +
                         " labels");
  }
  if (labels.empty()) throw DimensionError("bce over an empty batch");
  real total = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] != 0 && labels[i] != 1) throw DataError("labels must be 0 or 1");
    total += bce_with_logit(Z[i], labels[i]);
  }
  const real n = real(labels.size());
  std::vector<real> saved(labels.begin(), labels.end());
  return t.record(Tensor::scalar(total / n), {logits.id},
                  [zi = logits.id, n, saved = std::move(saved)](Tape& t, std::size_t self) {
                    if (!t.needs_grad(zi)) return;
                    const real g = t.grad(self)[0];
                    const auto& Z = t.value(zi);
                    auto gz = t.grad(zi);
                    for (std::size_t i = 0; i < saved.size(); ++i) gz[i] += g * (sigmoid(Z[i]) - saved[i]) / n;
                  });
}

}  // namespace rgn
