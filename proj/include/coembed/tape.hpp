// Copyright 2026 The coembed Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Define-by-run reverse-mode differentiation over DenseMatrix values.
//
// A Tape records every operation in execution order. Each Var is a handle
// (tape pointer + node index) to one recorded value. Calling
// Tape::backward(loss) walks the records in reverse exactly once and
// accumulates gradients into every node that depends on a leaf. Sparse
// operands are constant data: only dense leaves carry gradients.

#ifndef COEMBED_TAPE_HPP_
#define COEMBED_TAPE_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "coembed/dense.hpp"
#include "coembed/errors.hpp"
#include "coembed/sparse.hpp"

namespace coembed::ad {

inline constexpr double kSigmoidClamp = 30.0;
inline constexpr double kLogFloor = 1e-12;

enum class OpKind {
  kLeaf,
  kConstant,
  kMatmul,
  kMatmulNT,
  kSpmm,
  kAdd,
  kAddRowBias,
  kSub,
  kMul,
  kScale,
  kAddScalar,
  kTanh,
  kSigmoid,
  kExp,
  kLog,
  kClamp,
  kRowSoftmax,
  kRowLogSoftmax,
  kConcatCols,
  kSliceCols,
  kSliceRows,
  kRowGather,
  kRowSum,
  kSum,
  kWeightedSum,
  kBernoulliEntries,
};

inline const char* op_name(OpKind k);
inline std::optional<OpKind> op_from_name(const std::string& name);

class Tape;

struct Var {
  Tape* tape = nullptr;
  std::size_t id = 0;

  const DenseMatrix& value() const;
  std::size_t rows() const { return value().rows(); }
  std::size_t cols() const { return value().cols(); }
  double scalar() const;
};

// A constant sparse operand together with its transpose, built once and
// shared by every spmm record that uses it.
struct SparseOperand {
  explicit SparseOperand(SparseMatrix s)
      : matrix(std::move(s)), transposed(matrix.transposed()) {}
  SparseMatrix matrix;
  SparseMatrix transposed;
};
using SparseRef = std::shared_ptr<const SparseOperand>;

inline SparseRef make_sparse(SparseMatrix s) {
  return std::make_shared<const SparseOperand>(std::move(s));
}

// Observed entry of a matrix of Bernoulli logits.
struct BinaryEntry {
  std::size_t row;
  std::size_t col;
  double target;  // 0 or 1
};

class Tape {
 public:
  using BackwardFn = std::function<void(Tape&, const DenseMatrix& grad_out)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var leaf(DenseMatrix value) { return push(OpKind::kLeaf, std::move(value), true, {}); }
  Var constant(DenseMatrix value) {
    return push(OpKind::kConstant, std::move(value), false, {});
  }

  const DenseMatrix& value(Var v) const { return nodes_.at(v.id).value; }

  // Gradient of the last backward() loss with respect to v. Nodes that are
  // not on any path to the loss report zeros.
  DenseMatrix grad(Var v) const {
    const Node& n = nodes_.at(v.id);
    if (n.grad) return *n.grad;
    return DenseMatrix::zeros_like(n.value);
  }

  bool requires_grad(Var v) const { return nodes_.at(v.id).requires_grad; }
  OpKind kind(Var v) const { return nodes_.at(v.id).kind; }
  std::size_t size() const { return nodes_.size(); }

  void backward(Var loss) {
    check_owner(loss);
    const DenseMatrix& lv = nodes_[loss.id].value;
    if (lv.rows() != 1 || lv.cols() != 1) {
      throw ShapeError("backward: loss must be 1x1, got " + lv.shape_str());
    }
    for (auto& n : nodes_) n.grad.reset();
    nodes_[loss.id].grad = DenseMatrix(1, 1, 1.0);
    for (std::size_t i = loss.id + 1; i-- > 0;) {
      Node& n = nodes_[i];
      if (!n.requires_grad || !n.grad || !n.backward) continue;
      scale_ = (fault_ && *fault_ == n.kind) ? fault_scale_ : 1.0;
      const DenseMatrix g = *n.grad;
      n.backward(*this, g);
    }
    scale_ = 1.0;
  }

  // Fault injection for verifying the gradient checker: every gradient
  // contribution produced by ops of `kind` is multiplied by `scale`.
  void inject_fault(OpKind kind, double scale) {
    fault_ = kind;
    fault_scale_ = scale;
  }

  // Internal API used by the op functions below.
  Var push(OpKind kind, DenseMatrix value, bool requires_grad, BackwardFn fn) {
    nodes_.push_back(Node{kind, std::move(value), requires_grad, std::move(fn), std::nullopt});
    return Var{this, nodes_.size() - 1};
  }

  void accumulate(Var v, const DenseMatrix& g) {
    Node& n = nodes_[v.id];
    if (!n.requires_grad) return;
    n.value.require_same_shape(g, "accumulate");
    if (!n.grad) n.grad = DenseMatrix::zeros_like(n.value);
    auto& dst = n.grad->data();
    const auto& src = g.data();
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += scale_ * src[i];
  }

  void check_owner(Var v) const {
    if (v.tape != this || v.id >= nodes_.size()) {
      throw std::logic_error("Var does not belong to this tape");
    }
  }

 private:
  struct Node {
    OpKind kind;
    DenseMatrix value;
    bool requires_grad;
    BackwardFn backward;
    std::optional<DenseMatrix> grad;
  };

  std::vector<Node> nodes_;
  std::optional<OpKind> fault_;
  double fault_scale_ = 1.0;
  double scale_ = 1.0;
};

inline const DenseMatrix& Var::value() const { return tape->value(*this); }
inline double Var::scalar() const {
  const auto& v = value();
  if (v.size() != 1) throw ShapeError("scalar(): value is " + v.shape_str());
  return v.data()[0];
}

namespace detail {

inline Tape& same_tape(Var a, Var b) {
  if (a.tape == nullptr || a.tape != b.tape) {
    throw std::logic_error("operands recorded on different tapes");
  }
  return *a.tape;
}

inline bool any_grad(std::initializer_list<Var> vs) {
  for (Var v : vs)
    if (v.tape->requires_grad(v)) return true;
  return false;
}

template <typename F>
DenseMatrix map(const DenseMatrix& x, F f) {
  DenseMatrix out = DenseMatrix::zeros_like(x);
  for (std::size_t i = 0; i < x.size(); ++i) out.data()[i] = f(x.data()[i]);
  return out;
}

inline double stable_sigmoid(double x) {
  x = std::clamp(x, -kSigmoidClamp, kSigmoidClamp);
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

// log(1 + exp(x)) without overflow.
inline double softplus(double x) {
  return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

}  // namespace detail

inline Var matmul(Var a, Var b) {
  Tape& t = detail::same_tape(a, b);
  DenseMatrix out = coembed::matmul(a.value(), b.value());
  return t.push(OpKind::kMatmul, std::move(out), detail::any_grad({a, b}),
                [a, b](Tape& tp, const DenseMatrix& g) {
                  if (tp.requires_grad(a)) tp.accumulate(a, matmul_nt(g, b.value()));
                  if (tp.requires_grad(b)) tp.accumulate(b, matmul_tn(a.value(), g));
                });
}

// a * b^T
inline Var matmul_nt(Var a, Var b) {
  Tape& t = detail::same_tape(a, b);
  DenseMatrix out = coembed::matmul_nt(a.value(), b.value());
  return t.push(OpKind::kMatmulNT, std::move(out), detail::any_grad({a, b}),
                [a, b](Tape& tp, const DenseMatrix& g) {
                  if (tp.requires_grad(a)) tp.accumulate(a, coembed::matmul(g, b.value()));
                  if (tp.requires_grad(b)) tp.accumulate(b, matmul_tn(g, a.value()));
                });
}

// Constant sparse matrix times a dense node.
inline Var spmm(const SparseRef& s, Var d) {
  DenseMatrix out = coembed::spmm(s->matrix, d.value());
  return d.tape->push(OpKind::kSpmm, std::move(out), detail::any_grad({d}),
                      [s, d](Tape& tp, const DenseMatrix& g) {
                        tp.accumulate(d, coembed::spmm(s->transposed, g));
                      });
}

inline Var add(Var a, Var b) {
  Tape& t = detail::same_tape(a, b);
  a.value().require_same_shape(b.value(), "add");
  DenseMatrix out = a.value();
  out += b.value();
  return t.push(OpKind::kAdd, std::move(out), detail::any_grad({a, b}),
                [a, b](Tape& tp, const DenseMatrix& g) {
                  tp.accumulate(a, g);
                  tp.accumulate(b, g);
                });
}

// a (r x c) + bias (1 x c) broadcast over rows.
inline Var add_row_bias(Var a, Var bias) {
  Tape& t = detail::same_tape(a, bias);
  const auto& av = a.value();
  const auto& bv = bias.value();
  if (bv.rows() != 1 || bv.cols() != av.cols()) {
    throw ShapeError("add_row_bias: " + av.shape_str() + " + " + bv.shape_str());
  }
  DenseMatrix out = av;
  for (std::size_t i = 0; i < out.rows(); ++i)
    for (std::size_t j = 0; j < out.cols(); ++j) out(i, j) += bv(0, j);
  return t.push(OpKind::kAddRowBias, std::move(out), detail::any_grad({a, bias}),
                [a, bias](Tape& tp, const DenseMatrix& g) {
                  tp.accumulate(a, g);
                  if (tp.requires_grad(bias)) {
                    DenseMatrix gb(1, g.cols());
                    for (std::size_t i = 0; i < g.rows(); ++i)
                      for (std::size_t j = 0; j < g.cols(); ++j) gb(0, j) += g(i, j);
                    tp.accumulate(bias, gb);
                  }
                });
}

inline Var sub(Var a, Var b) {
  Tape& t = detail::same_tape(a, b);
  a.value().require_same_shape(b.value(), "sub");
  DenseMatrix out = a.value();
  for (std::size_t i = 0; i < out.size(); ++i) out.data()[i] -= b.value().data()[i];
  return t.push(OpKind::kSub, std::move(out), detail::any_grad({a, b}),
                [a, b](Tape& tp, const DenseMatrix& g) {
                  tp.accumulate(a, g);
                  if (tp.requires_grad(b)) {
                    DenseMatrix ng = detail::map(g, [](double x) { return -x; });
                    tp.accumulate(b, ng);
                  }
                });
}

// Elementwise product.
inline Var mul(Var a, Var b) {
  Tape& t = detail::same_tape(a, b);
  a.value().require_same_shape(b.value(), "mul");
  DenseMatrix out = a.value();
  for (std::size_t i = 0; i < out.size(); ++i) out.data()[i] *= b.value().data()[i];
  return t.push(OpKind::kMul, std::move(out), detail::any_grad({a, b}),
                [a, b](Tape& tp, const DenseMatrix& g) {
                  if (tp.requires_grad(a)) {
                    DenseMatrix ga = g;
                    for (std::size_t i = 0; i < ga.size(); ++i) ga.data()[i] *= b.value().data()[i];
                    tp.accumulate(a, ga);
                  }
                  if (tp.requires_grad(b)) {
                    DenseMatrix gb = g;
                    for (std::size_t i = 0; i < gb.size(); ++i) gb.data()[i] *= a.value().data()[i];
                    tp.accumulate(b, gb);
                  }
                });
}

inline Var scale(Var a, double c) {
  DenseMatrix out = detail::map(a.value(), [c](double x) { return c * x; });
  return a.tape->push(OpKind::kScale, std::move(out), detail::any_grad({a}),
                      [a, c](Tape& tp, const DenseMatrix& g) {
                        tp.accumulate(a, detail::map(g, [c](double x) { return c * x; }));
                      });
}

inline Var add_scalar(Var a, double c) {
  DenseMatrix out = detail::map(a.value(), [c](double x) { return x + c; });
  return a.tape->push(OpKind::kAddScalar, std::move(out), detail::any_grad({a}),
                      [a](Tape& tp, const DenseMatrix& g) { tp.accumulate(a, g); });
}

inline Var tanh(Var a) {
  DenseMatrix out = detail::map(a.value(), [](double x) { return std::tanh(x); });
  const Tape& t = *a.tape;
  const std::size_t self = t.size();
  return a.tape->push(OpKind::kTanh, std::move(out), detail::any_grad({a}),
                      [a, self](Tape& tp, const DenseMatrix& g) {
                        const DenseMatrix& y = tp.value(Var{&tp, self});
                        DenseMatrix ga = g;
                        for (std::size_t i = 0; i < ga.size(); ++i) {
                          const double yi = y.data()[i];
                          ga.data()[i] *= 1.0 - yi * yi;
                        }
                        tp.accumulate(a, ga);
                      });
}

// Inputs are clamped to [-30, 30]; the gradient is zero outside.
inline Var sigmoid(Var a) {
  DenseMatrix out = detail::map(a.value(), detail::stable_sigmoid);
  const std::size_t self = a.tape->size();
  return a.tape->push(OpKind::kSigmoid, std::move(out), detail::any_grad({a}),
                      [a, self](Tape& tp, const DenseMatrix& g) {
                        const DenseMatrix& y = tp.value(Var{&tp, self});
                        const DenseMatrix& x = a.value();
                        DenseMatrix ga = g;
                        for (std::size_t i = 0; i < ga.size(); ++i) {
                          const double xi = x.data()[i];
                          const double yi = y.data()[i];
                          ga.data()[i] *= std::abs(xi) > kSigmoidClamp ? 0.0 : yi * (1.0 - yi);
                        }
                        tp.accumulate(a, ga);
                      });
}

inline Var exp(Var a) {
  DenseMatrix out = detail::map(a.value(), [](double x) { return std::exp(x); });
  const std::size_t self = a.tape->size();
  return a.tape->push(OpKind::kExp, std::move(out), detail::any_grad({a}),
                      [a, self](Tape& tp, const DenseMatrix& g) {
                        const DenseMatrix& y = tp.value(Var{&tp, self});
                        DenseMatrix ga = g;
                        for (std::size_t i = 0; i < ga.size(); ++i) ga.data()[i] *= y.data()[i];
                        tp.accumulate(a, ga);
                      });
}

// log(max(x, 1e-12)); gradient is zero where the floor is active.
inline Var log(Var a) {
  DenseMatrix out = detail::map(a.value(), [](double x) { return std::log(std::max(x, kLogFloor)); });
  return a.tape->push(OpKind::kLog, std::move(out), detail::any_grad({a}),
                      [a](Tape& tp, const DenseMatrix& g) {
                        const DenseMatrix& x = a.value();
                        DenseMatrix ga = g;
                        for (std::size_t i = 0; i < ga.size(); ++i) {
                          const double xi = x.data()[i];
                          ga.data()[i] = xi > kLogFloor ? ga.data()[i] / xi : 0.0;
                        }
                        tp.accumulate(a, ga);
                      });
}

inline Var clamp(Var a, double lo, double hi) {
  DenseMatrix out = detail::map(a.value(), [lo, hi](double x) { return std::clamp(x, lo, hi); });
  return a.tape->push(OpKind::kClamp, std::move(out), detail::any_grad({a}),
                      [a, lo, hi](Tape& tp, const DenseMatrix& g) {
                        const DenseMatrix& x = a.value();
                        DenseMatrix ga = g;
                        for (std::size_t i = 0; i < ga.size(); ++i) {
                          const double xi = x.data()[i];
                          if (xi < lo || xi > hi) ga.data()[i] = 0.0;
                        }
                        tp.accumulate(a, ga);
                      });
}

inline DenseMatrix row_softmax_value(const DenseMatrix& x) {
  DenseMatrix y = DenseMatrix::zeros_like(x);
  for (std::size_t i = 0; i < x.rows(); ++i) {
    const auto xr = x.row(i);
    auto yr = y.row(i);
    const double m = *std::max_element(xr.begin(), xr.end());
    double s = 0.0;
    for (std::size_t j = 0; j < xr.size(); ++j) {
      yr[j] = std::exp(xr[j] - m);
      s += yr[j];
    }
    for (double& v : yr) v /= s;
  }
  return y;
}

inline Var row_softmax(Var a) {
  if (a.cols() == 0) throw ShapeError("row_softmax: zero columns");
  DenseMatrix out = row_softmax_value(a.value());
  const std::size_t self = a.tape->size();
  return a.tape->push(OpKind::kRowSoftmax, std::move(out), detail::any_grad({a}),
                      [a, self](Tape& tp, const DenseMatrix& g) {
                        const DenseMatrix& y = tp.value(Var{&tp, self});
                        DenseMatrix ga = g;
                        for (std::size_t i = 0; i < g.rows(); ++i) {
                          double dot = 0.0;
                          for (std::size_t j = 0; j < g.cols(); ++j) dot += g(i, j) * y(i, j);
                          for (std::size_t j = 0; j < g.cols(); ++j)
                            ga(i, j) = y(i, j) * (g(i, j) - dot);
                        }
                        tp.accumulate(a, ga);
                      });
}

inline Var row_log_softmax(Var a) {
  if (a.cols() == 0) throw ShapeError("row_log_softmax: zero columns");
  const DenseMatrix& x = a.value();
  DenseMatrix out = DenseMatrix::zeros_like(x);
  for (std::size_t i = 0; i < x.rows(); ++i) {
    const auto xr = x.row(i);
    const double m = *std::max_element(xr.begin(), xr.end());
    double s = 0.0;
    for (double v : xr) s += std::exp(v - m);
    const double lse = m + std::log(s);
    for (std::size_t j = 0; j < xr.size(); ++j) out(i, j) = xr[j] - lse;
  }
  const std::size_t self = a.tape->size();
  return a.tape->push(OpKind::kRowLogSoftmax, std::move(out), detail::any_grad({a}),
                      [a, self](Tape& tp, const DenseMatrix& g) {
                        const DenseMatrix& y = tp.value(Var{&tp, self});
                        DenseMatrix ga = g;
                        for (std::size_t i = 0; i < g.rows(); ++i) {
                          double gs = 0.0;
                          for (std::size_t j = 0; j < g.cols(); ++j) gs += g(i, j);
                          for (std::size_t j = 0; j < g.cols(); ++j)
                            ga(i, j) = g(i, j) - std::exp(y(i, j)) * gs;
                        }
                        tp.accumulate(a, ga);
                      });
}

// [a | b]
inline Var concat_cols(Var a, Var b) {
  Tape& t = detail::same_tape(a, b);
  const auto& av = a.value();
  const auto& bv = b.value();
  if (av.rows() != bv.rows()) {
    throw ShapeError("concat_cols: " + av.shape_str() + " | " + bv.shape_str());
  }
  DenseMatrix out(av.rows(), av.cols() + bv.cols());
  for (std::size_t i = 0; i < av.rows(); ++i) {
    std::copy(av.row(i).begin(), av.row(i).end(), out.row(i).begin());
    std::copy(bv.row(i).begin(), bv.row(i).end(),
              out.row(i).begin() + static_cast<std::ptrdiff_t>(av.cols()));
  }
  const std::size_t ac = av.cols();
  return t.push(OpKind::kConcatCols, std::move(out), detail::any_grad({a, b}),
                [a, b, ac](Tape& tp, const DenseMatrix& g) {
                  if (tp.requires_grad(a)) {
                    DenseMatrix ga(g.rows(), ac);
                    for (std::size_t i = 0; i < g.rows(); ++i)
                      for (std::size_t j = 0; j < ac; ++j) ga(i, j) = g(i, j);
                    tp.accumulate(a, ga);
                  }
                  if (tp.requires_grad(b)) {
                    DenseMatrix gb(g.rows(), g.cols() - ac);
                    for (std::size_t i = 0; i < g.rows(); ++i)
                      for (std::size_t j = 0; j < gb.cols(); ++j) gb(i, j) = g(i, ac + j);
                    tp.accumulate(b, gb);
                  }
                });
}

// Columns [begin, end).
inline Var slice_cols(Var a, std::size_t begin, std::size_t end) {
  const auto& av = a.value();
  if (begin > end || end > av.cols()) {
    throw ShapeError("slice_cols: [" + std::to_string(begin) + "," +
                     std::to_string(end) + ") of " + av.shape_str());
  }
  DenseMatrix out(av.rows(), end - begin);
  for (std::size_t i = 0; i < av.rows(); ++i)
    for (std::size_t j = begin; j < end; ++j) out(i, j - begin) = av(i, j);
  return a.tape->push(OpKind::kSliceCols, std::move(out), detail::any_grad({a}),
                      [a, begin](Tape& tp, const DenseMatrix& g) {
                        DenseMatrix ga = DenseMatrix::zeros_like(a.value());
                        for (std::size_t i = 0; i < g.rows(); ++i)
                          for (std::size_t j = 0; j < g.cols(); ++j) ga(i, begin + j) = g(i, j);
                        tp.accumulate(a, ga);
                      });
}

// Rows [begin, end).
inline Var slice_rows(Var a, std::size_t begin, std::size_t end) {
  const auto& av = a.value();
  if (begin > end || end > av.rows()) {
    throw ShapeError("slice_rows: [" + std::to_string(begin) + "," +
                     std::to_string(end) + ") of " + av.shape_str());
  }
  std::vector<double> data(av.data().begin() + static_cast<std::ptrdiff_t>(begin * av.cols()),
                           av.data().begin() + static_cast<std::ptrdiff_t>(end * av.cols()));
  DenseMatrix out(end - begin, av.cols(), std::move(data));
  return a.tape->push(OpKind::kSliceRows, std::move(out), detail::any_grad({a}),
                      [a, begin](Tape& tp, const DenseMatrix& g) {
                        DenseMatrix ga = DenseMatrix::zeros_like(a.value());
                        std::copy(g.data().begin(), g.data().end(),
                                  ga.data().begin() + static_cast<std::ptrdiff_t>(begin * g.cols()));
                        tp.accumulate(a, ga);
                      });
}

// out.row(k) = a.row(index[k]); repeated indices are allowed.
inline Var row_gather(Var a, std::vector<std::size_t> index) {
  const auto& av = a.value();
  DenseMatrix out(index.size(), av.cols());
  for (std::size_t k = 0; k < index.size(); ++k) {
    if (index[k] >= av.rows()) {
      throw ShapeError("row_gather: index " + std::to_string(index[k]) +
                       " out of " + std::to_string(av.rows()));
    }
    std::copy(av.row(index[k]).begin(), av.row(index[k]).end(), out.row(k).begin());
  }
  return a.tape->push(OpKind::kRowGather, std::move(out), detail::any_grad({a}),
                      [a, index = std::move(index)](Tape& tp, const DenseMatrix& g) {
                        DenseMatrix ga = DenseMatrix::zeros_like(a.value());
                        for (std::size_t k = 0; k < index.size(); ++k)
                          for (std::size_t j = 0; j < g.cols(); ++j) ga(index[k], j) += g(k, j);
                        tp.accumulate(a, ga);
                      });
}

// rows x 1 column of row sums.
inline Var row_sum(Var a) {
  const auto& av = a.value();
  DenseMatrix out(av.rows(), 1);
  for (std::size_t i = 0; i < av.rows(); ++i) {
    double s = 0.0;
    for (double v : av.row(i)) s += v;
    out(i, 0) = s;
  }
  return a.tape->push(OpKind::kRowSum, std::move(out), detail::any_grad({a}),
                      [a](Tape& tp, const DenseMatrix& g) {
                        DenseMatrix ga = DenseMatrix::zeros_like(a.value());
                        for (std::size_t i = 0; i < ga.rows(); ++i)
                          for (std::size_t j = 0; j < ga.cols(); ++j) ga(i, j) = g(i, 0);
                        tp.accumulate(a, ga);
                      });
}

// 1x1 sum of all entries.
inline Var sum(Var a) {
  double s = 0.0;
  for (double v : a.value().data()) s += v;
  return a.tape->push(OpKind::kSum, DenseMatrix(1, 1, s), detail::any_grad({a}),
                      [a](Tape& tp, const DenseMatrix& g) {
                        DenseMatrix ga(a.rows(), a.cols(), g(0, 0));
                        tp.accumulate(a, ga);
                      });
}

// sum_k weights[k] * terms[k], all terms of one shape.
inline Var weighted_sum(const std::vector<Var>& terms, const std::vector<double>& weights) {
  if (terms.empty() || terms.size() != weights.size()) {
    throw ShapeError("weighted_sum: need one weight per term");
  }
  Tape& t = *terms.front().tape;
  DenseMatrix out = DenseMatrix::zeros_like(terms.front().value());
  bool needs = false;
  for (std::size_t k = 0; k < terms.size(); ++k) {
    detail::same_tape(terms.front(), terms[k]);
    terms[k].value().require_same_shape(out, "weighted_sum");
    for (std::size_t i = 0; i < out.size(); ++i)
      out.data()[i] += weights[k] * terms[k].value().data()[i];
    needs = needs || t.requires_grad(terms[k]);
  }
  return t.push(OpKind::kWeightedSum, std::move(out), needs,
                [terms, weights](Tape& tp, const DenseMatrix& g) {
                  for (std::size_t k = 0; k < terms.size(); ++k) {
                    if (!tp.requires_grad(terms[k]) || weights[k] == 0.0) continue;
                    const double w = weights[k];
                    tp.accumulate(terms[k], detail::map(g, [w](double x) { return w * x; }));
                  }
                });
}

// Scalar sum over `entries` of the weighted Bernoulli log-likelihood
//   w * t * log(sigmoid(l)) + (1 - t) * log(1 - sigmoid(l)),
// l = logits(row, col) clamped to [-30, 30].
inline Var bernoulli_loglik_entries(Var logits, std::vector<BinaryEntry> entries,
                                    double pos_weight) {
  const auto& L = logits.value();
  double s = 0.0;
  for (const auto& e : entries) {
    if (e.row >= L.rows() || e.col >= L.cols()) {
      throw ShapeError("bernoulli_loglik_entries: entry outside " + L.shape_str());
    }
    const double l = std::clamp(L(e.row, e.col), -kSigmoidClamp, kSigmoidClamp);
    s -= pos_weight * e.target * detail::softplus(-l) + (1.0 - e.target) * detail::softplus(l);
  }
  return logits.tape->push(
      OpKind::kBernoulliEntries, DenseMatrix(1, 1, s), detail::any_grad({logits}),
      [logits, entries = std::move(entries), pos_weight](Tape& tp, const DenseMatrix& g) {
        const auto& Lv = logits.value();
        DenseMatrix gl = DenseMatrix::zeros_like(Lv);
        for (const auto& e : entries) {
          const double raw = Lv(e.row, e.col);
          if (std::abs(raw) > kSigmoidClamp) continue;
          const double p = detail::stable_sigmoid(raw);
          gl(e.row, e.col) += g(0, 0) * (pos_weight * e.target * (1.0 - p) - (1.0 - e.target) * p);
        }
        tp.accumulate(logits, gl);
      });
}

inline const char* op_name(OpKind k) {
  switch (k) {
    case OpKind::kLeaf: return "leaf";
    case OpKind::kConstant: return "constant";
    case OpKind::kMatmul: return "matmul";
    case OpKind::kMatmulNT: return "matmul_nt";
    case OpKind::kSpmm: return "spmm";
    case OpKind::kAdd: return "add";
    case OpKind::kAddRowBias: return "add_row_bias";
    case OpKind::kSub: return "sub";
    case OpKind::kMul: return "mul";
    case OpKind::kScale: return "scale";
    case OpKind::kAddScalar: return "add_scalar";
    case OpKind::kTanh: return "tanh";
    case OpKind::kSigmoid: return "sigmoid";
    case OpKind::kExp: return "exp";
    case OpKind::kLog: return "log";
    case OpKind::kClamp: return "clamp";
    case OpKind::kRowSoftmax: return "row_softmax";
    case OpKind::kRowLogSoftmax: return "row_log_softmax";
    case OpKind::kConcatCols: return "concat_cols";
    case OpKind::kSliceCols: return "slice_cols";
    case OpKind::kSliceRows: return "slice_rows";
    case OpKind::kRowGather: return "row_gather";
    case OpKind::kRowSum: return "row_sum";
    case OpKind::kSum: return "sum";
    case OpKind::kWeightedSum: return "weighted_sum";
    case OpKind::kBernoulliEntries: return "bernoulli_entries";
  }
  return "unknown";
}

inline std::optional<OpKind> op_from_name(const std::string& name) {
  for (int i = 0; i <= static_cast<int>(OpKind::kBernoulliEntries); ++i) {
    const auto k = static_cast<OpKind>(i);
    if (name == op_name(k)) return k;
  }
  return std::nullopt;
}

}  // namespace coembed::ad

#endif  // COEMBED_TAPE_HPP_
