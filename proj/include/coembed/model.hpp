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

// Inference networks (GCN node encoder, MLP attribute encoder, label
// discriminator) and the parameter-free inner-product decoder.

#ifndef COEMBED_MODEL_HPP_
#define COEMBED_MODEL_HPP_

#include <array>
#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "coembed/dense.hpp"
#include "coembed/distributions.hpp"
#include "coembed/errors.hpp"
#include "coembed/graphdata.hpp"
#include "coembed/sparse.hpp"
#include "coembed/tape.hpp"

namespace coembed {

enum class PosWeightMode {
  kBalanced,  // #zeros / #ones per reconstructed matrix
  kNone,      // 1
};

struct HyperParams {
  std::size_t latent_dim = 64;
  std::size_t hidden_node = 32;
  std::size_t hidden_attr = 32;
  std::size_t hidden_disc = 32;
  double alpha = 1.0;
  double beta = 0.5;
  double tau = 0.2;
  double learning_rate = 0.01;
  std::size_t epochs = 300;
  std::uint64_t seed = 0;
  PosWeightMode pos_weight = PosWeightMode::kBalanced;
  bool self_loops = true;

  void validate() const {
    if (latent_dim == 0) throw InputError("latent_dim must be >= 1");
    if (hidden_node == 0 || hidden_attr == 0 || hidden_disc == 0) throw InputError("hidden widths must be >= 1");
    if (!(beta > 0.0 && beta < 1.0)) throw InputError("beta must be in (0, 1)");
    if (!(tau > 0.0)) throw InputError("tau must be positive");
    if (!(alpha >= 0.0)) throw InputError("alpha must be >= 0");
    if (!(learning_rate > 0.0)) throw InputError("learning_rate must be positive");
  }
};

struct NetDims {
  std::size_t n_nodes = 0;
  std::size_t n_attrs = 0;
  std::size_t n_classes = 0;

  static NetDims of(const AttributedNetwork& net) { return {net.n_nodes, net.n_attrs, net.n_classes}; }
  friend bool operator==(const NetDims&, const NetDims&) = default;
};

// Every trainable weight. Biases are 1 x width row vectors.
struct ModelParams {
  DenseMatrix node_w0;  // (N + M + K) x H_n
  DenseMatrix node_w1;  // H_n x 2D
  DenseMatrix attr_w0;  // N x H_a
  DenseMatrix attr_b0;  // 1 x H_a
  DenseMatrix attr_w1;  // H_a x 2(K + D)
  DenseMatrix attr_b1;  // 1 x 2(K + D)
  DenseMatrix disc_w0;  // (N + M) x H_c
  DenseMatrix disc_b0;  // 1 x H_c
  DenseMatrix disc_w1;  // H_c x K
  DenseMatrix disc_b1;  // 1 x K

  static constexpr std::array<const char*, 10> kNames = {
      "node_w0", "node_w1", "attr_w0", "attr_b0", "attr_w1",
      "attr_b1", "disc_w0", "disc_b0", "disc_w1", "disc_b1"};

  std::array<DenseMatrix*, 10> tensors() {
    return {&node_w0, &node_w1, &attr_w0, &attr_b0, &attr_w1, &attr_b1, &disc_w0, &disc_b0, &disc_w1, &disc_b1};
  }
  std::array<const DenseMatrix*, 10> tensors() const {
    return {&node_w0, &node_w1, &attr_w0, &attr_b0, &attr_w1, &attr_b1, &disc_w0, &disc_b0, &disc_w1, &disc_b1};
  }

  std::vector<DenseMatrix> flatten() const {
    std::vector<DenseMatrix> out;
    for (const DenseMatrix* t : tensors()) out.push_back(*t);
    return out;
  }
  void assign(const std::vector<DenseMatrix>& values) {
    auto ts = tensors();
    if (values.size() != ts.size()) throw ShapeError("ModelParams::assign: tensor count");
    for (std::size_t k = 0; k < ts.size(); ++k) {
      ts[k]->require_same_shape(values[k], kNames[k]);
      *ts[k] = values[k];
    }
  }

  // Throws ShapeError unless every tensor matches dims/hyper.
  void check_shapes(const NetDims& d, const HyperParams& h) const {
    const std::size_t D = h.latent_dim, K = d.n_classes;
    const std::array<std::pair<std::size_t, std::size_t>, 10> want = {{
        {d.n_nodes + d.n_attrs + K, h.hidden_node},
        {h.hidden_node, 2 * D},
        {d.n_nodes, h.hidden_attr},
        {1, h.hidden_attr},
        {h.hidden_attr, 2 * (K + D)},
        {1, 2 * (K + D)},
        {d.n_nodes + d.n_attrs, h.hidden_disc},
        {1, h.hidden_disc},
        {h.hidden_disc, K},
        {1, K},
    }};
    const auto ts = tensors();
    for (std::size_t k = 0; k < ts.size(); ++k) {
      if (ts[k]->rows() != want[k].first || ts[k]->cols() != want[k].second) {
        throw ShapeError(std::string("parameter ") + kNames[k] + " is " + ts[k]->shape_str() + ", expected " +
                         std::to_string(want[k].first) + "x" + std::to_string(want[k].second));
      }
    }
  }

  friend bool operator==(const ModelParams&, const ModelParams&) = default;
};

// Glorot-uniform weights, zero biases.
inline ModelParams init_params(const HyperParams& h, const NetDims& d, std::uint64_t seed) {
  Rng rng(seed);
  auto glorot = [&rng](std::size_t fan_in, std::size_t fan_out) {
    const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    std::uniform_real_distribution<double> u(-bound, bound);
    DenseMatrix w(fan_in, fan_out);
    for (double& v : w.data()) v = u(rng);
    return w;
  };
  const std::size_t D = h.latent_dim, K = d.n_classes, N = d.n_nodes, M = d.n_attrs;
  ModelParams p;
  p.node_w0 = glorot(N + M + K, h.hidden_node);
  p.node_w1 = glorot(h.hidden_node, 2 * D);
  p.attr_w0 = glorot(N, h.hidden_attr);
  p.attr_b0 = DenseMatrix(1, h.hidden_attr);
  p.attr_w1 = glorot(h.hidden_attr, 2 * (K + D));
  p.attr_b1 = DenseMatrix(1, 2 * (K + D));
  p.disc_w0 = glorot(N + M, h.hidden_disc);
  p.disc_b0 = DenseMatrix(1, h.hidden_disc);
  p.disc_w1 = glorot(h.hidden_disc, K);
  p.disc_b1 = DenseMatrix(1, K);
  return p;
}

// Constant encoder inputs derived once from a network.
struct ModelInputs {
  NetDims dims;
  ad::SparseRef adj_norm;       // N x N
  ad::SparseRef node_features;  // N x (N + M)
  ad::SparseRef attr_features;  // M x N

  static ModelInputs build(const AttributedNetwork& net, bool self_loops) {
    return {NetDims::of(net), ad::make_sparse(normalize_adjacency(net, self_loops)),
            ad::make_sparse(build_node_features(net)), ad::make_sparse(build_attr_features(net))};
  }
};

// ModelParams recorded on a tape: leaves when gradients are wanted,
// constants otherwise.
struct ParamVars {
  ad::Var node_w0, node_w1;
  ad::Var attr_w0, attr_b0, attr_w1, attr_b1;
  ad::Var disc_w0, disc_b0, disc_w1, disc_b1;

  std::array<ad::Var, 10> all() const {
    return {node_w0, node_w1, attr_w0, attr_b0, attr_w1, attr_b1, disc_w0, disc_b0, disc_w1, disc_b1};
  }

  std::vector<DenseMatrix> grads() const {
    std::vector<DenseMatrix> out;
    for (ad::Var v : all()) out.push_back(v.tape->grad(v));
    return out;
  }
};

inline ParamVars bind_params(ad::Tape& tape, const ModelParams& p, bool trainable = true) {
  auto put = [&](const DenseMatrix& m) { return trainable ? tape.leaf(m) : tape.constant(m); };
  return {put(p.node_w0), put(p.node_w1), put(p.attr_w0), put(p.attr_b0), put(p.attr_w1),
          put(p.attr_b1), put(p.disc_w0), put(p.disc_b0), put(p.disc_w1), put(p.disc_b1)};
}

// Two-layer GCN over [F^n | Y]:
//   H = tanh(A_norm [F^n | Y] W0),  [mu | logvar] = A_norm H W1.
// `labels` is the N x K label block (one-hots or relaxed samples).
inline GaussianParams encode_nodes(const ParamVars& p, const ModelInputs& in, ad::Var labels) {
  const std::size_t N = in.dims.n_nodes, M = in.dims.n_attrs, K = in.dims.n_classes;
  if (labels.rows() != N || labels.cols() != K) {
    throw ShapeError("encode_nodes: label block is " + labels.value().shape_str());
  }
  if (p.node_w0.rows() != N + M + K) throw ShapeError("encode_nodes: node_w0 rows != N + M + K");
  const ad::Var w_feat = ad::slice_rows(p.node_w0, 0, N + M);
  const ad::Var w_label = ad::slice_rows(p.node_w0, N + M, N + M + K);
  const ad::Var pre = ad::add(ad::spmm(in.node_features, w_feat), ad::matmul(labels, w_label));
  const ad::Var hidden = ad::tanh(ad::spmm(in.adj_norm, pre));
  const ad::Var out = ad::spmm(in.adj_norm, ad::matmul(hidden, p.node_w1));
  const std::size_t D = out.cols() / 2;
  return {ad::slice_cols(out, 0, D), ad::clamp(ad::slice_cols(out, D, 2 * D), kLogvarMin, kLogvarMax)};
}

// Two-layer MLP over X^T: H = tanh(F^a W0 + b0), [mu | logvar] = H W1 + b1.
// The attribute latent width is K + D.
inline GaussianParams encode_attrs(const ParamVars& p, const ModelInputs& in) {
  const ad::Var hidden = ad::tanh(ad::add_row_bias(ad::spmm(in.attr_features, p.attr_w0), p.attr_b0));
  const ad::Var out = ad::add_row_bias(ad::matmul(hidden, p.attr_w1), p.attr_b1);
  const std::size_t W = out.cols() / 2;
  return {ad::slice_cols(out, 0, W), ad::clamp(ad::slice_cols(out, W, 2 * W), kLogvarMin, kLogvarMax)};
}

struct Discriminator {
  ad::Var logits;  // N x K
  ad::Var probs;   // row softmax of logits
};

// H = tanh(F^n W0 + b0), pi = softmax(H W1 + b1).
inline Discriminator discriminate(const ParamVars& p, const ModelInputs& in) {
  const ad::Var hidden = ad::tanh(ad::add_row_bias(ad::spmm(in.node_features, p.disc_w0), p.disc_b0));
  const ad::Var logits = ad::add_row_bias(ad::matmul(hidden, p.disc_w1), p.disc_b1);
  return {logits, ad::row_softmax(logits)};
}

// <[z_i; y_i], [z_j; y_j]>, the logit of an edge.
inline double decode_edge(std::span<const double> z_i, std::span<const double> y_i, std::span<const double> z_j,
                          std::span<const double> y_j) {
  if (z_i.size() != z_j.size() || y_i.size() != y_j.size()) throw ShapeError("decode_edge: dimension mismatch");
  double s = 0.0;
  for (std::size_t d = 0; d < z_i.size(); ++d) s += z_i[d] * z_j[d];
  for (std::size_t k = 0; k < y_i.size(); ++k) s += y_i[k] * y_j[k];
  return s;
}

// <[z_i; y_i], z_a>, the logit of a node-attribute entry.
inline double decode_attr(std::span<const double> z_i, std::span<const double> y_i, std::span<const double> z_a) {
  if (z_a.size() != z_i.size() + y_i.size()) throw ShapeError("decode_attr: z_a must have D + K entries");
  double s = 0.0;
  for (std::size_t d = 0; d < z_i.size(); ++d) s += z_i[d] * z_a[d];
  for (std::size_t k = 0; k < y_i.size(); ++k) s += y_i[k] * z_a[z_i.size() + k];
  return s;
}

// One epoch worth of noise: Gaussian noise for both latent sets and Gumbel
// noise for the label samples.
struct NoiseDraw {
  DenseMatrix node_eps;  // N x D
  DenseMatrix attr_eps;  // M x (K + D)
  DenseMatrix gumbel;    // N x K

  static NoiseDraw draw(const NetDims& d, const HyperParams& h, Rng& rng) {
    NoiseDraw n;
    n.node_eps = standard_normal(d.n_nodes, h.latent_dim, rng);
    n.attr_eps = standard_normal(d.n_attrs, d.n_classes + h.latent_dim, rng);
    n.gumbel = gumbel_noise(d.n_nodes, d.n_classes, rng);
    return n;
  }

  static NoiseDraw zeros(const NetDims& d, const HyperParams& h) {
    return {DenseMatrix(d.n_nodes, h.latent_dim), DenseMatrix(d.n_attrs, d.n_classes + h.latent_dim),
            DenseMatrix(d.n_nodes, d.n_classes)};
  }
};

struct LatentState {
  ad::Var z_nodes;     // N x D
  ad::Var z_attrs;     // M x (K + D)
  ad::Var labels;      // N x K, one-hot on V^l, relaxed samples on V^u
  ad::Var node_embed;  // [z_nodes | labels], N x (D + K)
  ad::Var pi;          // N x K discriminator probabilities
  ad::Var log_pi;      // N x K
  GaussianParams node_q;
  GaussianParams attr_q;
};

inline DenseMatrix one_hot_labels(const AttributedNetwork& net, const LabelMask& mask) {
  DenseMatrix y(net.n_nodes, net.n_classes);
  for (std::size_t v : mask.labelled()) {
    if (!net.labels[v]) throw InputError("labelled node " + std::to_string(v) + " has no label");
    y(v, *net.labels[v]) = 1.0;
  }
  return y;
}

// Records the full inference pass on the tape holding `p`.
inline LatentState forward_epoch(const ParamVars& p, const ModelInputs& in, const AttributedNetwork& net,
                                 const LabelMask& mask, const HyperParams& h, const NoiseDraw& noise) {
  ad::Tape& t = *p.node_w0.tape;
  const Discriminator disc = discriminate(p, in);
  const ad::Var log_pi = ad::row_log_softmax(disc.logits);
  const ad::Var sample = gumbel_softmax(log_pi, h.tau, noise.gumbel);

  DenseMatrix unlabelled(net.n_nodes, net.n_classes);
  for (std::size_t v : mask.unlabelled())
    for (std::size_t k = 0; k < net.n_classes; ++k) unlabelled(v, k) = 1.0;
  const ad::Var labels = ad::add(ad::mul(sample, t.constant(std::move(unlabelled))),
                                 t.constant(one_hot_labels(net, mask)));

  LatentState s;
  s.labels = labels;
  s.pi = disc.probs;
  s.log_pi = log_pi;
  s.node_q = encode_nodes(p, in, labels);
  s.z_nodes = gaussian_rsample(s.node_q, noise.node_eps);
  s.attr_q = encode_attrs(p, in);
  s.z_attrs = gaussian_rsample(s.attr_q, noise.attr_eps);
  s.node_embed = ad::concat_cols(s.z_nodes, labels);
  return s;
}

inline std::size_t argmax_row(std::span<const double> r) {
  std::size_t best = 0;
  for (std::size_t k = 1; k < r.size(); ++k)
    if (r[k] > r[best]) best = k;
  return best;
}

// Deterministic posterior summary used for evaluation and export.
struct Inference {
  DenseMatrix pi;           // N x K
  DenseMatrix labels;       // observed one-hots on V^l, argmax one-hots on V^u
  DenseMatrix node_mu;      // N x D
  DenseMatrix node_logvar;  // N x D
  DenseMatrix attr_mu;      // M x (K + D)
  DenseMatrix attr_logvar;  // M x (K + D)
};

inline Inference infer(const ModelParams& params, const ModelInputs& in, const AttributedNetwork& net,
                       const LabelMask& mask) {
  ad::Tape t;
  const ParamVars p = bind_params(t, params, false);
  const Discriminator disc = discriminate(p, in);
  Inference out;
  out.pi = disc.probs.value();
  out.labels = one_hot_labels(net, mask);
  for (std::size_t v : mask.unlabelled()) out.labels(v, argmax_row(out.pi.row(v))) = 1.0;
  const GaussianParams nq = encode_nodes(p, in, t.constant(out.labels));
  const GaussianParams aq = encode_attrs(p, in);
  out.node_mu = nq.mu.value();
  out.node_logvar = nq.logvar.value();
  out.attr_mu = aq.mu.value();
  out.attr_logvar = aq.logvar.value();
  return out;
}

}  // namespace coembed

#endif  // COEMBED_MODEL_HPP_
