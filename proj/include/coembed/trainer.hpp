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

// Adam, the full-batch training loop, and the finite-difference gradient
// check with its bundled 8-node fixture.

#ifndef COEMBED_TRAINER_HPP_
#define COEMBED_TRAINER_HPP_

#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "coembed/dense.hpp"
#include "coembed/elbo.hpp"
#include "coembed/errors.hpp"
#include "coembed/eval.hpp"
#include "coembed/finite_diff.hpp"
#include "coembed/graphdata.hpp"
#include "coembed/model.hpp"
#include "coembed/tape.hpp"

namespace coembed {

struct AdamState {
  std::vector<DenseMatrix> m;
  std::vector<DenseMatrix> v;
  std::uint64_t t = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  static AdamState like(const std::vector<DenseMatrix>& params) {
    AdamState s;
    for (const auto& p : params) {
      s.m.push_back(DenseMatrix::zeros_like(p));
      s.v.push_back(DenseMatrix::zeros_like(p));
    }
    return s;
  }
};

// One bias-corrected Adam step, in place.
inline void adam_step(std::vector<DenseMatrix>& params, const std::vector<DenseMatrix>& grads, AdamState& st,
                      double lr) {
  if (params.size() != grads.size() || params.size() != st.m.size()) throw ShapeError("adam_step: tensor count");
  for (std::size_t k = 0; k < params.size(); ++k) {
    params[k].require_same_shape(grads[k], "adam_step grad");
    params[k].require_same_shape(st.m[k], "adam_step state");
  }
  ++st.t;
  const double c1 = 1.0 - std::pow(st.beta1, static_cast<double>(st.t));
  const double c2 = 1.0 - std::pow(st.beta2, static_cast<double>(st.t));
  for (std::size_t k = 0; k < params.size(); ++k) {
    auto& p = params[k].data();
    const auto& g = grads[k].data();
    auto& m = st.m[k].data();
    auto& v = st.v[k].data();
    for (std::size_t i = 0; i < p.size(); ++i) {
      m[i] = st.beta1 * m[i] + (1.0 - st.beta1) * g[i];
      v[i] = st.beta2 * v[i] + (1.0 - st.beta2) * g[i] * g[i];
      p[i] -= lr * (m[i] / c1) / (std::sqrt(v[i] / c2) + st.eps);
    }
  }
}

struct TrainHistory {
  std::vector<ElboBreakdown> epochs;
  std::vector<double> seconds;
  std::vector<double> val_auc;  // empty without a validation split
  std::size_t best_epoch = 0;   // 0-based
  std::uint64_t adam_steps = 0;
};

struct TrainOptions {
  // Held-out pairs of the targeted task; the best-AUC epoch is kept.
  const HoldoutSplit* validation = nullptr;
  std::function<void(std::size_t epoch, const ElboBreakdown&, double seconds)> on_epoch;
};

struct TrainResult {
  ModelParams params;  // best validation epoch, else final
  TrainHistory history;
};

// Noise stream seed derived from the parameter seed so one integer fixes a run.
inline std::uint64_t noise_seed(std::uint64_t seed) { return seed ^ 0x9E3779B97F4A7C15ULL; }

inline std::string describe_breakdown(const ElboBreakdown& b) {
  std::ostringstream os;
  const auto f = b.fields();
  for (std::size_t i = 0; i < f.size(); ++i) os << (i ? " " : "") << ElboBreakdown::kFieldNames[i] << "=" << f[i];
  return os.str();
}

inline TrainResult train(const AttributedNetwork& net, const LabelMask& mask, const HyperParams& h,
                         const TrainOptions& opt = {}) {
  h.validate();
  net.validate();
  if (h.epochs == 0) throw InputError("epochs must be >= 1");
  if (mask.n_nodes() != net.n_nodes) throw InputError("label mask size does not match the network");
  const NetDims dims = NetDims::of(net);
  const ModelInputs in = ModelInputs::build(net, h.self_loops);
  const ElboContext ctx = build_elbo_context(net, mask, h.pos_weight);

  ModelParams params = init_params(h, dims, h.seed);
  std::vector<DenseMatrix> flat = params.flatten();
  AdamState adam = AdamState::like(flat);
  Rng noise_rng(noise_seed(h.seed));

  TrainResult res;
  std::optional<ModelParams> best;
  double best_auc = -1.0;
  for (std::size_t epoch = 0; epoch < h.epochs; ++epoch) {
    const auto t0 = std::chrono::steady_clock::now();
    const NoiseDraw noise = NoiseDraw::draw(dims, h, noise_rng);
    ad::Tape tape;
    const ParamVars pv = bind_params(tape, params);
    const LatentState s = forward_epoch(pv, in, net, mask, h, noise);
    const Objective obj = total_objective(s, ctx, h);
    if (!std::isfinite(obj.breakdown.total_J)) {
      throw NumericError("non-finite loss at epoch " + std::to_string(epoch) + ": " +
                         describe_breakdown(obj.breakdown));
    }
    tape.backward(obj.total);
    const std::vector<DenseMatrix> grads = pv.grads();
    for (std::size_t k = 0; k < grads.size(); ++k) {
      if (!grads[k].all_finite()) {
        throw NumericError("non-finite gradient for " + std::string(ModelParams::kNames[k]) + " at epoch " +
                           std::to_string(epoch) + ": " + describe_breakdown(obj.breakdown));
      }
    }
    adam_step(flat, grads, adam, h.learning_rate);
    params.assign(flat);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    res.history.epochs.push_back(obj.breakdown);
    res.history.seconds.push_back(secs);
    if (opt.validation != nullptr) {
      const Inference inf = infer(params, in, net, mask);
      const double a = auc(score_fold(inf, *opt.validation, Fold::kValidation));
      res.history.val_auc.push_back(a);
      if (a > best_auc) {
        best_auc = a;
        best = params;
        res.history.best_epoch = epoch;
      }
    } else {
      res.history.best_epoch = epoch;
    }
    if (opt.on_epoch) opt.on_epoch(epoch, obj.breakdown, secs);
  }
  res.history.adam_steps = adam.t;
  res.params = best ? std::move(*best) : std::move(params);
  return res;
}

// total_J for fixed parameters and frozen noise.
inline double objective_value(const ModelParams& params, const ModelInputs& in, const AttributedNetwork& net,
                              const LabelMask& mask, const HyperParams& h, const ElboContext& ctx,
                              const NoiseDraw& noise) {
  ad::Tape tape;
  const ParamVars pv = bind_params(tape, params, false);
  return total_objective(forward_epoch(pv, in, net, mask, h, noise), ctx, h).breakdown.total_J;
}

struct GradCheckOptions {
  std::size_t trials = 20;
  std::uint64_t seed = 0;
  double fd_eps = kDefaultFdEps;
  std::optional<ad::OpKind> fault;  // corrupt this op's backward rule
  double fault_scale = 1.5;
};

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::vector<double> per_trial;
  double seconds = 0.0;
};

// Compares tape gradients of total_J with central differences at `trials`
// random parameter points. Noise is drawn once per trial and reused for
// every perturbation.
inline GradCheckResult grad_check(const AttributedNetwork& net, const LabelMask& mask, const HyperParams& h,
                                  const GradCheckOptions& opt = {}) {
  h.validate();
  if (net.n_nodes > 10) throw InputError("grad_check expects a network of at most 10 nodes");
  const auto t0 = std::chrono::steady_clock::now();
  const NetDims dims = NetDims::of(net);
  const ModelInputs in = ModelInputs::build(net, h.self_loops);
  const ElboContext ctx = build_elbo_context(net, mask, h.pos_weight);
  Rng rng(opt.seed);
  GradCheckResult res;
  for (std::size_t trial = 0; trial < opt.trials; ++trial) {
    const ModelParams params = init_params(h, dims, rng());
    const NoiseDraw noise = NoiseDraw::draw(dims, h, rng);

    ad::Tape tape;
    if (opt.fault) tape.inject_fault(*opt.fault, opt.fault_scale);
    const ParamVars pv = bind_params(tape, params);
    tape.backward(total_objective(forward_epoch(pv, in, net, mask, h, noise), ctx, h).total);
    const std::vector<DenseMatrix> analytic = pv.grads();

    std::vector<DenseMatrix> flat = params.flatten();
    ModelParams probe = params;
    const auto numeric = finite_diff_grad(
        [&](const std::vector<DenseMatrix>& values) {
          probe.assign(values);
          return objective_value(probe, in, net, mask, h, ctx, noise);
        },
        flat, opt.fd_eps);
    const double err = max_relative_error(analytic, numeric);
    res.per_trial.push_back(err);
    res.max_rel_error = std::max(res.max_rel_error, err);
  }
  res.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return res;
}

struct Fixture {
  AttributedNetwork net;
  LabelMask mask;
};

// 8 nodes in two triangles joined by a bridge plus a pendant pair, 4
// attributes, 2 classes, nodes 0, 1, 4, 5 labelled.
inline Fixture gradcheck_fixture() {
  const std::size_t N = 8, M = 4;
  const std::vector<std::pair<std::size_t, std::size_t>> edges = {{0, 1}, {1, 2}, {0, 2}, {2, 3}, {3, 4},
                                                                  {4, 5}, {5, 6}, {4, 6}, {6, 7}};
  std::vector<Triplet> adj;
  for (auto [i, j] : edges) {
    adj.push_back({i, j, 1.0});
    adj.push_back({j, i, 1.0});
  }
  const std::vector<std::pair<std::size_t, std::size_t>> attrs = {{0, 0}, {1, 0}, {1, 1}, {2, 1}, {3, 2},
                                                                  {4, 2}, {5, 3}, {6, 3}, {7, 2}, {7, 3}};
  std::vector<Triplet> at;
  for (auto [i, a] : attrs) at.push_back({i, a, 1.0});
  AttributedNetwork net;
  net.n_nodes = N;
  net.n_attrs = M;
  net.n_classes = 2;
  net.adjacency = SparseMatrix::from_triplets(N, N, adj);
  net.attributes = SparseMatrix::from_triplets(N, M, at);
  net.labels = {0, 0, 0, 0, 1, 1, 1, 1};
  return {net, LabelMask(N, {0, 1, 4, 5})};
}

// Small widths keep the full finite-difference sweep cheap.
inline HyperParams gradcheck_hyper() {
  HyperParams h;
  h.latent_dim = 3;
  h.hidden_node = 4;
  h.hidden_attr = 4;
  h.hidden_disc = 4;
  return h;
}

}  // namespace coembed

#endif  // COEMBED_TRAINER_HPP_
