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

// The five case-wise negative evidence lower bounds and the weighted
// training objective.
//
// Every off-diagonal node pair (i < j) and every node-attribute pair is an
// observation; present entries have target 1, absent ones target 0. Pairs
// are routed to a case by the label status of their endpoints:
//
//   ll  labelled-labelled edges        la  labelled node, attribute
//   uu  unlabelled-unlabelled edges    ua  unlabelled node, attribute
//   lu  mixed edges
//
// Each case loss is
//
//   (1/|E_c|) * [ sum_{e in E_c} (-log p(target_e | logit_e) - log p(Y endpoints))
//                 + sum_{latents assigned to c} share * (KL - entropy) ]
//
// Per-latent terms (node KL, unlabelled-node label entropy, attribute KL)
// are counted once per epoch. A node's terms are split evenly between its
// edge-side case (ll or uu) and attribute-side case (la or ua); attribute
// KL is split evenly between la and ua. A share whose case has no entries
// moves to the partner case, so an empty case is exactly zero.

#ifndef COEMBED_ELBO_HPP_
#define COEMBED_ELBO_HPP_

#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "coembed/distributions.hpp"
#include "coembed/errors.hpp"
#include "coembed/graphdata.hpp"
#include "coembed/model.hpp"
#include "coembed/tape.hpp"

namespace coembed {

enum class CaseId { kLL = 0, kUU, kLU, kLA, kUA };
inline constexpr std::size_t kNumCases = 5;

// Observations and per-latent shares routed to one case.
struct CaseSpec {
  std::vector<ad::BinaryEntry> entries;
  double pos_weight = 1.0;
  double prior_per_entry = 0.0;     // -sum log p(Y) over the label-carrying endpoints
  std::vector<double> node_kl;      // N shares
  std::vector<double> entropy;      // N shares
  std::vector<double> attr_kl;      // M shares
  bool is_edge_case = true;
};

struct ElboContext {
  std::array<CaseSpec, kNumCases> cases;
  std::size_t n_labelled = 0;
  DenseMatrix label_onehot;  // N x K, rows of V^l
  double edge_pos_weight = 1.0;
  double attr_pos_weight = 1.0;

  const CaseSpec& at(CaseId c) const { return cases[static_cast<std::size_t>(c)]; }
};

struct ElboBreakdown {
  double sum_case_ll = 0.0;
  double sum_case_uu = 0.0;
  double sum_case_lu = 0.0;
  double sum_case_la = 0.0;
  double sum_case_ua = 0.0;
  double kl_nodes = 0.0;
  double kl_attrs = 0.0;
  double entropy_unlabelled = 0.0;
  double classification_loss = 0.0;
  double total_J = 0.0;

  static constexpr std::array<const char*, 10> kFieldNames = {
      "sum_case_ll", "sum_case_uu", "sum_case_lu", "sum_case_la", "sum_case_ua",
      "kl_nodes",    "kl_attrs",    "entropy_unlabelled", "classification_loss", "total_J"};

  std::array<double, 10> fields() const {
    return {sum_case_ll, sum_case_uu, sum_case_lu, sum_case_la, sum_case_ua,
            kl_nodes,    kl_attrs,    entropy_unlabelled, classification_loss, total_J};
  }

  // beta * edge cases + (1 - beta) * attribute cases + alpha * classification.
  double recompose(double alpha, double beta) const {
    return beta * (sum_case_ll + sum_case_uu + sum_case_lu) + (1.0 - beta) * (sum_case_la + sum_case_ua) +
           alpha * classification_loss;
  }
};

namespace detail {

inline double balanced_weight(std::size_t ones, std::size_t total, PosWeightMode mode) {
  if (mode == PosWeightMode::kNone || ones == 0) return 1.0;
  return static_cast<double>(total - ones) / static_cast<double>(ones);
}

// Even split of one latent's terms over the non-empty cases among {a, b}.
inline void share(std::array<CaseSpec, kNumCases>& cases, CaseId a, CaseId b, std::vector<double> CaseSpec::*field,
                  std::size_t idx, double amount) {
  auto& ca = cases[static_cast<std::size_t>(a)];
  auto& cb = cases[static_cast<std::size_t>(b)];
  const bool ha = !ca.entries.empty(), hb = !cb.entries.empty();
  if (ha && hb) {
    (ca.*field)[idx] += 0.5 * amount;
    (cb.*field)[idx] += 0.5 * amount;
  } else if (ha) {
    (ca.*field)[idx] += amount;
  } else if (hb) {
    (cb.*field)[idx] += amount;
  }
}

}  // namespace detail

inline ElboContext build_elbo_context(const AttributedNetwork& net, const LabelMask& mask, PosWeightMode mode) {
  if (mask.n_nodes() != net.n_nodes) throw InputError("label mask size does not match the network");
  const std::size_t N = net.n_nodes, M = net.n_attrs;
  const double log_k = std::log(static_cast<double>(net.n_classes));
  ElboContext ctx;
  ctx.n_labelled = mask.labelled().size();
  ctx.label_onehot = one_hot_labels(net, mask);

  const SparseMatrix adj = net.binary_adjacency();
  std::size_t edge_ones = 0;
  for (std::size_t i = 0; i < N; ++i) {
    for (std::size_t j = i + 1; j < N; ++j) {
      const double t = adj.at(i, j);
      edge_ones += t > 0.0 ? 1 : 0;
      const bool li = mask.is_labelled(i), lj = mask.is_labelled(j);
      const CaseId c = li && lj ? CaseId::kLL : (!li && !lj ? CaseId::kUU : CaseId::kLU);
      ctx.cases[static_cast<std::size_t>(c)].entries.push_back({i, j, t});
    }
  }
  std::size_t attr_ones = 0;
  for (std::size_t i = 0; i < N; ++i) {
    const CaseId c = mask.is_labelled(i) ? CaseId::kLA : CaseId::kUA;
    for (std::size_t a = 0; a < M; ++a) {
      const double t = net.attributes.at(i, a);
      attr_ones += t > 0.0 ? 1 : 0;
      ctx.cases[static_cast<std::size_t>(c)].entries.push_back({i, a, t});
    }
  }
  ctx.edge_pos_weight = detail::balanced_weight(edge_ones, N * (N - 1) / 2, mode);
  ctx.attr_pos_weight = detail::balanced_weight(attr_ones, N * M, mode);

  for (std::size_t c = 0; c < kNumCases; ++c) {
    auto& cs = ctx.cases[c];
    cs.is_edge_case = c <= static_cast<std::size_t>(CaseId::kLU);
    cs.pos_weight = cs.is_edge_case ? ctx.edge_pos_weight : ctx.attr_pos_weight;
    cs.prior_per_entry = (cs.is_edge_case ? 2.0 : 1.0) * log_k;
    cs.node_kl.assign(N, 0.0);
    cs.entropy.assign(N, 0.0);
    cs.attr_kl.assign(M, 0.0);
  }
  for (std::size_t i = 0; i < N; ++i) {
    if (mask.is_labelled(i)) {
      detail::share(ctx.cases, CaseId::kLL, CaseId::kLA, &CaseSpec::node_kl, i, 1.0);
    } else {
      detail::share(ctx.cases, CaseId::kUU, CaseId::kUA, &CaseSpec::node_kl, i, 1.0);
      detail::share(ctx.cases, CaseId::kUU, CaseId::kUA, &CaseSpec::entropy, i, 1.0);
    }
  }
  for (std::size_t a = 0; a < M; ++a) detail::share(ctx.cases, CaseId::kLA, CaseId::kUA, &CaseSpec::attr_kl, a, 1.0);
  return ctx;
}

// Reconstruction logits for edges (N x N) and attributes (N x M).
inline ad::Var edge_logits(const LatentState& s) { return ad::matmul_nt(s.node_embed, s.node_embed); }
inline ad::Var attr_logits(const LatentState& s) { return ad::matmul_nt(s.node_embed, s.z_attrs); }

// Per-latent quantities shared by all cases, each a column vector.
struct LatentTerms {
  ad::Var node_kl;  // N x 1
  ad::Var attr_kl;  // M x 1
  ad::Var entropy;  // N x 1
};

inline LatentTerms latent_terms(const LatentState& s) {
  return {gaussian_kl_std(s.node_q), gaussian_kl_std(s.attr_q), row_entropy(s.pi)};
}

// Negative ELBO of one case (see the file comment). Zero for an empty case.
inline ad::Var case_loss(const CaseSpec& spec, ad::Var logits, const LatentTerms& lt) {
  ad::Tape& t = *logits.tape;
  if (spec.entries.empty()) return t.constant(DenseMatrix(1, 1, 0.0));
  const double n = static_cast<double>(spec.entries.size());
  auto weighted = [&t](ad::Var col, const std::vector<double>& w) {
    return ad::sum(ad::mul(col, t.constant(DenseMatrix(w.size(), 1, w))));
  };
  const ad::Var loglik = ad::bernoulli_loglik_entries(logits, spec.entries, spec.pos_weight);
  const ad::Var kl = ad::add(weighted(lt.node_kl, spec.node_kl), weighted(lt.attr_kl, spec.attr_kl));
  const ad::Var ent = weighted(lt.entropy, spec.entropy);
  const ad::Var body = ad::weighted_sum({loglik, kl, ent}, {-1.0, 1.0, -1.0});
  return ad::add_scalar(ad::scale(body, 1.0 / n), spec.prior_per_entry);
}

inline ad::Var elbo_case_ll(const LatentState& s, const ElboContext& ctx, const LatentTerms& lt) {
  return case_loss(ctx.at(CaseId::kLL), edge_logits(s), lt);
}
inline ad::Var elbo_case_uu(const LatentState& s, const ElboContext& ctx, const LatentTerms& lt) {
  return case_loss(ctx.at(CaseId::kUU), edge_logits(s), lt);
}
inline ad::Var elbo_case_lu(const LatentState& s, const ElboContext& ctx, const LatentTerms& lt) {
  return case_loss(ctx.at(CaseId::kLU), edge_logits(s), lt);
}
inline ad::Var elbo_case_la(const LatentState& s, const ElboContext& ctx, const LatentTerms& lt) {
  return case_loss(ctx.at(CaseId::kLA), attr_logits(s), lt);
}
inline ad::Var elbo_case_ua(const LatentState& s, const ElboContext& ctx, const LatentTerms& lt) {
  return case_loss(ctx.at(CaseId::kUA), attr_logits(s), lt);
}

// Mean over V^l of -log pi[v, y_v].
inline ad::Var classification_loss(const LatentState& s, const ElboContext& ctx) {
  if (ctx.n_labelled == 0) throw InputError("classification_loss: no labelled nodes");
  ad::Tape& t = *s.log_pi.tape;
  const ad::Var picked = ad::sum(ad::mul(s.log_pi, t.constant(ctx.label_onehot)));
  return ad::scale(picked, -1.0 / static_cast<double>(ctx.n_labelled));
}

// Value-level variant over explicit probability rows.
inline double classification_loss(const DenseMatrix& pi, const LabelMask& mask, const AttributedNetwork& net) {
  if (mask.labelled().empty()) throw InputError("classification_loss: no labelled nodes");
  double s = 0.0;
  for (std::size_t v : mask.labelled()) s -= std::log(std::max(pi(v, *net.labels[v]), ad::kLogFloor));
  return s / static_cast<double>(mask.labelled().size());
}

struct Objective {
  ad::Var total;
  ElboBreakdown breakdown;
};

// beta * (ll + uu + lu) + (1 - beta) * (la + ua) + alpha * classification.
// The classification term is skipped when there are no labelled nodes and
// alpha is zero.
inline Objective total_objective(const LatentState& s, const ElboContext& ctx, const HyperParams& h) {
  const LatentTerms lt = latent_terms(s);
  const ad::Var el = edge_logits(s);
  const ad::Var al = attr_logits(s);
  const ad::Var ll = case_loss(ctx.at(CaseId::kLL), el, lt);
  const ad::Var uu = case_loss(ctx.at(CaseId::kUU), el, lt);
  const ad::Var lu = case_loss(ctx.at(CaseId::kLU), el, lt);
  const ad::Var la = case_loss(ctx.at(CaseId::kLA), al, lt);
  const ad::Var ua = case_loss(ctx.at(CaseId::kUA), al, lt);

  std::vector<ad::Var> terms = {ll, uu, lu, la, ua};
  std::vector<double> weights = {h.beta, h.beta, h.beta, 1.0 - h.beta, 1.0 - h.beta};
  Objective obj;
  if (ctx.n_labelled > 0) {
    const ad::Var ce = classification_loss(s, ctx);
    terms.push_back(ce);
    weights.push_back(h.alpha);
    obj.breakdown.classification_loss = ce.scalar();
  } else if (h.alpha > 0.0) {
    throw InputError("alpha > 0 requires at least one labelled node");
  }
  obj.total = ad::weighted_sum(terms, weights);

  auto& b = obj.breakdown;
  b.sum_case_ll = ll.scalar();
  b.sum_case_uu = uu.scalar();
  b.sum_case_lu = lu.scalar();
  b.sum_case_la = la.scalar();
  b.sum_case_ua = ua.scalar();
  for (double v : lt.node_kl.value().data()) b.kl_nodes += v;
  for (double v : lt.attr_kl.value().data()) b.kl_attrs += v;
  const auto& ent = lt.entropy.value();
  for (std::size_t i = 0; i < ent.rows(); ++i)
    if (ctx.at(CaseId::kUU).entropy[i] + ctx.at(CaseId::kUA).entropy[i] > 0.0) b.entropy_unlabelled += ent(i, 0);
  b.total_J = obj.total.scalar();
  return obj;
}

}  // namespace coembed

#endif  // COEMBED_ELBO_HPP_
