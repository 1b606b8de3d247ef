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

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "coembed/elbo.hpp"
#include "coembed/model.hpp"
#include "oracles.hpp"

namespace {

using coembed::AttributedNetwork;
using coembed::CaseId;
using coembed::DenseMatrix;
using coembed::HyperParams;
using coembed::LabelMask;
using coembed::ModelParams;
using coembed::PosWeightMode;
namespace ad = coembed::ad;

HyperParams small_hyper() {
  HyperParams h;
  h.latent_dim = 3;
  h.hidden_node = 4;
  h.hidden_attr = 4;
  h.hidden_disc = 4;
  return h;
}

AttributedNetwork random_net(std::size_t n, std::uint64_t seed) {
  coembed::SbmConfig cfg;
  cfg.n_nodes = n;
  cfg.n_communities = 2;
  cfg.p_intra = 0.7;
  cfg.p_inter = 0.2;
  cfg.attrs_per_community = 2;
  cfg.p_attr_noise = 0.25;
  cfg.seed = seed;
  return coembed::generate_sbm(cfg);
}

// One forward pass, its objective, and plain copies of the values the case
// formulas need.
struct Evaluated {
  coembed::ElboBreakdown breakdown;
  double ll, uu, lu, la, ua, ce_tape;
  oracle::LatentValues values;
};

Evaluated evaluate(const AttributedNetwork& net, const LabelMask& mask, const HyperParams& h, const ModelParams& p,
                   const coembed::NoiseDraw& noise) {
  const auto in = coembed::ModelInputs::build(net, h.self_loops);
  const auto ctx = coembed::build_elbo_context(net, mask, h.pos_weight);
  ad::Tape t;
  const auto s = coembed::forward_epoch(coembed::bind_params(t, p), in, net, mask, h, noise);
  const auto lt = coembed::latent_terms(s);
  Evaluated e;
  e.breakdown = coembed::total_objective(s, ctx, h).breakdown;
  e.ll = coembed::elbo_case_ll(s, ctx, lt).scalar();
  e.uu = coembed::elbo_case_uu(s, ctx, lt).scalar();
  e.lu = coembed::elbo_case_lu(s, ctx, lt).scalar();
  e.la = coembed::elbo_case_la(s, ctx, lt).scalar();
  e.ua = coembed::elbo_case_ua(s, ctx, lt).scalar();
  e.ce_tape = mask.labelled().empty() ? 0.0 : coembed::classification_loss(s, ctx).scalar();
  e.values = {s.z_nodes.value(),   s.labels.value(),      s.z_attrs.value(),     s.node_q.mu.value(),
              s.node_q.logvar.value(), s.attr_q.mu.value(), s.attr_q.logvar.value(), s.pi.value()};
  return e;
}

ModelParams zero_params(const AttributedNetwork& net, const HyperParams& h) {
  ModelParams p = coembed::init_params(h, coembed::NetDims::of(net), 0);
  for (DenseMatrix* t : p.tensors()) t->fill(0.0);
  return p;
}

AttributedNetwork two_nodes_one_edge() {
  AttributedNetwork net;
  net.n_nodes = 2;
  net.n_attrs = 1;
  net.n_classes = 2;
  net.adjacency = coembed::SparseMatrix::from_triplets(2, 2, {{0, 1, 1.0}, {1, 0, 1.0}});
  net.attributes = coembed::SparseMatrix::from_triplets(2, 1, {{0, 0, 1.0}});
  net.labels = {0, 1};
  return net;
}

TEST(CaseLL, ZeroParamsOnePositiveEdge) {
  const auto net = two_nodes_one_edge();
  HyperParams h = small_hyper();
  h.pos_weight = PosWeightMode::kNone;
  const auto zero = coembed::NoiseDraw::zeros(coembed::NetDims::of(net), h);
  const auto e = evaluate(net, LabelMask(2, {0, 1}), h, zero_params(net, h), zero);
  // -log 0.5 reconstruction, -2 log(1/2) label prior, no KL.
  EXPECT_NEAR(e.ll, -std::log(0.5) - 2.0 * std::log(0.5), 1e-12);
  EXPECT_NEAR(e.ll, 2.0794, 1e-4);
}

TEST(Cases, EmptyCasesAreExactlyZero) {
  const auto net = random_net(6, 1);
  HyperParams h = small_hyper();
  h.alpha = 0.0;
  coembed::Rng rng(1);
  const auto noise = coembed::NoiseDraw::draw(coembed::NetDims::of(net), h, rng);
  const auto p = coembed::init_params(h, coembed::NetDims::of(net), 1);
  const auto none = evaluate(net, LabelMask::none(6), h, p, noise);
  EXPECT_EQ(none.ll, 0.0);
  EXPECT_EQ(none.lu, 0.0);
  EXPECT_EQ(none.la, 0.0);
  EXPECT_NE(none.uu, 0.0);
  EXPECT_NE(none.ua, 0.0);
  const auto all = evaluate(net, LabelMask(6, {0, 1, 2, 3, 4, 5}), h, p, noise);
  EXPECT_EQ(all.uu, 0.0);
  EXPECT_EQ(all.lu, 0.0);
  EXPECT_EQ(all.ua, 0.0);
}

TEST(Cases, ZeroParamsUnlabelledValuesMatchHandComputation) {
  // Zero params and zero noise: pi and the relaxed labels are uniform, every
  // edge logit is 1/K and every attribute logit 0, KL is zero and each
  // unlabelled node carries entropy log K.
  const auto net = random_net(5, 2);
  HyperParams h = small_hyper();
  h.pos_weight = PosWeightMode::kNone;
  h.alpha = 0.0;
  const auto zero = coembed::NoiseDraw::zeros(coembed::NetDims::of(net), h);
  const auto e = evaluate(net, LabelMask::none(5), h, zero_params(net, h), zero);
  const double logk = std::log(2.0);
  double rec = 0;
  for (std::size_t i = 0; i < 5; ++i)
    for (std::size_t j = i + 1; j < 5; ++j) {
      const double t = net.adjacency.at(i, j) > 0 ? 1.0 : 0.0;
      rec -= t * std::log(oracle::sig(0.5)) + (1 - t) * std::log(1 - oracle::sig(0.5));
    }
  // Entropy of each node is split evenly between the uu and ua buckets.
  const double uu_want = (rec - 5 * 0.5 * logk) / 10.0 + 2 * logk;
  const double ua_want = (5.0 * 4.0 * std::log(2.0) - 5 * 0.5 * logk) / 20.0 + logk;
  EXPECT_NEAR(e.uu, uu_want, 1e-12);
  EXPECT_NEAR(e.ua, ua_want, 1e-12);
}

struct OracleCase {
  std::vector<std::size_t> labelled;
  PosWeightMode mode;
  std::uint64_t seed;
};

class ElboOracle : public ::testing::TestWithParam<OracleCase> {};

TEST_P(ElboOracle, CasesMatchDenseTranscription) {
  const auto& c = GetParam();
  const auto net = random_net(6, c.seed);
  HyperParams h = small_hyper();
  h.pos_weight = c.mode;
  h.alpha = c.labelled.empty() ? 0.0 : 0.7;
  h.beta = 0.3;
  const LabelMask mask(6, c.labelled);
  coembed::Rng rng(c.seed);
  const auto noise = coembed::NoiseDraw::draw(coembed::NetDims::of(net), h, rng);
  const auto p = coembed::init_params(h, coembed::NetDims::of(net), c.seed + 50);
  const auto e = evaluate(net, mask, h, p, noise);
  const auto want = oracle::elbo_cases(e.values, net, mask, c.mode == PosWeightMode::kBalanced);
  EXPECT_NEAR(e.ll, want.ll, 1e-10);
  EXPECT_NEAR(e.uu, want.uu, 1e-10);
  EXPECT_NEAR(e.lu, want.lu, 1e-10);
  EXPECT_NEAR(e.la, want.la, 1e-10);
  EXPECT_NEAR(e.ua, want.ua, 1e-10);
  const auto& b = e.breakdown;
  EXPECT_EQ(b.sum_case_ll, e.ll);
  EXPECT_EQ(b.sum_case_ua, e.ua);
  if (!c.labelled.empty()) {
    EXPECT_NEAR(b.classification_loss, oracle::classification(e.values.pi, net, mask), 1e-12);
  }
  const double recomputed = h.beta * (b.sum_case_ll + b.sum_case_uu + b.sum_case_lu) +
                            (1 - h.beta) * (b.sum_case_la + b.sum_case_ua) + h.alpha * b.classification_loss;
  EXPECT_NEAR(b.total_J, recomputed, 1e-9);
  EXPECT_NEAR(b.recompose(h.alpha, h.beta), b.total_J, 1e-9);
  EXPECT_GE(b.kl_nodes, 0.0);
  EXPECT_GE(b.kl_attrs, 0.0);
}

INSTANTIATE_TEST_SUITE_P(Masks, ElboOracle,
                         ::testing::Values(OracleCase{{0, 3}, PosWeightMode::kBalanced, 1},
                                           OracleCase{{1, 2, 5}, PosWeightMode::kNone, 2},
                                           OracleCase{{}, PosWeightMode::kBalanced, 3},
                                           OracleCase{{0, 1, 2, 3, 4, 5}, PosWeightMode::kBalanced, 4},
                                           OracleCase{{4}, PosWeightMode::kBalanced, 5},
                                           OracleCase{{2, 4}, PosWeightMode::kNone, 6}));

TEST(Total, BetaOneAndZeroCollapseToOneSide) {
  const auto net = random_net(6, 7);
  HyperParams h = small_hyper();
  h.alpha = 0.0;
  const LabelMask mask(6, {0, 4});
  coembed::Rng rng(7);
  const auto noise = coembed::NoiseDraw::draw(coembed::NetDims::of(net), h, rng);
  const auto p = coembed::init_params(h, coembed::NetDims::of(net), 7);
  h.beta = 1.0;
  auto e = evaluate(net, mask, h, p, noise);
  EXPECT_NEAR(e.breakdown.total_J, e.ll + e.uu + e.lu, 1e-12);
  h.beta = 0.0;
  e = evaluate(net, mask, h, p, noise);
  EXPECT_NEAR(e.breakdown.total_J, e.la + e.ua, 1e-12);
}

TEST(Total, UnsupervisedReducesToUnlabelledCases) {
  const auto net = random_net(6, 8);
  HyperParams h = small_hyper();
  h.alpha = 0.0;
  coembed::Rng rng(8);
  const auto noise = coembed::NoiseDraw::draw(coembed::NetDims::of(net), h, rng);
  const auto e = evaluate(net, LabelMask::none(6), h, coembed::init_params(h, coembed::NetDims::of(net), 8), noise);
  EXPECT_EQ(e.breakdown.sum_case_ll, 0.0);
  EXPECT_EQ(e.breakdown.sum_case_lu, 0.0);
  EXPECT_EQ(e.breakdown.sum_case_la, 0.0);
  EXPECT_EQ(e.breakdown.classification_loss, 0.0);
  EXPECT_NEAR(e.breakdown.total_J, h.beta * e.uu + (1 - h.beta) * e.ua, 1e-12);
}

TEST(Total, PositiveAlphaWithoutLabelsIsAnError) {
  const auto net = random_net(6, 9);
  HyperParams h = small_hyper();
  h.alpha = 1.0;
  coembed::Rng rng(9);
  const auto noise = coembed::NoiseDraw::draw(coembed::NetDims::of(net), h, rng);
  EXPECT_THROW(evaluate(net, LabelMask::none(6), h, coembed::init_params(h, coembed::NetDims::of(net), 9), noise),
               coembed::InputError);
}

TEST(Classification, KnownValues) {
  AttributedNetwork net = random_net(4, 10);
  net.labels = {0, 1, 1, 0};
  const LabelMask mask(4, {0, 1, 2});
  EXPECT_NEAR(coembed::classification_loss(DenseMatrix(4, 2, 0.5), mask, net), std::log(2.0), 1e-15);
  EXPECT_EQ(coembed::classification_loss(DenseMatrix{{1, 0}, {0, 1}, {0, 1}, {1, 0}}, mask, net), 0.0);
  const DenseMatrix pi{{0.7, 0.3}, {0.2, 0.8}, {0.5, 0.5}, {0.1, 0.9}};
  EXPECT_NEAR(coembed::classification_loss(pi, mask, net), (-std::log(0.7) - std::log(0.8) - std::log(0.5)) / 3, 1e-15);
  EXPECT_NEAR(coembed::classification_loss(pi, mask, net), 0.4243, 1e-4);
  EXPECT_THROW(coembed::classification_loss(pi, LabelMask::none(4), net), coembed::InputError);
}

TEST(Entropy, SharperDiscriminatorRaisesUnlabelledLoss) {
  const auto net = random_net(6, 11);
  const LabelMask mask(6, {0});
  const auto ctx = coembed::build_elbo_context(net, mask, PosWeightMode::kBalanced);
  std::mt19937_64 rng(11);
  const DenseMatrix logits = oracle::random_matrix(6, 6, rng);
  double previous = -1e300;
  for (double sharp : {0.5, 0.7, 0.9, 0.99}) {
    DenseMatrix pi(6, 2);
    for (std::size_t i = 0; i < 6; ++i) {
      pi(i, 0) = sharp;
      pi(i, 1) = 1 - sharp;
    }
    ad::Tape t;
    const coembed::LatentTerms lt{t.constant(DenseMatrix(6, 1, 0.3)), t.constant(DenseMatrix(net.n_attrs, 1, 0.2)),
                                  coembed::row_entropy(t.constant(pi))};
    const double uu = coembed::case_loss(ctx.at(CaseId::kUU), t.constant(logits), lt).scalar();
    EXPECT_GT(uu, previous) << sharp;
    previous = uu;
  }
}

TEST(Context, EntryCountsAndPositiveWeights) {
  const auto net = random_net(7, 12);
  const LabelMask mask(7, {1, 4, 6});
  const auto ctx = coembed::build_elbo_context(net, mask, PosWeightMode::kBalanced);
  EXPECT_EQ(ctx.at(CaseId::kLL).entries.size(), 3u);
  EXPECT_EQ(ctx.at(CaseId::kUU).entries.size(), 6u);
  EXPECT_EQ(ctx.at(CaseId::kLU).entries.size(), 12u);
  EXPECT_EQ(ctx.at(CaseId::kLA).entries.size(), 3 * net.n_attrs);
  EXPECT_EQ(ctx.at(CaseId::kUA).entries.size(), 4 * net.n_attrs);
  const double edges = static_cast<double>(net.adjacency.nnz() / 2);
  EXPECT_DOUBLE_EQ(ctx.edge_pos_weight, (21.0 - edges) / edges);
  const double ones = static_cast<double>(net.attributes.nnz());
  EXPECT_DOUBLE_EQ(ctx.attr_pos_weight, (7.0 * net.n_attrs - ones) / ones);
  const auto plain = coembed::build_elbo_context(net, mask, PosWeightMode::kNone);
  EXPECT_EQ(plain.edge_pos_weight, 1.0);
  EXPECT_EQ(plain.attr_pos_weight, 1.0);
}

TEST(Context, EveryLatentIsCountedOnce) {
  const auto net = random_net(7, 13);
  for (const auto& labelled : {std::vector<std::size_t>{}, {0}, {0, 1}, {0, 1, 2, 3, 4, 5, 6}}) {
    const auto ctx = coembed::build_elbo_context(net, LabelMask(7, labelled), PosWeightMode::kBalanced);
    for (std::size_t i = 0; i < 7; ++i) {
      double kl = 0, ent = 0;
      for (const auto& c : ctx.cases) {
        kl += c.node_kl[i];
        ent += c.entropy[i];
      }
      EXPECT_DOUBLE_EQ(kl, 1.0);
      const bool is_l = std::find(labelled.begin(), labelled.end(), i) != labelled.end();
      EXPECT_DOUBLE_EQ(ent, is_l ? 0.0 : 1.0);
    }
    for (std::size_t a = 0; a < net.n_attrs; ++a) {
      double kl = 0;
      for (const auto& c : ctx.cases) kl += c.attr_kl[a];
      EXPECT_DOUBLE_EQ(kl, 1.0);
    }
  }
}

}  // namespace
