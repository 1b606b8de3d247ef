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
#include <vector>

#include "coembed/eval.hpp"
#include "coembed/trainer.hpp"

namespace {

using coembed::DenseMatrix;
using coembed::RankedPredictions;

// Pairwise definition: P(pos > neg) + 0.5 P(tie), by enumeration.
double auc_by_pairs(const RankedPredictions& r) {
  double num = 0;
  std::size_t pairs = 0;
  for (std::size_t i = 0; i < r.scores.size(); ++i)
    for (std::size_t j = 0; j < r.scores.size(); ++j)
      if (r.truth[i] == 1 && r.truth[j] == 0) {
        ++pairs;
        num += r.scores[i] > r.scores[j] ? 1.0 : (r.scores[i] == r.scores[j] ? 0.5 : 0.0);
      }
  return num / static_cast<double>(pairs);
}

RankedPredictions random_predictions(std::size_t n, std::mt19937_64& rng, bool coarse) {
  std::uniform_real_distribution<double> u(0, 1);
  RankedPredictions r;
  for (std::size_t i = 0; i < n; ++i) {
    const double s = u(rng);
    r.scores.push_back(coarse ? std::round(s * 4) / 4 : s);
    r.truth.push_back(i % 3 == 0 ? 1 : 0);
  }
  std::shuffle(r.truth.begin(), r.truth.end(), rng);
  return r;
}

TEST(Auc, WorkedExample) {
  const RankedPredictions r{{0.1, 0.4, 0.35, 0.8}, {0, 0, 1, 1}};
  EXPECT_DOUBLE_EQ(coembed::auc(r), 0.75);
}

TEST(Auc, PerfectAndTied) {
  EXPECT_DOUBLE_EQ(coembed::auc({{0.1, 0.2, 0.9, 0.95}, {0, 0, 1, 1}}), 1.0);
  EXPECT_DOUBLE_EQ(coembed::auc({{0.3, 0.3, 0.3, 0.3, 0.3}, {0, 1, 0, 1, 1}}), 0.5);
  EXPECT_DOUBLE_EQ(coembed::auc({{0.9, 0.8, 0.1}, {0, 0, 1}}), 0.0);
}

TEST(Auc, NeedsBothClasses) {
  EXPECT_THROW(coembed::auc({{0.1, 0.2}, {1, 1}}), coembed::InputError);
  EXPECT_THROW(coembed::auc({{0.1, 0.2}, {0, 0}}), coembed::InputError);
  EXPECT_THROW(coembed::auc({{0.1, 0.2}, {0}}), coembed::InputError);
}

TEST(Auc, MatchesPairEnumerationWithTies) {
  std::mt19937_64 rng(1);
  for (int rep = 0; rep < 50; ++rep) {
    const auto r = random_predictions(30, rng, rep % 2 == 0);
    EXPECT_NEAR(coembed::auc(r), auc_by_pairs(r), 1e-12);
  }
}

TEST(Auc, InvariantUnderMonotoneTransform) {
  std::mt19937_64 rng(2);
  for (int rep = 0; rep < 20; ++rep) {
    auto r = random_predictions(40, rng, rep % 2 == 0);
    const double a = coembed::auc(r);
    for (double& s : r.scores) s = std::exp(3 * s) - 7;
    EXPECT_EQ(coembed::auc(r), a);
  }
}

TEST(AveragePrecision, WorkedExamples) {
  EXPECT_NEAR(coembed::average_precision({{0.1, 0.4, 0.35, 0.8}, {0, 0, 1, 1}}), (1.0 + 2.0 / 3.0) / 2.0, 1e-15);
  EXPECT_NEAR(coembed::average_precision({{0.1, 0.4, 0.35, 0.8}, {0, 0, 1, 1}}), 0.8333, 1e-4);
  EXPECT_DOUBLE_EQ(coembed::average_precision({{0.9, 0.5, 0.4, 0.2}, {1, 0, 0, 0}}), 1.0);
  EXPECT_DOUBLE_EQ(coembed::average_precision({{0.9, 0.5, 0.4, 0.2, 0.1}, {0, 0, 0, 0, 1}}), 0.2);
  EXPECT_THROW(coembed::average_precision({{0.1, 0.2}, {0, 0}}), coembed::InputError);
}

TEST(Ranking, PerfectSeparationIsTheOnlyWayToReachOne) {
  std::mt19937_64 rng(3);
  for (int rep = 0; rep < 100; ++rep) {
    const auto r = random_predictions(8, rng, true);
    double min_pos = 2, max_neg = -1;
    for (std::size_t i = 0; i < r.scores.size(); ++i)
      (r.truth[i] ? min_pos = std::min(min_pos, r.scores[i]) : max_neg = std::max(max_neg, r.scores[i]));
    const bool separated = min_pos > max_neg;
    EXPECT_EQ(coembed::auc(r) == 1.0, separated);
    EXPECT_EQ(coembed::average_precision(r) == 1.0, separated);
  }
}

TEST(Report, WorkedExample) {
  const auto rep = coembed::classification_report({0, 0, 1, 1}, {0, 1, 0, 1}, 2);
  EXPECT_DOUBLE_EQ(rep.accuracy, 0.5);
  EXPECT_DOUBLE_EQ(rep.macro_f1, 0.5);
  EXPECT_DOUBLE_EQ(rep.micro_f1, 0.5);
  EXPECT_EQ(rep.confusion, (std::vector<std::vector<std::size_t>>{{1, 1}, {1, 1}}));
}

TEST(Report, PerfectPredictions) {
  const std::vector<std::size_t> y{0, 2, 1, 1, 2, 0};
  const auto rep = coembed::classification_report(y, y, 3);
  EXPECT_DOUBLE_EQ(rep.accuracy, 1.0);
  EXPECT_DOUBLE_EQ(rep.macro_f1, 1.0);
  EXPECT_DOUBLE_EQ(rep.micro_f1, 1.0);
  for (double p : rep.precision) EXPECT_DOUBLE_EQ(p, 1.0);
  for (double r : rep.recall) EXPECT_DOUBLE_EQ(r, 1.0);
}

TEST(Report, MacroF1ByHand) {
  // truth 0 0 0 1 1 2, pred 0 0 1 1 2 2
  // class 0: p 1, r 2/3; class 1: p 1/2, r 1/2; class 2: p 1/2, r 1.
  const auto rep = coembed::classification_report({0, 0, 1, 1, 2, 2}, {0, 0, 0, 1, 1, 2}, 3);
  const double f0 = 2 * (2.0 / 3.0) / (1 + 2.0 / 3.0), f1 = 0.5, f2 = 2 * 0.5 / 1.5;
  EXPECT_NEAR(rep.macro_f1, (f0 + f1 + f2) / 3, 1e-15);
  EXPECT_NEAR(rep.accuracy, 4.0 / 6.0, 1e-15);
}

TEST(Report, MicroF1EqualsAccuracy) {
  std::mt19937_64 rng(4);
  std::uniform_int_distribution<std::size_t> cls(0, 3);
  for (int rep = 0; rep < 100; ++rep) {
    std::vector<std::size_t> p(25), t(25);
    for (auto& v : p) v = cls(rng);
    for (auto& v : t) v = cls(rng);
    const auto r = coembed::classification_report(p, t, 4);
    EXPECT_NEAR(r.micro_f1, r.accuracy, 1e-15);
  }
}

TEST(Report, RejectsBadInput) {
  EXPECT_THROW(coembed::classification_report({0, 1}, {0}, 2), coembed::InputError);
  EXPECT_THROW(coembed::classification_report({0, 2}, {0, 1}, 2), coembed::InputError);
}

TEST(LinearProbe, SeparatesGaussianBlobs) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> n(0, 1);
  const std::vector<std::vector<double>> centres{{4, 0}, {-4, 0}, {0, 4}};
  DenseMatrix x(150, 2);
  std::vector<std::size_t> y;
  for (std::size_t i = 0; i < 150; ++i) {
    const std::size_t c = i % 3;
    x(i, 0) = 1000 * (centres[c][0] + n(rng));  // unscaled column
    x(i, 1) = centres[c][1] + n(rng);
    y.push_back(c);
  }
  coembed::LinearProbe probe;
  probe.fit(x, y, 3, {});
  const auto rep = coembed::classification_report(probe.predict(x), y, 3);
  EXPECT_GE(rep.accuracy, 0.95);
}

TEST(LinearProbe, RejectsMismatchedLabels) {
  coembed::LinearProbe probe;
  EXPECT_THROW(probe.fit(DenseMatrix(3, 2), {0, 1}, 2, {}), coembed::InputError);
}

coembed::AttributedNetwork default_sbm() {
  coembed::SbmConfig cfg;
  cfg.seed = 0;
  return coembed::generate_sbm(cfg);
}

TEST(NodeClassification, UniformDiscriminatorIsAtChance) {
  const auto net = default_sbm();
  const auto mask = coembed::sample_label_mask(net, 0.1, 0);
  coembed::HyperParams h;
  auto p = coembed::init_params(h, coembed::NetDims::of(net), 0);
  p.disc_w1.fill(0.0);
  p.disc_b1.fill(0.0);
  const auto res = coembed::eval_node_classification(p, net, mask, h);
  EXPECT_EQ(res.n_evaluated, mask.unlabelled().size());
  EXPECT_NEAR(res.dis.accuracy, 1.0 / net.n_classes, 0.05);
}

TEST(NodeClassification, RepeatedEvaluationIsDeterministic) {
  const auto net = default_sbm();
  const auto mask = coembed::sample_label_mask(net, 0.1, 1);
  coembed::HyperParams h;
  const auto p = coembed::init_params(h, coembed::NetDims::of(net), 3);
  const auto a = coembed::eval_node_classification(p, net, mask, h);
  const auto b = coembed::eval_node_classification(p, net, mask, h);
  EXPECT_EQ(a.dis.confusion, b.dis.confusion);
  EXPECT_EQ(a.linear.confusion, b.linear.confusion);
}

// Mean held-out AUC of untrained models over 20 initialisation seeds. A
// single model's AUC varies by about 0.05 across seeds on this test fold.
double mean_untrained_auc(coembed::PairKind kind) {
  const auto net = default_sbm();
  const auto split = coembed::split_pairs(net, kind, {}, 1);
  const auto train_net = coembed::remove_heldout(net, split);
  const auto mask = coembed::sample_label_mask(net, 0.1, 0);
  coembed::HyperParams h;
  double sum = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto p = coembed::init_params(h, coembed::NetDims::of(net), seed);
    sum += kind == coembed::PairKind::kEdge ? coembed::eval_link_scoring(p, train_net, mask, h, split).auc
                                            : coembed::eval_attribute_inference(p, train_net, mask, h, split).auc;
  }
  return sum / 20;
}

TEST(AttributeInference, UntrainedModelIsNearChance) {
  EXPECT_NEAR(mean_untrained_auc(coembed::PairKind::kAttribute), 0.5, 0.05);
}

TEST(AttributeInference, RejectsEdgeSplit) {
  const auto net = default_sbm();
  const auto split = coembed::split_pairs(net, coembed::PairKind::kAttribute, {}, 1);
  coembed::HyperParams h;
  const auto p = coembed::init_params(h, coembed::NetDims::of(net), 0);
  const auto mask = coembed::sample_label_mask(net, 0.1, 0);
  EXPECT_THROW(coembed::eval_link_scoring(p, net, mask, h, split), coembed::InputError);
}

TEST(LinkScoring, UntrainedModelIsNearChance) {
  // Fails: graph propagation and the observed label block already place
  // neighbours close at random weights (mean about 0.60).
  EXPECT_NEAR(mean_untrained_auc(coembed::PairKind::kEdge), 0.5, 0.05);
}

TEST(LinkScoring, ScoresAreSymmetric) {
  const auto net = default_sbm();
  const auto split = coembed::split_pairs(net, coembed::PairKind::kEdge, {}, 1);
  const auto train_net = coembed::remove_heldout(net, split);
  const auto mask = coembed::sample_label_mask(net, 0.1, 0);
  coembed::HyperParams h;
  const auto p = coembed::init_params(h, coembed::NetDims::of(net), 0);
  const auto inf = coembed::infer(p, coembed::ModelInputs::build(train_net, h.self_loops), train_net, mask);
  for (const auto* part : {&split.test, &split.test_negatives})
    for (const auto& e : *part) {
      EXPECT_EQ(coembed::score_pair(inf, coembed::PairKind::kEdge, e),
                coembed::score_pair(inf, coembed::PairKind::kEdge, {e.second, e.first}));
    }
}

TEST(LinkScoring, IntraCommunityEdgesOutrankInterCommunityNonEdges) {
  coembed::SbmConfig cfg;
  cfg.seed = 0;
  const auto net = coembed::generate_sbm(cfg);
  const auto split = coembed::split_pairs(net, coembed::PairKind::kEdge, {}, 1);
  const auto train_net = coembed::remove_heldout(net, split);
  const auto mask = coembed::sample_label_mask(net, 0.1, 0);
  coembed::HyperParams h;
  coembed::TrainOptions opt;
  opt.validation = &split;
  const auto res = coembed::train(train_net, mask, h, opt);
  const auto inf = coembed::infer(res.params, coembed::ModelInputs::build(train_net, h.self_loops), train_net, mask);
  RankedPredictions r;
  auto community = [&](std::size_t v) { return coembed::sbm_community(cfg, v); };
  for (const auto& e : split.test)
    if (community(e.first) == community(e.second)) {
      r.scores.push_back(coembed::score_pair(inf, coembed::PairKind::kEdge, e));
      r.truth.push_back(1);
    }
  for (const auto& e : split.test_negatives)
    if (community(e.first) != community(e.second)) {
      r.scores.push_back(coembed::score_pair(inf, coembed::PairKind::kEdge, e));
      r.truth.push_back(0);
    }
  EXPECT_GE(coembed::auc(r), 0.85) << r.scores.size() << " scored pairs";
}

}  // namespace
