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

// Ranking and classification metrics, the linear probe on embeddings, and
// the three evaluation tasks (node classification, attribute inference,
// link scoring).

#ifndef COEMBED_EVAL_HPP_
#define COEMBED_EVAL_HPP_

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "coembed/dense.hpp"
#include "coembed/errors.hpp"
#include "coembed/graphdata.hpp"
#include "coembed/model.hpp"

namespace coembed {

struct RankedPredictions {
  std::vector<double> scores;
  std::vector<int> truth;  // 0 or 1
};

// Mann-Whitney AUC with average ranks for ties.
inline double auc(const RankedPredictions& r) {
  if (r.scores.size() != r.truth.size()) throw InputError("auc: scores and truth differ in length");
  const std::size_t n = r.scores.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return r.scores[a] < r.scores[b]; });
  double pos_rank_sum = 0.0;
  std::size_t n_pos = 0;
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && r.scores[order[j + 1]] == r.scores[order[i]]) ++j;
    const double avg_rank = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) {
      if (r.truth[order[k]] == 1) {
        pos_rank_sum += avg_rank;
        ++n_pos;
      }
    }
    i = j + 1;
  }
  const std::size_t n_neg = n - n_pos;
  if (n_pos == 0 || n_neg == 0) throw InputError("auc: needs both positive and negative examples");
  const double p = static_cast<double>(n_pos), q = static_cast<double>(n_neg);
  return (pos_rank_sum - p * (p + 1.0) / 2.0) / (p * q);
}

// sum_k (R_k - R_{k-1}) P_k over scores sorted descending. Ties keep their
// original order (stable sort), which AP is sensitive to.
inline double average_precision(const RankedPredictions& r) {
  if (r.scores.size() != r.truth.size()) throw InputError("average_precision: length mismatch");
  std::vector<std::size_t> order(r.scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return r.scores[a] > r.scores[b]; });
  const auto n_pos = static_cast<std::size_t>(std::count(r.truth.begin(), r.truth.end(), 1));
  if (n_pos == 0) throw InputError("average_precision: no positives");
  double ap = 0.0;
  std::size_t tp = 0;
  for (std::size_t k = 0; k < order.size(); ++k) {
    if (r.truth[order[k]] != 1) continue;
    ++tp;
    ap += static_cast<double>(tp) / static_cast<double>(k + 1);
  }
  return ap / static_cast<double>(n_pos);
}

struct ClassificationReport {
  double macro_f1 = 0.0;
  double micro_f1 = 0.0;
  double accuracy = 0.0;
  std::vector<double> precision;
  std::vector<double> recall;
  std::vector<std::vector<std::size_t>> confusion;  // [truth][pred]
};

inline ClassificationReport classification_report(const std::vector<std::size_t>& pred,
                                                   const std::vector<std::size_t>& truth, std::size_t n_classes) {
  if (pred.size() != truth.size()) throw InputError("classification_report: length mismatch");
  ClassificationReport rep;
  rep.confusion.assign(n_classes, std::vector<std::size_t>(n_classes, 0));
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (pred[i] >= n_classes || truth[i] >= n_classes) throw InputError("classification_report: class out of range");
    ++rep.confusion[truth[i]][pred[i]];
  }
  std::size_t correct = 0, fp_total = 0, fn_total = 0;
  double f1_sum = 0.0;
  rep.precision.assign(n_classes, 0.0);
  rep.recall.assign(n_classes, 0.0);
  for (std::size_t c = 0; c < n_classes; ++c) {
    const std::size_t tp = rep.confusion[c][c];
    std::size_t fp = 0, fn = 0;
    for (std::size_t o = 0; o < n_classes; ++o) {
      if (o == c) continue;
      fp += rep.confusion[o][c];
      fn += rep.confusion[c][o];
    }
    correct += tp;
    fp_total += fp;
    fn_total += fn;
    rep.precision[c] = tp + fp > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
    rep.recall[c] = tp + fn > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
    const double denom = static_cast<double>(2 * tp + fp + fn);
    f1_sum += denom > 0 ? 2.0 * static_cast<double>(tp) / denom : 0.0;
  }
  const double total = static_cast<double>(pred.size());
  rep.accuracy = pred.empty() ? 0.0 : static_cast<double>(correct) / total;
  rep.macro_f1 = n_classes > 0 ? f1_sum / static_cast<double>(n_classes) : 0.0;
  const double micro_denom = static_cast<double>(2 * correct + fp_total + fn_total);
  rep.micro_f1 = micro_denom > 0 ? 2.0 * static_cast<double>(correct) / micro_denom : 0.0;
  return rep;
}

// Multinomial logistic regression with L2 penalty, fit by full-batch
// gradient descent on standardized features.
class LinearProbe {
 public:
  struct Options {
    double l2 = 1e-3;
    std::size_t steps = 500;
    double learning_rate = 0.5;
  };

  LinearProbe() = default;

  void fit(const DenseMatrix& x, const std::vector<std::size_t>& y, std::size_t n_classes, const Options& opt) {
    if (x.rows() != y.size() || x.rows() == 0) throw InputError("LinearProbe::fit: need one label per row");
    const std::size_t n = x.rows(), d = x.cols();
    mean_.assign(d, 0.0);
    inv_std_.assign(d, 1.0);
    for (std::size_t j = 0; j < d; ++j) {
      double m = 0.0, v = 0.0;
      for (std::size_t i = 0; i < n; ++i) m += x(i, j);
      m /= static_cast<double>(n);
      for (std::size_t i = 0; i < n; ++i) v += (x(i, j) - m) * (x(i, j) - m);
      v /= static_cast<double>(n);
      mean_[j] = m;
      inv_std_[j] = v > 1e-12 ? 1.0 / std::sqrt(v) : 1.0;
    }
    const DenseMatrix xs = standardize(x);
    w_ = DenseMatrix(d, n_classes);
    b_ = DenseMatrix(1, n_classes);
    for (std::size_t step = 0; step < opt.steps; ++step) {
      DenseMatrix p = probabilities_std(xs);
      for (std::size_t i = 0; i < n; ++i) p(i, y[i]) -= 1.0;
      DenseMatrix gw = matmul_tn(xs, p);
      const double inv_n = 1.0 / static_cast<double>(n);
      for (std::size_t j = 0; j < gw.size(); ++j) {
        w_.data()[j] -= opt.learning_rate * (gw.data()[j] * inv_n + opt.l2 * w_.data()[j]);
      }
      for (std::size_t c = 0; c < n_classes; ++c) {
        double g = 0.0;
        for (std::size_t i = 0; i < n; ++i) g += p(i, c);
        b_(0, c) -= opt.learning_rate * g * inv_n;
      }
    }
  }

  std::vector<std::size_t> predict(const DenseMatrix& x) const {
    const DenseMatrix p = probabilities_std(standardize(x));
    std::vector<std::size_t> out(x.rows());
    for (std::size_t i = 0; i < x.rows(); ++i) out[i] = argmax_row(p.row(i));
    return out;
  }

 private:
  DenseMatrix standardize(const DenseMatrix& x) const {
    DenseMatrix s = x;
    for (std::size_t i = 0; i < s.rows(); ++i)
      for (std::size_t j = 0; j < s.cols(); ++j) s(i, j) = (s(i, j) - mean_[j]) * inv_std_[j];
    return s;
  }

  DenseMatrix probabilities_std(const DenseMatrix& xs) const {
    DenseMatrix z = matmul(xs, w_);
    for (std::size_t i = 0; i < z.rows(); ++i)
      for (std::size_t c = 0; c < z.cols(); ++c) z(i, c) += b_(0, c);
    return ad::row_softmax_value(z);
  }

  std::vector<double> mean_;
  std::vector<double> inv_std_;
  DenseMatrix w_;
  DenseMatrix b_;
};

struct NodeClassificationResult {
  ClassificationReport dis;     // discriminator argmax
  ClassificationReport linear;  // logistic regression on posterior means
  std::size_t n_evaluated = 0;
};

// Scores V^u nodes that carry a ground-truth label in `net`.
inline NodeClassificationResult eval_node_classification(const ModelParams& params, const AttributedNetwork& net,
                                                         const LabelMask& mask, const HyperParams& h) {
  const ModelInputs in = ModelInputs::build(net, h.self_loops);
  const Inference inf = infer(params, in, net, mask);
  std::vector<std::size_t> eval_nodes;
  for (std::size_t v : mask.unlabelled())
    if (net.labels[v]) eval_nodes.push_back(v);
  if (eval_nodes.empty()) throw InputError("node classification: no unlabelled node has a ground-truth label");

  NodeClassificationResult res;
  res.n_evaluated = eval_nodes.size();
  std::vector<std::size_t> truth, dis_pred;
  for (std::size_t v : eval_nodes) {
    truth.push_back(*net.labels[v]);
    dis_pred.push_back(argmax_row(inf.pi.row(v)));
  }
  res.dis = classification_report(dis_pred, truth, net.n_classes);

  if (mask.labelled().empty()) throw InputError("node classification: linear probe needs labelled nodes");
  const std::size_t D = inf.node_mu.cols();
  DenseMatrix x_train(mask.labelled().size(), D), x_eval(eval_nodes.size(), D);
  std::vector<std::size_t> y_train;
  for (std::size_t r = 0; r < mask.labelled().size(); ++r) {
    const std::size_t v = mask.labelled()[r];
    std::copy(inf.node_mu.row(v).begin(), inf.node_mu.row(v).end(), x_train.row(r).begin());
    y_train.push_back(*net.labels[v]);
  }
  for (std::size_t r = 0; r < eval_nodes.size(); ++r)
    std::copy(inf.node_mu.row(eval_nodes[r]).begin(), inf.node_mu.row(eval_nodes[r]).end(), x_eval.row(r).begin());
  LinearProbe probe;
  probe.fit(x_train, y_train, net.n_classes, {});
  res.linear = classification_report(probe.predict(x_eval), truth, net.n_classes);
  return res;
}

enum class Fold { kValidation, kTest };

struct RankingResult {
  double auc = 0.0;
  double ap = 0.0;
};

// sigmoid(<[mu_i; y_i], [mu_j; y_j]>) or sigmoid(<[mu_i; y_i], mu_a>).
inline double score_pair(const Inference& inf, PairKind kind, const IndexPair& p) {
  const double logit = kind == PairKind::kEdge
                           ? decode_edge(inf.node_mu.row(p.first), inf.labels.row(p.first),
                                         inf.node_mu.row(p.second), inf.labels.row(p.second))
                           : decode_attr(inf.node_mu.row(p.first), inf.labels.row(p.first), inf.attr_mu.row(p.second));
  return sigmoid(logit);
}

inline RankedPredictions score_fold(const Inference& inf, const HoldoutSplit& split, Fold fold) {
  const auto& pos = fold == Fold::kTest ? split.test : split.val;
  const auto& neg = fold == Fold::kTest ? split.test_negatives : split.val_negatives;
  RankedPredictions r;
  for (const auto& p : pos) {
    r.scores.push_back(score_pair(inf, split.kind, p));
    r.truth.push_back(1);
  }
  for (const auto& p : neg) {
    r.scores.push_back(score_pair(inf, split.kind, p));
    r.truth.push_back(0);
  }
  return r;
}

inline RankingResult rank_fold(const Inference& inf, const HoldoutSplit& split, Fold fold) {
  const RankedPredictions r = score_fold(inf, split, fold);
  return {auc(r), average_precision(r)};
}

// `train_net` is the network the model was trained on (held-out pairs
// removed).
inline RankingResult eval_attribute_inference(const ModelParams& params, const AttributedNetwork& train_net,
                                              const LabelMask& mask, const HyperParams& h, const HoldoutSplit& split,
                                              Fold fold = Fold::kTest) {
  if (split.kind != PairKind::kAttribute) throw InputError("attribute inference needs an attribute split");
  const ModelInputs in = ModelInputs::build(train_net, h.self_loops);
  return rank_fold(infer(params, in, train_net, mask), split, fold);
}

inline RankingResult eval_link_scoring(const ModelParams& params, const AttributedNetwork& train_net,
                                       const LabelMask& mask, const HyperParams& h, const HoldoutSplit& split,
                                       Fold fold = Fold::kTest) {
  if (split.kind != PairKind::kEdge) throw InputError("link scoring needs an edge split");
  const ModelInputs in = ModelInputs::build(train_net, h.self_loops);
  return rank_fold(infer(params, in, train_net, mask), split, fold);
}

}  // namespace coembed

#endif  // COEMBED_EVAL_HPP_
