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

// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
// criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "coembed/cli.hpp"
#include "oracles.hpp"

namespace {

using namespace coembed;
namespace fs = std::filesystem;

struct Outcome {
  bool pass;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

SbmConfig criterion_sbm() {
  SbmConfig cfg;  // 200 nodes, 4 communities, 0.10 / 0.01, 8 attributes each, 0.8 / 0.05
  cfg.seed = 0;
  return cfg;
}

Outcome gradient_correctness() {
  const Fixture fx = gradcheck_fixture();
  const GradCheckResult r = grad_check(fx.net, fx.mask, gradcheck_hyper());
  return {r.max_rel_error <= 1e-5 && r.per_trial.size() == 20 && r.seconds < 60.0,
          "max relative error " + fmt("%.3g", r.max_rel_error) + " over " + std::to_string(r.per_trial.size()) +
              " points in " + fmt("%.2f", r.seconds) + " s"};
}

Outcome kl_monte_carlo() {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(2);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> lv_dist(-2.0, 1.0);
  const std::size_t D = 16, samples = 100000;
  double worst = 0.0;
  for (int row = 0; row < 50; ++row) {
    std::vector<double> mu(D), lv(D);
    for (std::size_t d = 0; d < D; ++d) {
      mu[d] = normal(rng);
      lv[d] = lv_dist(rng);
    }
    // log q(z) - log p(z) at z ~ q, constants cancel.
    double acc = 0.0;
    for (std::size_t s = 0; s < samples; ++s) {
      double v = 0.0;
      for (std::size_t d = 0; d < D; ++d) {
        const double eps = normal(rng);
        const double z = mu[d] + std::exp(0.5 * lv[d]) * eps;
        v += -0.5 * lv[d] - 0.5 * eps * eps + 0.5 * z * z;
      }
      acc += v;
    }
    const double mc = acc / static_cast<double>(samples);
    const double exact = gaussian_kl_std(mu, lv);
    worst = std::max(worst, std::abs(exact - mc) / std::abs(exact));
  }
  const double secs = seconds_since(t0);
  return {worst <= 0.01 && secs < 30.0,
          "worst relative gap " + fmt("%.4f", worst) + " over 50 rows in " + fmt("%.1f", secs) + " s"};
}

Outcome gumbel_fidelity() {
  const std::vector<double> logits{0.5, -0.2, 1.1};
  const std::size_t n = 100000;
  Rng rng(3);
  const DenseMatrix g = gumbel_noise(n, 3, rng);
  std::size_t sharp = 0;
  std::vector<double> freq(3, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto y = gumbel_softmax_sample(logits, 0.01, g.row(i));
    if (*std::max_element(y.begin(), y.end()) >= 0.99) ++sharp;
    freq[argmax_row(y)] += 1.0 / static_cast<double>(n);
  }
  double z = 0.0;
  for (double l : logits) z += std::exp(l);
  double worst = 0.0;
  for (std::size_t k = 0; k < 3; ++k) worst = std::max(worst, std::abs(freq[k] - std::exp(logits[k]) / z));
  const double sharp_rate = static_cast<double>(sharp) / static_cast<double>(n);
  return {sharp_rate >= 0.99 && worst <= 0.02, "near one-hot rate " + fmt("%.4f", sharp_rate) +
                                                   " (need >= 0.99), argmax frequency gap " + fmt("%.4f", worst)};
}

Outcome exact_values() {
  double worst = 0.0;
  auto check = [&worst](double got, double want) { worst = std::max(worst, std::abs(got - want)); };
  check(sigmoid(0.0), 0.5);
  for (std::size_t k : {2u, 3u, 7u}) check(categorical_entropy(std::vector<double>(k, 1.0 / k)), std::log(double(k)));
  check(bernoulli_logpmf(0.0, 1.0), std::log(0.5));
  check(bernoulli_logpmf(0.0, 0.0), std::log(0.5));
  check(gaussian_kl_std(std::vector<double>(8, 0.0), std::vector<double>(8, 0.0)), 0.0);
  // Zero parameters and zero noise: every posterior equals the prior.
  const Fixture fx = gradcheck_fixture();
  HyperParams h = gradcheck_hyper();
  ModelParams p = init_params(h, NetDims::of(fx.net), 0);
  for (DenseMatrix* t : p.tensors()) t->fill(0.0);
  ad::Tape tape;
  const LatentState s = forward_epoch(bind_params(tape, p), ModelInputs::build(fx.net, h.self_loops), fx.net, fx.mask,
                                      h, NoiseDraw::zeros(NetDims::of(fx.net), h));
  const ElboBreakdown b = total_objective(s, build_elbo_context(fx.net, fx.mask, h.pos_weight), h).breakdown;
  check(b.kl_nodes, 0.0);
  check(b.kl_attrs, 0.0);
  return {worst <= 1e-12, "largest deviation " + fmt("%.3g", worst)};
}

Outcome elbo_oracle() {
  SbmConfig cfg;
  cfg.n_nodes = 6;
  cfg.n_communities = 2;
  cfg.p_intra = 0.7;
  cfg.p_inter = 0.2;
  cfg.attrs_per_community = 2;
  cfg.p_attr_noise = 0.25;
  cfg.seed = 5;
  const AttributedNetwork net = generate_sbm(cfg);
  const LabelMask mask(6, {1, 4});
  HyperParams h;
  h.latent_dim = 3;
  h.hidden_node = h.hidden_attr = h.hidden_disc = 4;
  h.beta = 0.3;
  h.alpha = 0.7;
  Rng rng(5);
  const NoiseDraw noise = NoiseDraw::draw(NetDims::of(net), h, rng);
  const ModelParams p = init_params(h, NetDims::of(net), 55);
  const ElboContext ctx = build_elbo_context(net, mask, h.pos_weight);
  ad::Tape t;
  const LatentState s = forward_epoch(bind_params(t, p), ModelInputs::build(net, h.self_loops), net, mask, h, noise);
  const LatentTerms lt = latent_terms(s);
  const oracle::LatentValues v{s.z_nodes.value(),       s.labels.value(),      s.z_attrs.value(),
                               s.node_q.mu.value(),     s.node_q.logvar.value(), s.attr_q.mu.value(),
                               s.attr_q.logvar.value(), s.pi.value()};
  const oracle::CaseValues want = oracle::elbo_cases(v, net, mask, true);
  const double got[] = {elbo_case_ll(s, ctx, lt).scalar(), elbo_case_uu(s, ctx, lt).scalar(),
                        elbo_case_lu(s, ctx, lt).scalar(), elbo_case_la(s, ctx, lt).scalar(),
                        elbo_case_ua(s, ctx, lt).scalar()};
  const double ref[] = {want.ll, want.uu, want.lu, want.la, want.ua};
  double worst = 0.0;
  for (int c = 0; c < 5; ++c) worst = std::max(worst, std::abs(got[c] - ref[c]));
  const ElboBreakdown b = total_objective(s, ctx, h).breakdown;
  const double recompose = std::abs(b.recompose(h.alpha, h.beta) - b.total_J);
  return {worst <= 1e-10 && recompose <= 1e-9,
          "case gap " + fmt("%.3g", worst) + ", recomposition gap " + fmt("%.3g", recompose)};
}

RunConfig sbm_run(const std::string& task, std::uint64_t seed, double beta) {
  RunConfig c;
  c.task = task;
  c.hyper.seed = seed;
  c.hyper.beta = beta;
  c.label_ratio = 0.1;
  return c;
}

Outcome sbm_recovery() {
  const auto t0 = std::chrono::steady_clock::now();
  const RunConfig cfg = sbm_run("attr", 0, 0.5);
  const PreparedRun run = prepare_run(generate_sbm(criterion_sbm()), cfg);
  const TrainResult tr = run_training(run, cfg, nullptr);
  const double dis = evaluate_task("class", tr.params, run, cfg).at("dis_accuracy");
  const double auc = evaluate_task("attr", tr.params, run, cfg).at("attr_auc");
  const double first = tr.history.epochs.front().total_J, last = tr.history.epochs.back().total_J;
  const double drop = 1.0 - last / first;
  const double secs = seconds_since(t0);
  return {dis >= 0.85 && auc >= 0.85 && drop >= 0.20 && secs < 300.0,
          "DIS accuracy " + fmt("%.3f", dis) + ", attribute AUC " + fmt("%.3f", auc) + ", loss drop " +
              fmt("%.1f", 100 * drop) + "%, " + fmt("%.1f", secs) + " s"};
}

double mean_auc(const AttributedNetwork& net, const std::string& task, double beta) {
  double sum = 0.0;
  for (std::uint64_t seed : {0u, 1u, 2u}) {
    const RunConfig cfg = sbm_run(task, seed, beta);
    const PreparedRun run = prepare_run(net, cfg);
    const TrainResult tr = run_training(run, cfg, nullptr);
    sum += evaluate_task(task, tr.params, run, cfg).at(task + "_auc");
  }
  return sum / 3.0;
}

Outcome beta_direction() {
  const AttributedNetwork net = generate_sbm(criterion_sbm());
  const double edge_lo = mean_auc(net, "link", 0.1), edge_hi = mean_auc(net, "link", 0.9);
  const double attr_lo = mean_auc(net, "attr", 0.1), attr_hi = mean_auc(net, "attr", 0.9);
  return {edge_hi >= edge_lo && attr_lo >= attr_hi,
          "edge AUC " + fmt("%.4f", edge_lo) + " (beta 0.1) vs " + fmt("%.4f", edge_hi) + " (beta 0.9); attribute AUC " +
              fmt("%.4f", attr_lo) + " (beta 0.1) vs " + fmt("%.4f", attr_hi) + " (beta 0.9)"};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome determinism() {
  const RunConfig cfg = sbm_run("attr", 7, 0.5);
  const PreparedRun run = prepare_run(generate_sbm(criterion_sbm()), cfg);
  const fs::path root = fs::temp_directory_path() / "coembed_acceptance_determinism";
  fs::remove_all(root);
  std::vector<TrainResult> results;
  for (const char* name : {"a", "b"}) {
    results.push_back(run_training(run, cfg, nullptr));
    fs::create_directories(root / name);
    write_embeddings(root / name, infer(results.back().params, ModelInputs::build(run.train_net, true), run.train_net,
                                        run.mask));
  }
  double worst = 0.0;
  bool same_length = results[0].history.epochs.size() == results[1].history.epochs.size();
  for (std::size_t e = 0; same_length && e < results[0].history.epochs.size(); ++e) {
    const auto a = results[0].history.epochs[e].fields(), b = results[1].history.epochs[e].fields();
    for (std::size_t k = 0; k < a.size(); ++k) worst = std::max(worst, std::abs(a[k] - b[k]));
  }
  bool identical = true;
  for (const char* f : {"nodes.tsv", "attrs.tsv", "labels_pred.tsv"})
    identical = identical && slurp(root / "a" / f) == slurp(root / "b" / f);
  fs::remove_all(root);
  return {same_length && worst <= 1e-12 && identical,
          "largest trace difference " + fmt("%.3g", worst) + ", exports " + (identical ? "identical" : "differ")};
}

Outcome unsupervised() {
  const AttributedNetwork net = generate_sbm(criterion_sbm());
  const LabelMask none = LabelMask::none(net.n_nodes);
  HyperParams h;
  h.alpha = 0.0;
  Rng rng(noise_seed(h.seed));
  const NoiseDraw noise = NoiseDraw::draw(NetDims::of(net), h, rng);
  ad::Tape t;
  const LatentState s = forward_epoch(bind_params(t, init_params(h, NetDims::of(net), h.seed)),
                                      ModelInputs::build(net, h.self_loops), net, none, h, noise);
  const ElboBreakdown b = total_objective(s, build_elbo_context(net, none, h.pos_weight), h).breakdown;
  const bool zeros = b.sum_case_ll == 0.0 && b.sum_case_lu == 0.0 && b.sum_case_la == 0.0 &&
                     b.classification_loss == 0.0;
  const bool reduces = b.total_J == h.beta * b.sum_case_uu + (1 - h.beta) * b.sum_case_ua;
  const TrainResult tr = train(net, none, h);
  const double drop = 1.0 - tr.history.epochs.back().total_J / tr.history.epochs.front().total_J;
  return {zeros && reduces && drop >= 0.20, std::string("labelled terms ") + (zeros ? "exactly zero" : "nonzero") +
                                                ", total " + (reduces ? "equals" : "differs from") +
                                                " the unlabelled terms, loss drop " + fmt("%.1f", 100 * drop) + "%"};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"gradient correctness", gradient_correctness},
      {"analytic vs Monte Carlo KL", kl_monte_carlo},
      {"Gumbel-Softmax fidelity", gumbel_fidelity},
      {"exact unit values", exact_values},
      {"ELBO oracle equivalence", elbo_oracle},
      {"end-to-end SBM recovery", sbm_recovery},
      {"beta sensitivity direction", beta_direction},
      {"determinism", determinism},
      {"unsupervised degeneration", unsupervised},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    failures += o.pass ? 0 : 1;
    std::printf("criterion %zu %s: %s (%s)\n", i + 1, criteria[i].first, o.pass ? "PASS" : "FAIL", o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria failed\n", failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
