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

#ifndef COEMBED_DISTRIBUTIONS_HPP_
#define COEMBED_DISTRIBUTIONS_HPP_

#include <cmath>
#include <numeric>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "coembed/dense.hpp"
#include "coembed/errors.hpp"
#include "coembed/graphdata.hpp"
#include "coembed/tape.hpp"

namespace coembed {

inline constexpr double kLogvarMin = -10.0;
inline constexpr double kLogvarMax = 10.0;

// Diagonal Gaussian q = N(mu, exp(logvar)) per row, recorded on a tape.
struct GaussianParams {
  ad::Var mu;
  ad::Var logvar;
};

inline double softplus(double x) { return ad::detail::softplus(x); }
inline double sigmoid(double x) { return ad::detail::stable_sigmoid(x); }

// ---- noise ----------------------------------------------------------------

inline DenseMatrix standard_normal(std::size_t rows, std::size_t cols, Rng& rng) {
  std::normal_distribution<double> n01(0.0, 1.0);
  DenseMatrix out(rows, cols);
  for (double& v : out.data()) v = n01(rng);
  return out;
}

// g = -log(-log(u)), u ~ Uniform(0, 1).
inline DenseMatrix gumbel_noise(std::size_t rows, std::size_t cols, Rng& rng) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  DenseMatrix out(rows, cols);
  for (double& v : out.data()) {
    double u = 0.0;
    do {
      u = unif(rng);
    } while (u <= 0.0);
    v = -std::log(-std::log(u));
  }
  return out;
}

// ---- Gaussian ---------------------------------------------------------------

// mu + exp(logvar / 2) * noise. The noise is a constant on the tape.
inline ad::Var gaussian_rsample(const GaussianParams& g, const DenseMatrix& noise) {
  g.mu.value().require_same_shape(noise, "gaussian_rsample");
  g.mu.value().require_same_shape(g.logvar.value(), "gaussian_rsample");
  ad::Tape& t = *g.mu.tape;
  const ad::Var sigma = ad::exp(ad::scale(g.logvar, 0.5));
  return ad::add(g.mu, ad::mul(sigma, t.constant(noise)));
}

// KL(N(mu, exp(logvar)) || N(0, I)) for one row.
inline double gaussian_kl_std(std::span<const double> mu, std::span<const double> logvar) {
  double s = 0.0;
  for (std::size_t d = 0; d < mu.size(); ++d) s += mu[d] * mu[d] + std::exp(logvar[d]) - 1.0 - logvar[d];
  return 0.5 * s;
}

// Per-row KL against the standard normal, rows x 1.
inline ad::Var gaussian_kl_std(const GaussianParams& g) {
  const ad::Var mu2 = ad::mul(g.mu, g.mu);
  const ad::Var var = ad::exp(g.logvar);
  const ad::Var inner = ad::sub(ad::add_scalar(ad::add(mu2, var), -1.0), g.logvar);
  return ad::scale(ad::row_sum(inner), 0.5);
}

// ---- Gumbel-Softmax -------------------------------------------------------

// softmax((logits + g) / tau) for one row.
inline std::vector<double> gumbel_softmax_sample(std::span<const double> logits, double tau,
                                                 std::span<const double> gumbel) {
  if (!(tau > 0.0)) throw InputError("gumbel_softmax_sample: tau must be positive");
  if (logits.size() != gumbel.size()) throw ShapeError("gumbel_softmax_sample: noise length");
  DenseMatrix x(1, logits.size());
  for (std::size_t k = 0; k < logits.size(); ++k) x(0, k) = (logits[k] + gumbel[k]) / tau;
  return ad::row_softmax_value(x).data();
}

// Row-wise relaxed categorical sample, differentiable in `logits`.
inline ad::Var gumbel_softmax(ad::Var logits, double tau, const DenseMatrix& gumbel) {
  if (!(tau > 0.0)) throw InputError("gumbel_softmax: tau must be positive");
  logits.value().require_same_shape(gumbel, "gumbel_softmax");
  ad::Tape& t = *logits.tape;
  return ad::row_softmax(ad::scale(ad::add(logits, t.constant(gumbel)), 1.0 / tau));
}

// ---- categorical ----------------------------------------------------------

// -sum p log p with 0 log 0 = 0. Rejects anything off the simplex.
inline double categorical_entropy(std::span<const double> p) {
  double total = 0.0;
  double h = 0.0;
  for (double v : p) {
    if (!(v >= 0.0)) throw InputError("categorical_entropy: negative probability");
    total += v;
    if (v > 0.0) h -= v * std::log(v);
  }
  if (std::abs(total - 1.0) > 1e-9) {
    throw InputError("categorical_entropy: probabilities sum to " + std::to_string(total));
  }
  return h;
}

// Row entropies of a probability matrix, rows x 1.
inline ad::Var row_entropy(ad::Var probs) {
  return ad::scale(ad::row_sum(ad::mul(probs, ad::log(probs))), -1.0);
}

// ---- Bernoulli ------------------------------------------------------------

// pos_weight * t * log sigmoid(l) + (1 - t) * log(1 - sigmoid(l)),
// l clamped to [-30, 30].
inline double bernoulli_logpmf(double logit, double target, double pos_weight = 1.0) {
  const double l = std::clamp(logit, -ad::kSigmoidClamp, ad::kSigmoidClamp);
  return -pos_weight * target * softplus(-l) - (1.0 - target) * softplus(l);
}

}  // namespace coembed

#endif  // COEMBED_DISTRIBUTIONS_HPP_
