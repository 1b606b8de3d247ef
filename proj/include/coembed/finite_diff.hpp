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

#ifndef COEMBED_FINITE_DIFF_HPP_
#define COEMBED_FINITE_DIFF_HPP_

#include <algorithm>
#include <cmath>
#include <concepts>
#include <vector>

#include "coembed/dense.hpp"

namespace coembed {

inline constexpr double kDefaultFdEps = 1e-5;

// Central difference (f(x+eps) - f(x-eps)) / (2 eps) of a scalar function.
template <typename F>
  requires std::invocable<F, double>
double finite_diff(F&& f, double x, double eps = kDefaultFdEps) {
  return (f(x + eps) - f(x - eps)) / (2.0 * eps);
}

// Central differences with respect to every coordinate of `params`. `f` is
// evaluated on the perturbed parameter set; `params` is restored afterwards.
template <typename F>
  requires std::invocable<F, const std::vector<DenseMatrix>&>
std::vector<DenseMatrix> finite_diff_grad(F&& f, std::vector<DenseMatrix>& params,
                                          double eps = kDefaultFdEps) {
  std::vector<DenseMatrix> grads;
  grads.reserve(params.size());
  for (auto& p : params) grads.push_back(DenseMatrix::zeros_like(p));
  for (std::size_t k = 0; k < params.size(); ++k) {
    auto& data = params[k].data();
    for (std::size_t i = 0; i < data.size(); ++i) {
      const double orig = data[i];
      data[i] = orig + eps;
      const double fp = f(params);
      data[i] = orig - eps;
      const double fm = f(params);
      data[i] = orig;
      grads[k].data()[i] = (fp - fm) / (2.0 * eps);
    }
  }
  return grads;
}

// |a - b| / max(|a|, |b|, floor)
inline double relative_error(double a, double b, double floor = 1e-8) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

inline double max_relative_error(const std::vector<DenseMatrix>& a,
                                 const std::vector<DenseMatrix>& b,
                                 double floor = 1e-8) {
  double m = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    a[k].require_same_shape(b[k], "max_relative_error");
    for (std::size_t i = 0; i < a[k].size(); ++i)
      m = std::max(m, relative_error(a[k].data()[i], b[k].data()[i], floor));
  }
  return m;
}

}  // namespace coembed

#endif  // COEMBED_FINITE_DIFF_HPP_
