// msam/params.hpp

// Copyright 2026  The msam Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#ifndef MSAM_PARAMS_HPP_
#define MSAM_PARAMS_HPP_

#include <cmath>
#include <cstddef>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "msam/conv.hpp"
#include "msam/matrix.hpp"

namespace msam {

using Rng = std::mt19937_64;

/// A named, shaped window onto one parameter tensor of a model. Views are
/// produced in a fixed order, so two models with equal topology yield
/// aligned view lists (used for gradients, optimiser state and checkpoints).
template <typename T>
struct ParamView {
  std::string name;
  std::vector<std::size_t> dims;
  std::span<T> data;
};

template <typename T>
void add_view(std::vector<ParamView<T>> &views, std::string name, Matrix<T> &m) {
  views.push_back({std::move(name), {m.rows(), m.cols()}, m.flat()});
}

template <typename T>
void add_view(std::vector<ParamView<T>> &views, std::string name, std::vector<T> &v) {
  views.push_back({std::move(name), {v.size()}, std::span<T>(v)});
}

template <typename T>
void add_views(std::vector<ParamView<T>> &views, const std::string &prefix,
               KernelBank<T> &bank) {
  add_view(views, prefix + ".weight", bank.weights);
  add_view(views, prefix + ".bias", bank.biases);
}

/// Uniform in +-sqrt(6 / (fan_in + fan_out)).
template <typename T>
void glorot_uniform(std::span<T> values, std::size_t fan_in, std::size_t fan_out,
                    Rng &rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  std::uniform_real_distribution<double> dist(-limit, limit);
  for (auto &v : values) v = static_cast<T>(dist(rng));
}

/// Kernels treat L as fan-in and K as fan-out; biases start at zero.
template <typename T>
void init_bank(KernelBank<T> &bank, Rng &rng) {
  glorot_uniform(bank.weights.flat(), bank.kernel_len(), bank.num_kernels(), rng);
  std::fill(bank.biases.begin(), bank.biases.end(), T(0));
}

}  // namespace msam

#endif  // MSAM_PARAMS_HPP_
