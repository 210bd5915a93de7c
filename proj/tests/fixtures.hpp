// tests/fixtures.hpp

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

// Small models and inputs shared by the unit tests and the acceptance run.

#ifndef MSAM_TESTS_FIXTURES_HPP_
#define MSAM_TESTS_FIXTURES_HPP_

#include <cstdlib>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "msam/model.hpp"
#include "oracles.hpp"

namespace msam::fixture {

/// K=2 kernels of length 5 producing 4 frames; a second layer spanning two
/// frames with a one-frame hop (3 outputs of 2 kernels); 2-d projections.
inline StreamConfig tiny_stream() {
  StreamConfig c;
  c.first_kernel_len = 5;
  c.first_map_size = 4;
  c.first_num_kernels = 2;
  c.second_kernel_len = 4;
  c.second_stride = 2;
  c.second_map_size = 3;
  c.second_num_kernels = 2;
  c.projection_dim = 2;
  return c;
}

inline ModelConfig tiny_config(ModelKind kind, std::vector<std::size_t> strides,
                               std::size_t num_classes = 3) {
  ModelConfig c;
  c.spec.kind = kind;
  c.spec.strides = strides;
  c.spec.kernel_lens.assign(strides.size(), kind == ModelKind::FbankDnn ? 400 : 5);
  c.stream_template = tiny_stream();
  c.hidden_dim = 2;
  c.hidden_layers = 2;
  c.num_classes = num_classes;
  return c;
}

template <typename T>
Model<T> random_model(const ModelConfig &c, std::uint64_t seed) {
  Rng rng(seed);
  auto m = make_model<T>(c, c.hidden_layers);
  init_model(m, rng);
  // Non-zero biases so every bias gradient is exercised.
  std::uniform_real_distribution<double> d(-0.1, 0.1);
  for (auto &v : m.params())
    if (v.name.ends_with(".bias"))
      for (auto &x : v.data) x = static_cast<T>(d(rng));
  return m;
}

template <typename T>
ModelInput<T> random_input(const Model<T> &m, std::mt19937_64 &rng) {
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  ModelInput<T> in;
  if (m.streams.empty()) {
    in.blocks.emplace_back(m.head.input_dim());
    for (auto &x : in.blocks[0]) x = static_cast<T>(d(rng));
  }
  for (const auto &s : m.streams) {
    in.blocks.emplace_back(s.span());
    for (auto &x : in.blocks.back()) x = static_cast<T>(d(rng));
  }
  return in;
}

/// Finite-difference check of model_backward on one (input, label) pair.
inline oracle::GradCheckResult grad_check(Model<double> &m, const ModelInput<double> &in,
                                          std::size_t label) {
  auto grads = zeros_like(m);
  model_backward(m, in, label, grads);
  auto loss = [&]() { return cross_entropy<double>(model_forward(m, in), label); };
  return oracle::central_difference_check(m, grads.params(), loss, 1e-5);
}

/// Scratch directory under the build tree (or the system temp dir).
inline std::filesystem::path scratch_dir(const std::string &name) {
  const char *root = std::getenv("MSAM_TEST_TMP");
  std::filesystem::path p = root ? root : std::filesystem::temp_directory_path() / "msam_tests";
  p /= name;
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

}  // namespace msam::fixture

#endif  // MSAM_TESTS_FIXTURES_HPP_
