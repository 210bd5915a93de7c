// tests/test_multispan.cpp

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

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "msam/multispan.hpp"
#include "oracles.hpp"

namespace msam {
namespace {

StreamConfig with_stride(std::size_t stride) {
  StreamConfig c;
  c.first_stride = stride;
  return c;
}

StreamConfig tiny_config(std::size_t stride) {
  StreamConfig c;
  c.first_stride = stride;
  c.first_kernel_len = 6;
  c.first_map_size = 8;
  c.first_num_kernels = 3;
  c.second_kernel_len = 6;   // two first-layer frames
  c.second_stride = 3;       // one frame hop
  c.second_map_size = 7;
  c.second_num_kernels = 2;
  c.projection_dim = 4;
  return c;
}

Signal noise_signal(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> d(0.0, 0.3);
  std::vector<double> x(n);
  for (auto &v : x) v = d(rng);
  return Signal(std::move(x));
}

std::vector<Stream<double>> make_streams(const std::vector<std::size_t> &strides,
                                         std::uint64_t seed, bool full_size = false) {
  Rng rng(seed);
  std::vector<Stream<double>> out;
  for (auto s : strides) {
    auto st = make_stream<double>(full_size ? with_stride(s) : tiny_config(s), true);
    init_stream(st, rng);
    out.push_back(std::move(st));
  }
  return out;
}

TEST(StreamGeometry, DefaultSpans) {
  EXPECT_EQ(stream_input_span(with_stride(4)), 846u);
  EXPECT_EQ(stream_input_span(with_stride(9)), 1841u);
  EXPECT_EQ(stream_input_span(with_stride(20)), 4030u);
}

TEST(StreamGeometry, DefaultDimensions) {
  const StreamConfig c;
  EXPECT_EQ(c.intermediate_dim(), 12800u);
  EXPECT_EQ(output_map_size(c.intermediate_dim(), c.second_kernel_len, c.second_stride), 11u);
  EXPECT_EQ(c.output_dim(), 1408u);
  EXPECT_NO_THROW(c.validate());
}

TEST(StreamGeometry, InconsistentSecondMapSizeRejected) {
  StreamConfig c;
  c.second_map_size = 12;
  EXPECT_THROW(c.validate(), ValidationError);
  c = StreamConfig{};
  c.second_kernel_len = 12801;
  EXPECT_THROW(c.validate(), ValidationError);
  c = StreamConfig{};
  c.first_stride = 0;
  EXPECT_THROW(c.validate(), ValidationError);
}

TEST(StreamForward, FullSizeShapes) {
  auto streams = make_streams({4}, 3, true);
  const auto sig = noise_signal(4000, 1);
  auto window = cut_window<double>(sig.samples, 2000, streams[0].span());
  auto t = stream_forward_traced<double>(streams[0], window);
  EXPECT_EQ(t.first.size(), 12800u);
  EXPECT_EQ(t.second.size(), 1408u);
  EXPECT_EQ(t.output.size(), 150u);
  EXPECT_EQ(stream_forward<double>(streams[0], window), t.second);
}

TEST(StreamForward, MatchesLayerwiseOracle) {
  auto streams = make_streams({5}, 9);
  const auto &s = streams[0];
  const auto sig = noise_signal(300, 2);
  auto window = cut_window<double>(sig.samples, 150, s.span());
  auto as_rows = [](const Matrix<double> &m) {
    oracle::Mat out;
    for (std::size_t r = 0; r < m.rows(); ++r) out.emplace_back(m.row(r).begin(), m.row(r).end());
    return out;
  };
  // First layer in (kernel, frame) layout, then flattened frame-major.
  auto c1 = oracle::windowed_dot(window, as_rows(s.first.weights), s.first.biases, s.first.stride);
  std::vector<double> y;
  for (std::size_t m = 0; m < c1[0].size(); ++m)
    for (std::size_t k = 0; k < c1.size(); ++k) y.push_back(std::max(0.0, c1[k][m]));
  auto c2 = oracle::windowed_dot(y, as_rows(s.second.weights), s.second.biases, s.second.stride);
  std::vector<double> o;
  for (std::size_t m = 0; m < c2[0].size(); ++m)
    for (std::size_t k = 0; k < c2.size(); ++k) o.push_back(std::max(0.0, c2[k][m]));
  const auto got = stream_forward<double>(s, window);
  ASSERT_EQ(got.size(), o.size());
  for (std::size_t i = 0; i < o.size(); ++i) EXPECT_NEAR(got[i], o[i], 1e-12);
}

TEST(StreamForward, ZeroInputZeroBiasesGivesZeroOutput) {
  auto streams = make_streams({4, 9}, 5);
  for (auto &s : streams) {
    std::fill(s.first.biases.begin(), s.first.biases.end(), 0.0);
    std::fill(s.second.biases.begin(), s.second.biases.end(), 0.0);
  }
  const Signal zero(std::vector<double>(500, 0.0));
  for (double v : multispan_forward(streams, zero, 250)) EXPECT_EQ(v, 0.0);
}

TEST(StreamForward, WrongWindowLength) {
  auto streams = make_streams({4}, 5);
  std::vector<double> w(streams[0].span() + 1, 0.0);
  EXPECT_THROW(stream_forward<double>(streams[0], w), GeometryError);
  EXPECT_THROW(stream_forward_traced<double>(streams[0], w), GeometryError);
}

TEST(CutWindow, CentredZeroPadded) {
  const std::vector<double> x{1, 2, 3, 4, 5};
  EXPECT_EQ(cut_window<double>(x, 2, 3), (std::vector<double>{1, 2, 3}));
  EXPECT_EQ(cut_window<double>(x, 2, 4), (std::vector<double>{1, 2, 3, 4}));
  EXPECT_EQ(cut_window<double>(x, 0, 4), (std::vector<double>{0, 0, 1, 2}));
  EXPECT_EQ(cut_window<double>(x, 5, 4), (std::vector<double>{4, 5, 0, 0}));
  EXPECT_EQ(cut_window<double>(x, 40, 2), (std::vector<double>{0, 0}));
}

TEST(MultispanForward, ConcatenatesStreamsInOrder) {
  for (std::size_t n = 1; n <= 5; ++n) {
    std::vector<std::size_t> strides;
    for (std::size_t i = 0; i < n; ++i) strides.push_back(2 + 3 * i);
    auto streams = make_streams(strides, 17);
    const auto sig = noise_signal(400, 3);
    auto p = multispan_forward(streams, sig, 200);
    ASSERT_EQ(p.size(), 4 * n);
    for (std::size_t i = 0; i < n; ++i) {
      auto w = cut_window<double>(sig.samples, 200, streams[i].span());
      auto t = stream_forward_traced<double>(streams[i], w);
      for (std::size_t j = 0; j < 4; ++j) EXPECT_EQ(p[4 * i + j], t.output[j]);
    }
  }
}

TEST(MultispanForward, StreamsAreIndependent) {
  auto streams = make_streams({3, 5, 7}, 21);
  const auto sig = noise_signal(400, 4);
  const auto before = multispan_forward(streams, sig, 200);
  Rng rng(99);
  init_stream(streams[1], rng);
  const auto after = multispan_forward(streams, sig, 200);
  for (std::size_t j = 0; j < 4; ++j) {
    EXPECT_EQ(before[j], after[j]);
    EXPECT_EQ(before[8 + j], after[8 + j]);
  }
  bool changed = false;
  for (std::size_t j = 4; j < 8; ++j) changed |= before[j] != after[j];
  EXPECT_TRUE(changed);
}

TEST(MultispanForward, Deterministic) {
  auto a = make_streams({4, 9}, 33), b = make_streams({4, 9}, 33);
  EXPECT_EQ(a, b);
  const auto sig = noise_signal(400, 5);
  EXPECT_EQ(multispan_forward(a, sig, 123), multispan_forward(b, sig, 123));
}

TEST(SingleSpanForward, EqualsUnprojectedStream) {
  Rng rng(8);
  auto s = make_stream<double>(tiny_config(4), false);
  init_stream(s, rng);
  EXPECT_FALSE(s.has_projection());
  EXPECT_EQ(s.feature_dim(), s.config.output_dim());
  const auto sig = noise_signal(300, 6);
  auto w = cut_window<double>(sig.samples, 77, s.span());
  EXPECT_EQ(single_span_forward(s, sig, 77), stream_forward<double>(s, w));
  EXPECT_EQ(multispan_forward(std::vector<Stream<double>>{s}, sig, 77),
            stream_forward<double>(s, w));
}

TEST(StreamBackward, MatchesCentralDifferences) {
  auto streams = make_streams({3}, 41);
  auto &s = streams[0];
  const auto sig = noise_signal(200, 7);
  auto w = cut_window<double>(sig.samples, 100, s.span());
  std::vector<double> up{0.3, -1.2, 0.7, 0.05};
  auto objective = [&]() {
    auto t = stream_forward_traced<double>(s, w);
    double acc = 0;
    for (std::size_t j = 0; j < up.size(); ++j) acc += up[j] * t.output[j];
    return acc;
  };
  auto grads = make_stream<double>(s.config, true);
  stream_backward<double>(s, w, stream_forward_traced<double>(s, w), up, grads);
  std::vector<ParamView<double>> pv, gv;
  s.append_views(pv, "s");
  grads.append_views(gv, "s");
  ASSERT_EQ(pv.size(), 5u);
  const double h = 1e-6;
  double worst = 0;
  for (std::size_t t = 0; t < pv.size(); ++t)
    for (std::size_t i = 0; i < pv[t].data.size(); ++i) {
      double &p = pv[t].data[i];
      const double saved = p;
      p = saved + h;
      const double a = objective();
      p = saved - h;
      const double b = objective();
      p = saved;
      worst = std::max(worst, oracle::rel_error(gv[t].data[i], (a - b) / (2 * h)));
    }
  EXPECT_LT(worst, 1e-4);
}

}  // namespace
}  // namespace msam
