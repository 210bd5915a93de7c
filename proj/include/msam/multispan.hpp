// msam/multispan.hpp

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

// Multi-span front-end.
//
// Each stream looks at its own span of raw waveform around the current
// frame centre, runs two ReLU convolution layers and (optionally) a linear
// projection. The multi-span feature is the concatenation of all projected
// stream outputs in stream order. Streams only differ in the first layer's
// stride and kernel length; everything downstream has the same geometry, so
// a larger stride simply buys a longer span:
//
//   T_i = (M_i - 1) * S_i + L_i

#ifndef MSAM_MULTISPAN_HPP_
#define MSAM_MULTISPAN_HPP_

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "msam/conv.hpp"
#include "msam/error.hpp"
#include "msam/matrix.hpp"
#include "msam/params.hpp"

namespace msam {

struct StreamConfig {
  std::size_t first_stride = 10;
  std::size_t first_kernel_len = 50;
  std::size_t first_map_size = 200;
  std::size_t first_num_kernels = 64;
  std::size_t second_stride = 1024;
  std::size_t second_kernel_len = 2560;
  std::size_t second_map_size = 11;
  std::size_t second_num_kernels = 128;
  std::size_t projection_dim = 150;

  /// Length of y^i, the flattened first-layer output.
  std::size_t intermediate_dim() const { return first_map_size * first_num_kernels; }
  /// Length of o^i, the flattened second-layer output.
  std::size_t output_dim() const { return second_map_size * second_num_kernels; }

  void validate() const {
    auto positive = [](std::size_t v, const char *field) {
      if (v < 1) throw ValidationError(std::string("stream config: ") + field + " must be >= 1");
    };
    positive(first_stride, "first_stride");
    positive(first_kernel_len, "first_kernel_len");
    positive(first_map_size, "first_map_size");
    positive(first_num_kernels, "first_num_kernels");
    positive(second_stride, "second_stride");
    positive(second_kernel_len, "second_kernel_len");
    positive(second_map_size, "second_map_size");
    positive(second_num_kernels, "second_num_kernels");
    positive(projection_dim, "projection_dim");
    if (second_kernel_len > intermediate_dim())
      throw ValidationError("stream config: second_kernel_len " +
                            std::to_string(second_kernel_len) +
                            " exceeds first-layer output length " +
                            std::to_string(intermediate_dim()));
    const std::size_t m2 = output_map_size(intermediate_dim(), second_kernel_len, second_stride);
    if (m2 != second_map_size)
      throw ValidationError("stream config: second layer produces " + std::to_string(m2) +
                            " frames but second_map_size is " +
                            std::to_string(second_map_size));
  }

  bool operator==(const StreamConfig &) const = default;
};

/// Raw-sample span seen by a stream.
inline std::size_t stream_input_span(const StreamConfig &c) {
  return required_span(c.first_map_size, c.first_stride, c.first_kernel_len);
}

template <typename T>
struct Stream {
  StreamConfig config;
  KernelBank<T> first;
  KernelBank<T> second;
  Matrix<T> projection;  // projection_dim x output_dim; empty for single-span

  bool has_projection() const { return !projection.empty(); }
  std::size_t span() const { return stream_input_span(config); }
  std::size_t feature_dim() const {
    return has_projection() ? config.projection_dim : config.output_dim();
  }

  void append_views(std::vector<ParamView<T>> &views, const std::string &prefix) {
    add_views(views, prefix + ".conv1", first);
    add_views(views, prefix + ".conv2", second);
    if (has_projection()) add_view(views, prefix + ".proj.weight", projection);
  }

  bool operator==(const Stream &) const = default;
};

/// Builds a zero-initialised stream with the configured geometry.
template <typename T>
Stream<T> make_stream(const StreamConfig &c, bool with_projection) {
  c.validate();
  Stream<T> s;
  s.config = c;
  s.first = KernelBank<T>(c.first_num_kernels, c.first_kernel_len, c.first_stride);
  s.second = KernelBank<T>(c.second_num_kernels, c.second_kernel_len, c.second_stride);
  if (with_projection) s.projection = Matrix<T>(c.projection_dim, c.output_dim());
  return s;
}

template <typename T>
void init_stream(Stream<T> &s, Rng &rng) {
  init_bank(s.first, rng);
  init_bank(s.second, rng);
  if (s.has_projection())
    glorot_uniform(s.projection.flat(), s.projection.cols(), s.projection.rows(), rng);
}

/// Window of `span` samples around `center`: [center - ceil(span/2), +span).
/// Odd spans get the extra sample on the past side. Samples outside the
/// signal read as zero.
template <typename T>
std::vector<T> cut_window(std::span<const double> signal, std::ptrdiff_t center,
                          std::size_t span) {
  const std::ptrdiff_t start = center - static_cast<std::ptrdiff_t>((span + 1) / 2);
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(signal.size());
  std::vector<T> w(span, T(0));
  for (std::size_t i = 0; i < span; ++i) {
    const std::ptrdiff_t j = start + static_cast<std::ptrdiff_t>(i);
    if (j >= 0 && j < n) w[i] = static_cast<T>(signal[static_cast<std::size_t>(j)]);
  }
  return w;
}

/// Intermediate activations of one stream, kept for back-propagation.
template <typename T>
struct StreamTrace {
  std::vector<T> first;   // y^i after ReLU
  std::vector<T> second;  // o^i after ReLU
  std::vector<T> output;  // P^i o^i, or o^i itself without projection
};

template <typename T>
StreamTrace<T> stream_forward_traced(const Stream<T> &s, std::span<const T> window) {
  if (window.size() != s.span())
    throw GeometryError("stream window has " + std::to_string(window.size()) +
                        " samples, expected " + std::to_string(s.span()));
  StreamTrace<T> t;
  t.first = cnn_layer_forward(window, s.first, true);
  t.second = cnn_layer_forward<T>(t.first, s.second, true);
  if (s.has_projection()) {
    t.output.assign(s.projection.rows(), T(0));
    affine<T>(s.projection, {}, t.second, t.output);
  } else {
    t.output = t.second;
  }
  return t;
}

/// o^i = ReLU(CNN2(ReLU(CNN1(window)))), without projection.
template <typename T>
std::vector<T> stream_forward(const Stream<T> &s, std::span<const T> window) {
  if (window.size() != s.span())
    throw GeometryError("stream window has " + std::to_string(window.size()) +
                        " samples, expected " + std::to_string(s.span()));
  auto y = cnn_layer_forward(window, s.first, true);
  return cnn_layer_forward<T>(y, s.second, true);
}

/// Accumulates parameter gradients of one stream given dL/d(stream output).
template <typename T>
void stream_backward(const Stream<T> &s, std::span<const T> window,
                     const StreamTrace<T> &t, std::span<const T> grad_output,
                     Stream<T> &grads) {
  std::vector<T> grad_second;
  if (s.has_projection()) {
    grad_second.assign(s.config.output_dim(), T(0));
    affine_backward<T>(s.projection, t.second, grad_output, grads.projection, grad_second);
  } else {
    grad_second.assign(grad_output.begin(), grad_output.end());
  }
  std::vector<T> grad_first(t.first.size(), T(0));
  cnn_layer_backward<T>(t.first, s.second, t.second, grad_second, true, grads.second,
                        grad_first);
  cnn_layer_backward<T>(window, s.first, t.first, grad_first, true, grads.first, {});
}

/// Projected features of every stream for the frame centred at `center`,
/// concatenated in stream order.
template <typename T>
std::vector<T> multispan_forward(const std::vector<Stream<T>> &streams,
                                 const Signal &waveform, std::ptrdiff_t center) {
  std::vector<T> p;
  for (const auto &s : streams) {
    auto window = cut_window<T>(waveform.samples, center, s.span());
    auto t = stream_forward_traced<T>(s, window);
    p.insert(p.end(), t.output.begin(), t.output.end());
  }
  return p;
}

/// A single stream fed straight to the classifier: o^i with no projection.
template <typename T>
std::vector<T> single_span_forward(const Stream<T> &stream, const Signal &waveform,
                                   std::ptrdiff_t center) {
  auto window = cut_window<T>(waveform.samples, center, stream.span());
  return stream_forward<T>(stream, window);
}

}  // namespace msam

#endif  // MSAM_MULTISPAN_HPP_
