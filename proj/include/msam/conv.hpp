// msam/conv.hpp

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

// Strided 1-D convolution over raw samples.
//
// A bank of K kernels of length L slides over a segment of T samples with
// hop S, producing K feature maps of M = floor((T - L) / S) + 1 values each.
// The m-th value of every map together forms the m-th "frame" of the layer.
// Convolution here is cross-correlation: kernels are not flipped.

#ifndef MSAM_CONV_HPP_
#define MSAM_CONV_HPP_

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "msam/error.hpp"
#include "msam/matrix.hpp"

namespace msam {

inline constexpr int kDefaultSampleRate = 16000;

/// A mono waveform. Samples are kept in double precision so that the
/// normalisation statistics are exact to ~1e-12; model inputs are cast to
/// the network scalar type when windows are cut.
struct Signal {
  std::vector<double> samples;
  int sample_rate = kDefaultSampleRate;

  Signal() = default;
  explicit Signal(std::vector<double> s, int rate = kDefaultSampleRate)
      : samples(std::move(s)), sample_rate(rate) {
    if (sample_rate <= 0) throw ValidationError("signal: sample_rate must be > 0");
    if (samples.empty()) throw ValidationError("signal: length must be >= 1");
  }
  std::size_t size() const { return samples.size(); }
};

/// Number of windows of length `kernel_len` and hop `stride` that fit into
/// `span` samples.
inline std::size_t output_map_size(std::size_t span, std::size_t kernel_len,
                                   std::size_t stride) {
  if (kernel_len < 1 || stride < 1)
    throw GeometryError("kernel length and stride must be >= 1");
  if (span < kernel_len)
    throw GeometryError("span " + std::to_string(span) +
                        " is shorter than kernel length " +
                        std::to_string(kernel_len));
  return (span - kernel_len) / stride + 1;
}

/// Inverse of output_map_size: samples needed for exactly `map_size` windows.
inline std::size_t required_span(std::size_t map_size, std::size_t stride,
                                 std::size_t kernel_len) {
  if (map_size < 1 || stride < 1 || kernel_len < 1)
    throw GeometryError("map size, stride and kernel length must be >= 1");
  return (map_size - 1) * stride + kernel_len;
}

/// Span in milliseconds at the given sample rate.
inline double span_ms(std::size_t samples, int sample_rate = kDefaultSampleRate) {
  return 1000.0 * static_cast<double>(samples) / sample_rate;
}

/// The trainable parameters of one convolutional layer.
template <typename T>
struct KernelBank {
  Matrix<T> weights;  // K x L, row k is kernel k
  std::vector<T> biases;
  std::size_t stride = 1;

  KernelBank() = default;
  KernelBank(std::size_t num_kernels, std::size_t kernel_len, std::size_t s)
      : weights(num_kernels, kernel_len), biases(num_kernels, T(0)), stride(s) {
    validate();
  }

  std::size_t num_kernels() const { return weights.rows(); }
  std::size_t kernel_len() const { return weights.cols(); }

  void validate() const {
    if (weights.rows() < 1 || weights.cols() < 1)
      throw GeometryError("kernel bank needs K >= 1 and L >= 1");
    if (stride < 1) throw GeometryError("kernel bank stride must be >= 1");
    if (biases.size() != weights.rows())
      throw ShapeError("kernel bank has " + std::to_string(biases.size()) +
                       " biases for " + std::to_string(weights.rows()) +
                       " kernels");
  }

  bool operator==(const KernelBank &) const = default;
};

/// K x M matrix; row k is the output feature map of kernel k.
template <typename T>
struct FeatureMaps {
  Matrix<T> maps;
  std::size_t num_kernels() const { return maps.rows(); }
  std::size_t map_size() const { return maps.cols(); }
};

template <typename T>
using FrameVector = std::vector<T>;

namespace detail {

// out[k * kernel_step + m * map_step] = b_k + <w_k, x[m*S .. m*S+L)>
template <typename T>
void correlate(std::span<const T> x, const KernelBank<T> &bank, std::span<T> out,
               std::size_t kernel_step, std::size_t map_step) {
  const std::size_t L = bank.kernel_len(), S = bank.stride;
  const std::size_t M = output_map_size(x.size(), L, S);
  for (std::size_t m = 0; m < M; ++m) {
    const T *win = x.data() + m * S;
    for (std::size_t k = 0; k < bank.num_kernels(); ++k) {
      auto w = bank.weights.row(k);
      T acc = bank.biases[k];
      for (std::size_t j = 0; j < L; ++j) acc += w[j] * win[j];
      out[k * kernel_step + m * map_step] = acc;
    }
  }
}

// Accumulates gradients for correlate() given dL/d(out) laid out the same way.
template <typename T>
void correlate_backward(std::span<const T> x, const KernelBank<T> &bank,
                        std::span<const T> grad_out, std::size_t kernel_step,
                        std::size_t map_step, KernelBank<T> &grad_bank,
                        std::span<T> grad_x) {
  const std::size_t L = bank.kernel_len(), S = bank.stride;
  const std::size_t M = output_map_size(x.size(), L, S);
  for (std::size_t m = 0; m < M; ++m) {
    const T *win = x.data() + m * S;
    for (std::size_t k = 0; k < bank.num_kernels(); ++k) {
      const T g = grad_out[k * kernel_step + m * map_step];
      if (g == T(0)) continue;
      grad_bank.biases[k] += g;
      auto gw = grad_bank.weights.row(k);
      for (std::size_t j = 0; j < L; ++j) gw[j] += g * win[j];
      if (!grad_x.empty()) {
        auto w = bank.weights.row(k);
        T *gx = grad_x.data() + m * S;
        for (std::size_t j = 0; j < L; ++j) gx[j] += g * w[j];
      }
    }
  }
}

}  // namespace detail

/// Applies every kernel of `bank` to `segment` with the bank's stride.
template <typename T>
FeatureMaps<T> conv1d_forward(std::span<const T> segment, const KernelBank<T> &bank) {
  const std::size_t M = output_map_size(segment.size(), bank.kernel_len(), bank.stride);
  FeatureMaps<T> out{Matrix<T>(bank.num_kernels(), M)};
  detail::correlate(segment, bank, out.maps.flat(), M, 1);
  return out;
}

/// Column `m` (zero-based) of the feature maps: one value per kernel.
template <typename T>
FrameVector<T> extract_frame(const FeatureMaps<T> &maps, std::size_t m) {
  if (m >= maps.map_size())
    throw IndexError("frame index " + std::to_string(m) + " out of range [0, " +
                     std::to_string(maps.map_size()) + ")");
  FrameVector<T> v(maps.num_kernels());
  for (std::size_t k = 0; k < v.size(); ++k) v[k] = maps.maps(k, m);
  return v;
}

/// A convolutional layer in frame-major layout: the result is
/// [y_1, ..., y_M] where each y_m holds the K kernel responses at window m.
/// A following layer therefore sees consecutive frames as contiguous blocks.
template <typename T>
std::vector<T> cnn_layer_forward(std::span<const T> input, const KernelBank<T> &bank,
                                 bool apply_relu) {
  const std::size_t M = output_map_size(input.size(), bank.kernel_len(), bank.stride);
  std::vector<T> out(M * bank.num_kernels());
  detail::correlate<T>(input, bank, out, 1, bank.num_kernels());
  if (apply_relu) relu_inplace<T>(out);
  return out;
}

/// Gradients of one layer: same shapes as the bank, plus dL/d(input).
template <typename T>
struct ConvGradients {
  KernelBank<T> bank;  // weight and bias gradients; stride mirrors the layer
  std::vector<T> input;
};

template <typename T>
KernelBank<T> zeros_like(const KernelBank<T> &bank) {
  return KernelBank<T>(bank.num_kernels(), bank.kernel_len(), bank.stride);
}

/// Exact gradients of conv1d_forward given dL/d(maps).
template <typename T>
ConvGradients<T> conv1d_backward(std::span<const T> segment, const KernelBank<T> &bank,
                                 const FeatureMaps<T> &upstream) {
  const std::size_t M = output_map_size(segment.size(), bank.kernel_len(), bank.stride);
  if (upstream.num_kernels() != bank.num_kernels() || upstream.map_size() != M)
    throw ShapeError("upstream gradient is " + std::to_string(upstream.num_kernels()) +
                     "x" + std::to_string(upstream.map_size()) + ", expected " +
                     std::to_string(bank.num_kernels()) + "x" + std::to_string(M));
  ConvGradients<T> g{zeros_like(bank), std::vector<T>(segment.size(), T(0))};
  detail::correlate_backward<T>(segment, bank, upstream.maps.flat(), M, 1, g.bank,
                                g.input);
  return g;
}

/// Backward of cnn_layer_forward, accumulating into `grad_bank` and
/// `grad_input` (which may be empty when the input is not trainable).
/// `output` is the forward result, used for the ReLU mask.
template <typename T>
void cnn_layer_backward(std::span<const T> input, const KernelBank<T> &bank,
                        std::span<const T> output, std::span<const T> grad_output,
                        bool apply_relu, KernelBank<T> &grad_bank,
                        std::span<T> grad_input) {
  const std::size_t M = output_map_size(input.size(), bank.kernel_len(), bank.stride);
  const std::size_t K = bank.num_kernels();
  if (grad_output.size() != M * K || output.size() != M * K)
    throw ShapeError("layer gradient has length " + std::to_string(grad_output.size()) +
                     ", expected " + std::to_string(M * K));
  if (grad_bank.num_kernels() != K || grad_bank.kernel_len() != bank.kernel_len())
    throw ShapeError("gradient bank shape does not match layer");
  if (!grad_input.empty() && grad_input.size() != input.size())
    throw ShapeError("input gradient length does not match input");
  if (!apply_relu) {
    detail::correlate_backward(input, bank, grad_output, 1, K, grad_bank, grad_input);
    return;
  }
  std::vector<T> masked(grad_output.begin(), grad_output.end());
  for (std::size_t i = 0; i < masked.size(); ++i)
    if (!(output[i] > T(0))) masked[i] = T(0);
  detail::correlate_backward<T>(input, bank, masked, 1, K, grad_bank, grad_input);
}

}  // namespace msam

#endif  // MSAM_CONV_HPP_
