// msam/network.hpp

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

// Feed-forward classifier head: ReLU hidden layers, softmax output, and the
// frame-level cross-entropy objective.

#ifndef MSAM_NETWORK_HPP_
#define MSAM_NETWORK_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "msam/error.hpp"
#include "msam/matrix.hpp"
#include "msam/params.hpp"

namespace msam {

template <typename T>
struct AffineLayer {
  Matrix<T> weights;  // out x in
  std::vector<T> biases;

  AffineLayer() = default;
  AffineLayer(std::size_t in, std::size_t out) : weights(out, in), biases(out, T(0)) {}

  std::size_t in_dim() const { return weights.cols(); }
  std::size_t out_dim() const { return weights.rows(); }

  void init(Rng &rng) {
    glorot_uniform(weights.flat(), in_dim(), out_dim(), rng);
    std::fill(biases.begin(), biases.end(), T(0));
  }

  bool operator==(const AffineLayer &) const = default;
};

template <typename T>
struct DnnHead {
  std::vector<AffineLayer<T>> hidden;
  AffineLayer<T> output;

  std::size_t input_dim() const {
    return hidden.empty() ? output.in_dim() : hidden.front().in_dim();
  }
  std::size_t num_classes() const { return output.out_dim(); }

  void validate() const {
    std::size_t dim = input_dim();
    for (std::size_t i = 0; i < hidden.size(); ++i) {
      if (hidden[i].in_dim() != dim)
        throw ShapeError("hidden layer " + std::to_string(i) + " expects " +
                         std::to_string(hidden[i].in_dim()) + " inputs, got " +
                         std::to_string(dim));
      dim = hidden[i].out_dim();
    }
    if (output.in_dim() != dim)
      throw ShapeError("output layer expects " + std::to_string(output.in_dim()) +
                       " inputs, got " + std::to_string(dim));
  }

  /// Dimension chain input -> hidden... -> classes.
  std::vector<std::size_t> dims() const {
    std::vector<std::size_t> d{input_dim()};
    for (const auto &h : hidden) d.push_back(h.out_dim());
    d.push_back(num_classes());
    return d;
  }

  void append_views(std::vector<ParamView<T>> &views) {
    for (std::size_t i = 0; i < hidden.size(); ++i) {
      add_view(views, "dnn.hidden" + std::to_string(i) + ".weight", hidden[i].weights);
      add_view(views, "dnn.hidden" + std::to_string(i) + ".bias", hidden[i].biases);
    }
    add_view(views, "dnn.output.weight", output.weights);
    add_view(views, "dnn.output.bias", output.biases);
  }

  bool operator==(const DnnHead &) const = default;
};

/// Zero-initialised head with the given hidden widths.
template <typename T>
DnnHead<T> make_head(std::size_t input_dim, const std::vector<std::size_t> &hidden_dims,
                     std::size_t num_classes) {
  if (input_dim < 1 || num_classes < 1)
    throw ValidationError("head: input_dim and num_classes must be >= 1");
  DnnHead<T> h;
  std::size_t dim = input_dim;
  for (auto w : hidden_dims) {
    h.hidden.emplace_back(dim, w);
    dim = w;
  }
  h.output = AffineLayer<T>(dim, num_classes);
  return h;
}

template <typename T>
void init_head(DnnHead<T> &h, Rng &rng) {
  for (auto &l : h.hidden) l.init(rng);
  h.output.init(rng);
}

/// Numerically stable softmax (max-logit subtraction).
template <typename T>
void softmax_inplace(std::span<T> v) {
  if (v.empty()) return;
  const T mx = *std::max_element(v.begin(), v.end());
  T sum = 0;
  for (auto &x : v) {
    x = std::exp(x - mx);
    sum += x;
  }
  for (auto &x : v) x /= sum;
}

template <typename T>
struct HeadTrace {
  std::vector<std::vector<T>> activations;  // input, then each hidden output
  std::vector<T> probs;
};

template <typename T>
HeadTrace<T> dnn_forward_traced(std::span<const T> input, const DnnHead<T> &head) {
  if (input.size() != head.input_dim())
    throw ShapeError("head input has length " + std::to_string(input.size()) +
                     ", expected " + std::to_string(head.input_dim()));
  HeadTrace<T> t;
  t.activations.emplace_back(input.begin(), input.end());
  for (const auto &layer : head.hidden) {
    std::vector<T> out(layer.out_dim());
    affine<T>(layer.weights, layer.biases, t.activations.back(), out);
    relu_inplace<T>(out);
    t.activations.push_back(std::move(out));
  }
  t.probs.assign(head.num_classes(), T(0));
  affine<T>(head.output.weights, head.output.biases, t.activations.back(), t.probs);
  softmax_inplace<T>(t.probs);
  return t;
}

/// Class posteriors for one input vector.
template <typename T>
std::vector<T> dnn_forward(std::span<const T> input, const DnnHead<T> &head) {
  return dnn_forward_traced(input, head).probs;
}

/// -log p[label], with p clamped to the smallest normal value of T.
template <typename T>
T cross_entropy(std::span<const T> probs, std::size_t label) {
  if (label >= probs.size())
    throw IndexError("label " + std::to_string(label) + " out of range for " +
                     std::to_string(probs.size()) + " classes");
  return -std::log(std::max(probs[label], std::numeric_limits<T>::min()));
}

/// Accumulates head gradients of the CE loss into `grads` and returns
/// dL/d(input). Uses dL/d(logits) = probs - onehot(label).
template <typename T>
std::vector<T> head_backward(const DnnHead<T> &head, const HeadTrace<T> &t,
                             std::size_t label, DnnHead<T> &grads) {
  if (label >= head.num_classes())
    throw IndexError("label " + std::to_string(label) + " out of range for " +
                     std::to_string(head.num_classes()) + " classes");
  std::vector<T> g(t.probs);
  g[label] -= T(1);
  for (std::size_t c = 0; c < g.size(); ++c) grads.output.biases[c] += g[c];
  std::vector<T> gin(head.output.in_dim(), T(0));
  affine_backward<T>(head.output.weights, t.activations.back(), g, grads.output.weights, gin);
  for (std::size_t i = head.hidden.size(); i-- > 0;) {
    const auto &out = t.activations[i + 1];
    for (std::size_t j = 0; j < gin.size(); ++j)
      if (!(out[j] > T(0))) gin[j] = T(0);
    auto &gl = grads.hidden[i];
    for (std::size_t j = 0; j < gin.size(); ++j) gl.biases[j] += gin[j];
    std::vector<T> next(head.hidden[i].in_dim(), T(0));
    affine_backward<T>(head.hidden[i].weights, t.activations[i], gin, gl.weights, next);
    gin = std::move(next);
  }
  return gin;
}

}  // namespace msam

#endif  // MSAM_NETWORK_HPP_
