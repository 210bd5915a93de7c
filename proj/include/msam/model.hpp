// msam/model.hpp

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

// The complete acoustic model: front-end (waveform streams or FBANK
// context window) followed by the DNN head.

#ifndef MSAM_MODEL_HPP_
#define MSAM_MODEL_HPP_

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "msam/error.hpp"
#include "msam/fbank.hpp"
#include "msam/model_spec.hpp"
#include "msam/multispan.hpp"
#include "msam/network.hpp"
#include "msam/params.hpp"

namespace msam {

using Metadata = std::map<std::string, std::string>;

/// Architecture of a model. The stream template carries the geometry shared
/// by all streams; the spec supplies each stream's first-layer stride and
/// kernel length.
struct ModelConfig {
  ModelSpec spec;
  StreamConfig stream_template;
  std::size_t hidden_dim = 512;
  std::size_t hidden_layers = 4;
  std::size_t num_classes = 0;
  FbankConfig fbank;
  std::size_t context_frames = 11;

  std::vector<StreamConfig> stream_configs() const {
    std::vector<StreamConfig> out;
    if (spec.kind == ModelKind::FbankDnn) return out;
    for (std::size_t i = 0; i < spec.strides.size(); ++i) {
      StreamConfig c = stream_template;
      c.first_stride = spec.strides[i];
      c.first_kernel_len = spec.kernel_lens[i];
      out.push_back(c);
    }
    return out;
  }

  FbankConfig fbank_config() const {
    FbankConfig f = fbank;
    if (spec.kind == ModelKind::FbankDnn) {
      f.frame_shift = spec.strides.at(0);
      f.frame_size = spec.kernel_lens.at(0);
    }
    return f;
  }

  /// Length of the vector handed to the DNN head.
  std::size_t front_end_dim() const {
    switch (spec.kind) {
      case ModelKind::FbankDnn: return fbank.num_filters * context_frames;
      case ModelKind::SingleSpan: return stream_template.output_dim();
      case ModelKind::MultiSpan: return stream_template.projection_dim * spec.strides.size();
    }
    return 0;
  }

  void validate() const {
    if (num_classes < 1) throw ValidationError("model: num_classes must be >= 1");
    if (hidden_dim < 1) throw ValidationError("model: hidden_dim must be >= 1");
    if (spec.strides.empty() || spec.strides.size() != spec.kernel_lens.size())
      throw ValidationError("model: spec needs matching strides and kernel sizes");
    if (spec.kind == ModelKind::FbankDnn) {
      fbank_config().validate();
      if (context_frames % 2 == 0) throw ValidationError("model: context_frames must be odd");
    } else {
      for (const auto &c : stream_configs()) c.validate();
    }
  }

  void to_metadata(Metadata &m) const {
    auto put = [&](const char *k, std::size_t v) { m[k] = std::to_string(v); };
    m["model.spec"] = format_model_spec(spec);
    m["model.kind"] = to_string(spec.kind);
    put("model.first_map_size", stream_template.first_map_size);
    put("model.first_num_kernels", stream_template.first_num_kernels);
    put("model.second_stride", stream_template.second_stride);
    put("model.second_kernel_len", stream_template.second_kernel_len);
    put("model.second_map_size", stream_template.second_map_size);
    put("model.second_num_kernels", stream_template.second_num_kernels);
    put("model.projection_dim", stream_template.projection_dim);
    put("model.hidden_dim", hidden_dim);
    put("model.hidden_layers", hidden_layers);
    put("model.num_classes", num_classes);
    put("model.fbank_num_filters", fbank.num_filters);
    put("model.fbank_fft_size", fbank.fft_size);
    put("model.context_frames", context_frames);
    put("model.sample_rate", static_cast<std::size_t>(fbank.sample_rate));
  }

  static ModelConfig from_metadata(const Metadata &m) {
    auto get = [&](const char *k) -> const std::string & {
      auto it = m.find(k);
      if (it == m.end()) throw FormatError(std::string("model metadata: missing key ") + k);
      return it->second;
    };
    auto num = [&](const char *k) -> std::size_t {
      const auto &s = get(k);
      if (s.empty() || s.find_first_not_of("0123456789") != s.npos)
        throw FormatError(std::string("model metadata: bad value for ") + k);
      return std::stoul(s);
    };
    ModelConfig c;
    c.spec = parse_model_spec(get("model.spec"));
    c.stream_template.first_map_size = num("model.first_map_size");
    c.stream_template.first_num_kernels = num("model.first_num_kernels");
    c.stream_template.second_stride = num("model.second_stride");
    c.stream_template.second_kernel_len = num("model.second_kernel_len");
    c.stream_template.second_map_size = num("model.second_map_size");
    c.stream_template.second_num_kernels = num("model.second_num_kernels");
    c.stream_template.projection_dim = num("model.projection_dim");
    c.hidden_dim = num("model.hidden_dim");
    c.hidden_layers = num("model.hidden_layers");
    c.num_classes = num("model.num_classes");
    c.fbank.num_filters = num("model.fbank_num_filters");
    c.fbank.fft_size = num("model.fbank_fft_size");
    c.context_frames = num("model.context_frames");
    c.fbank.sample_rate = static_cast<int>(num("model.sample_rate"));
    return c;
  }

  bool operator==(const ModelConfig &) const = default;
};

template <typename T>
struct Model {
  ModelConfig config;
  std::vector<Stream<T>> streams;  // empty for FbankDnn
  DnnHead<T> head;

  ModelKind kind() const { return config.spec.kind; }

  /// Parameter views in a fixed order: streams, then the head.
  std::vector<ParamView<T>> params() {
    std::vector<ParamView<T>> v;
    for (std::size_t i = 0; i < streams.size(); ++i)
      streams[i].append_views(v, "stream" + std::to_string(i));
    head.append_views(v);
    return v;
  }

  std::size_t num_params() {
    std::size_t n = 0;
    for (const auto &p : params()) n += p.data.size();
    return n;
  }

  bool operator==(const Model &) const = default;
};

/// Zero-filled model. `head_layers` hidden layers of config.hidden_dim.
template <typename T>
Model<T> make_model(const ModelConfig &config, std::size_t head_layers) {
  config.validate();
  Model<T> m;
  m.config = config;
  // Per-stream geometry comes from the spec; keep the template consistent
  // with it so configs compare equal after a checkpoint round trip.
  m.config.stream_template.first_stride = config.spec.strides[0];
  m.config.stream_template.first_kernel_len = config.spec.kernel_lens[0];
  const bool project = config.spec.kind == ModelKind::MultiSpan;
  for (const auto &sc : config.stream_configs()) m.streams.push_back(make_stream<T>(sc, project));
  m.head = make_head<T>(config.front_end_dim(),
                        std::vector<std::size_t>(head_layers, config.hidden_dim),
                        config.num_classes);
  return m;
}

template <typename T>
void init_model(Model<T> &m, Rng &rng) {
  for (auto &s : m.streams) init_stream(s, rng);
  init_head(m.head, rng);
}

/// Same topology, every parameter zero. Used as a gradient accumulator.
template <typename T>
Model<T> zeros_like(const Model<T> &m) {
  Model<T> z = make_model<T>(m.config, m.head.hidden.size());
  return z;
}

/// Per-frame model input. Waveform models carry one window per stream;
/// the FBANK model carries a single spliced feature vector.
template <typename T>
struct ModelInput {
  std::vector<std::vector<T>> blocks;
};

template <typename T>
struct ModelTrace {
  std::vector<StreamTrace<T>> streams;
  HeadTrace<T> head;
};

template <typename T>
ModelTrace<T> model_forward_traced(const Model<T> &m, const ModelInput<T> &in) {
  ModelTrace<T> t;
  std::vector<T> features;
  if (m.kind() == ModelKind::FbankDnn) {
    if (in.blocks.size() != 1) throw ShapeError("fbank model expects one input block");
    features = in.blocks[0];
  } else {
    if (in.blocks.size() != m.streams.size())
      throw ShapeError("model has " + std::to_string(m.streams.size()) + " streams but input has " +
                       std::to_string(in.blocks.size()) + " windows");
    for (std::size_t i = 0; i < m.streams.size(); ++i) {
      t.streams.push_back(stream_forward_traced<T>(m.streams[i], in.blocks[i]));
      const auto &o = t.streams.back().output;
      features.insert(features.end(), o.begin(), o.end());
    }
  }
  t.head = dnn_forward_traced<T>(features, m.head);
  return t;
}

template <typename T>
std::vector<T> model_forward(const Model<T> &m, const ModelInput<T> &in) {
  return model_forward_traced(m, in).head.probs;
}

/// Accumulates dCE/dparams for one labelled frame into `grads` (which must
/// share the model's topology) and returns the frame's loss.
template <typename T>
T model_backward(const Model<T> &m, const ModelInput<T> &in, std::size_t label,
                 Model<T> &grads) {
  if (grads.streams.size() != m.streams.size() ||
      grads.head.hidden.size() != m.head.hidden.size())
    throw ShapeError("gradient set does not match model topology");
  const auto t = model_forward_traced(m, in);
  const T loss = cross_entropy<T>(t.head.probs, label);
  const auto g_features = head_backward(m.head, t.head, label, grads.head);
  std::size_t offset = 0;
  for (std::size_t i = 0; i < m.streams.size(); ++i) {
    const std::size_t n = t.streams[i].output.size();
    stream_backward<T>(m.streams[i], in.blocks[i], t.streams[i],
                       std::span<const T>(g_features).subspan(offset, n), grads.streams[i]);
    offset += n;
  }
  return loss;
}

}  // namespace msam

#endif  // MSAM_MODEL_HPP_
