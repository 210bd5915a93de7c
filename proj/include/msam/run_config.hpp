// msam/run_config.hpp

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

// Run configuration for the command-line tool, read from an INI-style file
// ([section] headers, key = value lines, ';' or '#' comments).

#ifndef MSAM_RUN_CONFIG_HPP_
#define MSAM_RUN_CONFIG_HPP_

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <istream>
#include <optional>
#include <set>
#include <string>

#include "msam/error.hpp"
#include "msam/model.hpp"
#include "msam/synth.hpp"
#include "msam/trainer.hpp"

namespace msam {

struct RunConfig {
  ModelConfig model;
  TrainConfig train;
  NewBobState newbob;
  std::string corpus;             // manifest path
  std::optional<SynthSpec> synth;
  std::string normalization = "global";
  std::string out_dir = "out";
  bool derive_second_map_size = true;
  bool threads_set = false;

  /// Single-span needs one stream, multi-span at least two; exactly one of
  /// corpus/synth must be given.
  void validate() const {
    if (model.spec.kind == ModelKind::SingleSpan && model.spec.strides.size() != 1)
      throw ValidationError("model.spec: single_span requires exactly 1 stream");
    if (model.spec.kind == ModelKind::MultiSpan && model.spec.strides.size() < 2)
      throw ValidationError("model.spec: multi_span requires at least 2 streams");
    if (corpus.empty() == !synth.has_value())
      throw ValidationError("data: give exactly one of corpus or synth");
    if (normalization != "global" && normalization != "utterance_meeting" &&
        normalization != "none")
      throw ValidationError("data.normalization: unknown scheme '" + normalization + "'");
    train.validate();
  }

  /// Fills the derived second-layer map size unless it was set explicitly.
  void finalize() {
    if (derive_second_map_size) {
      auto &t = model.stream_template;
      const auto y = t.first_map_size * t.first_num_kernels;
      if (t.second_kernel_len <= y)
        t.second_map_size = output_map_size(y, t.second_kernel_len, t.second_stride);
    }
  }
};

/// A configuration scaled down for quick desk-scale runs: 24 first-layer
/// frames of 16 kernels, second layer spans 4 frames with a 2-frame hop
/// (11 outputs of 32 kernels), 32-d projections.
inline StreamConfig desk_stream_template() {
  StreamConfig s;
  s.first_map_size = 24;
  s.first_num_kernels = 16;
  s.second_kernel_len = 64;
  s.second_stride = 32;
  s.second_map_size = 11;
  s.second_num_kernels = 32;
  s.projection_dim = 32;
  return s;
}

namespace detail {

template <typename V>
void read_key(const boost::property_tree::ptree &sec, const std::string &section,
              const std::string &key, V &out, std::set<std::string> &seen) {
  seen.insert(key);
  auto v = sec.get_optional<std::string>(key);
  if (!v) return;
  try {
    if constexpr (std::is_same_v<V, std::string>) {
      out = *v;
    } else if constexpr (std::is_floating_point_v<V>) {
      std::size_t pos = 0;
      out = static_cast<V>(std::stod(*v, &pos));
      if (pos != v->size()) throw std::invalid_argument("trailing");
    } else {
      if (v->empty() || v->find_first_not_of("0123456789") != v->npos)
        throw std::invalid_argument("not a count");
      out = static_cast<V>(std::stoull(*v));
    }
  } catch (const std::logic_error &) {
    throw ValidationError(section + "." + key + ": bad value '" + *v + "'");
  }
}

}  // namespace detail

inline RunConfig parse_run_config(std::istream &is) {
  boost::property_tree::ptree pt;
  try {
    boost::property_tree::ini_parser::read_ini(is, pt);
  } catch (const boost::property_tree::ini_parser_error &e) {
    throw ValidationError(std::string("config: ") + e.what());
  }
  RunConfig rc;
  rc.model.stream_template = StreamConfig{};
  for (const auto &[name, sec] : pt) {
    if (sec.empty() && !sec.data().empty())
      throw ValidationError("config: key '" + name + "' must be inside a section");
    std::set<std::string> seen;
    if (name == "model") {
      std::string spec;
      auto &t = rc.model.stream_template;
      detail::read_key(sec, name, "spec", spec, seen);
      if (!spec.empty()) rc.model.spec = parse_model_spec(spec);
      detail::read_key(sec, name, "first_map_size", t.first_map_size, seen);
      detail::read_key(sec, name, "first_num_kernels", t.first_num_kernels, seen);
      detail::read_key(sec, name, "second_stride", t.second_stride, seen);
      detail::read_key(sec, name, "second_kernel_len", t.second_kernel_len, seen);
      if (sec.get_optional<std::string>("second_map_size")) rc.derive_second_map_size = false;
      detail::read_key(sec, name, "second_map_size", t.second_map_size, seen);
      detail::read_key(sec, name, "second_num_kernels", t.second_num_kernels, seen);
      detail::read_key(sec, name, "projection_dim", t.projection_dim, seen);
      detail::read_key(sec, name, "hidden_dim", rc.model.hidden_dim, seen);
      detail::read_key(sec, name, "hidden_layers", rc.model.hidden_layers, seen);
      detail::read_key(sec, name, "num_classes", rc.model.num_classes, seen);
      detail::read_key(sec, name, "fbank_num_filters", rc.model.fbank.num_filters, seen);
      detail::read_key(sec, name, "fbank_fft_size", rc.model.fbank.fft_size, seen);
      detail::read_key(sec, name, "context_frames", rc.model.context_frames, seen);
    } else if (name == "train") {
      auto &t = rc.train;
      if (sec.get_optional<std::string>("threads")) rc.threads_set = true;
      detail::read_key(sec, name, "learning_rate", t.learning_rate, seen);
      detail::read_key(sec, name, "momentum", t.momentum, seen);
      detail::read_key(sec, name, "weight_decay", t.weight_decay, seen);
      detail::read_key(sec, name, "batch_size", t.batch_size, seen);
      detail::read_key(sec, name, "cv_fraction", t.cv_fraction, seen);
      detail::read_key(sec, name, "max_epochs", t.max_epochs, seen);
      detail::read_key(sec, name, "seed", t.seed, seen);
      detail::read_key(sec, name, "threads", t.threads, seen);
    } else if (name == "newbob") {
      detail::read_key(sec, name, "threshold_start", rc.newbob.improvement_threshold_start, seen);
      detail::read_key(sec, name, "threshold_stop", rc.newbob.improvement_threshold_stop, seen);
      detail::read_key(sec, name, "decay_factor", rc.newbob.decay_factor, seen);
    } else if (name == "data") {
      std::string synth;
      detail::read_key(sec, name, "corpus", rc.corpus, seen);
      detail::read_key(sec, name, "synth", synth, seen);
      detail::read_key(sec, name, "normalization", rc.normalization, seen);
      if (!synth.empty()) rc.synth = parse_synth_spec(synth);
    } else if (name == "output") {
      detail::read_key(sec, name, "dir", rc.out_dir, seen);
    } else {
      throw ValidationError("config: unknown section [" + name + "]");
    }
    for (const auto &[key, _] : sec)
      if (!seen.count(key)) throw ValidationError("config: unknown key " + name + "." + key);
  }
  if (!(rc.newbob.decay_factor > 0 && rc.newbob.decay_factor < 1))
    throw ValidationError("newbob.decay_factor must be in (0, 1)");
  return rc;
}

}  // namespace msam

#endif  // MSAM_RUN_CONFIG_HPP_
