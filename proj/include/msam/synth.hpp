// msam/synth.hpp

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

// Desk-scale synthetic corpus. Every class is a fixed triplet of sinusoids;
// an utterance is a sequence of constant-class segments with random phase,
// a per-utterance gain and optional white noise at a given SNR.

#ifndef MSAM_SYNTH_HPP_
#define MSAM_SYNTH_HPP_

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "msam/dataio.hpp"
#include "msam/error.hpp"
#include "msam/params.hpp"

namespace msam {

struct SynthSpec {
  std::size_t num_classes = 3;
  std::size_t num_utterances = 12;
  double duration_s = 5.0;  // per utterance
  double snr_db = std::numeric_limits<double>::infinity();
  std::uint64_t seed = 1;
  double min_segment_s = 0.4;
  double max_segment_s = 1.0;
  std::size_t num_meetings = 2;

  void validate() const {
    if (num_classes < 1) throw ValidationError("synth: classes must be >= 1");
    if (num_utterances < 1) throw ValidationError("synth: utterances must be >= 1");
    if (!(duration_s > 0)) throw ValidationError("synth: duration must be > 0");
    if (!(min_segment_s > 0) || max_segment_s < min_segment_s)
      throw ValidationError("synth: need 0 < min_segment <= max_segment");
    if (num_meetings < 1) throw ValidationError("synth: meetings must be >= 1");
  }
};

/// Parses "classes=3,utterances=12,duration=5,snr=20,seed=7". Unset keys
/// keep their defaults; "snr=inf" disables noise.
inline SynthSpec parse_synth_spec(const std::string &text) {
  SynthSpec s;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    const auto eq = item.find('=');
    if (eq == item.npos) throw ValidationError("synth spec: expected key=value, got '" + item + "'");
    const std::string k = item.substr(0, eq), v = item.substr(eq + 1);
    try {
      if (k == "classes") s.num_classes = std::stoul(v);
      else if (k == "utterances") s.num_utterances = std::stoul(v);
      else if (k == "duration") s.duration_s = std::stod(v);
      else if (k == "snr") s.snr_db = (v == "inf") ? std::numeric_limits<double>::infinity() : std::stod(v);
      else if (k == "seed") s.seed = std::stoull(v);
      else if (k == "min_segment") s.min_segment_s = std::stod(v);
      else if (k == "max_segment") s.max_segment_s = std::stod(v);
      else if (k == "meetings") s.num_meetings = std::stoul(v);
      else throw ValidationError("synth spec: unknown key '" + k + "'");
    } catch (const std::logic_error &) {
      throw ValidationError("synth spec: bad value for '" + k + "': '" + v + "'");
    }
  }
  s.validate();
  return s;
}

/// Class frequency triplets in Hz. Frequencies lie in [200, 6000) and any
/// two frequencies across all classes differ by at least 150 Hz.
inline std::vector<std::array<double, 3>> synth_class_frequencies(const SynthSpec &spec) {
  Rng rng(spec.seed * 0x9e3779b97f4a7c15ull + 17);
  std::uniform_real_distribution<double> dist(200.0, 6000.0);
  std::vector<double> used;
  std::vector<std::array<double, 3>> out;
  for (std::size_t c = 0; c < spec.num_classes; ++c) {
    std::array<double, 3> f{};
    for (auto &x : f) {
      for (int attempt = 0;; ++attempt) {
        x = dist(rng);
        bool ok = true;
        for (double u : used) ok = ok && std::abs(u - x) >= 150.0;
        if (ok || attempt > 10000) break;
      }
      used.push_back(x);
    }
    std::sort(f.begin(), f.end());
    out.push_back(f);
  }
  return out;
}

inline Corpus synth_corpus(const SynthSpec &spec) {
  spec.validate();
  const auto freqs = synth_class_frequencies(spec);
  const double rate = kDefaultSampleRate;
  const std::array<double, 3> amps{1.0, 0.6, 0.4};
  Rng rng(spec.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> pick(0, spec.num_classes - 1);

  Corpus c;
  c.num_classes = spec.num_classes;
  const auto n = static_cast<std::size_t>(std::llround(spec.duration_s * rate));
  for (std::size_t u = 0; u < spec.num_utterances; ++u) {
    std::vector<double> x(n, 0.0);
    std::vector<std::size_t> sample_class(n, 0);
    const double gain = 0.1 + 0.3 * unit(rng);
    std::size_t pos = 0;
    while (pos < n) {
      const double seg_s = spec.min_segment_s + (spec.max_segment_s - spec.min_segment_s) * unit(rng);
      const std::size_t len = std::min(n - pos, std::max<std::size_t>(1, std::llround(seg_s * rate)));
      const std::size_t cls = pick(rng);
      std::array<double, 3> phase{};
      for (auto &p : phase) p = 2.0 * std::numbers::pi * unit(rng);
      double power = 0;
      for (std::size_t i = 0; i < len; ++i) {
        double v = 0;
        for (int h = 0; h < 3; ++h)
          v += amps[h] * std::sin(2.0 * std::numbers::pi * freqs[cls][h] * static_cast<double>(i) / rate + phase[h]);
        v *= gain;
        x[pos + i] = v;
        sample_class[pos + i] = cls;
        power += v * v;
      }
      if (std::isfinite(spec.snr_db)) {
        const double noise_sd = std::sqrt(power / static_cast<double>(len) / std::pow(10.0, spec.snr_db / 10.0));
        for (std::size_t i = 0; i < len; ++i) x[pos + i] += noise_sd * gauss(rng);
      }
      pos += len;
    }
    Utterance utt;
    utt.id = "synth" + std::to_string(u);
    utt.meeting_id = "meeting" + std::to_string(u % spec.num_meetings);
    utt.labels.resize(num_label_frames(n));
    for (std::size_t f = 0; f < utt.labels.size(); ++f) utt.labels[f] = sample_class[f * kFrameShift];
    utt.signal = Signal(std::move(x));
    c.utterances.push_back(std::move(utt));
  }
  c.validate();
  return c;
}

}  // namespace msam

#endif  // MSAM_SYNTH_HPP_
