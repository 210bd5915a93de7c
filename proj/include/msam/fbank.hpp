// msam/fbank.hpp

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

// Log Mel filterbank features for the FBANK baseline.
//
// Pipeline per frame: Hamming window, zero-pad to fft_size, magnitude
// spectrum, triangular Mel filters, natural log with a floor.

#ifndef MSAM_FBANK_HPP_
#define MSAM_FBANK_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "msam/conv.hpp"
#include "msam/error.hpp"
#include "msam/fft.hpp"
#include "msam/matrix.hpp"
#include "msam/multispan.hpp"

namespace msam {

struct FbankConfig {
  std::size_t frame_shift = 160;
  std::size_t frame_size = 400;
  std::size_t num_filters = 40;
  std::size_t fft_size = 512;
  int sample_rate = kDefaultSampleRate;
  double log_floor = 1e-10;

  std::size_t num_bins() const { return fft_size / 2 + 1; }

  void validate() const {
    if (frame_shift < 1) throw ValidationError("fbank: frame_shift must be >= 1");
    if (frame_size < 1) throw ValidationError("fbank: frame_size must be >= 1");
    if (num_filters < 1) throw ValidationError("fbank: num_filters must be >= 1");
    if (fft_size < frame_size)
      throw ValidationError("fbank: fft_size must be >= frame_size");
    if ((fft_size & (fft_size - 1)) != 0)
      throw ValidationError("fbank: fft_size must be a power of two");
    if (sample_rate <= 0) throw ValidationError("fbank: sample_rate must be > 0");
    if (!(log_floor > 0)) throw ValidationError("fbank: log_floor must be > 0");
  }

  bool operator==(const FbankConfig &) const = default;
};

inline double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
inline double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

struct MelFilterbank {
  Matrix<double> weights;           // num_filters x (fft_size / 2 + 1)
  std::vector<double> center_hz;
  std::vector<std::size_t> support_begin;  // first bin with positive weight
  std::vector<std::size_t> support_end;    // one past the last such bin
};

/// Triangular filters whose edges are equally spaced on the Mel scale
/// between 0 Hz and Nyquist. Filter i rises from edge i to edge i+1 and
/// falls back to zero at edge i+2.
inline MelFilterbank mel_filterbank(const FbankConfig &config) {
  config.validate();
  const std::size_t F = config.num_filters, B = config.num_bins();
  const double nyquist = config.sample_rate / 2.0;
  const double mel_max = hz_to_mel(nyquist);
  std::vector<double> edges(F + 2);
  for (std::size_t i = 0; i < edges.size(); ++i)
    edges[i] = mel_to_hz(mel_max * static_cast<double>(i) / static_cast<double>(F + 1));

  MelFilterbank fb{Matrix<double>(F, B), {}, {}, {}};
  for (std::size_t i = 0; i < F; ++i) {
    const double lo = edges[i], mid = edges[i + 1], hi = edges[i + 2];
    fb.center_hz.push_back(mid);
    std::size_t begin = B, end = 0;
    for (std::size_t k = 0; k < B; ++k) {
      const double f = static_cast<double>(k) * config.sample_rate / config.fft_size;
      double w = 0.0;
      if (f > lo && f <= mid)
        w = (f - lo) / (mid - lo);
      else if (f > mid && f < hi)
        w = (hi - f) / (hi - mid);
      fb.weights(i, k) = w;
      if (w > 0) {
        begin = std::min(begin, k);
        end = k + 1;
      }
    }
    if (begin == B)
      throw ValidationError("fbank: filter " + std::to_string(i) +
                            " covers no FFT bin; increase fft_size or reduce num_filters");
    fb.support_begin.push_back(begin);
    fb.support_end.push_back(end);
  }
  return fb;
}

inline std::vector<double> hamming_window(std::size_t n) {
  std::vector<double> w(n, 1.0);
  if (n < 2) return w;
  for (std::size_t i = 0; i < n; ++i)
    w[i] = 0.54 - 0.46 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) /
                                  static_cast<double>(n - 1));
  return w;
}

namespace detail {

class FbankFrameProcessor {
 public:
  explicit FbankFrameProcessor(const FbankConfig &c)
      : config_(c), bank_(mel_filterbank(c)), window_(hamming_window(c.frame_size)),
        fft_(c.fft_size), frame_(c.frame_size), spectrum_(c.num_bins()) {}

  const MelFilterbank &bank() const { return bank_; }

  // `samples` holds exactly frame_size values.
  void process(std::span<const double> samples, std::span<double> out) {
    for (std::size_t i = 0; i < frame_.size(); ++i) frame_[i] = samples[i] * window_[i];
    fft_.magnitude<double>(frame_, spectrum_);
    for (std::size_t f = 0; f < config_.num_filters; ++f) {
      auto w = bank_.weights.row(f);
      double e = 0.0;
      for (std::size_t k = bank_.support_begin[f]; k < bank_.support_end[f]; ++k)
        e += w[k] * spectrum_[k];
      out[f] = std::log(std::max(e, config_.log_floor));
    }
  }

 private:
  FbankConfig config_;
  MelFilterbank bank_;
  std::vector<double> window_;
  RealFft fft_;
  std::vector<double> frame_;
  std::vector<double> spectrum_;
};

}  // namespace detail

/// One row per frame; frame j covers samples [j*shift, j*shift + size).
inline Matrix<double> compute_fbank(const Signal &signal, const FbankConfig &config) {
  config.validate();
  const std::size_t n = output_map_size(signal.size(), config.frame_size, config.frame_shift);
  detail::FbankFrameProcessor proc(config);
  Matrix<double> out(n, config.num_filters);
  std::span<const double> x(signal.samples);
  for (std::size_t j = 0; j < n; ++j)
    proc.process(x.subspan(j * config.frame_shift, config.frame_size), out.row(j));
  return out;
}

/// FBANK frames on the label grid: frame n is centred at sample
/// n * frame_shift using the same centring and zero-padding rule as the
/// waveform streams, so every label frame gets exactly one feature vector.
inline Matrix<double> compute_fbank_aligned(const Signal &signal, std::size_t num_frames,
                                            const FbankConfig &config) {
  config.validate();
  detail::FbankFrameProcessor proc(config);
  Matrix<double> out(num_frames, config.num_filters);
  for (std::size_t n = 0; n < num_frames; ++n) {
    auto w = cut_window<double>(signal.samples,
                                static_cast<std::ptrdiff_t>(n * config.frame_shift),
                                config.frame_size);
    proc.process(w, out.row(n));
  }
  return out;
}

/// Splices each frame with its (num_frames - 1) / 2 neighbours on either
/// side. Frames beyond the sequence edges replicate the edge frame.
inline Matrix<double> stack_context(const Matrix<double> &features, std::size_t num_frames) {
  if (num_frames % 2 == 0) throw ValidationError("context: num_frames must be odd");
  const std::size_t dim = features.cols(), rows = features.rows();
  const auto half = static_cast<std::ptrdiff_t>(num_frames / 2);
  Matrix<double> out(rows, dim * num_frames);
  for (std::size_t r = 0; r < rows; ++r) {
    auto dst = out.row(r);
    for (std::ptrdiff_t o = -half; o <= half; ++o) {
      const std::ptrdiff_t src = std::clamp<std::ptrdiff_t>(
          static_cast<std::ptrdiff_t>(r) + o, 0, static_cast<std::ptrdiff_t>(rows) - 1);
      auto s = features.row(static_cast<std::size_t>(src));
      std::copy(s.begin(), s.end(), dst.begin() + (o + half) * static_cast<std::ptrdiff_t>(dim));
    }
  }
  return out;
}

/// One frame per line, comma separated, full double precision.
inline void write_features_csv(std::ostream &os, const Matrix<double> &features) {
  const auto old = os.precision(17);
  for (std::size_t r = 0; r < features.rows(); ++r) {
    auto row = features.row(r);
    for (std::size_t c = 0; c < row.size(); ++c) os << (c ? "," : "") << row[c];
    os << '\n';
  }
  os.precision(old);
}

}  // namespace msam

#endif  // MSAM_FBANK_HPP_
