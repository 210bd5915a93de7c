// msam/analysis.hpp

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

// Diagnostics for learned first-layer kernels: zero-padded magnitude
// spectra, ordering by peak frequency, and the effective kernel length
// (how much of a kernel actually carries its energy).

#ifndef MSAM_ANALYSIS_HPP_
#define MSAM_ANALYSIS_HPP_

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "msam/error.hpp"
#include "msam/fbank.hpp"
#include "msam/fft.hpp"
#include "msam/model.hpp"

namespace msam {

struct KernelSpectrum {
  std::size_t kernel_index = 0;
  std::vector<double> magnitude;  // fft_size / 2 + 1 bins
  std::size_t peak_bin = 0;
  double peak_frequency = 0;  // Hz
};

/// |DFT| of the kernel zero-padded to `fft_size`. The kernel runs over raw
/// samples whatever its stride, so bins are spaced sample_rate / fft_size.
template <typename T>
KernelSpectrum kernel_spectrum(std::span<const T> kernel, std::size_t fft_size = 512,
                               int sample_rate = kDefaultSampleRate,
                               std::size_t kernel_index = 0) {
  if (kernel.empty()) throw ValidationError("kernel_spectrum: empty kernel");
  if (fft_size < kernel.size())
    throw ValidationError("kernel_spectrum: fft_size " + std::to_string(fft_size) +
                          " is shorter than the kernel (" + std::to_string(kernel.size()) + ")");
  RealFft fft(fft_size);
  KernelSpectrum s;
  s.kernel_index = kernel_index;
  s.magnitude.assign(fft.num_bins(), 0.0);
  fft.magnitude<T>(kernel, s.magnitude);
  s.peak_bin = static_cast<std::size_t>(
      std::max_element(s.magnitude.begin(), s.magnitude.end()) - s.magnitude.begin());
  s.peak_frequency = static_cast<double>(s.peak_bin) * sample_rate / static_cast<double>(fft_size);
  return s;
}

/// Kernel indices ordered by ascending peak frequency, ties by index.
inline std::vector<std::size_t> sort_by_peak(const std::vector<KernelSpectrum> &spectra) {
  std::vector<std::size_t> order(spectra.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto &x = spectra[a], &y = spectra[b];
    if (x.peak_frequency != y.peak_frequency) return x.peak_frequency < y.peak_frequency;
    return x.kernel_index < y.kernel_index;
  });
  for (auto &i : order) i = spectra[i].kernel_index;
  return order;
}

/// Length of the shortest run of consecutive taps holding at least
/// `energy_fraction` of the kernel's total squared magnitude.
template <typename T>
std::size_t effective_kernel_length(std::span<const T> kernel, double energy_fraction = 0.99) {
  if (!(energy_fraction > 0 && energy_fraction <= 1))
    throw ValidationError("effective_kernel_length: energy_fraction must be in (0, 1]");
  std::vector<double> prefix(kernel.size() + 1, 0.0);
  for (std::size_t i = 0; i < kernel.size(); ++i) {
    const double v = static_cast<double>(kernel[i]);
    prefix[i + 1] = prefix[i] + v * v;
  }
  const double total = prefix.back();
  if (!(total > 0)) throw ValidationError("effective_kernel_length: kernel is all zero");
  const double need = energy_fraction * total;
  std::size_t best = kernel.size(), lo = 0;
  for (std::size_t hi = 1; hi <= kernel.size(); ++hi) {
    if (prefix[hi] - prefix[lo] < need) continue;
    while (lo + 1 < hi && prefix[hi] - prefix[lo + 1] >= need) ++lo;
    best = std::min(best, hi - lo);
  }
  return best;
}

namespace detail {

inline std::ofstream open_csv(const std::filesystem::path &p) {
  std::ofstream os(p);
  if (!os) throw IoError("cannot open " + p.string() + " for writing");
  return os;
}

inline void put_double(std::ostream &os, double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  os << buf;
}

}  // namespace detail

/// Writes, for every stream i:
///   stream<i>_spectra.csv  kernel,peak_hz,<bin Hz>...  one row per kernel,
///                          ordered by peak frequency
///   stream<i>_lengths.csv  kernel,effective_length     kernel order
/// plus mel_reference.csv (filter,center_hz,center_mel) with as many Mel
/// filters as the first stream has kernels. Returns the written paths.
template <typename T>
std::vector<std::string> export_analysis(const Model<T> &m, const std::string &out_dir,
                                         std::size_t fft_size = 512,
                                         double energy_fraction = 0.99) {
  if (m.streams.empty()) throw ValidationError("no waveform kernels to analyze");
  std::filesystem::create_directories(out_dir);
  const std::filesystem::path dir(out_dir);
  const int rate = m.config.fbank.sample_rate;
  std::vector<std::string> written;

  for (std::size_t i = 0; i < m.streams.size(); ++i) {
    const auto &bank = m.streams[i].first;
    std::vector<KernelSpectrum> spectra;
    for (std::size_t k = 0; k < bank.num_kernels(); ++k)
      spectra.push_back(kernel_spectrum<T>(bank.weights.row(k), fft_size, rate, k));

    const auto spath = dir / ("stream" + std::to_string(i) + "_spectra.csv");
    auto os = detail::open_csv(spath);
    os << "kernel,peak_hz";
    for (std::size_t b = 0; b < fft_size / 2 + 1; ++b) {
      os << ',';
      detail::put_double(os, static_cast<double>(b) * rate / static_cast<double>(fft_size));
    }
    os << '\n';
    for (auto k : sort_by_peak(spectra)) {
      os << k << ',';
      detail::put_double(os, spectra[k].peak_frequency);
      for (double v : spectra[k].magnitude) {
        os << ',';
        detail::put_double(os, v);
      }
      os << '\n';
    }
    written.push_back(spath.string());

    const auto lpath = dir / ("stream" + std::to_string(i) + "_lengths.csv");
    auto ls = detail::open_csv(lpath);
    ls << "kernel,effective_length\n";
    for (std::size_t k = 0; k < bank.num_kernels(); ++k) {
      const auto w = bank.weights.row(k);
      const bool zero = std::all_of(w.begin(), w.end(), [](T x) { return x == T(0); });
      ls << k << ',' << (zero ? 0 : effective_kernel_length<T>(w, energy_fraction)) << '\n';
    }
    written.push_back(lpath.string());
  }

  FbankConfig mel;
  mel.num_filters = m.streams[0].first.num_kernels();
  mel.sample_rate = rate;
  const double mel_max = hz_to_mel(rate / 2.0);
  const auto mpath = dir / "mel_reference.csv";
  auto ms = detail::open_csv(mpath);
  ms << "filter,center_hz,center_mel\n";
  for (std::size_t f = 0; f < mel.num_filters; ++f) {
    const double c_mel = mel_max * static_cast<double>(f + 1) / static_cast<double>(mel.num_filters + 1);
    ms << f << ',';
    detail::put_double(ms, mel_to_hz(c_mel));
    ms << ',';
    detail::put_double(ms, c_mel);
    ms << '\n';
  }
  written.push_back(mpath.string());
  return written;
}

}  // namespace msam

#endif  // MSAM_ANALYSIS_HPP_
