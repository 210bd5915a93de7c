// msam/dataio.hpp

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

// Waveform corpora: WAV ingestion, manifests, normalisation and the
// 10 ms label grid.

#ifndef MSAM_DATAIO_HPP_
#define MSAM_DATAIO_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "msam/conv.hpp"
#include "msam/error.hpp"
#include "msam/multispan.hpp"

namespace msam {

/// Hop between consecutive labelled frames: 10 ms at 16 kHz.
inline constexpr std::size_t kFrameShift = 160;

/// Number of 10 ms label frames for a signal: one per centre 160*n inside
/// the signal.
inline std::size_t num_label_frames(std::size_t num_samples) {
  return (num_samples + kFrameShift - 1) / kFrameShift;
}

struct Utterance {
  std::string id;
  Signal signal;
  std::vector<std::size_t> labels;
  std::optional<std::string> meeting_id;
};

struct Corpus {
  std::vector<Utterance> utterances;
  std::size_t num_classes = 0;
  // Statistics applied by the last normalisation, keyed by utterance id
  // ("mean") or meeting id ("scale"); "*" marks a single global entry.
  std::string normalization = "none";
  std::map<std::string, double> means;
  std::map<std::string, double> scales;

  std::size_t num_frames() const {
    std::size_t n = 0;
    for (const auto &u : utterances) n += u.labels.size();
    return n;
  }

  double duration_s() const {
    double d = 0;
    for (const auto &u : utterances)
      d += static_cast<double>(u.signal.size()) / u.signal.sample_rate;
    return d;
  }

  void validate() const {
    if (num_classes < 1) throw ValidationError("corpus: num_classes must be >= 1");
    for (const auto &u : utterances) {
      if (u.labels.size() != num_label_frames(u.signal.size()))
        throw ValidationError("corpus: utterance " + u.id + " has " +
                              std::to_string(u.labels.size()) + " labels for " +
                              std::to_string(num_label_frames(u.signal.size())) + " frames");
      for (auto l : u.labels)
        if (l >= num_classes)
          throw ValidationError("corpus: utterance " + u.id + " has label " + std::to_string(l) +
                                " >= num_classes " + std::to_string(num_classes));
    }
  }
};

// ---------------------------------------------------------------------------
// WAV

namespace detail {

inline std::uint32_t le32(const unsigned char *p) {
  return p[0] | (p[1] << 8) | (p[2] << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}
inline std::uint16_t le16(const unsigned char *p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

}  // namespace detail

/// Decodes a RIFF/WAVE byte buffer. Only mono 16-bit PCM at 16 kHz is
/// accepted; samples are scaled by 1/32768.
inline Signal parse_wav(const std::vector<unsigned char> &bytes) {
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0)
    throw FormatError("wav: not a RIFF/WAVE file");
  std::size_t pos = 12;
  bool have_fmt = false;
  while (pos + 8 <= bytes.size()) {
    const unsigned char *chunk = bytes.data() + pos;
    const std::uint32_t size = detail::le32(chunk + 4);
    const std::size_t body = pos + 8;
    if (std::memcmp(chunk, "fmt ", 4) == 0) {
      if (size < 16 || body + 16 > bytes.size()) throw FormatError("wav: truncated fmt chunk");
      const unsigned char *f = bytes.data() + body;
      const auto format = detail::le16(f), channels = detail::le16(f + 2);
      const auto rate = detail::le32(f + 4);
      const auto bits = detail::le16(f + 14);
      if (format != 1)
        throw FormatError("wav: audio_format " + std::to_string(format) + " unsupported (PCM=1)");
      if (channels != 1)
        throw FormatError("wav: num_channels " + std::to_string(channels) + " unsupported (mono)");
      if (rate != static_cast<std::uint32_t>(kDefaultSampleRate))
        throw FormatError("wav: sample_rate " + std::to_string(rate) + " unsupported (16000)");
      if (bits != 16)
        throw FormatError("wav: bits_per_sample " + std::to_string(bits) + " unsupported (16)");
      have_fmt = true;
    } else if (std::memcmp(chunk, "data", 4) == 0) {
      if (!have_fmt) throw FormatError("wav: data chunk before fmt chunk");
      const std::size_t n = std::min<std::size_t>(size, bytes.size() - body) / 2;
      if (n == 0) throw FormatError("wav: empty data chunk");
      std::vector<double> s(n);
      for (std::size_t i = 0; i < n; ++i)
        s[i] = static_cast<std::int16_t>(detail::le16(bytes.data() + body + 2 * i)) / 32768.0;
      return Signal(std::move(s));
    }
    pos = body + size + (size & 1u);
  }
  throw FormatError(have_fmt ? "wav: missing data chunk" : "wav: missing fmt chunk");
}

inline Signal load_wav(const std::string &path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open wav file " + path);
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(is)), {});
  try {
    return parse_wav(bytes);
  } catch (const FormatError &e) {
    throw FormatError(path + ": " + e.what());
  }
}

/// Encodes mono 16-bit PCM; samples are clipped to [-1, 32767/32768].
inline std::vector<unsigned char> encode_wav(const Signal &s) {
  std::vector<unsigned char> b;
  auto u32 = [&](std::uint32_t v) {
    for (int i = 0; i < 4; ++i) b.push_back(static_cast<unsigned char>(v >> (8 * i)));
  };
  auto u16 = [&](std::uint16_t v) {
    b.push_back(static_cast<unsigned char>(v));
    b.push_back(static_cast<unsigned char>(v >> 8));
  };
  auto tag = [&](const char *t) { b.insert(b.end(), t, t + 4); };
  const auto data_bytes = static_cast<std::uint32_t>(2 * s.size());
  tag("RIFF");
  u32(36 + data_bytes);
  tag("WAVE");
  tag("fmt ");
  u32(16);
  u16(1);
  u16(1);
  u32(static_cast<std::uint32_t>(s.sample_rate));
  u32(static_cast<std::uint32_t>(s.sample_rate) * 2);
  u16(2);
  u16(16);
  tag("data");
  u32(data_bytes);
  for (double x : s.samples) {
    const double v = std::clamp(std::round(x * 32768.0), -32768.0, 32767.0);
    u16(static_cast<std::uint16_t>(static_cast<std::int16_t>(v)));
  }
  return b;
}

inline void save_wav(const std::string &path, const Signal &s) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open " + path + " for writing");
  const auto b = encode_wav(s);
  os.write(reinterpret_cast<const char *>(b.data()), static_cast<std::streamsize>(b.size()));
  if (!os) throw IoError("write failed: " + path);
}

// ---------------------------------------------------------------------------
// Manifests

/// One integer class index per line.
inline std::vector<std::size_t> load_labels(const std::string &path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open label file " + path);
  std::vector<std::size_t> labels;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    if (line.find_first_not_of("0123456789") != line.npos)
      throw FormatError(path + ":" + std::to_string(lineno) + ": bad label '" + line + "'");
    labels.push_back(std::stoul(line));
  }
  return labels;
}

/// Tab-separated manifest: wav path, label path, optional meeting id.
/// Relative paths resolve against the manifest's directory. When
/// `num_classes` is 0 it is inferred as max label + 1.
inline Corpus load_manifest(const std::string &path, std::size_t num_classes = 0) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open manifest " + path);
  const auto base = std::filesystem::path(path).parent_path();
  auto resolve = [&](const std::string &p) {
    std::filesystem::path fp(p);
    return (fp.is_absolute() ? fp : base / fp).string();
  };
  Corpus c;
  std::string line;
  std::size_t max_label = 0, lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string f;
    while (std::getline(ss, f, '\t')) fields.push_back(f);
    if (fields.size() < 2 || fields.size() > 3)
      throw FormatError(path + ":" + std::to_string(lineno) +
                        ": expected 'wav<TAB>labels[<TAB>meeting]'");
    Utterance u;
    u.id = std::filesystem::path(fields[0]).stem().string();
    u.signal = load_wav(resolve(fields[0]));
    u.labels = load_labels(resolve(fields[1]));
    if (fields.size() == 3 && !fields[2].empty()) u.meeting_id = fields[2];
    for (auto l : u.labels) max_label = std::max(max_label, l);
    c.utterances.push_back(std::move(u));
  }
  c.num_classes = num_classes ? num_classes : max_label + 1;
  c.validate();
  return c;
}

/// Writes <dir>/<id>.wav, <dir>/<id>.lab and <dir>/manifest.tsv.
inline std::string write_corpus(const std::string &dir, const Corpus &c) {
  std::filesystem::create_directories(dir);
  const std::string manifest = (std::filesystem::path(dir) / "manifest.tsv").string();
  std::ofstream m(manifest);
  if (!m) throw IoError("cannot open " + manifest + " for writing");
  for (const auto &u : c.utterances) {
    save_wav((std::filesystem::path(dir) / (u.id + ".wav")).string(), u.signal);
    std::ofstream lab(std::filesystem::path(dir) / (u.id + ".lab"));
    if (!lab) throw IoError("cannot write labels for " + u.id);
    for (auto l : u.labels) lab << l << '\n';
    m << u.id << ".wav\t" << u.id << ".lab";
    if (u.meeting_id) m << '\t' << *u.meeting_id;
    m << '\n';
  }
  return manifest;
}

// ---------------------------------------------------------------------------
// Normalisation

/// Zero mean and unit variance pooled over every sample of every utterance.
inline Corpus normalize_global(Corpus c) {
  long double sum = 0, count = 0;
  for (const auto &u : c.utterances)
    for (double x : u.signal.samples) sum += x;
  for (const auto &u : c.utterances) count += static_cast<long double>(u.signal.size());
  if (count == 0) throw DegenerateInputError("normalize_global: empty corpus");
  const double mean = static_cast<double>(sum / count);
  long double ss = 0;
  for (const auto &u : c.utterances)
    for (double x : u.signal.samples) ss += (x - mean) * (x - mean);
  const double var = static_cast<double>(ss / count);
  if (!(var > 0)) throw DegenerateInputError("normalize_global: corpus has zero variance");
  const double inv = 1.0 / std::sqrt(var);
  for (auto &u : c.utterances)
    for (double &x : u.signal.samples) x = (x - mean) * inv;
  c.normalization = "global";
  c.means = {{"*", mean}};
  c.scales = {{"*", inv}};
  return c;
}

/// Per-utterance mean removal followed by per-meeting variance scaling.
inline Corpus normalize_utterance_meeting(Corpus c) {
  c.means.clear();
  c.scales.clear();
  std::map<std::string, std::pair<long double, long double>> meeting;  // sum sq, count
  for (auto &u : c.utterances) {
    if (!u.meeting_id)
      throw ValidationError("normalize_utterance_meeting: utterance " + u.id +
                            " has no meeting_id");
    long double sum = 0;
    for (double x : u.signal.samples) sum += x;
    const double mean = static_cast<double>(sum / static_cast<long double>(u.signal.size()));
    for (double &x : u.signal.samples) x -= mean;
    c.means[u.id] = mean;
    auto &acc = meeting[*u.meeting_id];
    for (double x : u.signal.samples) acc.first += static_cast<long double>(x) * x;
    acc.second += static_cast<long double>(u.signal.size());
  }
  for (const auto &[id, acc] : meeting) {
    const double var = static_cast<double>(acc.first / acc.second);
    if (!(var > 0))
      throw DegenerateInputError("normalize_utterance_meeting: meeting " + id +
                                 " has zero variance");
    c.scales[id] = 1.0 / std::sqrt(var);
  }
  for (auto &u : c.utterances) {
    const double s = c.scales[*u.meeting_id];
    for (double &x : u.signal.samples) x *= s;
  }
  c.normalization = "utterance_meeting";
  return c;
}

/// Applies a scheme by name: "global", "utterance_meeting" or "none".
inline Corpus normalize(Corpus c, const std::string &scheme) {
  if (scheme == "global") return normalize_global(std::move(c));
  if (scheme == "utterance_meeting") return normalize_utterance_meeting(std::move(c));
  if (scheme == "none") return c;
  throw ValidationError("normalization: unknown scheme '" + scheme + "'");
}

// ---------------------------------------------------------------------------
// Framing

template <typename T>
struct FrameWindow {
  std::ptrdiff_t center;
  std::vector<T> window;
  std::size_t label;
};

/// One window of `span` samples per label frame, centred at 160*n, with
/// zero padding outside the utterance.
template <typename T>
std::vector<FrameWindow<T>> frame_windows(const Utterance &u, std::size_t span) {
  if (span < 1) throw GeometryError("frame_windows: span must be >= 1");
  std::vector<FrameWindow<T>> out;
  out.reserve(u.labels.size());
  for (std::size_t n = 0; n < u.labels.size(); ++n) {
    const auto center = static_cast<std::ptrdiff_t>(n * kFrameShift);
    out.push_back({center, cut_window<T>(u.signal.samples, center, span), u.labels[n]});
  }
  return out;
}

}  // namespace msam

#endif  // MSAM_DATAIO_HPP_
