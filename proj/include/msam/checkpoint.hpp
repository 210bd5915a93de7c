// msam/checkpoint.hpp

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

// Binary checkpoint container. All integers are little-endian.
//
//   "MSAM"                      4 bytes magic
//   u32 version                 currently 1
//   u64 digest                  FNV-1a 64 of the metadata text
//   u32 n, n bytes              metadata text, "key=value\n" lines sorted by key
//   u32 count                   number of tensor records
//   count x record:
//     u32 n, n bytes            tensor name
//     u32 rank, rank x u32      dimensions
//     prod(dims) x f32          payload, IEEE-754 binary32
//
// Parameters are stored as float32, so Model<float> round-trips exactly.

#ifndef MSAM_CHECKPOINT_HPP_
#define MSAM_CHECKPOINT_HPP_

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "msam/error.hpp"
#include "msam/model.hpp"

namespace msam {

inline constexpr char kCheckpointMagic[4] = {'M', 'S', 'A', 'M'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

namespace detail {

inline void put_u32(std::ostream &os, std::uint32_t v) {
  char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xffu);
  os.write(b, 4);
}

inline void put_u64(std::ostream &os, std::uint64_t v) {
  char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xffu);
  os.write(b, 8);
}

inline void get_bytes(std::istream &is, char *dst, std::size_t n) {
  is.read(dst, static_cast<std::streamsize>(n));
  if (static_cast<std::size_t>(is.gcount()) != n) throw FormatError("checkpoint: truncated file");
}

inline std::uint32_t get_u32(std::istream &is) {
  unsigned char b[4];
  get_bytes(is, reinterpret_cast<char *>(b), 4);
  std::uint32_t v = 0;
  for (int i = 3; i >= 0; --i) v = (v << 8) | b[i];
  return v;
}

inline std::uint64_t get_u64(std::istream &is) {
  unsigned char b[8];
  get_bytes(is, reinterpret_cast<char *>(b), 8);
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | b[i];
  return v;
}

inline std::string get_string(std::istream &is, std::size_t limit) {
  const std::uint32_t n = get_u32(is);
  if (n > limit) throw FormatError("checkpoint: string length " + std::to_string(n) + " too large");
  std::string s(n, '\0');
  get_bytes(is, s.data(), n);
  return s;
}

inline std::uint64_t fnv1a64(const std::string &s) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

inline std::string metadata_text(const Metadata &m) {
  std::string s;
  for (const auto &[k, v] : m) {
    if (k.find_first_of("=\n") != k.npos || v.find('\n') != v.npos)
      throw ValidationError("checkpoint metadata: key/value may not contain '=' or newline: " + k);
    s += k + "=" + v + "\n";
  }
  return s;
}

inline Metadata parse_metadata_text(const std::string &s) {
  Metadata m;
  std::istringstream in(s);
  std::string line;
  while (std::getline(in, line)) {
    const auto eq = line.find('=');
    if (eq == line.npos) throw FormatError("checkpoint metadata: malformed line '" + line + "'");
    m[line.substr(0, eq)] = line.substr(eq + 1);
  }
  return m;
}

}  // namespace detail

template <typename T>
struct Checkpoint {
  Metadata metadata;  // model architecture plus caller-supplied entries
  Model<T> model;
};

template <typename T>
void write_checkpoint(std::ostream &os, Model<T> &model, Metadata extra = {}) {
  model.config.to_metadata(extra);
  extra["model.head_layers"] = std::to_string(model.head.hidden.size());
  const std::string text = detail::metadata_text(extra);
  os.write(kCheckpointMagic, 4);
  detail::put_u32(os, kCheckpointVersion);
  detail::put_u64(os, detail::fnv1a64(text));
  detail::put_u32(os, static_cast<std::uint32_t>(text.size()));
  os.write(text.data(), static_cast<std::streamsize>(text.size()));
  const auto views = model.params();
  detail::put_u32(os, static_cast<std::uint32_t>(views.size()));
  for (const auto &v : views) {
    detail::put_u32(os, static_cast<std::uint32_t>(v.name.size()));
    os.write(v.name.data(), static_cast<std::streamsize>(v.name.size()));
    detail::put_u32(os, static_cast<std::uint32_t>(v.dims.size()));
    for (auto d : v.dims) detail::put_u32(os, static_cast<std::uint32_t>(d));
    for (T x : v.data)
      detail::put_u32(os, std::bit_cast<std::uint32_t>(static_cast<float>(x)));
  }
  if (!os) throw IoError("checkpoint: write failed");
}

template <typename T>
Checkpoint<T> read_checkpoint(std::istream &is) {
  char magic[4];
  detail::get_bytes(is, magic, 4);
  if (std::memcmp(magic, kCheckpointMagic, 4) != 0) throw FormatError("checkpoint: bad magic");
  const std::uint32_t version = detail::get_u32(is);
  if (version != kCheckpointVersion)
    throw FormatError("checkpoint: unsupported version " + std::to_string(version));
  const std::uint64_t digest = detail::get_u64(is);
  const std::string text = detail::get_string(is, 1u << 20);
  if (detail::fnv1a64(text) != digest) throw FormatError("checkpoint: config digest mismatch");

  Checkpoint<T> ck;
  ck.metadata = detail::parse_metadata_text(text);
  const auto config = ModelConfig::from_metadata(ck.metadata);
  const auto head_it = ck.metadata.find("model.head_layers");
  if (head_it == ck.metadata.end()) throw FormatError("checkpoint: missing model.head_layers");
  ck.model = make_model<T>(config, std::stoul(head_it->second));

  auto views = ck.model.params();
  const std::uint32_t count = detail::get_u32(is);
  if (count != views.size())
    throw FormatError("checkpoint: " + std::to_string(count) + " tensors, model expects " +
                      std::to_string(views.size()));
  for (auto &v : views) {
    const std::string name = detail::get_string(is, 4096);
    if (name != v.name)
      throw FormatError("checkpoint: expected tensor '" + v.name + "', found '" + name + "'");
    const std::uint32_t rank = detail::get_u32(is);
    if (rank != v.dims.size()) throw FormatError("checkpoint: rank mismatch for " + name);
    for (auto d : v.dims)
      if (detail::get_u32(is) != d) throw FormatError("checkpoint: shape mismatch for " + name);
    for (auto &x : v.data) x = static_cast<T>(std::bit_cast<float>(detail::get_u32(is)));
  }
  return ck;
}

template <typename T>
void save_checkpoint(const std::string &path, Model<T> &model, Metadata extra = {}) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open " + path + " for writing");
  write_checkpoint(os, model, std::move(extra));
}

template <typename T>
Checkpoint<T> load_checkpoint(const std::string &path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open checkpoint " + path);
  return read_checkpoint<T>(is);
}

}  // namespace msam

#endif  // MSAM_CHECKPOINT_HPP_
