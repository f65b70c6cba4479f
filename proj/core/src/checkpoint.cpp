/*
 * Copyright 2026 The PARE Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include "pare/errors.hpp"
#include "pare/numerics.hpp"

// Binary layout, little-endian:
//   "PARECKPT" u32 version
//   u32 n_meta, then n_meta x (str key, str value)
//   u32 n_tensors, then n_tensors x (str name, u32 rank, u64 dims[rank], f64 data[])
// where str = u32 length + bytes.

namespace pare {
namespace {

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes little-endian");

constexpr char kMagic[8] = {'P', 'A', 'R', 'E', 'C', 'K', 'P', 'T'};

template <typename T>
void put(std::ostream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

void put_str(std::ostream& out, const std::string& s) {
  put<std::uint32_t>(out, static_cast<std::uint32_t>(s.size()));
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

class Reader {
 public:
  explicit Reader(std::string bytes) : bytes_(std::move(bytes)) {}

  template <typename T>
  T get() {
    need(sizeof(T));
    T v;
    std::memcpy(&v, bytes_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }

  std::string get_str() {
    const auto n = get<std::uint32_t>();
    need(n);
    std::string s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }

  void read_doubles(std::span<double> out) {
    need(out.size() * sizeof(double));
    std::memcpy(out.data(), bytes_.data() + pos_, out.size() * sizeof(double));
    pos_ += out.size() * sizeof(double);
  }

  bool done() const { return pos_ == bytes_.size(); }

 private:
  void need(std::size_t n) const {
    if (bytes_.size() - pos_ < n) throw DataError("checkpoint truncated at byte " + std::to_string(pos_));
  }

  std::string bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

void save_checkpoint(const ParamStore& store, const std::map<std::string, std::string>& metadata,
                     const std::filesystem::path& path) {
  std::ostringstream out;
  out.write(kMagic, sizeof(kMagic));
  put<std::uint32_t>(out, kCheckpointVersion);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(metadata.size()));
  for (const auto& [k, v] : metadata) {
    put_str(out, k);
    put_str(out, v);
  }
  put<std::uint32_t>(out, static_cast<std::uint32_t>(store.size()));
  for (const auto& [name, p] : store) {
    put_str(out, name);
    put<std::uint32_t>(out, static_cast<std::uint32_t>(p.value.shape().size()));
    for (auto d : p.value.shape()) put<std::uint64_t>(out, d);
    const auto values = p.value.values();
    out.write(reinterpret_cast<const char*>(values.data()),
              static_cast<std::streamsize>(values.size() * sizeof(double)));
  }
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw DataError("cannot write checkpoint " + path.string());
  const auto bytes = out.str();
  file.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!file) throw DataError("failed writing checkpoint " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream file(path, std::ios::binary);
  if (!file) throw DataError("cannot open checkpoint " + path.string());
  std::ostringstream buf;
  buf << file.rdbuf();
  Reader in(buf.str());

  char magic[8];
  for (auto& c : magic) c = in.get<char>();
  if (std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw DataError(path.string() + " is not a checkpoint file");
  }
  const auto version = in.get<std::uint32_t>();
  if (version != kCheckpointVersion) {
    throw DataError("checkpoint version " + std::to_string(version) + " is not supported (expected " +
                    std::to_string(kCheckpointVersion) + ")");
  }
  Checkpoint ckpt;
  const auto n_meta = in.get<std::uint32_t>();
  for (std::uint32_t i = 0; i < n_meta; ++i) {
    auto key = in.get_str();
    ckpt.metadata[key] = in.get_str();
  }
  const auto n_tensors = in.get<std::uint32_t>();
  for (std::uint32_t i = 0; i < n_tensors; ++i) {
    auto name = in.get_str();
    const auto rank = in.get<std::uint32_t>();
    if (rank > 2) throw DataError("checkpoint tensor '" + name + "' has rank " + std::to_string(rank));
    std::vector<std::size_t> shape;
    for (std::uint32_t r = 0; r < rank; ++r) shape.push_back(in.get<std::uint64_t>());
    Tensor t(shape);
    in.read_doubles(t.values());
    ckpt.tensors.emplace(std::move(name), std::move(t));
  }
  if (!in.done()) throw DataError("trailing bytes in checkpoint " + path.string());
  return ckpt;
}

void restore_parameters(ParamStore& store, const Checkpoint& checkpoint) {
  std::vector<std::string> problems;
  for (const auto& [name, p] : store) {
    auto it = checkpoint.tensors.find(name);
    if (it == checkpoint.tensors.end()) {
      problems.push_back(name + " (missing)");
    } else if (it->second.shape() != p.value.shape()) {
      problems.push_back(name + " (checkpoint " + it->second.shape_string() + ", model " +
                         p.value.shape_string() + ")");
    }
  }
  for (const auto& [name, _] : checkpoint.tensors) {
    if (!store.contains(name)) problems.push_back(name + " (unexpected)");
  }
  if (!problems.empty()) {
    std::string msg = "checkpoint does not match model tables:";
    for (const auto& p : problems) msg += " " + p + ";";
    throw DataError(msg);
  }
  for (auto& [name, p] : store) p.value = checkpoint.tensors.at(name);
}

}  // namespace pare
