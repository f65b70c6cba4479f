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
#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "pare/corpus.hpp"
#include "pare/synthetic.hpp"

namespace pare::testing {

inline constexpr std::int64_t kOrigin = 1293840000;  // 2011-01-01T00:00:00Z
inline constexpr std::int64_t kBin = kDefaultBinSeconds;

// Timestamp `offset` seconds into bin `bin` of a corpus starting at kOrigin.
inline std::int64_t at_bin(int bin, std::int64_t offset = 60) {
  return kOrigin + static_cast<std::int64_t>(bin - 1) * kBin + offset;
}

// Scratch directory removed on destruction.
class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

// Item spec for hand-built catalogs: id, release bin (0 = unknown), categories.
struct ItemSpec {
  std::string id;
  int release_bin = 1;
  std::vector<std::string> categories;
};

Catalog make_catalog(const std::vector<ItemSpec>& items);

// (user, item, bin) triples become records inside their bin. Lead with a
// bin-1 triple so the fitted origin is at_bin(1).
std::vector<InteractionRecord> make_records(
    const std::vector<std::tuple<std::string, std::string, int>>& triples);

Corpus synthetic_corpus(const SyntheticSpec& spec);

}  // namespace pare::testing
