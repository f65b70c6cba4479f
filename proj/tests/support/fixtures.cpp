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
#include "fixtures.hpp"

#include <atomic>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <unistd.h>

namespace pare::testing {

TempDir::TempDir() {
  static std::atomic<int> counter{0};
  path_ = std::filesystem::temp_directory_path() /
          ("pare_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
  std::filesystem::remove_all(path_);
  std::filesystem::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ec;
  std::filesystem::remove_all(path_, ec);
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

Catalog make_catalog(const std::vector<ItemSpec>& items) {
  Catalog catalog(std::vector<std::string>{});
  for (const auto& item : items) {
    std::optional<std::int64_t> release;
    if (item.release_bin > 0) release = at_bin(item.release_bin);
    catalog.add(item.id, release, {item.categories});
  }
  return catalog;
}

std::vector<InteractionRecord> make_records(
    const std::vector<std::tuple<std::string, std::string, int>>& triples) {
  std::vector<InteractionRecord> out;
  std::int64_t jitter = 0;
  for (const auto& [user, item, bin] : triples) {
    out.push_back({user, item, at_bin(bin, 60 + jitter++)});
  }
  return out;
}

Corpus synthetic_corpus(const SyntheticSpec& spec) {
  auto data = generate_synthetic(spec);
  return build_corpus(data.interactions, std::move(data.catalog), spec.bin_seconds);
}

}  // namespace pare::testing
