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
#include <vector>

#include "pare/corpus.hpp"

namespace pare {

// Generator for corpora with planted release decay and an annual category
// cycle. Item i released in bin r_i draws Poisson(lambda_i(t)) distinct users
// per bin, with
//   lambda_i(t) = peak_i * decay^(t - r_i) * mean_c(1 + amplitude * sin(2 pi (t - 1) / period + phase_c)).
struct SyntheticSpec {
  std::size_t users = 200;
  std::size_t items = 50;
  int bins = 24;
  std::size_t categories = 3;
  std::size_t directors = 8;
  std::size_t actors = 12;
  double peak_mean = 20.0;
  double peak_jitter = 0.5;  // per-item peak factor is uniform in [1 - j, 1 + j]
  double decay = 0.6;
  double seasonal_amplitude = 0.5;
  int period = 12;
  double missing_release_fraction = 0.0;
  std::uint64_t seed = 1;
  std::int64_t origin_ts = 1293840000;  // 2011-01-01T00:00:00Z
  std::int64_t bin_seconds = kDefaultBinSeconds;
};

struct SyntheticData {
  std::vector<InteractionRecord> interactions;  // time-ordered
  Catalog catalog;  // side fields "directors" and "actors" when their counts are non-zero
  std::vector<int> release_bins;
  std::vector<double> peaks;
};

SyntheticData generate_synthetic(const SyntheticSpec& spec);

// Small corpus for gradient checks: C = 3 categories, M = 2 side fields
// (categories, directors), 20 bins.
SyntheticData miniature_synthetic(std::uint64_t seed);

void write_interactions(const std::vector<InteractionRecord>& records, const std::filesystem::path& path);
void write_items(const Catalog& catalog, const std::filesystem::path& path);

}  // namespace pare
