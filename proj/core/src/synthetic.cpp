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
#include "pare/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <numeric>
#include <random>

#include <nlohmann/json.hpp>

#include "pare/errors.hpp"

namespace pare {

SyntheticData generate_synthetic(const SyntheticSpec& spec) {
  if (spec.users == 0 || spec.items == 0 || spec.bins < 1 || spec.categories == 0) {
    throw UsageError("synthetic corpus needs users, items, bins and categories");
  }
  if (spec.peak_jitter < 0.0 || spec.peak_jitter >= 1.0) throw UsageError("peak_jitter must lie in [0, 1)");
  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  std::vector<double> phase(spec.categories);
  for (auto& p : phase) p = unit(rng) * 2.0 * std::numbers::pi;
  std::vector<double> director_quality(std::max<std::size_t>(spec.directors, 1));
  for (auto& q : director_quality) q = 0.4 + 1.2 * unit(rng);

  SyntheticData out;
  std::vector<std::string> fields;
  if (spec.directors > 0) fields.push_back("directors");
  if (spec.actors > 0) fields.push_back("actors");
  out.catalog = Catalog(fields);
  std::uniform_int_distribution<int> release_dist(1, spec.bins);
  std::vector<std::vector<std::size_t>> item_categories(spec.items);
  for (std::size_t i = 0; i < spec.items; ++i) {
    // Item 0 opens bin 1 so the fitted origin matches spec.origin_ts.
    const int release = i == 0 ? 1 : release_dist(rng);
    const std::size_t n_cats = 1 + static_cast<std::size_t>(unit(rng) < 0.3);
    std::vector<std::string> cats, directors, actors;
    for (std::size_t k = 0; k < n_cats; ++k) {
      const auto c = static_cast<std::size_t>(unit(rng) * static_cast<double>(spec.categories));
      item_categories[i].push_back(c);
      cats.push_back("cat" + std::to_string(c));
    }
    std::size_t director = 0;
    if (spec.directors > 0) {
      director = static_cast<std::size_t>(unit(rng) * static_cast<double>(spec.directors));
      directors.push_back("dir" + std::to_string(director));
    }
    for (std::size_t k = 0; k < 2 && spec.actors > 0; ++k) {
      actors.push_back("act" + std::to_string(static_cast<std::size_t>(unit(rng) * static_cast<double>(spec.actors))));
    }
    const double peak = spec.peak_mean * director_quality[director] * (1.0 - spec.peak_jitter + 2.0 * spec.peak_jitter * unit(rng));
    std::optional<std::int64_t> release_ts =
        spec.origin_ts + static_cast<std::int64_t>(release - 1) * spec.bin_seconds;
    if (i != 0 && unit(rng) < spec.missing_release_fraction) release_ts.reset();
    std::vector<std::vector<std::string>> attributes = {cats};
    if (spec.directors > 0) attributes.push_back(directors);
    if (spec.actors > 0) attributes.push_back(actors);
    out.catalog.add("item" + std::to_string(i), release_ts, attributes);
    out.release_bins.push_back(release);
    out.peaks.push_back(peak);
  }

  std::vector<std::uint32_t> users(spec.users);
  std::iota(users.begin(), users.end(), 0u);
  std::uniform_int_distribution<std::int64_t> offset(1, spec.bin_seconds - 1);
  for (int t = 1; t <= spec.bins; ++t) {
    for (std::size_t i = 0; i < spec.items; ++i) {
      const int release = out.release_bins[i];
      if (t < release) continue;
      double season = 0.0;
      for (auto c : item_categories[i]) {
        season += 1.0 + spec.seasonal_amplitude *
                            std::sin(2.0 * std::numbers::pi * ((t - 1) % spec.period) / spec.period + phase[c]);
      }
      season /= static_cast<double>(item_categories[i].size());
      const double lambda = out.peaks[i] * std::pow(spec.decay, t - release) * season;
      std::poisson_distribution<int> draw(std::max(lambda, 1e-9));
      std::size_t n = std::min<std::size_t>(static_cast<std::size_t>(draw(rng)), spec.users);
      if (i == 0 && t == 1) n = std::max<std::size_t>(n, 1);
      // Partial Fisher-Yates picks n distinct users.
      for (std::size_t k = 0; k < n; ++k) {
        std::uniform_int_distribution<std::size_t> pick(k, spec.users - 1);
        std::swap(users[k], users[pick(rng)]);
        std::int64_t ts = spec.origin_ts + static_cast<std::int64_t>(t - 1) * spec.bin_seconds + offset(rng);
        if (i == 0 && t == 1 && k == 0) ts = spec.origin_ts;
        out.interactions.push_back({"u" + std::to_string(users[k]), "item" + std::to_string(i), ts});
      }
    }
  }
  // Pin the last bin so the fitted binning spans exactly spec.bins.
  const auto last_start = spec.origin_ts + static_cast<std::int64_t>(spec.bins - 1) * spec.bin_seconds;
  const bool last_hit = std::any_of(out.interactions.begin(), out.interactions.end(),
                                    [&](const auto& r) { return r.timestamp >= last_start; });
  if (!last_hit) {
    const auto newest = std::max_element(out.release_bins.begin(), out.release_bins.end());
    const auto item = static_cast<std::size_t>(newest - out.release_bins.begin());
    out.interactions.push_back({"u0", "item" + std::to_string(item), last_start + 1});
  }
  std::stable_sort(out.interactions.begin(), out.interactions.end(),
                   [](const auto& a, const auto& b) { return a.timestamp < b.timestamp; });
  return out;
}

SyntheticData miniature_synthetic(std::uint64_t seed) {
  SyntheticSpec spec;
  spec.users = 30;
  spec.items = 8;
  spec.bins = 20;
  spec.categories = 3;
  spec.directors = 4;
  spec.actors = 0;
  spec.peak_mean = 4.0;
  spec.seed = seed;
  return generate_synthetic(spec);
}

void write_interactions(const std::vector<InteractionRecord>& records, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << "user_id,item_id,timestamp\n";
  for (const auto& r : records) out << r.user_id << ',' << r.item_id << ',' << r.timestamp << '\n';
}

void write_items(const Catalog& catalog, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  for (const auto& item : catalog.items()) {
    nlohmann::ordered_json j;
    j["item_id"] = item.item_id;
    if (item.release_ts) j["release_ts"] = *item.release_ts;
    for (std::size_t f = 0; f < catalog.num_fields(); ++f) {
      std::vector<std::string> names;
      for (auto id : item.side_info[f]) names.push_back(catalog.vocabulary(f).name(id));
      j[catalog.field_names()[f]] = names;
    }
    out << j.dump() << '\n';
  }
}

}  // namespace pare
