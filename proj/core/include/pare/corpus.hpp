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

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace pare {

inline constexpr std::int64_t kDefaultBinSeconds = 30LL * 24 * 3600;

struct InteractionRecord {
  std::string user_id;
  std::string item_id;
  std::int64_t timestamp = 0;

  bool operator==(const InteractionRecord&) const = default;
};

enum class ParseMode { kStrict, kLenient };

struct InteractionLoad {
  std::vector<InteractionRecord> records;
  std::size_t skipped = 0;           // malformed lines dropped in lenient mode
  std::vector<std::size_t> skipped_lines;  // 1-based
};

// Reads `user_id,item_id,timestamp` lines. A first line whose timestamp
// field is not numeric is treated as a header. Strict mode throws
// DataError naming the offending line.
InteractionLoad parse_interactions(std::istream& in, ParseMode mode = ParseMode::kStrict);
InteractionLoad load_interactions(const std::filesystem::path& path,
                                  ParseMode mode = ParseMode::kStrict);

// Interned string ids in first-seen order.
class Vocabulary {
 public:
  std::size_t intern(std::string_view name);
  std::optional<std::size_t> find(std::string_view name) const;
  const std::string& name(std::size_t id) const { return names_.at(id); }
  std::size_t size() const { return names_.size(); }
  const std::vector<std::string>& names() const { return names_; }

 private:
  std::vector<std::string> names_;
  std::unordered_map<std::string, std::size_t> index_;
};

struct ItemRecord {
  std::string item_id;
  std::optional<std::int64_t> release_ts;
  // side_info[j] holds sorted attribute ids of field j; side_info[0] is the
  // category set.
  std::vector<std::vector<std::size_t>> side_info;

  const std::vector<std::size_t>& categories() const { return side_info.front(); }
};

// Item metadata. Field 0 is always "categories"; the remaining fields follow
// the schema passed to load_items.
class Catalog {
 public:
  Catalog() = default;
  explicit Catalog(std::vector<std::string> side_fields);

  // Adds an item, interning its attribute names. Throws DataError on a
  // duplicate id.
  std::size_t add(std::string item_id, std::optional<std::int64_t> release_ts,
                  const std::vector<std::vector<std::string>>& attributes);

  // Pre-registers attribute names so their ids follow the given order.
  void intern_attributes(std::size_t field, const std::vector<std::string>& names);

  std::size_t size() const { return items_.size(); }
  const ItemRecord& item(std::size_t index) const { return items_.at(index); }
  const std::vector<ItemRecord>& items() const { return items_; }
  std::optional<std::size_t> find(std::string_view item_id) const;

  std::size_t num_fields() const { return fields_.size(); }          // M
  std::size_t num_categories() const { return vocab_.front().size(); }  // C
  std::size_t field_size(std::size_t field) const { return vocab_.at(field).size(); }  // q_j
  const std::vector<std::string>& field_names() const { return fields_; }
  const Vocabulary& vocabulary(std::size_t field) const { return vocab_.at(field); }

  std::vector<double> category_multi_hot(std::size_t index) const;
  std::vector<std::string> items_without_release() const;

 private:
  std::vector<std::string> fields_;
  std::vector<Vocabulary> vocab_;
  std::vector<ItemRecord> items_;
  std::unordered_map<std::string, std::size_t> index_;
};

// One JSON object per line: item_id, optional release_ts, categories, and
// one array per named side field.
Catalog parse_items(std::istream& in, const std::vector<std::string>& side_fields);
Catalog load_items(const std::filesystem::path& path,
                   const std::vector<std::string>& side_fields);

class TimeBinning {
 public:
  TimeBinning() = default;
  TimeBinning(std::int64_t origin_ts, std::int64_t bin_seconds, int num_bins);

  // Origin at the earliest timestamp, enough bins to cover the latest one.
  static TimeBinning fit(std::span<const InteractionRecord> records,
                         std::int64_t bin_seconds = kDefaultBinSeconds);

  // floor((ts - origin) / bin_seconds) + 1; may fall outside [1, num_bins].
  int bin_of(std::int64_t ts) const;
  std::int64_t bin_start(int bin) const;

  std::int64_t origin_ts() const { return origin_; }
  std::int64_t bin_seconds() const { return bin_seconds_; }
  int num_bins() const { return num_bins_; }

 private:
  std::int64_t origin_ = 0;
  std::int64_t bin_seconds_ = kDefaultBinSeconds;
  int num_bins_ = 0;
};

// Calendar month (1..12, UTC) containing the timestamp.
int calendar_month(std::int64_t ts);

struct PopularitySeries {
  std::string item_id;
  int release_bin = 1;
  std::vector<std::int64_t> counts;  // counts[k] is bin release_bin + k

  // Count at `bin`, 0 outside the stored range.
  std::int64_t at(int bin) const;
  // Slice [release_bin, end_bin] as doubles (empty if end_bin < release_bin).
  std::vector<double> history(int end_bin) const;

  bool operator==(const PopularitySeries&) const = default;
};

struct SeriesReport {
  std::size_t orphan_interactions = 0;
  std::vector<std::string> orphan_items;  // sorted, unique
  std::size_t out_of_range = 0;
};

// One series per catalog item, aligned with catalog indices. Items that never
// appear and carry no release timestamp, or are released after the last bin,
// get release_bin = num_bins + 1 and no counts.
std::vector<PopularitySeries> build_series(std::span<const InteractionRecord> records,
                                           const Catalog& catalog,
                                           const TimeBinning& binning,
                                           SeriesReport* report = nullptr);

struct SplitSpec {
  int train_end_bin = 0;
  int valid_bin = 0;
  int test_bin = 0;
};

SplitSpec split_global(const TimeBinning& binning);

// Distinct (user, item, bin) triple with interned user and catalog item index.
struct Event {
  std::uint32_t user = 0;
  std::uint32_t item = 0;
  int bin = 0;

  auto operator<=>(const Event&) const = default;
};

struct Corpus {
  TimeBinning binning;
  Catalog catalog;
  std::vector<PopularitySeries> series;       // aligned with catalog
  std::vector<std::string> users;             // sorted
  std::vector<Event> events;                  // sorted, distinct
  std::vector<std::int64_t> interactions_per_bin;  // raw records, index = bin
  SeriesReport report;

  bool released_by(std::size_t item, int bin) const { return series[item].release_bin <= bin; }
};

Corpus build_corpus(std::span<const InteractionRecord> records, Catalog catalog,
                    std::int64_t bin_seconds = kDefaultBinSeconds);

struct SplitCounts {
  std::size_t users = 0;
  std::size_t items = 0;
  std::int64_t train = 0;
  std::int64_t valid = 0;
  std::int64_t test = 0;
};

SplitCounts split_counts(const Corpus& corpus, const SplitSpec& split);

struct ProfileRow {
  int index = 0;
  double mean = 0.0;
  std::size_t support = 0;
};

// Mean count by age since release (age 0 = release bin).
std::vector<ProfileRow> popularity_profile(std::span<const PopularitySeries> series);

// Mean count per calendar month (1..12) over items carrying `category`.
std::vector<ProfileRow> popularity_profile_by_month(const Corpus& corpus,
                                                    std::string_view category);

void save_corpus(const Corpus& corpus, const std::filesystem::path& path);
Corpus load_corpus(const std::filesystem::path& path);

}  // namespace pare
