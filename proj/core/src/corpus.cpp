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
#include "pare/corpus.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <tuple>

#include <nlohmann/json.hpp>

#include "pare/errors.hpp"

namespace pare {
namespace {

using json = nlohmann::json;

std::string_view trim(std::string_view s) {
  const auto* ws = " \t\r\n";
  const auto begin = s.find_first_not_of(ws);
  if (begin == std::string_view::npos) return {};
  const auto end = s.find_last_not_of(ws);
  return s.substr(begin, end - begin + 1);
}

std::optional<std::int64_t> parse_int(std::string_view s) {
  std::int64_t value = 0;
  const auto* first = s.data();
  const auto* last = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last || s.empty()) return std::nullopt;
  return value;
}

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(',', start);
    out.push_back(trim(line.substr(start, pos == std::string_view::npos ? pos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

std::ifstream open_or_throw(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  return in;
}

}  // namespace

InteractionLoad parse_interactions(std::istream& in, ParseMode mode) {
  InteractionLoad out;
  std::string line;
  std::size_t line_no = 0;
  bool first_content = true;
  while (std::getline(in, line)) {
    ++line_no;
    const auto body = trim(line);
    if (body.empty()) continue;
    const auto fields = split_commas(body);
    const bool is_first = first_content;
    first_content = false;
    if (is_first && fields.size() == 3 && !parse_int(fields[2])) continue;  // header

    std::optional<std::int64_t> ts;
    if (fields.size() == 3) ts = parse_int(fields[2]);
    const bool ok = fields.size() == 3 && !fields[0].empty() && !fields[1].empty() && ts &&
                    *ts > 0;
    if (!ok) {
      if (mode == ParseMode::kStrict) {
        throw DataError("malformed interaction at line " + std::to_string(line_no) + ": " +
                        std::string(body));
      }
      ++out.skipped;
      out.skipped_lines.push_back(line_no);
      continue;
    }
    out.records.push_back({std::string(fields[0]), std::string(fields[1]), *ts});
  }
  return out;
}

InteractionLoad load_interactions(const std::filesystem::path& path, ParseMode mode) {
  auto in = open_or_throw(path);
  return parse_interactions(in, mode);
}

std::size_t Vocabulary::intern(std::string_view name) {
  auto it = index_.find(std::string(name));
  if (it != index_.end()) return it->second;
  const auto id = names_.size();
  names_.emplace_back(name);
  index_.emplace(names_.back(), id);
  return id;
}

std::optional<std::size_t> Vocabulary::find(std::string_view name) const {
  auto it = index_.find(std::string(name));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

void Catalog::intern_attributes(std::size_t field, const std::vector<std::string>& names) {
  for (const auto& n : names) vocab_.at(field).intern(n);
}

Catalog::Catalog(std::vector<std::string> side_fields) {
  fields_.push_back("categories");
  for (auto& f : side_fields) {
    if (f == "categories" || f == "item_id" || f == "release_ts") {
      throw DataError("side-info field name '" + f + "' is reserved");
    }
    if (std::find(fields_.begin(), fields_.end(), f) != fields_.end()) {
      throw DataError("side-info field '" + f + "' listed twice");
    }
    fields_.push_back(std::move(f));
  }
  vocab_.resize(fields_.size());
}

std::size_t Catalog::add(std::string item_id, std::optional<std::int64_t> release_ts,
                         const std::vector<std::vector<std::string>>& attributes) {
  if (fields_.empty()) *this = Catalog(std::vector<std::string>{});
  if (item_id.empty()) throw DataError("empty item_id");
  if (index_.count(item_id)) throw DataError("duplicate item_id '" + item_id + "'");
  if (attributes.size() != fields_.size()) {
    throw DataError("item '" + item_id + "' has " + std::to_string(attributes.size()) +
                    " side-info fields, expected " + std::to_string(fields_.size()));
  }
  ItemRecord item;
  item.item_id = item_id;
  item.release_ts = release_ts;
  for (std::size_t j = 0; j < fields_.size(); ++j) {
    std::vector<std::size_t> ids;
    for (const auto& name : attributes[j]) ids.push_back(vocab_[j].intern(name));
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    item.side_info.push_back(std::move(ids));
  }
  const auto index = items_.size();
  index_.emplace(std::move(item_id), index);
  items_.push_back(std::move(item));
  return index;
}

std::optional<std::size_t> Catalog::find(std::string_view item_id) const {
  auto it = index_.find(std::string(item_id));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::vector<double> Catalog::category_multi_hot(std::size_t index) const {
  std::vector<double> row(num_categories(), 0.0);
  for (auto c : item(index).categories()) row[c] = 1.0;
  return row;
}

std::vector<std::string> Catalog::items_without_release() const {
  std::vector<std::string> out;
  for (const auto& it : items_) {
    if (!it.release_ts) out.push_back(it.item_id);
  }
  return out;
}

Catalog parse_items(std::istream& in, const std::vector<std::string>& side_fields) {
  Catalog catalog(side_fields);
  std::vector<bool> field_seen(side_fields.size(), false);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto where = " at items line " + std::to_string(line_no);
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::parse_error& e) {
      throw DataError("invalid JSON" + where + ": " + e.what());
    }
    if (!obj.is_object()) throw DataError("expected a JSON object" + where);

    std::string id;
    const auto id_it = obj.find("item_id");
    if (id_it == obj.end()) throw DataError("missing item_id" + where);
    if (id_it->is_string()) {
      id = id_it->get<std::string>();
    } else if (id_it->is_number_integer()) {
      id = std::to_string(id_it->get<std::int64_t>());
    } else {
      throw DataError("item_id must be a string" + where);
    }

    std::optional<std::int64_t> release;
    if (auto r = obj.find("release_ts"); r != obj.end() && !r->is_null()) {
      if (!r->is_number_integer()) throw DataError("release_ts must be an integer" + where);
      release = r->get<std::int64_t>();
    }

    auto read_names = [&](const std::string& key) {
      std::vector<std::string> names;
      auto it = obj.find(key);
      if (it == obj.end() || it->is_null()) return names;
      if (!it->is_array()) throw DataError("'" + key + "' must be an array" + where);
      for (const auto& v : *it) {
        if (!v.is_string()) throw DataError("'" + key + "' entries must be strings" + where);
        names.push_back(v.get<std::string>());
      }
      return names;
    };

    std::vector<std::vector<std::string>> attributes;
    attributes.push_back(read_names("categories"));
    for (std::size_t j = 0; j < side_fields.size(); ++j) {
      if (obj.contains(side_fields[j])) field_seen[j] = true;
      attributes.push_back(read_names(side_fields[j]));
    }
    catalog.add(std::move(id), release, attributes);
  }
  for (std::size_t j = 0; j < side_fields.size(); ++j) {
    if (!field_seen[j] && catalog.size() > 0) {
      throw DataError("unknown side-info field '" + side_fields[j] + "'");
    }
  }
  return catalog;
}

Catalog load_items(const std::filesystem::path& path, const std::vector<std::string>& side_fields) {
  auto in = open_or_throw(path);
  return parse_items(in, side_fields);
}

TimeBinning::TimeBinning(std::int64_t origin_ts, std::int64_t bin_seconds, int num_bins)
    : origin_(origin_ts), bin_seconds_(bin_seconds), num_bins_(num_bins) {
  if (bin_seconds <= 0) throw DataError("bin_seconds must be positive");
  if (num_bins < 0) throw DataError("num_bins must be non-negative");
}

TimeBinning TimeBinning::fit(std::span<const InteractionRecord> records, std::int64_t bin_seconds) {
  if (records.empty()) throw DataError("no interactions to bin");
  auto [lo, hi] = std::minmax_element(
      records.begin(), records.end(),
      [](const auto& a, const auto& b) { return a.timestamp < b.timestamp; });
  const auto span = hi->timestamp - lo->timestamp;
  if (bin_seconds <= 0) throw DataError("bin_seconds must be positive");
  return TimeBinning(lo->timestamp, bin_seconds, static_cast<int>(span / bin_seconds) + 1);
}

int TimeBinning::bin_of(std::int64_t ts) const {
  return static_cast<int>(floor_div(ts - origin_, bin_seconds_) + 1);
}

std::int64_t TimeBinning::bin_start(int bin) const {
  return origin_ + static_cast<std::int64_t>(bin - 1) * bin_seconds_;
}

int calendar_month(std::int64_t ts) {
  // Civil-from-days over the proleptic Gregorian calendar.
  std::int64_t z = floor_div(ts, 86400) + 719468;
  const std::int64_t era = floor_div(z, 146097);
  const std::int64_t doe = z - era * 146097;
  const std::int64_t yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const std::int64_t doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const std::int64_t mp = (5 * doy + 2) / 153;
  return static_cast<int>(mp < 10 ? mp + 3 : mp - 9);
}

std::int64_t PopularitySeries::at(int bin) const {
  if (bin < release_bin) return 0;
  const auto k = static_cast<std::size_t>(bin - release_bin);
  return k < counts.size() ? counts[k] : 0;
}

std::vector<double> PopularitySeries::history(int end_bin) const {
  std::vector<double> out;
  for (int t = release_bin; t <= end_bin; ++t) out.push_back(static_cast<double>(at(t)));
  return out;
}

std::vector<PopularitySeries> build_series(std::span<const InteractionRecord> records,
                                           const Catalog& catalog, const TimeBinning& binning,
                                           SeriesReport* report) {
  SeriesReport local;
  const int num_bins = binning.num_bins();
  std::unordered_map<std::string, std::uint32_t> user_ids;
  std::vector<std::tuple<std::size_t, int, std::uint32_t>> triples;
  std::vector<std::string> orphans;
  triples.reserve(records.size());
  for (const auto& r : records) {
    const auto item = catalog.find(r.item_id);
    if (!item) {
      ++local.orphan_interactions;
      orphans.push_back(r.item_id);
      continue;
    }
    const int bin = binning.bin_of(r.timestamp);
    if (bin < 1 || bin > num_bins) {
      ++local.out_of_range;
      continue;
    }
    auto [it, _] = user_ids.emplace(r.user_id, static_cast<std::uint32_t>(user_ids.size()));
    triples.emplace_back(*item, bin, it->second);
  }
  std::sort(triples.begin(), triples.end());
  triples.erase(std::unique(triples.begin(), triples.end()), triples.end());

  std::vector<std::map<int, std::int64_t>> per_item(catalog.size());
  for (const auto& [item, bin, user] : triples) ++per_item[item][bin];

  std::vector<PopularitySeries> out;
  out.reserve(catalog.size());
  for (std::size_t i = 0; i < catalog.size(); ++i) {
    const auto& rec = catalog.item(i);
    PopularitySeries s;
    s.item_id = rec.item_id;
    int release = num_bins + 1;
    if (rec.release_ts) release = std::clamp(binning.bin_of(*rec.release_ts), 1, num_bins + 1);
    if (!per_item[i].empty()) release = std::min(release, per_item[i].begin()->first);
    s.release_bin = release;
    if (release <= num_bins) {
      s.counts.assign(static_cast<std::size_t>(num_bins - release + 1), 0);
      for (const auto& [bin, count] : per_item[i]) {
        s.counts[static_cast<std::size_t>(bin - release)] = count;
      }
    }
    out.push_back(std::move(s));
  }

  std::sort(orphans.begin(), orphans.end());
  orphans.erase(std::unique(orphans.begin(), orphans.end()), orphans.end());
  local.orphan_items = std::move(orphans);
  if (report) *report = std::move(local);
  return out;
}

SplitSpec split_global(const TimeBinning& binning) {
  const int t_max = binning.num_bins();
  if (t_max < 3) {
    throw DataError("global split needs at least 3 bins, got " + std::to_string(t_max));
  }
  return {t_max - 2, t_max - 1, t_max};
}

Corpus build_corpus(std::span<const InteractionRecord> records, Catalog catalog,
                    std::int64_t bin_seconds) {
  Corpus corpus;
  corpus.binning = TimeBinning::fit(records, bin_seconds);
  corpus.series = build_series(records, catalog, corpus.binning, &corpus.report);

  std::vector<std::string> users;
  for (const auto& r : records) {
    if (catalog.find(r.item_id)) users.push_back(r.user_id);
  }
  std::sort(users.begin(), users.end());
  users.erase(std::unique(users.begin(), users.end()), users.end());
  std::unordered_map<std::string_view, std::uint32_t> user_index;
  for (std::size_t u = 0; u < users.size(); ++u) {
    user_index.emplace(users[u], static_cast<std::uint32_t>(u));
  }

  corpus.interactions_per_bin.assign(static_cast<std::size_t>(corpus.binning.num_bins()) + 1, 0);
  for (const auto& r : records) {
    const auto item = catalog.find(r.item_id);
    if (!item) continue;
    const int bin = corpus.binning.bin_of(r.timestamp);
    ++corpus.interactions_per_bin[static_cast<std::size_t>(bin)];
    corpus.events.push_back(
        {user_index.at(r.user_id), static_cast<std::uint32_t>(*item), bin});
  }
  std::sort(corpus.events.begin(), corpus.events.end());
  corpus.events.erase(std::unique(corpus.events.begin(), corpus.events.end()),
                      corpus.events.end());
  corpus.users = std::move(users);
  corpus.catalog = std::move(catalog);
  return corpus;
}

SplitCounts split_counts(const Corpus& corpus, const SplitSpec& split) {
  SplitCounts out;
  out.users = corpus.users.size();
  std::vector<bool> seen(corpus.catalog.size(), false);
  for (const auto& e : corpus.events) seen[e.item] = true;
  out.items = static_cast<std::size_t>(std::count(seen.begin(), seen.end(), true));
  for (int t = 1; t <= corpus.binning.num_bins(); ++t) {
    const auto n = corpus.interactions_per_bin[static_cast<std::size_t>(t)];
    if (t <= split.train_end_bin) {
      out.train += n;
    } else if (t == split.valid_bin) {
      out.valid += n;
    } else if (t == split.test_bin) {
      out.test += n;
    }
  }
  return out;
}

std::vector<ProfileRow> popularity_profile(std::span<const PopularitySeries> series) {
  if (series.empty()) throw DataError("popularity profile of an empty series set");
  std::vector<double> sum;
  std::vector<std::size_t> support;
  for (const auto& s : series) {
    if (s.counts.size() > sum.size()) {
      sum.resize(s.counts.size(), 0.0);
      support.resize(s.counts.size(), 0);
    }
    for (std::size_t a = 0; a < s.counts.size(); ++a) {
      sum[a] += static_cast<double>(s.counts[a]);
      ++support[a];
    }
  }
  std::vector<ProfileRow> out;
  for (std::size_t a = 0; a < sum.size(); ++a) {
    out.push_back({static_cast<int>(a), sum[a] / static_cast<double>(support[a]), support[a]});
  }
  return out;
}

std::vector<ProfileRow> popularity_profile_by_month(const Corpus& corpus,
                                                    std::string_view category) {
  const auto cat = corpus.catalog.vocabulary(0).find(category);
  if (!cat) throw DataError("unknown category '" + std::string(category) + "'");
  std::vector<double> sum(13, 0.0);
  std::vector<std::size_t> support(13, 0);
  for (std::size_t i = 0; i < corpus.catalog.size(); ++i) {
    const auto& cats = corpus.catalog.item(i).categories();
    if (!std::binary_search(cats.begin(), cats.end(), *cat)) continue;
    const auto& s = corpus.series[i];
    for (std::size_t k = 0; k < s.counts.size(); ++k) {
      const int bin = s.release_bin + static_cast<int>(k);
      const int month = calendar_month(corpus.binning.bin_start(bin));
      sum[static_cast<std::size_t>(month)] += static_cast<double>(s.counts[k]);
      ++support[static_cast<std::size_t>(month)];
    }
  }
  std::vector<ProfileRow> out;
  for (int m = 1; m <= 12; ++m) {
    const auto n = support[static_cast<std::size_t>(m)];
    if (n == 0) continue;
    out.push_back({m, sum[static_cast<std::size_t>(m)] / static_cast<double>(n), n});
  }
  return out;
}

void save_corpus(const Corpus& corpus, const std::filesystem::path& path) {
  json j;
  j["format"] = "pare-corpus";
  j["version"] = 1;
  j["binning"] = {{"origin_ts", corpus.binning.origin_ts()},
                  {"bin_seconds", corpus.binning.bin_seconds()},
                  {"num_bins", corpus.binning.num_bins()}};
  const auto& cat = corpus.catalog;
  j["side_fields"] = std::vector<std::string>(cat.field_names().begin() + 1, cat.field_names().end());
  json items = json::array();
  for (const auto& item : cat.items()) {
    json it;
    it["item_id"] = item.item_id;
    it["release_ts"] = item.release_ts ? json(*item.release_ts) : json(nullptr);
    json fields = json::array();
    for (std::size_t f = 0; f < item.side_info.size(); ++f) {
      std::vector<std::string> names;
      for (auto id : item.side_info[f]) names.push_back(cat.vocabulary(f).name(id));
      fields.push_back(names);
    }
    it["attributes"] = std::move(fields);
    items.push_back(std::move(it));
  }
  j["items"] = std::move(items);
  // Vocabulary order is first-seen order; store it so ids survive a reload.
  json vocab = json::array();
  for (std::size_t f = 0; f < cat.num_fields(); ++f) vocab.push_back(cat.vocabulary(f).names());
  j["vocabularies"] = std::move(vocab);
  j["users"] = corpus.users;
  json events = json::array();
  for (const auto& e : corpus.events) events.push_back({e.user, e.item, e.bin});
  j["events"] = std::move(events);
  j["interactions_per_bin"] = corpus.interactions_per_bin;
  json series = json::array();
  for (const auto& s : corpus.series) series.push_back({{"release_bin", s.release_bin}, {"counts", s.counts}});
  j["series"] = std::move(series);
  j["orphan_interactions"] = corpus.report.orphan_interactions;
  j["orphan_items"] = corpus.report.orphan_items;
  j["out_of_range"] = corpus.report.out_of_range;

  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << j.dump() << '\n';
}

Corpus load_corpus(const std::filesystem::path& path) {
  auto in = open_or_throw(path);
  json j;
  try {
    j = json::parse(in);
    if (j.at("format") != "pare-corpus" || j.at("version") != 1) {
      throw DataError("unsupported corpus file " + path.string());
    }
    Corpus corpus;
    const auto& b = j.at("binning");
    corpus.binning = TimeBinning(b.at("origin_ts").get<std::int64_t>(),
                                 b.at("bin_seconds").get<std::int64_t>(),
                                 b.at("num_bins").get<int>());
    Catalog real(j.at("side_fields").get<std::vector<std::string>>());
    // Re-intern the vocabularies first so ids match the saved file.
    const auto vocab = j.at("vocabularies").get<std::vector<std::vector<std::string>>>();
    if (vocab.size() != real.num_fields()) throw DataError("vocabulary count mismatch");
    for (std::size_t f = 0; f < vocab.size(); ++f) real.intern_attributes(f, vocab[f]);
    for (const auto& it : j.at("items")) {
      std::optional<std::int64_t> release;
      if (!it.at("release_ts").is_null()) release = it.at("release_ts").get<std::int64_t>();
      real.add(it.at("item_id").get<std::string>(), release,
               it.at("attributes").get<std::vector<std::vector<std::string>>>());
    }
    corpus.catalog = std::move(real);
    corpus.users = j.at("users").get<std::vector<std::string>>();
    for (const auto& e : j.at("events")) {
      corpus.events.push_back({e.at(0).get<std::uint32_t>(), e.at(1).get<std::uint32_t>(),
                               e.at(2).get<int>()});
    }
    corpus.interactions_per_bin = j.at("interactions_per_bin").get<std::vector<std::int64_t>>();
    const auto& series = j.at("series");
    if (series.size() != corpus.catalog.size()) throw DataError("series count mismatch");
    for (std::size_t i = 0; i < series.size(); ++i) {
      PopularitySeries s;
      s.item_id = corpus.catalog.item(i).item_id;
      s.release_bin = series[i].at("release_bin").get<int>();
      s.counts = series[i].at("counts").get<std::vector<std::int64_t>>();
      corpus.series.push_back(std::move(s));
    }
    corpus.report.orphan_interactions = j.at("orphan_interactions").get<std::size_t>();
    corpus.report.orphan_items = j.at("orphan_items").get<std::vector<std::string>>();
    corpus.report.out_of_range = j.at("out_of_range").get<std::size_t>();
    return corpus;
  } catch (const json::exception& e) {
    throw DataError("corrupt corpus file " + path.string() + ": " + e.what());
  }
}

}  // namespace pare
