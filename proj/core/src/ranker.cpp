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
#include "pare/ranker.hpp"

#include <algorithm>
#include <cstdio>
#include <istream>
#include <sstream>

#include "pare/errors.hpp"

namespace pare {

std::vector<std::string> RankedList::items() const {
  std::vector<std::string> out;
  out.reserve(entries.size());
  for (const auto& e : entries) out.push_back(e.item_id);
  return out;
}

ScoreMap score_all(const PareModel& model, const Corpus& corpus, int bin) {
  ScoreMap scores;
  for (const auto& p : predict_all(model, corpus, bin)) scores[p.item_id] = p.y_fused;
  return scores;
}

std::vector<PredictionBreakdown> predict_all(const PareModel& model, const Corpus& corpus, int bin) {
  std::vector<PredictionBreakdown> out;
  for (std::size_t i = 0; i < corpus.catalog.size(); ++i) {
    if (!corpus.released_by(i, bin)) continue;
    out.push_back(model.predict(corpus, i, bin));
  }
  if (out.empty()) throw DataError("no item is released by bin " + std::to_string(bin));
  return out;
}

RankedList top_n(const ScoreMap& scores, std::size_t n) {
  RankedList list;
  list.entries.reserve(scores.size());
  for (const auto& [id, s] : scores) list.entries.push_back({id, s});
  // ScoreMap iterates in ascending id order, so a stable sort keeps id ties.
  std::stable_sort(list.entries.begin(), list.entries.end(),
                   [](const RankedEntry& a, const RankedEntry& b) { return a.score > b.score; });
  const std::size_t want = n == 0 ? scores.size() : n;
  list.cutoff = want;
  list.shortfall = scores.size() < want;
  if (list.entries.size() > want) list.entries.resize(want);
  return list;
}

Window parse_window(std::string_view text) {
  if (text == "ALL" || text == "all") return std::nullopt;
  int bins = 0;
  try {
    std::size_t used = 0;
    bins = std::stoi(std::string(text), &used);
    if (used != text.size()) throw std::invalid_argument("trailing");
  } catch (const std::logic_error&) {
    throw UsageError("window must be a positive number of months or ALL, got '" + std::string(text) + "'");
  }
  if (bins < 1) throw UsageError("window must be >= 1 month");
  return bins;
}

std::string window_name(const Window& window) {
  return window ? std::to_string(*window) : std::string("ALL");
}

RankedList cutoff_toppop(const Corpus& corpus, int bin, const Window& window, std::size_t n) {
  const int last = bin - 1;
  const int first = window ? std::max(1, bin - *window) : 1;
  if (last < 1 || first > last) {
    throw DataError("Cutoff TopPop window " + window_name(window) + " is empty before bin " +
                    std::to_string(bin));
  }
  ScoreMap scores;
  for (std::size_t i = 0; i < corpus.catalog.size(); ++i) {
    if (!corpus.released_by(i, bin)) continue;
    const auto& s = corpus.series[i];
    std::int64_t total = 0;
    for (int t = first; t <= last; ++t) total += s.at(t);
    scores[s.item_id] = static_cast<double>(total);
  }
  if (scores.empty()) throw DataError("no item is released by bin " + std::to_string(bin));
  return top_n(scores, n);
}

void write_ranked_list(const RankedList& list, std::ostream& out) {
  char buf[64];
  out << "rank,item_id,score\n";
  for (std::size_t r = 0; r < list.entries.size(); ++r) {
    std::snprintf(buf, sizeof(buf), "%.17g", list.entries[r].score);
    out << (r + 1) << ',' << list.entries[r].item_id << ',' << buf << '\n';
  }
}

RankedList read_ranked_list(std::istream& in) {
  RankedList list;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || (line_no == 1 && line.rfind("rank,", 0) == 0)) continue;
    const auto a = line.find(',');
    const auto b = line.rfind(',');
    if (a == std::string::npos || a == b) {
      throw DataError("malformed ranked list line " + std::to_string(line_no));
    }
    try {
      list.entries.push_back({line.substr(a + 1, b - a - 1), std::stod(line.substr(b + 1))});
    } catch (const std::logic_error&) {
      throw DataError("malformed score in ranked list line " + std::to_string(line_no));
    }
  }
  list.cutoff = list.entries.size();
  return list;
}

}  // namespace pare
