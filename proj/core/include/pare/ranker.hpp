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
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "pare/corpus.hpp"
#include "pare/model.hpp"

namespace pare {

using ScoreMap = std::map<std::string, double>;

struct RankedEntry {
  std::string item_id;
  double score = 0.0;

  bool operator==(const RankedEntry&) const = default;
};

// Ordered by score descending, ties by ascending item id.
struct RankedList {
  std::vector<RankedEntry> entries;
  std::size_t cutoff = 0;
  bool shortfall = false;  // fewer items than the requested cutoff

  std::vector<std::string> items() const;
  bool operator==(const RankedList&) const = default;
};

// Fused prediction for every item released by `bin`.
ScoreMap score_all(const PareModel& model, const Corpus& corpus, int bin);
std::vector<PredictionBreakdown> predict_all(const PareModel& model, const Corpus& corpus, int bin);

// n = 0 keeps every item.
RankedList top_n(const ScoreMap& scores, std::size_t n);

// Trailing window in bins; nullopt means every bin before T.
using Window = std::optional<int>;
Window parse_window(std::string_view text);  // "3", "6", "12", "ALL"
std::string window_name(const Window& window);

// Scores each item released by T with its distinct-user count over bins
// [max(1, T - w), T - 1]. n = 0 keeps every item.
RankedList cutoff_toppop(const Corpus& corpus, int bin, const Window& window, std::size_t n = 0);

// `rank,item_id,score` lines, rank starting at 1.
void write_ranked_list(const RankedList& list, std::ostream& out);
RankedList read_ranked_list(std::istream& in);

}  // namespace pare
