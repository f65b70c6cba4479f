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

#include <map>
#include <ostream>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "pare/corpus.hpp"
#include "pare/ranker.hpp"

namespace pare {

inline const std::vector<int> kDefaultCutoffs = {1, 3, 5, 7, 10};

// user -> items the user interacted with in the target bin.
using GroundTruth = std::map<std::string, std::set<std::string>>;

GroundTruth ground_truth(const Corpus& corpus, int bin);

struct MetricValues {
  double precision = 0.0;
  double recall = 0.0;
  double hr = 0.0;
  double mrr = 0.0;
  double ndcg = 0.0;
};

struct MetricsReport {
  std::vector<int> cutoffs;
  std::map<int, MetricValues> at;
  std::size_t users = 0;
};

// Binary-relevance metrics for a single user, truncated at n.
MetricValues user_metrics(std::span<const std::string> ranked, const std::set<std::string>& truth,
                          int n);

// Every user in `truth` receives the same global list.
MetricsReport evaluate(const RankedList& global, const GroundTruth& truth,
                       std::span<const int> cutoffs);
// Per-user lists; a truth user without a list counts as all misses.
MetricsReport evaluate(const std::map<std::string, RankedList>& per_user, const GroundTruth& truth,
                       std::span<const int> cutoffs);

std::size_t overlap_count(const RankedList& a, const RankedList& b, std::size_t n);

// Method x {Precision, Recall, HR, MRR, NDCG} at every cutoff.
void write_metrics_header(std::ostream& out);
void write_metrics_rows(const std::string& method, const MetricsReport& report, std::ostream& out);

}  // namespace pare
