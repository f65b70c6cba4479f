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
#include "pare/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <unordered_set>

#include "pare/errors.hpp"

namespace pare {

GroundTruth ground_truth(const Corpus& corpus, int bin) {
  GroundTruth truth;
  for (const auto& e : corpus.events) {
    if (e.bin != bin) continue;
    truth[corpus.users[e.user]].insert(corpus.catalog.item(e.item).item_id);
  }
  return truth;
}

MetricValues user_metrics(std::span<const std::string> ranked, const std::set<std::string>& truth,
                          int n) {
  MetricValues m;
  if (truth.empty() || n < 1) return m;
  const std::size_t depth = std::min(ranked.size(), static_cast<std::size_t>(n));
  std::size_t hits = 0;
  double dcg = 0.0;
  for (std::size_t r = 0; r < depth; ++r) {
    if (!truth.count(ranked[r])) continue;
    ++hits;
    if (m.mrr == 0.0) m.mrr = 1.0 / static_cast<double>(r + 1);
    dcg += 1.0 / std::log2(static_cast<double>(r + 2));
  }
  double idcg = 0.0;
  const std::size_t ideal = std::min(truth.size(), static_cast<std::size_t>(n));
  for (std::size_t r = 0; r < ideal; ++r) idcg += 1.0 / std::log2(static_cast<double>(r + 2));

  m.precision = static_cast<double>(hits) / n;
  m.recall = static_cast<double>(hits) / static_cast<double>(truth.size());
  m.hr = hits > 0 ? 1.0 : 0.0;
  m.ndcg = dcg / idcg;
  return m;
}

namespace {

MetricsReport evaluate_with(const GroundTruth& truth, std::span<const int> cutoffs,
                            const std::function<const RankedList*(const std::string&)>& list_of) {
  if (cutoffs.empty()) throw UsageError("no cutoffs requested");
  MetricsReport report;
  report.cutoffs.assign(cutoffs.begin(), cutoffs.end());
  for (int n : cutoffs) {
    if (n < 1) throw UsageError("cutoffs must be >= 1");
    report.at[n] = {};
  }
  static const RankedList kEmpty;
  for (const auto& [user, items] : truth) {
    if (items.empty()) continue;
    ++report.users;
    const RankedList* list = list_of(user);
    const auto ranked = (list ? *list : kEmpty).items();
    for (int n : cutoffs) {
      const auto m = user_metrics(ranked, items, n);
      auto& acc = report.at[n];
      acc.precision += m.precision;
      acc.recall += m.recall;
      acc.hr += m.hr;
      acc.mrr += m.mrr;
      acc.ndcg += m.ndcg;
    }
  }
  if (report.users == 0) throw DataError("ground truth holds no evaluable users");
  const double users = static_cast<double>(report.users);
  for (auto& [_, acc] : report.at) {
    acc.precision /= users;
    acc.recall /= users;
    acc.hr /= users;
    acc.mrr /= users;
    acc.ndcg /= users;
  }
  return report;
}

}  // namespace

MetricsReport evaluate(const RankedList& global, const GroundTruth& truth,
                       std::span<const int> cutoffs) {
  return evaluate_with(truth, cutoffs, [&](const std::string&) { return &global; });
}

MetricsReport evaluate(const std::map<std::string, RankedList>& per_user, const GroundTruth& truth,
                       std::span<const int> cutoffs) {
  return evaluate_with(truth, cutoffs, [&](const std::string& user) -> const RankedList* {
    auto it = per_user.find(user);
    return it == per_user.end() ? nullptr : &it->second;
  });
}

std::size_t overlap_count(const RankedList& a, const RankedList& b, std::size_t n) {
  const std::size_t na = std::min(n, a.entries.size());
  const std::size_t nb = std::min(n, b.entries.size());
  std::unordered_set<std::string> left;
  for (std::size_t r = 0; r < na; ++r) left.insert(a.entries[r].item_id);
  std::size_t shared = 0;
  for (std::size_t r = 0; r < nb; ++r) shared += left.count(b.entries[r].item_id);
  return shared;
}

void write_metrics_header(std::ostream& out) {
  out << "method,N,Precision,Recall,HR,MRR,NDCG\n";
}

void write_metrics_rows(const std::string& method, const MetricsReport& report, std::ostream& out) {
  char buf[256];
  for (int n : report.cutoffs) {
    const auto& m = report.at.at(n);
    std::snprintf(buf, sizeof(buf), "%s,%d,%.4f,%.4f,%.4f,%.4f,%.4f\n", method.c_str(), n,
                  m.precision, m.recall, m.hr, m.mrr, m.ndcg);
    out << buf;
  }
}

}  // namespace pare
