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

#include <filesystem>
#include <iosfwd>
#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "pare/metrics.hpp"
#include "pare/ranker.hpp"

namespace pare {

struct ExternalScores {
  std::string source;
  std::map<std::string, ScoreMap> by_user;  // user -> item -> s(u, i)
  std::size_t duplicates = 0;               // repeated pairs, last one wins

  std::size_t size() const;
};

// `user_id,item_id,score` lines; an exact `user_id,item_id,score` first line
// is skipped as a header.
ExternalScores parse_scores(std::istream& in, std::string source = "external");
ExternalScores load_scores(const std::filesystem::path& path);

struct BlendOptions {
  // Rescale each source to [0, 1] by its own min and max before mixing.
  bool normalize = false;
  // Users to rank in addition to those present in the external scores.
  std::set<std::string> extra_users;
  // Items removed from a user's candidates, e.g. previously consumed ones.
  const std::map<std::string, std::set<std::string>>* exclude = nullptr;
};

// s_new(u, i) = beta * s(u, i) + (1 - beta) * y_F(i) over the union of the
// user's external items and all PARE-scored items. An item missing from one
// source contributes 0 from that source.
std::map<std::string, ScoreMap> blend_scores(const ExternalScores& external, const ScoreMap& pare,
                                             double beta, const BlendOptions& options = {});

std::map<std::string, RankedList> blend_rankings(const ExternalScores& external, const ScoreMap& pare,
                                                 double beta, std::size_t n,
                                                 const BlendOptions& options = {});

// Items each user touched in bins [1, last_bin].
std::map<std::string, std::set<std::string>> seen_items(const Corpus& corpus, int last_bin);

struct SweepRow {
  double beta = 0.0;
  MetricsReport report;
};

std::vector<double> default_beta_grid();  // 0, 0.1, ..., 1.0

// One evaluation per beta over the users in `truth`.
std::vector<SweepRow> beta_sweep(const ExternalScores& external, const ScoreMap& pare,
                                 const GroundTruth& truth, std::span<const double> betas,
                                 std::span<const int> cutoffs, const BlendOptions& options = {});

// `beta,hr@10` rows (HR at the largest cutoff <= 10 if 10 is absent).
void write_sweep_plot(std::span<const SweepRow> rows, std::ostream& out);

}  // namespace pare
