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
#include "pare/blend.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>

#include "pare/errors.hpp"

namespace pare {
namespace {

std::string trim(const std::string& s) {
  const auto* ws = " \t\r\n";
  const auto begin = s.find_first_not_of(ws);
  if (begin == std::string::npos) return {};
  return s.substr(begin, s.find_last_not_of(ws) - begin + 1);
}

struct Range {
  double lo = 0.0;
  double hi = 0.0;

  double apply(double v) const { return hi > lo ? (v - lo) / (hi - lo) : 0.0; }
};

Range range_of(const ExternalScores& external) {
  Range r{INFINITY, -INFINITY};
  for (const auto& [_, items] : external.by_user) {
    for (const auto& [__, s] : items) {
      r.lo = std::min(r.lo, s);
      r.hi = std::max(r.hi, s);
    }
  }
  return r;
}

Range range_of(const ScoreMap& scores) {
  Range r{INFINITY, -INFINITY};
  for (const auto& [_, s] : scores) {
    r.lo = std::min(r.lo, s);
    r.hi = std::max(r.hi, s);
  }
  return r;
}

}  // namespace

std::size_t ExternalScores::size() const {
  std::size_t n = 0;
  for (const auto& [_, items] : by_user) n += items.size();
  return n;
}

ExternalScores parse_scores(std::istream& in, std::string source) {
  ExternalScores out;
  out.source = std::move(source);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto body = trim(line);
    if (body.empty()) continue;
    if (line_no == 1 && body == "user_id,item_id,score") continue;
    const auto a = body.find(',');
    const auto b = body.find(',', a == std::string::npos ? a : a + 1);
    if (a == std::string::npos || b == std::string::npos || body.find(',', b + 1) != std::string::npos) {
      throw DataError("malformed score line " + std::to_string(line_no) + ": " + body);
    }
    const auto user = trim(body.substr(0, a));
    const auto item = trim(body.substr(a + 1, b - a - 1));
    const auto text = trim(body.substr(b + 1));
    double score = 0.0;
    try {
      std::size_t used = 0;
      score = std::stod(text, &used);
      if (used != text.size()) throw std::invalid_argument("trailing");
    } catch (const std::logic_error&) {
      throw DataError("malformed score at line " + std::to_string(line_no) + ": '" + text + "'");
    }
    if (!std::isfinite(score)) throw DataError("non-finite score at line " + std::to_string(line_no));
    if (user.empty() || item.empty()) throw DataError("empty id at score line " + std::to_string(line_no));
    auto [it, inserted] = out.by_user[user].insert_or_assign(item, score);
    if (!inserted) ++out.duplicates;
  }
  if (out.by_user.empty()) throw DataError("external score file holds no users");
  return out;
}

ExternalScores load_scores(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  return parse_scores(in, path.stem().string());
}

std::map<std::string, ScoreMap> blend_scores(const ExternalScores& external, const ScoreMap& pare,
                                             double beta, const BlendOptions& options) {
  if (!(beta >= 0.0 && beta <= 1.0)) throw UsageError("beta must lie in [0, 1]");
  const Range ext_range = options.normalize ? range_of(external) : Range{0.0, 1.0};
  const Range pare_range = options.normalize ? range_of(pare) : Range{0.0, 1.0};

  std::set<std::string> users = options.extra_users;
  for (const auto& [u, _] : external.by_user) users.insert(u);

  static const ScoreMap kNone;
  std::map<std::string, ScoreMap> out;
  for (const auto& user : users) {
    auto ext_it = external.by_user.find(user);
    const ScoreMap& ext = ext_it == external.by_user.end() ? kNone : ext_it->second;
    const std::set<std::string>* excluded = nullptr;
    if (options.exclude) {
      auto ex = options.exclude->find(user);
      if (ex != options.exclude->end()) excluded = &ex->second;
    }
    ScoreMap blended;
    auto add = [&](const std::string& item) {
      if (excluded && excluded->count(item)) return;
      if (blended.count(item)) return;
      auto e = ext.find(item);
      auto p = pare.find(item);
      const double s = e == ext.end() ? 0.0 : ext_range.apply(e->second);
      const double y = p == pare.end() ? 0.0 : pare_range.apply(p->second);
      blended[item] = beta * s + (1.0 - beta) * y;
    };
    for (const auto& [item, _] : ext) add(item);
    for (const auto& [item, _] : pare) add(item);
    out.emplace(user, std::move(blended));
  }
  return out;
}

std::map<std::string, RankedList> blend_rankings(const ExternalScores& external, const ScoreMap& pare,
                                                 double beta, std::size_t n,
                                                 const BlendOptions& options) {
  std::map<std::string, RankedList> out;
  for (const auto& [user, scores] : blend_scores(external, pare, beta, options)) {
    out.emplace(user, top_n(scores, n));
  }
  return out;
}

std::map<std::string, std::set<std::string>> seen_items(const Corpus& corpus, int last_bin) {
  std::map<std::string, std::set<std::string>> seen;
  for (const auto& e : corpus.events) {
    if (e.bin > last_bin) continue;
    seen[corpus.users[e.user]].insert(corpus.catalog.item(e.item).item_id);
  }
  return seen;
}

std::vector<double> default_beta_grid() {
  std::vector<double> grid;
  for (int k = 0; k <= 10; ++k) grid.push_back(k / 10.0);
  return grid;
}

std::vector<SweepRow> beta_sweep(const ExternalScores& external, const ScoreMap& pare,
                                 const GroundTruth& truth, std::span<const double> betas,
                                 std::span<const int> cutoffs, const BlendOptions& options) {
  if (betas.empty()) throw UsageError("beta sweep needs at least one beta");
  if (cutoffs.empty()) throw UsageError("no cutoffs requested");
  const auto depth = static_cast<std::size_t>(*std::max_element(cutoffs.begin(), cutoffs.end()));
  BlendOptions opts = options;
  for (const auto& [user, _] : truth) opts.extra_users.insert(user);
  std::vector<SweepRow> rows;
  for (double beta : betas) {
    const auto lists = blend_rankings(external, pare, beta, depth, opts);
    rows.push_back({beta, evaluate(lists, truth, cutoffs)});
  }
  return rows;
}

void write_sweep_plot(std::span<const SweepRow> rows, std::ostream& out) {
  out << "beta,hr@10\n";
  char buf[64];
  for (const auto& row : rows) {
    int n = -1;
    for (int c : row.report.cutoffs) {
      if (c <= 10 && c > n) n = c;
    }
    const double hr = n > 0 ? row.report.at.at(n).hr : 0.0;
    std::snprintf(buf, sizeof(buf), "%.2f,%.6f\n", row.beta, hr);
    out << buf;
  }
}

}  // namespace pare
