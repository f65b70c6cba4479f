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
// Acceptance suite. Prints one PASS/FAIL line per criterion, with supporting
// detail lines prefixed by two spaces. Exit status is non-zero if any gating
// criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "cli.hpp"
#include "fixtures.hpp"
#include "pare/blend.hpp"
#include "pare/corpus.hpp"
#include "pare/errors.hpp"
#include "pare/metrics.hpp"
#include "pare/model.hpp"
#include "pare/ranker.hpp"
#include "pare/synthetic.hpp"
#include "pare/trainer.hpp"

namespace pare {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Verdict {
  bool pass = true;
  std::string summary;
  std::vector<std::string> details;
};

std::string fmt(const char* pattern, double a) {
  char buf[128];
  std::snprintf(buf, sizeof(buf), pattern, a);
  return buf;
}

std::string weights_line(const std::string& label, const std::array<double, kNumHeads>& w,
                         const HeadSet& heads) {
  // Printed in H, T, S, P order to line up with the reference ablation weights.
  const std::array<Head, 4> order = {Head::kHistory, Head::kTemporal, Head::kSide, Head::kPeriodic};
  std::string out = label + ":";
  for (Head h : order) {
    out += heads.has(h) ? fmt(" %.4f", w[static_cast<std::size_t>(h)]) : std::string(" -");
  }
  return out;
}

// ---------------------------------------------------------------------------
// 1. Gradient exactness on the miniature model.

Verdict gradient_exactness() {
  Verdict v;
  const auto start = Clock::now();
  double worst = 0.0;
  int seeds = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto data = miniature_synthetic(seed);
    const auto corpus = build_corpus(data.interactions, data.catalog);
    const auto shape = ModelShape::of(corpus);
    if (shape.num_categories() != 3 || shape.field_sizes.size() != 2 || shape.num_bins != 20) {
      v.pass = false;
      v.details.push_back("miniature corpus has unexpected shape for seed " + std::to_string(seed));
      continue;
    }
    PareConfig cfg;
    cfg.d = 8;
    cfg.lstm_hidden = 8;
    PareModel model(shape, cfg);
    model.randomize(seed, 1.0);
    const auto examples = build_examples(corpus, split_global(corpus.binning));
    std::vector<TrainExample> batch;
    const std::size_t stride = std::max<std::size_t>(1, examples.train.size() / 16);
    for (std::size_t k = 0; k < examples.train.size() && batch.size() < 16; k += stride) {
      batch.push_back(examples.train[k]);
    }
    const auto report = check_batch_gradient(model, corpus, batch, 1e-5, 1e-4);
    worst = std::max(worst, report.max_rel_error);
    ++seeds;
    if (!report.passed) {
      v.pass = false;
      std::string names;
      for (const auto& n : report.failed()) names += " " + n;
      v.details.push_back("seed " + std::to_string(seed) + " failed:" + names);
      // A coordinate whose true derivative sits near the roundoff floor of a
      // 1e-5 central difference recovers once the step grows.
      const auto coarse = check_batch_gradient(model, corpus, batch, 1e-4, 1e-4);
      v.details.push_back("seed " + std::to_string(seed) + " re-checked with h = 1e-4 (diagnostic only): max rel error " +
                          fmt("%.3e", coarse.max_rel_error) + (coarse.passed ? ", passes" : ", still fails"));
    }
  }
  const double elapsed = seconds_since(start);
  if (elapsed >= 60.0) v.pass = false;
  v.summary = "gradient exactness over " + std::to_string(seeds) + " seeds, max rel error " +
              fmt("%.3e", worst) + " (< 1e-4), " + fmt("%.1f s", elapsed) + " (< 60 s)";
  return v;
}

// ---------------------------------------------------------------------------
// 2. Metrics against a definitional oracle.

struct OracleMetrics {
  double precision = 0, recall = 0, hr = 0, mrr = 0, ndcg = 0;
};

OracleMetrics metric_oracle(const std::vector<std::string>& ranked, const std::set<std::string>& truth,
                            int n) {
  OracleMetrics m;
  int hits = 0;
  int first = 0;
  double dcg = 0.0;
  for (int r = 1; r <= n && r <= static_cast<int>(ranked.size()); ++r) {
    if (truth.count(ranked[static_cast<std::size_t>(r - 1)]) == 0) continue;
    ++hits;
    if (first == 0) first = r;
    dcg += std::log(2.0) / std::log(r + 1.0);
  }
  double idcg = 0.0;
  for (int r = 1; r <= std::min<int>(n, static_cast<int>(truth.size())); ++r) {
    idcg += std::log(2.0) / std::log(r + 1.0);
  }
  m.precision = hits / static_cast<double>(n);
  m.recall = hits / static_cast<double>(truth.size());
  m.hr = hits > 0 ? 1.0 : 0.0;
  m.mrr = first > 0 ? 1.0 / first : 0.0;
  m.ndcg = dcg / idcg;
  return m;
}

Verdict metrics_oracle() {
  Verdict v;
  std::mt19937_64 rng(2024);
  double worst = 0.0;
  const std::vector<int> cutoffs = {1, 3, 5, 7, 10};
  for (int instance = 0; instance < 1000; ++instance) {
    GroundTruth truth;
    std::map<std::string, RankedList> lists;
    std::map<int, OracleMetrics> sums;
    const int users = 1 + static_cast<int>(rng() % 4);
    for (int u = 0; u < users; ++u) {
      const auto user = "u" + std::to_string(u);
      const int pool = 5 + static_cast<int>(rng() % 25);
      std::vector<std::string> ids;
      for (int k = 0; k < pool; ++k) ids.push_back("i" + std::to_string(k));
      std::shuffle(ids.begin(), ids.end(), rng);
      const auto len = static_cast<std::size_t>(rng() % 15);
      std::vector<std::string> ranked(ids.begin(), ids.begin() + std::min(len, ids.size()));
      std::shuffle(ids.begin(), ids.end(), rng);
      const auto k = 1 + rng() % 6;
      truth[user] = std::set<std::string>(ids.begin(), ids.begin() + std::min<std::size_t>(k, ids.size()));
      RankedList list;
      double score = 100.0;
      for (const auto& id : ranked) list.entries.push_back({id, score--});
      lists[user] = list;
      for (int n : cutoffs) {
        const auto o = metric_oracle(ranked, truth[user], n);
        auto& s = sums[n];
        s.precision += o.precision / users;
        s.recall += o.recall / users;
        s.hr += o.hr / users;
        s.mrr += o.mrr / users;
        s.ndcg += o.ndcg / users;
      }
    }
    const auto report = evaluate(lists, truth, cutoffs);
    for (int n : cutoffs) {
      const auto& got = report.at.at(n);
      const auto& want = sums[n];
      for (double diff : {got.precision - want.precision, got.recall - want.recall, got.hr - want.hr,
                          got.mrr - want.mrr, got.ndcg - want.ndcg}) {
        worst = std::max(worst, std::abs(diff));
      }
    }
  }
  v.pass = worst <= 1e-12;
  v.summary = "metrics match the definitional oracle over 1000 instances, max abs diff " +
              fmt("%.3e", worst) + " (<= 1e-12)";
  return v;
}

// ---------------------------------------------------------------------------
// 3. Cutoff TopPop against brute-force counting on raw records.

std::vector<std::string> toppop_oracle(const SyntheticData& data, int test_bin, int window) {
  std::int64_t origin = data.interactions.front().timestamp;
  for (const auto& r : data.interactions) origin = std::min(origin, r.timestamp);
  const std::int64_t width = kDefaultBinSeconds;
  auto bin_of = [&](std::int64_t ts) {
    const std::int64_t d = ts - origin;
    return static_cast<int>((d >= 0 ? d / width : -((-d + width - 1) / width))) + 1;
  };
  std::map<std::string, int> first_bin;
  std::set<std::tuple<std::string, std::string, int>> seen;  // (item, user, bin)
  for (const auto& r : data.interactions) {
    const int b = bin_of(r.timestamp);
    auto [it, fresh] = first_bin.emplace(r.item_id, b);
    if (!fresh) it->second = std::min(it->second, b);
    seen.insert({r.item_id, r.user_id, b});
  }
  const int lo = window > 0 ? std::max(1, test_bin - window) : 1;
  std::vector<std::pair<std::string, double>> scored;
  for (const auto& item : data.catalog.items()) {
    int release = 1 << 30;
    if (item.release_ts) release = std::max(1, bin_of(*item.release_ts));
    if (auto f = first_bin.find(item.item_id); f != first_bin.end()) release = std::min(release, f->second);
    if (release > test_bin) continue;
    double count = 0;
    for (const auto& [i, u, b] : seen) {
      if (i == item.item_id && b >= lo && b <= test_bin - 1) count += 1;
    }
    scored.push_back({item.item_id, count});
  }
  std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
    return a.second != b.second ? a.second > b.second : a.first < b.first;
  });
  std::vector<std::string> out;
  for (const auto& s : scored) out.push_back(s.first);
  return out;
}

Verdict toppop_oracle_check() {
  Verdict v;
  SyntheticSpec spec;
  spec.users = 200;
  spec.items = 50;
  spec.bins = 24;
  spec.seed = 17;
  spec.missing_release_fraction = 0.2;
  const auto data = generate_synthetic(spec);
  const auto corpus = build_corpus(data.interactions, data.catalog);
  const int T = corpus.binning.num_bins();
  int lists = 0;
  for (int window : {3, 6, 12, 0}) {
    for (int bin = 2; bin <= T; ++bin) {
      const Window w = window > 0 ? Window{window} : std::nullopt;
      const auto got = cutoff_toppop(corpus, bin, w).items();
      const auto want = toppop_oracle(data, bin, window);
      ++lists;
      if (got != want) {
        v.pass = false;
        v.details.push_back("window " + window_name(w) + " differs at bin " + std::to_string(bin));
      }
    }
  }
  v.summary = "Cutoff TopPop windows 3/6/12/ALL equal the brute-force oracle on " +
              std::to_string(lists) + " lists (" + std::to_string(T) + " bins, " +
              std::to_string(corpus.users.size()) + " users, " + std::to_string(corpus.catalog.size()) +
              " items)";
  return v;
}

// ---------------------------------------------------------------------------
// 4. EMA against the unrolled recursion.

Verdict ema_check() {
  Verdict v;
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> count(0.0, 50.0);
  double worst = 0.0;
  ModelShape shape;
  shape.num_bins = 60;
  shape.num_items = 1;
  shape.field_sizes = {1};
  shape.field_names = {"categories"};
  int sequences = 0;
  for (double alpha : {0.0, 0.25, 0.5, 1.0}) {
    PareConfig cfg;
    cfg.d = 2;
    cfg.lstm_hidden = 2;
    cfg.alpha = alpha;
    PareModel model(shape, cfg);
    model.initialize(1);
    for (int trial = 0; trial < 250; ++trial) {
      const auto len = 1 + rng() % 50;
      std::vector<double> p(len);
      for (auto& x : p) x = std::floor(count(rng));
      // EMA_1 = p_1, EMA_t = alpha p_t + (1 - alpha) EMA_{t-1}, unrolled into
      // explicit weights on every term.
      const std::size_t n = p.size();
      double want = std::pow(1.0 - alpha, static_cast<double>(n - 1)) * p[0];
      for (std::size_t k = 1; k < n; ++k) {
        want += alpha * std::pow(1.0 - alpha, static_cast<double>(n - 1 - k)) * p[k];
      }
      double closed = want;
      if (alpha == 0.0) closed = p.front();
      if (alpha == 1.0) closed = p.back();
      for (double got : {ema_status(p, alpha), model.head_history(p).status}) {
        worst = std::max({worst, std::abs(got - want), std::abs(got - closed)});
      }
      ++sequences;
    }
  }
  const double empty = ema_status(std::vector<double>{}, 0.5);
  if (empty != 0.0) v.details.push_back("empty history gives " + fmt("%g", empty));
  v.pass = worst <= 1e-12 && empty == 0.0;
  v.summary = "EMA matches the unrolled recursion on " + std::to_string(sequences) +
              " sequences (alpha 0, 0.25, 0.5, 1), max abs diff " + fmt("%.3e", worst) + " (<= 1e-12)";
  return v;
}

// ---------------------------------------------------------------------------
// 5. Fusion weights and ablation structure.

struct Learned {
  Corpus corpus;
  PareModel model;
  TrainResult result;
  double train_seconds = 0.0;
};

// Counts large enough that Poisson noise does not swamp the planted shapes.
SyntheticSpec learnability_spec(std::uint64_t seed = 4) {
  SyntheticSpec spec;
  spec.users = 2000;
  spec.items = 120;
  spec.bins = 30;
  spec.categories = 4;
  spec.peak_mean = 100.0;
  spec.peak_jitter = 0.2;
  spec.decay = 0.95;
  spec.seasonal_amplitude = 0.9;
  spec.missing_release_fraction = 0.0;
  spec.seed = seed;
  return spec;
}

PareConfig learnability_config(const HeadSet& heads) {
  PareConfig cfg;
  cfg.d = 8;
  cfg.lstm_hidden = 8;
  cfg.heads = heads;
  return cfg;
}

TrainConfig learnability_train(int epochs) {
  TrainConfig cfg;
  cfg.max_epochs = epochs;
  cfg.patience = epochs;
  cfg.batch_size = 64;
  cfg.lr = 0.01;
  cfg.seed = 11;
  cfg.max_seconds = 240.0;
  return cfg;
}

Verdict fusion_check() {
  Verdict v;
  const auto data = miniature_synthetic(3);
  const auto corpus = build_corpus(data.interactions, data.catalog);
  PareConfig cfg;
  cfg.d = 8;
  cfg.lstm_hidden = 8;
  PareModel model(ModelShape::of(corpus), cfg);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> scale(0.1, 4.0);
  const int T = corpus.binning.num_bins();
  double worst_sum = 0.0, min_weight = 1.0;
  for (int draw = 0; draw < 1000; ++draw) {
    model.randomize(1000 + static_cast<std::uint64_t>(draw), scale(rng));
    std::size_t item = rng() % corpus.catalog.size();
    while (!corpus.released_by(item, T)) item = rng() % corpus.catalog.size();
    const auto p = model.predict(corpus, item, T);
    double sum = 0.0;
    for (double a : p.weights) {
      sum += a;
      min_weight = std::min(min_weight, a);
    }
    worst_sum = std::max(worst_sum, std::abs(sum - 1.0));
  }
  v.pass = min_weight > 0.0 && worst_sum < 1e-9;
  v.summary = "fusion weights over 1000 draws: min a_k " + fmt("%.3e", min_weight) + " (> 0), max |sum - 1| " +
              fmt("%.3e", worst_sum) + " (< 1e-9); ablation rows:";

  // Ablations trained briefly on the learnability corpus; only the structure
  // (which heads carry weight, weights summing to 1) is asserted.
  const auto synth = generate_synthetic(learnability_spec());
  const auto big = build_corpus(synth.interactions, synth.catalog);
  const auto examples = build_examples(big, split_global(big.binning));
  const std::vector<std::pair<std::string, std::string>> rows = {
      {"H", "1.0000 - - -"},
      {"H,T", "0.6025 0.3975 - -"},
      {"H,T,S", "0.6070 0.2047 0.1882 -"},
      {"H,T,P", "0.5980 0.1844 - 0.2177"},
      {"H,T,S,P", "0.6259 0.2573 0.0422 0.0746"}};
  for (const auto& [subset, reference] : rows) {
    const auto heads = HeadSet::parse(subset);
    PareModel m(ModelShape::of(big), learnability_config(heads));
    m.initialize(7);
    train(m, big, examples, learnability_train(4));
    const auto w = fuse({0, 0, 0, 0}, std::as_const(m.params().get("fusion.logits").value).values(), heads).weights;
    double sum = 0.0;
    bool structure = true;
    for (std::size_t k = 0; k < kNumHeads; ++k) {
      sum += w[k];
      structure = structure && (heads.has(k) ? w[k] > 0.0 : w[k] == 0.0);
    }
    structure = structure && std::abs(sum - 1.0) < 1e-9;
    if (!structure) v.pass = false;
    v.details.push_back(weights_line(heads.to_string(), w, heads) + "   (reference H T S P: " + reference +
                        ")" + (structure ? "" : "  STRUCTURE MISMATCH"));
  }
  return v;
}

// ---------------------------------------------------------------------------
// 6. Synthetic learnability.

struct LearnabilityRun {
  double epoch0 = 0.0, best = 0.0;
  double pare_hr = 0.0, all_hr = 0.0, recent_hr = 0.0;
  std::size_t test_users = 0;

  bool a() const { return best <= 0.5 * epoch0; }
  bool b() const { return pare_hr > all_hr; }
  bool c() const { return pare_hr >= recent_hr; }
};

LearnabilityRun run_learnability(const Corpus& corpus, PareModel& model, TrainResult& result) {
  model.initialize(3);
  const auto examples = build_examples(corpus, split_global(corpus.binning));
  result = train(model, corpus, examples, learnability_train(60));
  const int T = corpus.binning.num_bins();
  const auto truth = ground_truth(corpus, T);
  const std::vector<int> ten = {10};
  LearnabilityRun run;
  run.epoch0 = result.history.front().valid_loss;
  run.best = result.best_valid_loss;
  run.pare_hr = evaluate(top_n(score_all(model, corpus, T), 10), truth, ten).at.at(10).hr;
  run.all_hr = evaluate(cutoff_toppop(corpus, T, std::nullopt, 10), truth, ten).at.at(10).hr;
  run.recent_hr = evaluate(cutoff_toppop(corpus, T, Window{3}, 10), truth, ten).at.at(10).hr;
  run.test_users = truth.size();
  return run;
}

Verdict learnability(std::optional<Learned>& out) {
  Verdict v;
  const auto synth = generate_synthetic(learnability_spec());
  auto built = build_corpus(synth.interactions, synth.catalog);
  const auto shape = ModelShape::of(built);
  auto* learned = &out.emplace(Learned{std::move(built), PareModel(shape, learnability_config(HeadSet{})), {}, 0.0});
  const auto start = Clock::now();
  const auto run = run_learnability(learned->corpus, learned->model, learned->result);
  learned->train_seconds = seconds_since(start);

  const bool fast = learned->train_seconds <= 300.0;
  v.pass = run.a() && run.b() && run.c() && fast;
  v.summary = "synthetic learnability: " + std::to_string(learned->result.history.size() - 1) +
              " epochs in " + fmt("%.1f s", learned->train_seconds) + " (<= 300 s)";
  v.details.push_back(std::string(run.a() ? "ok  " : "BAD ") + "(a) valid loss " + fmt("%.4f", run.best) +
                      " vs epoch-0 " + fmt("%.4f", run.epoch0) + " (ratio " + fmt("%.3f", run.best / run.epoch0) +
                      ", need <= 0.5)");
  v.details.push_back(std::string(run.b() ? "ok  " : "BAD ") + "(b) HR@10 PARE " + fmt("%.4f", run.pare_hr) +
                      " > TopPop-ALL " + fmt("%.4f", run.all_hr));
  v.details.push_back(std::string(run.c() ? "ok  " : "BAD ") + "(c) HR@10 PARE " + fmt("%.4f", run.pare_hr) +
                      " >= TopPop-3 " + fmt("%.4f", run.recent_hr));
  v.details.push_back("test users " + std::to_string(run.test_users) + ", items " +
                      std::to_string(learned->corpus.catalog.size()) + ", bins " +
                      std::to_string(learned->corpus.binning.num_bins()));

  // Other generator seeds, reported but not gating. Draws that put several
  // large releases in the validation bin leave cold items the model never saw.
  for (std::uint64_t seed = 1; seed <= 6; ++seed) {
    if (seed == learnability_spec().seed) continue;
    const auto other = generate_synthetic(learnability_spec(seed));
    const auto corpus = build_corpus(other.interactions, other.catalog);
    PareModel model(ModelShape::of(corpus), learnability_config(HeadSet{}));
    TrainResult result;
    const auto r = run_learnability(corpus, model, result);
    v.details.push_back("seed " + std::to_string(seed) + " (info): ratio " + fmt("%.3f", r.best / r.epoch0) +
                        ", HR@10 PARE " + fmt("%.4f", r.pare_hr) + " / ALL " + fmt("%.4f", r.all_hr) +
                        " / 3 " + fmt("%.4f", r.recent_hr) + "  [" + (r.a() ? "a" : "-") + (r.b() ? "b" : "-") +
                        (r.c() ? "c" : "-") + "]");
  }
  return v;
}

// ---------------------------------------------------------------------------
// 7. Blend endpoints and an interior sweep optimum.

Verdict blend_check(const Learned& learned) {
  Verdict v;
  const auto& corpus = learned.corpus;
  const int T = corpus.binning.num_bins();
  const auto pare = score_all(learned.model, corpus, T);
  std::vector<std::string> released;
  for (const auto& [id, _] : pare) released.push_back(id);

  // Endpoints: random positive external scores over released items.
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> unit(0.01, 1.0);
  std::ostringstream text;
  for (std::size_t u = 0; u < 100; ++u) {
    auto pool = released;
    std::shuffle(pool.begin(), pool.end(), rng);
    for (std::size_t k = 0; k < 15 && k < pool.size(); ++k) {
      text << "u" << u << "," << pool[k] << "," << unit(rng) << "\n";
    }
  }
  std::istringstream in(text.str());
  const auto external = parse_scores(in);
  const std::size_t n = 10;
  std::size_t users = 0, mismatches = 0;
  const auto ext_only = blend_rankings(external, pare, 1.0, n);
  const auto pare_only = blend_rankings(external, pare, 0.0, n);
  const auto pare_list = top_n(pare, n).items();
  for (const auto& [user, scores] : external.by_user) {
    ++users;
    if (ext_only.at(user).items() != top_n(scores, n).items()) ++mismatches;
    if (pare_only.at(user).items() != pare_list) ++mismatches;
  }
  if (mismatches > 0) v.pass = false;

  // Constructed mixture: 5 popular items that PARE ranks first, 60 niche
  // items it ranks last. Personal users hold a niche item that only the
  // external recommender finds; popular users hold a popular item that the
  // external recommender misses in favour of ten decoys.
  ScoreMap mix_pare;
  for (int k = 0; k < 5; ++k) mix_pare["pop" + std::to_string(k)] = 1.0 - 0.02 * k;
  for (int k = 0; k < 60; ++k) mix_pare["niche" + std::to_string(k)] = 0.1 * k / 60.0;
  GroundTruth truth;
  std::ostringstream mix_text;
  for (int u = 0; u < 40; ++u) {
    const auto user = "m" + std::to_string(u);
    if (u % 2 == 0) {
      const int mine = u;
      truth[user] = {"niche" + std::to_string(mine)};
      mix_text << user << ",niche" << mine << ",1\n";
      for (int j = 1; j <= 9; ++j) mix_text << user << ",niche" << (mine + j) % 60 << ",0.5\n";
    } else {
      truth[user] = {"pop" + std::to_string(u % 5)};
      for (int j = 0; j < 10; ++j) {
        mix_text << user << ",niche" << (u + 7 * j) % 60 << "," << 0.7 + 0.01 * j << "\n";
      }
    }
  }
  std::istringstream mix_in(mix_text.str());
  const auto mix_external = parse_scores(mix_in);
  const auto grid = default_beta_grid();
  const std::vector<int> cutoffs = {10};
  const auto rows = beta_sweep(mix_external, mix_pare, truth, grid, cutoffs);
  double best_interior = 0.0, best_beta = 0.0;
  std::string curve;
  for (const auto& row : rows) {
    const double hr = row.report.at.at(10).hr;
    curve += fmt(" %.1f:", row.beta) + fmt("%.3f", hr);
    if (row.beta > 0.0 && row.beta < 1.0 && hr > best_interior) {
      best_interior = hr;
      best_beta = row.beta;
    }
  }
  const double endpoint = std::max(rows.front().report.at.at(10).hr, rows.back().report.at.at(10).hr);
  const bool interior = best_interior > endpoint;
  if (!interior) v.pass = false;
  v.summary = "blend endpoints reproduce each source for " + std::to_string(users) + " users (" +
              std::to_string(mismatches) + " mismatches); mixture sweep peaks at interior beta " +
              fmt("%.1f", best_beta) + " (HR@10 " + fmt("%.3f", best_interior) + " > endpoints " +
              fmt("%.3f", endpoint) + ")";
  v.details.push_back("beta:HR@10" + curve);
  return v;
}

// ---------------------------------------------------------------------------
// 8. Determinism of train + predict through the CLI.

Verdict determinism() {
  Verdict v;
  testing::TempDir dir;
  SyntheticSpec spec;
  spec.users = 150;
  spec.items = 30;
  spec.bins = 16;
  spec.seed = 4;
  const auto data = generate_synthetic(spec);
  write_interactions(data.interactions, dir / "interactions.csv");
  write_items(data.catalog, dir / "items.jsonl");
  auto run = [&](const std::string& out) {
    for (const char* cmd : {"train", "predict"}) {
      std::ostringstream o, e;
      const int code = cli::run({cmd, "--interactions", (dir / "interactions.csv").string(), "--items",
                                 (dir / "items.jsonl").string(), "--set", "side_fields=directors,actors",
                                 "--set", "d=8", "--set", "lstm_hidden=8", "--set", "max_epochs=5",
                                 "--seed", "13", "--out", out},
                                o, e);
      if (code != 0) {
        v.pass = false;
        v.details.push_back(std::string(cmd) + " exited " + std::to_string(code) + ": " + e.str());
      }
    }
  };
  run((dir / "a").string());
  run((dir / "b").string());
  std::size_t bytes = 0;
  for (const char* file : {"model.ckpt", "ranked_pare.csv", "predictions.csv"}) {
    const auto a = testing::read_text(dir / "a" / file);
    const auto b = testing::read_text(dir / "b" / file);
    bytes += a.size();
    if (a.empty() || a != b) {
      v.pass = false;
      v.details.push_back(std::string(file) + " differs between runs");
    }
  }
  v.summary = "two seeded train+predict runs give byte-identical checkpoint and ranked lists (" +
              std::to_string(bytes) + " bytes compared)";
  return v;
}

// ---------------------------------------------------------------------------
// 9. Best-effort dataset check, report only.

Verdict dataset_check() {
  Verdict v;
  const char* root = std::getenv("PARE_VIDEO_GAMES_DIR");
  const double reference = 0.0643;
  if (root == nullptr || !std::filesystem::exists(std::filesystem::path(root) / "interactions.csv")) {
    v.summary = "dataset check (non-gating): PARE_VIDEO_GAMES_DIR not set or lacks interactions.csv; "
                "no deviation measured";
    return v;
  }
  try {
    const std::filesystem::path dir(root);
    const auto records = load_interactions(dir / "interactions.csv", ParseMode::kLenient).records;
    Catalog catalog(std::vector<std::string>{});
    if (std::filesystem::exists(dir / "items.jsonl")) catalog = load_items(dir / "items.jsonl", {});
    if (catalog.size() == 0) {
      std::set<std::string> ids;
      for (const auto& r : records) ids.insert(r.item_id);
      for (const auto& id : ids) catalog.add(id, std::nullopt, {{}});
    }
    const auto corpus = build_corpus(records, catalog);
    const int T = corpus.binning.num_bins();
    const std::vector<int> ten = {10};
    const double hr =
        evaluate(cutoff_toppop(corpus, T, std::nullopt, 10), ground_truth(corpus, T), ten).at.at(10).hr;
    v.summary = "dataset check (non-gating): TopPop-ALL HR@10 " + fmt("%.4f", hr) + " vs reference " +
                fmt("%.4f", reference) + " (deviation " + fmt("%+.4f", hr - reference) + ")";
  } catch (const std::exception& e) {
    v.summary = std::string("dataset check (non-gating): could not evaluate: ") + e.what();
  }
  return v;
}

}  // namespace
}  // namespace pare

int main() {
  using namespace pare;
  bool all = true;
  auto emit = [&](int id, const std::string& name, const Verdict& v) {
    std::printf("%s [%d] %s: %s\n", v.pass ? "PASS" : "FAIL", id, name.c_str(), v.summary.c_str());
    for (const auto& d : v.details) std::printf("  %s\n", d.c_str());
    std::fflush(stdout);
    all = all && v.pass;
  };
  auto guarded = [&](int id, const std::string& name, const std::function<Verdict()>& body) {
    try {
      emit(id, name, body());
    } catch (const std::exception& e) {
      emit(id, name, Verdict{false, std::string("threw: ") + e.what(), {}});
    }
  };
  guarded(1, "gradients", gradient_exactness);
  guarded(2, "metrics-oracle", metrics_oracle);
  guarded(3, "toppop-oracle", toppop_oracle_check);
  guarded(4, "ema", ema_check);
  guarded(5, "fusion", fusion_check);
  std::optional<Learned> learned;
  guarded(6, "learnability", [&] { return learnability(learned); });
  if (learned) {
    guarded(7, "blend", [&] { return blend_check(*learned); });
  } else {
    emit(7, "blend", Verdict{false, "skipped: no trained model from criterion 6", {}});
  }
  guarded(8, "determinism", determinism);
  guarded(9, "dataset", dataset_check);
  std::printf("%s\n", all ? "ALL GATING CRITERIA PASS" : "SOME CRITERIA FAIL");
  return all ? 0 : 1;
}
