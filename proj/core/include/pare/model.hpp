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

#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "pare/corpus.hpp"
#include "pare/numerics.hpp"
#include "pare/tensor.hpp"

namespace pare {

// Head order used everywhere: history, temporal, periodic, side information.
enum class Head : std::size_t { kHistory = 0, kTemporal = 1, kPeriodic = 2, kSide = 3 };
inline constexpr std::size_t kNumHeads = 4;

class HeadSet {
 public:
  HeadSet() : on_{true, true, true, true} {}
  // Letters H, T, P, S separated by commas or '+', e.g. "H,T,P,S" or "H+T".
  static HeadSet parse(std::string_view text);

  bool has(Head h) const { return on_[static_cast<std::size_t>(h)]; }
  bool has(std::size_t k) const { return on_[k]; }
  void set(Head h, bool value) { on_[static_cast<std::size_t>(h)] = value; }
  std::string to_string() const;  // "H+T+P+S" style
  bool operator==(const HeadSet&) const = default;

 private:
  std::array<bool, kNumHeads> on_;
};

enum class PeriodMode { kBinIndex, kCalendarMonth };

// How the temporal head reads time rows for bins after the training region.
// kIndex uses each bin's own row, which training never updates for the
// validation and test bins. kCarry reuses the last training bin's row.
enum class TimeMode { kIndex, kCarry };

struct PareConfig {
  std::size_t d = 64;
  double alpha = 0.5;
  int omega = 12;
  std::size_t lstm_hidden = 64;
  HeadSet heads;
  PeriodMode period_mode = PeriodMode::kBinIndex;
  TimeMode time_mode = TimeMode::kIndex;

  void validate() const;  // throws UsageError
};

// Vocabulary sizes the parameter tables are built for.
struct ModelShape {
  int num_bins = 0;
  std::size_t num_items = 0;
  std::vector<std::size_t> field_sizes;  // q_j; field 0 holds the C categories
  std::vector<std::string> field_names;

  static ModelShape of(const Corpus& corpus);
  std::size_t num_categories() const { return field_sizes.front(); }
};

// EMA_{end} of a history starting at the release bin; 0 for an empty history.
double ema_status(std::span<const double> history, double alpha);

struct HistoryHead {
  double status = 0.0;
  double trend = 0.0;
  double value = 0.0;  // status + trend
};

struct Fusion {
  std::array<double, kNumHeads> weights{};
  double value = 0.0;
};

// Softmax over the logits of enabled heads; disabled heads get weight 0.
Fusion fuse(const std::array<double, kNumHeads>& heads, std::span<const double> logits,
            const HeadSet& enabled);

struct PredictionBreakdown {
  std::string item_id;
  int bin = 0;
  double y_history = 0.0;
  double y_temporal = 0.0;
  double y_periodic = 0.0;
  double y_side = 0.0;
  double y_fused = 0.0;
  double status = 0.0;
  double trend = 0.0;
  std::array<double, kNumHeads> weights{};
};

// Everything one prediction at bin T needs from the corpus.
struct ItemContext {
  std::size_t item = 0;
  int bin = 0;
  int release_bin = 1;
  std::vector<double> history;  // counts for [release_bin, bin - 1]
  const std::vector<std::vector<std::size_t>>* side_info = nullptr;
  int period_index = 0;
};

class PareModel {
 public:
  PareModel(ModelShape shape, PareConfig config);

  // Default initialization: Glorot-uniform weights, zero biases, embeddings
  // in +-0.01, LSTM forget bias 1.
  void initialize(std::uint64_t seed);
  // Every value, biases included, gets a random sign and a magnitude uniform
  // in [scale / 5, scale]; LSTM gate weights are shrunk further. Used by
  // gradient checks, where near-zero factors would push some gradient
  // coordinates below finite-difference resolution.
  void randomize(std::uint64_t seed, double scale);
  void zero_parameters();

  const PareConfig& config() const { return config_; }
  const ModelShape& shape() const { return shape_; }
  ParamStore& params() { return params_; }
  const ParamStore& params() const { return params_; }

  int period_index(int bin, const TimeBinning& binning) const;
  // Throws DataError if the item is unknown or not yet released at `bin`.
  ItemContext context(const Corpus& corpus, std::size_t item, int bin) const;

  HistoryHead head_history(std::span<const double> history) const;
  double head_temporal(std::size_t item, int bin, int release_bin) const;
  double head_periodic(std::span<const std::size_t> categories, int period_index) const;
  double head_side(const std::vector<std::vector<std::size_t>>& side_info) const;

  PredictionBreakdown predict(const ItemContext& ctx) const;
  PredictionBreakdown predict(const Corpus& corpus, std::size_t item, int bin) const;

  // Sum over enabled heads and the fused output of (target - y)^2.
  double loss(const ItemContext& ctx, double target) const;
  // Same loss; adds scale * dloss/dtheta into the gradient accumulators.
  double accumulate_gradient(const ItemContext& ctx, double target, double scale);

  std::map<std::string, std::string> metadata() const;
  // Rebuilds config from checkpoint metadata (shape comes from the corpus).
  static PareConfig config_from_metadata(const std::map<std::string, std::string>& meta);

 private:
  struct Trace;
  PredictionBreakdown forward(const ItemContext& ctx, Trace* trace) const;
  void backward(const ItemContext& ctx, const Trace& trace, const std::array<double, kNumHeads>& dy,
                double scale);
  LstmWeights lstm_weights() const;
  std::size_t time_row(int bin) const;

  ModelShape shape_;
  PareConfig config_;
  ParamStore params_;
};

}  // namespace pare
