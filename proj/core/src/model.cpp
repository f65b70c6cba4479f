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
#include "pare/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>

#include "pare/errors.hpp"

namespace pare {
namespace {

constexpr char kHeadLetters[kNumHeads] = {'H', 'T', 'P', 'S'};

const std::string kTime = "time_embedding";
const std::string kItem = "item_embedding";
const std::string kPeriodic = "periodic_embedding";
const std::string kSidePrefix = "side_embedding.";
const std::string kLogits = "fusion.logits";

const std::array<std::string, 4> kGates = {"I", "F", "G", "O"};

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

HeadSet HeadSet::parse(std::string_view text) {
  HeadSet set;
  set.on_.fill(false);
  for (char c : text) {
    if (c == ',' || c == '+' || c == ' ') continue;
    const auto* pos = std::find(std::begin(kHeadLetters), std::end(kHeadLetters), c);
    if (pos == std::end(kHeadLetters)) {
      throw UsageError("unknown head '" + std::string(1, c) + "' (expected H, T, P or S)");
    }
    set.on_[static_cast<std::size_t>(pos - std::begin(kHeadLetters))] = true;
  }
  return set;
}

std::string HeadSet::to_string() const {
  std::string s;
  for (std::size_t k = 0; k < kNumHeads; ++k) {
    if (!on_[k]) continue;
    if (!s.empty()) s += '+';
    s += kHeadLetters[k];
  }
  return s;
}

void PareConfig::validate() const {
  if (d < 1) throw UsageError("embedding size d must be >= 1");
  if (lstm_hidden < 1) throw UsageError("lstm_hidden must be >= 1");
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw UsageError("alpha must lie in [0, 1]");
  if (omega < 1) throw UsageError("omega must be >= 1");
  if (period_mode == PeriodMode::kCalendarMonth && omega != 12) {
    throw UsageError("calendar-month periods require omega = 12");
  }
  if (!heads.has(Head::kHistory) && !heads.has(Head::kTemporal)) {
    throw UsageError("enabled heads must include H or T");
  }
}

ModelShape ModelShape::of(const Corpus& corpus) {
  ModelShape shape;
  shape.num_bins = corpus.binning.num_bins();
  shape.num_items = corpus.catalog.size();
  shape.field_names = corpus.catalog.field_names();
  for (std::size_t f = 0; f < corpus.catalog.num_fields(); ++f) {
    shape.field_sizes.push_back(corpus.catalog.field_size(f));
  }
  return shape;
}

double ema_status(std::span<const double> history, double alpha) {
  if (history.empty()) return 0.0;
  double ema = history.front();
  for (std::size_t t = 1; t < history.size(); ++t) ema = alpha * history[t] + (1.0 - alpha) * ema;
  return ema;
}

Fusion fuse(const std::array<double, kNumHeads>& heads, std::span<const double> logits,
            const HeadSet& enabled) {
  if (logits.size() != kNumHeads) throw DataError("fusion expects 4 logits");
  double max_logit = -INFINITY;
  for (std::size_t k = 0; k < kNumHeads; ++k) {
    if (enabled.has(k)) max_logit = std::max(max_logit, logits[k]);
  }
  if (max_logit == -INFINITY) throw UsageError("fusion with every head disabled");
  Fusion out;
  double total = 0.0;
  for (std::size_t k = 0; k < kNumHeads; ++k) {
    if (!enabled.has(k)) continue;
    out.weights[k] = std::exp(logits[k] - max_logit);
    total += out.weights[k];
  }
  for (std::size_t k = 0; k < kNumHeads; ++k) {
    out.weights[k] /= total;
    if (enabled.has(k)) out.value += out.weights[k] * heads[k];
  }
  return out;
}

struct PareModel::Trace {
  LstmTrace lstm;
  Vec hidden;
  Vec temporal_in;
  std::vector<std::size_t> periodic_rows;
  Vec periodic_in;
  Vec side_in;
  std::array<double, kNumHeads> y{};
  std::array<double, kNumHeads> weights{};
  double fused = 0.0;
};

PareModel::PareModel(ModelShape shape, PareConfig config)
    : shape_(std::move(shape)), config_(config) {
  config_.validate();
  if (shape_.field_sizes.empty()) throw DataError("model needs at least the category field");
  if (shape_.field_names.size() != shape_.field_sizes.size()) {
    shape_.field_names.resize(shape_.field_sizes.size());
    for (std::size_t f = 0; f < shape_.field_names.size(); ++f) {
      if (shape_.field_names[f].empty()) shape_.field_names[f] = "field" + std::to_string(f);
    }
  }
  const std::size_t d = config_.d;
  const std::size_t h = config_.lstm_hidden;
  const std::size_t omega = static_cast<std::size_t>(config_.omega);
  const std::size_t m = shape_.field_sizes.size();

  params_.add(kTime, Tensor({static_cast<std::size_t>(shape_.num_bins) + 1, d}), true);
  params_.add(kItem, Tensor({shape_.num_items, d}), true);
  params_.add(kPeriodic, Tensor({omega * shape_.num_categories(), d}), true);
  for (std::size_t f = 0; f < m; ++f) {
    params_.add(kSidePrefix + shape_.field_names[f], Tensor({shape_.field_sizes[f], d}), true);
  }
  for (const auto& g : kGates) {
    params_.add("lstm.W_" + g, Tensor({1 + h, h}), true);
    params_.add("lstm.b_" + g, Tensor({h}), false);
  }
  params_.add("history_head.w", Tensor({h, 1}), true);
  params_.add("history_head.b", Tensor({1}), false);
  params_.add("temporal_head.w", Tensor({4 * d, 1}), true);
  params_.add("temporal_head.b", Tensor({1}), false);
  params_.add("periodic_head.w", Tensor({d, 1}), true);
  params_.add("periodic_head.b", Tensor({1}), false);
  params_.add("side_head.w", Tensor({m * d, 1}), true);
  params_.add("side_head.b", Tensor({1}), false);
  params_.add(kLogits, Tensor({kNumHeads}), false);
}

void PareModel::initialize(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  for (auto& [name, p] : params_) {
    auto& v = p.value;
    if (name.ends_with("embedding") || name.starts_with(kSidePrefix)) {
      fill_uniform(v, 0.01, rng);
    } else if (v.shape().size() == 2) {
      const double fan = static_cast<double>(v.rows() + v.cols());
      fill_uniform(v, std::sqrt(6.0 / fan), rng);
    } else if (name == "lstm.b_F") {
      v.fill(1.0);
    } else {
      v.fill(0.0);
    }
  }
}

void PareModel::randomize(std::uint64_t seed, double scale) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> magnitude(0.2 * scale, scale);
  for (auto& [name, p] : params_) {
    const bool gate = name.rfind("lstm.W_", 0) == 0;
    const std::size_t input_row = gate ? p.value.cols() : 0;
    auto values = p.value.values();
    for (std::size_t k = 0; k < values.size(); ++k) {
      const bool negative = (rng() & 1u) != 0;
      double x = magnitude(rng);
      // Raw counts feed the gates, so their weights are drawn smaller to keep
      // the sigmoids off their flat tails.
      if (gate) x *= k < input_row ? 0.0625 : 0.25;
      values[k] = negative ? -x : x;
    }
  }
}

void PareModel::zero_parameters() {
  for (auto& [_, p] : params_) p.value.fill(0.0);
}

std::size_t PareModel::time_row(int bin) const {
  const int last_train = shape_.num_bins - 2;
  if (config_.time_mode == TimeMode::kCarry && last_train >= 1 && bin > last_train) {
    return static_cast<std::size_t>(last_train);
  }
  return static_cast<std::size_t>(bin);
}

int PareModel::period_index(int bin, const TimeBinning& binning) const {
  if (config_.period_mode == PeriodMode::kCalendarMonth) {
    return calendar_month(binning.bin_start(bin)) - 1;
  }
  const int omega = config_.omega;
  return ((bin - 1) % omega + omega) % omega;
}

ItemContext PareModel::context(const Corpus& corpus, std::size_t item, int bin) const {
  if (item >= corpus.catalog.size() || item >= shape_.num_items) {
    throw DataError("item index " + std::to_string(item) + " outside the item table");
  }
  const auto& s = corpus.series[item];
  if (bin < s.release_bin) {
    throw DataError("item '" + s.item_id + "' is not released at bin " + std::to_string(bin));
  }
  if (bin < 1 || bin > shape_.num_bins) {
    throw DataError("bin " + std::to_string(bin) + " outside the time table");
  }
  ItemContext ctx;
  ctx.item = item;
  ctx.bin = bin;
  ctx.release_bin = s.release_bin;
  ctx.history = s.history(bin - 1);
  ctx.side_info = &corpus.catalog.item(item).side_info;
  ctx.period_index = period_index(bin, corpus.binning);
  return ctx;
}

LstmWeights PareModel::lstm_weights() const {
  LstmWeights w;
  w.W_I = &params_.get("lstm.W_I").value;
  w.W_F = &params_.get("lstm.W_F").value;
  w.W_G = &params_.get("lstm.W_G").value;
  w.W_O = &params_.get("lstm.W_O").value;
  w.b_I = &params_.get("lstm.b_I").value;
  w.b_F = &params_.get("lstm.b_F").value;
  w.b_G = &params_.get("lstm.b_G").value;
  w.b_O = &params_.get("lstm.b_O").value;
  return w;
}

HistoryHead PareModel::head_history(std::span<const double> history) const {
  HistoryHead out;
  out.status = ema_status(history, config_.alpha);
  const auto hidden = lstm_sequence(history, lstm_weights());
  out.trend = affine(hidden, params_.get("history_head.w").value,
                     params_.get("history_head.b").value, Activation::kNone)[0];
  out.value = out.status + out.trend;
  return out;
}

double PareModel::head_temporal(std::size_t item, int bin, int release_bin) const {
  const auto& time = params_.get(kTime).value;
  const auto& items = params_.get(kItem).value;
  if (item >= items.rows()) throw DataError("item " + std::to_string(item) + " out of vocabulary");
  if (bin < 0 || release_bin < 0 || static_cast<std::size_t>(bin) >= time.rows() ||
      static_cast<std::size_t>(release_bin) >= time.rows()) {
    throw DataError("bin outside the time embedding table");
  }
  const std::size_t d = config_.d;
  const auto e_now = time.row(time_row(bin));
  const auto e_rel = time.row(time_row(release_bin));
  const auto e_item = items.row(item);
  Vec x(4 * d);
  for (std::size_t k = 0; k < d; ++k) {
    x[k] = e_now[k];
    x[d + k] = e_rel[k];
    x[2 * d + k] = e_now[k] - e_rel[k];
    x[3 * d + k] = e_item[k];
  }
  return affine(x, params_.get("temporal_head.w").value, params_.get("temporal_head.b").value,
                Activation::kRelu)[0];
}

double PareModel::head_periodic(std::span<const std::size_t> categories, int period) const {
  const std::size_t c = shape_.num_categories();
  if (c == 0) throw DataError("periodic head needs at least one category");
  const auto omega = static_cast<std::size_t>(config_.omega);
  std::vector<std::size_t> rows;
  for (auto cat : categories) {
    if (cat >= c) throw DataError("category id " + std::to_string(cat) + " out of range");
    rows.push_back(cat * omega + static_cast<std::size_t>(period));
  }
  const auto e_p = embed(rows, params_.get(kPeriodic).value);
  return affine(e_p, params_.get("periodic_head.w").value, params_.get("periodic_head.b").value,
                Activation::kRelu)[0];
}

double PareModel::head_side(const std::vector<std::vector<std::size_t>>& side_info) const {
  const std::size_t m = shape_.field_sizes.size();
  if (side_info.size() != m) {
    throw DataError("side information has " + std::to_string(side_info.size()) +
                    " fields, model expects " + std::to_string(m));
  }
  const std::size_t d = config_.d;
  Vec x(m * d, 0.0);
  for (std::size_t f = 0; f < m; ++f) {
    const auto e = embed(side_info[f], params_.get(kSidePrefix + shape_.field_names[f]).value);
    std::copy(e.begin(), e.end(), x.begin() + static_cast<std::ptrdiff_t>(f * d));
  }
  return affine(x, params_.get("side_head.w").value, params_.get("side_head.b").value,
                Activation::kRelu)[0];
}

PredictionBreakdown PareModel::forward(const ItemContext& ctx, Trace* trace) const {
  Trace local;
  Trace& tr = trace ? *trace : local;
  const std::size_t d = config_.d;
  const auto& heads = config_.heads;
  PredictionBreakdown out;
  out.bin = ctx.bin;

  if (heads.has(Head::kHistory)) {
    out.status = ema_status(ctx.history, config_.alpha);
    tr.hidden = lstm_sequence(ctx.history, lstm_weights(), trace ? &tr.lstm : nullptr);
    out.trend = affine(tr.hidden, params_.get("history_head.w").value,
                       params_.get("history_head.b").value, Activation::kNone)[0];
    out.y_history = out.status + out.trend;
  }
  if (heads.has(Head::kTemporal)) {
    const auto& time = params_.get(kTime).value;
    const auto& items = params_.get(kItem).value;
    if (ctx.item >= items.rows()) throw DataError("item out of vocabulary");
    const auto e_now = time.row(time_row(ctx.bin));
    const auto e_rel = time.row(time_row(ctx.release_bin));
    const auto e_item = items.row(ctx.item);
    tr.temporal_in.resize(4 * d);
    for (std::size_t k = 0; k < d; ++k) {
      tr.temporal_in[k] = e_now[k];
      tr.temporal_in[d + k] = e_rel[k];
      tr.temporal_in[2 * d + k] = e_now[k] - e_rel[k];
      tr.temporal_in[3 * d + k] = e_item[k];
    }
    out.y_temporal = affine(tr.temporal_in, params_.get("temporal_head.w").value,
                            params_.get("temporal_head.b").value, Activation::kRelu)[0];
  }
  if (heads.has(Head::kPeriodic)) {
    const std::size_t c = shape_.num_categories();
    if (c == 0) throw DataError("periodic head needs at least one category");
    const auto omega = static_cast<std::size_t>(config_.omega);
    tr.periodic_rows.clear();
    for (auto cat : ctx.side_info->front()) {
      tr.periodic_rows.push_back(cat * omega + static_cast<std::size_t>(ctx.period_index));
    }
    tr.periodic_in = embed(tr.periodic_rows, params_.get(kPeriodic).value);
    out.y_periodic = affine(tr.periodic_in, params_.get("periodic_head.w").value,
                            params_.get("periodic_head.b").value, Activation::kRelu)[0];
  }
  if (heads.has(Head::kSide)) {
    const std::size_t m = shape_.field_sizes.size();
    if (ctx.side_info->size() != m) throw DataError("side information field count mismatch");
    tr.side_in.assign(m * d, 0.0);
    for (std::size_t f = 0; f < m; ++f) {
      const auto e = embed((*ctx.side_info)[f], params_.get(kSidePrefix + shape_.field_names[f]).value);
      std::copy(e.begin(), e.end(), tr.side_in.begin() + static_cast<std::ptrdiff_t>(f * d));
    }
    out.y_side = affine(tr.side_in, params_.get("side_head.w").value,
                        params_.get("side_head.b").value, Activation::kRelu)[0];
  }

  tr.y = {out.y_history, out.y_temporal, out.y_periodic, out.y_side};
  const auto fusion = fuse(tr.y, params_.get(kLogits).value.values(), heads);
  out.weights = fusion.weights;
  out.y_fused = fusion.value;
  tr.weights = fusion.weights;
  tr.fused = fusion.value;
  return out;
}

PredictionBreakdown PareModel::predict(const ItemContext& ctx) const {
  return forward(ctx, nullptr);
}

PredictionBreakdown PareModel::predict(const Corpus& corpus, std::size_t item, int bin) const {
  auto out = predict(context(corpus, item, bin));
  out.item_id = corpus.catalog.item(item).item_id;
  return out;
}

double PareModel::loss(const ItemContext& ctx, double target) const {
  const auto p = forward(ctx, nullptr);
  const std::array<double, kNumHeads> y = {p.y_history, p.y_temporal, p.y_periodic, p.y_side};
  double total = mse(p.y_fused, target);
  for (std::size_t k = 0; k < kNumHeads; ++k) {
    if (config_.heads.has(k)) total += mse(y[k], target);
  }
  return total;
}

double PareModel::accumulate_gradient(const ItemContext& ctx, double target, double scale) {
  Trace tr;
  forward(ctx, &tr);
  const auto& heads = config_.heads;
  double total = mse(tr.fused, target);
  const double d_fused = mse_grad(tr.fused, target);
  std::array<double, kNumHeads> dy{};
  auto& dlogits = params_.get(kLogits).grad;
  for (std::size_t k = 0; k < kNumHeads; ++k) {
    if (!heads.has(k)) continue;
    total += mse(tr.y[k], target);
    dy[k] = mse_grad(tr.y[k], target) + d_fused * tr.weights[k];
    dlogits[k] += scale * d_fused * tr.weights[k] * (tr.y[k] - tr.fused);
  }
  backward(ctx, tr, dy, scale);
  return total;
}

void PareModel::backward(const ItemContext& ctx, const Trace& tr,
                         const std::array<double, kNumHeads>& dy, double scale) {
  const std::size_t d = config_.d;
  const auto& heads = config_.heads;

  if (heads.has(Head::kHistory)) {
    auto& w = params_.get("history_head.w");
    auto& b = params_.get("history_head.b");
    const Vec g = {scale * dy[0]};
    const Vec y = {tr.y[0]};
    const auto dh = affine_backward(tr.hidden, w.value, y, Activation::kNone, g, &w.grad, &b.grad);
    if (!tr.lstm.inputs.empty()) {
      LstmGrads grads{&params_.get("lstm.W_I").grad, &params_.get("lstm.W_F").grad,
                      &params_.get("lstm.W_G").grad, &params_.get("lstm.W_O").grad,
                      &params_.get("lstm.b_I").grad, &params_.get("lstm.b_F").grad,
                      &params_.get("lstm.b_G").grad, &params_.get("lstm.b_O").grad};
      lstm_backward(tr.lstm, lstm_weights(), dh, grads);
    }
  }
  if (heads.has(Head::kTemporal)) {
    auto& w = params_.get("temporal_head.w");
    auto& b = params_.get("temporal_head.b");
    const Vec g = {scale * dy[1]};
    const Vec y = {tr.y[1]};
    const auto dx = affine_backward(tr.temporal_in, w.value, y, Activation::kRelu, g, &w.grad, &b.grad);
    auto& time = params_.get(kTime).grad;
    auto now = time.row(time_row(ctx.bin));
    for (std::size_t k = 0; k < d; ++k) now[k] += dx[k] + dx[2 * d + k];
    auto rel = time.row(time_row(ctx.release_bin));
    for (std::size_t k = 0; k < d; ++k) rel[k] += dx[d + k] - dx[2 * d + k];
    auto item = params_.get(kItem).grad.row(ctx.item);
    for (std::size_t k = 0; k < d; ++k) item[k] += dx[3 * d + k];
  }
  if (heads.has(Head::kPeriodic)) {
    auto& w = params_.get("periodic_head.w");
    auto& b = params_.get("periodic_head.b");
    const Vec g = {scale * dy[2]};
    const Vec y = {tr.y[2]};
    const auto dx = affine_backward(tr.periodic_in, w.value, y, Activation::kRelu, g, &w.grad, &b.grad);
    embed_backward(tr.periodic_rows, dx, params_.get(kPeriodic).grad);
  }
  if (heads.has(Head::kSide)) {
    auto& w = params_.get("side_head.w");
    auto& b = params_.get("side_head.b");
    const Vec g = {scale * dy[3]};
    const Vec y = {tr.y[3]};
    const auto dx = affine_backward(tr.side_in, w.value, y, Activation::kRelu, g, &w.grad, &b.grad);
    for (std::size_t f = 0; f < shape_.field_sizes.size(); ++f) {
      std::span<const double> slice(dx.data() + f * d, d);
      embed_backward((*ctx.side_info)[f], slice,
                     params_.get(kSidePrefix + shape_.field_names[f]).grad);
    }
  }
}

std::map<std::string, std::string> PareModel::metadata() const {
  std::map<std::string, std::string> meta;
  meta["d"] = std::to_string(config_.d);
  meta["alpha"] = format_double(config_.alpha);
  meta["omega"] = std::to_string(config_.omega);
  meta["lstm_hidden"] = std::to_string(config_.lstm_hidden);
  meta["heads"] = config_.heads.to_string();
  meta["period_mode"] = config_.period_mode == PeriodMode::kCalendarMonth ? "calendar" : "bin";
  meta["time_mode"] = config_.time_mode == TimeMode::kCarry ? "carry" : "index";
  meta["num_bins"] = std::to_string(shape_.num_bins);
  meta["num_items"] = std::to_string(shape_.num_items);
  return meta;
}

PareConfig PareModel::config_from_metadata(const std::map<std::string, std::string>& meta) {
  auto get = [&](const std::string& key) -> const std::string& {
    auto it = meta.find(key);
    if (it == meta.end()) throw DataError("checkpoint metadata lacks '" + key + "'");
    return it->second;
  };
  PareConfig cfg;
  try {
    cfg.d = std::stoul(get("d"));
    cfg.alpha = std::stod(get("alpha"));
    cfg.omega = std::stoi(get("omega"));
    cfg.lstm_hidden = std::stoul(get("lstm_hidden"));
  } catch (const std::logic_error&) {
    throw DataError("malformed checkpoint metadata");
  }
  cfg.heads = HeadSet::parse(get("heads"));
  cfg.period_mode = get("period_mode") == "calendar" ? PeriodMode::kCalendarMonth : PeriodMode::kBinIndex;
  if (auto it = meta.find("time_mode"); it != meta.end() && it->second == "carry") {
    cfg.time_mode = TimeMode::kCarry;
  }
  return cfg;
}

}  // namespace pare
