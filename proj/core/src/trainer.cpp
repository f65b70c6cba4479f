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
#include "pare/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <ostream>
#include <random>

#include "pare/errors.hpp"

namespace pare {

ExampleSet build_examples(const Corpus& corpus, const SplitSpec& split) {
  ExampleSet set;
  for (std::size_t i = 0; i < corpus.series.size(); ++i) {
    const auto& s = corpus.series[i];
    for (int t = std::max(s.release_bin, 1); t <= split.train_end_bin; ++t) {
      set.train.push_back({i, t, static_cast<double>(s.at(t))});
    }
    if (s.release_bin <= split.valid_bin) {
      set.valid.push_back({i, split.valid_bin, static_cast<double>(s.at(split.valid_bin))});
    }
  }
  if (set.train.empty()) throw DataError("training region holds no (item, bin) examples");
  return set;
}

void TrainConfig::validate() const {
  if (!(lr > 0.0) || !std::isfinite(lr)) throw UsageError("learning rate must be positive");
  if (batch_size < 1) throw UsageError("batch_size must be >= 1");
  if (max_epochs < 0) throw UsageError("max_epochs must be >= 0");
  if (patience < 1) throw UsageError("patience must be >= 1");
  if (weight_decay < 0.0) throw UsageError("weight_decay must be >= 0");
}

double mean_loss(const PareModel& model, const Corpus& corpus, std::span<const TrainExample> examples) {
  if (examples.empty()) return 0.0;
  double total = 0.0;
  for (const auto& ex : examples) total += model.loss(model.context(corpus, ex.item, ex.bin), ex.target);
  return total / static_cast<double>(examples.size());
}

namespace {

using Snapshot = std::vector<Tensor>;

Snapshot snapshot(const ParamStore& store) {
  Snapshot out;
  for (const auto& [_, p] : store) out.push_back(p.value);
  return out;
}

void restore(ParamStore& store, const Snapshot& snap) {
  std::size_t k = 0;
  for (auto& [_, p] : store) p.value = snap[k++];
}

double mean_context_loss(const PareModel& model, const std::vector<ItemContext>& ctx,
                         std::span<const TrainExample> examples) {
  if (examples.empty()) return 0.0;
  double total = 0.0;
  for (std::size_t k = 0; k < examples.size(); ++k) total += model.loss(ctx[k], examples[k].target);
  return total / static_cast<double>(examples.size());
}

}  // namespace

TrainResult train(PareModel& model, const Corpus& corpus, const ExampleSet& examples,
                  const TrainConfig& config, const std::function<void(const EpochLog&)>& on_epoch) {
  config.validate();
  if (examples.train.empty()) throw DataError("no training examples");
  using Clock = std::chrono::steady_clock;
  const auto started = Clock::now();

  std::vector<ItemContext> train_ctx, valid_ctx;
  train_ctx.reserve(examples.train.size());
  for (const auto& ex : examples.train) train_ctx.push_back(model.context(corpus, ex.item, ex.bin));
  for (const auto& ex : examples.valid) valid_ctx.push_back(model.context(corpus, ex.item, ex.bin));
  const bool has_valid = !examples.valid.empty();

  AdamState adam;
  adam.lr = config.lr;
  adam.weight_decay = config.weight_decay;
  std::mt19937_64 rng(config.seed);
  auto& params = model.params();
  params.zero_grad();

  TrainResult result;
  auto emit = [&](EpochLog row) {
    result.history.push_back(row);
    if (on_epoch) on_epoch(row);
  };

  EpochLog initial;
  initial.train_loss = mean_context_loss(model, train_ctx, examples.train);
  initial.valid_loss = has_valid ? mean_context_loss(model, valid_ctx, examples.valid) : initial.train_loss;
  initial.lr = config.lr;
  emit(initial);

  double best = initial.valid_loss;
  int best_epoch = 0;
  Snapshot best_params = snapshot(params);
  int stale = 0;

  std::vector<std::size_t> order(examples.train.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
    const auto epoch_start = Clock::now();
    std::shuffle(order.begin(), order.end(), rng);
    double epoch_total = 0.0;
    std::size_t batch_index = 0;
    for (std::size_t begin = 0; begin < order.size(); begin += config.batch_size, ++batch_index) {
      const std::size_t end = std::min(order.size(), begin + config.batch_size);
      const double scale = 1.0 / static_cast<double>(end - begin);
      double batch_total = 0.0;
      for (std::size_t k = begin; k < end; ++k) {
        const auto idx = order[k];
        batch_total += model.accumulate_gradient(train_ctx[idx], examples.train[idx].target, scale);
      }
      if (!std::isfinite(batch_total)) {
        throw NumericError("non-finite loss at epoch " + std::to_string(epoch) + ", batch " +
                           std::to_string(batch_index));
      }
      adam_step(params, adam);
      epoch_total += batch_total;
    }

    EpochLog row;
    row.epoch = epoch;
    row.train_loss = epoch_total / static_cast<double>(order.size());
    row.valid_loss = has_valid ? mean_context_loss(model, valid_ctx, examples.valid)
                               : mean_context_loss(model, train_ctx, examples.train);
    row.lr = config.lr;
    row.seconds = std::chrono::duration<double>(Clock::now() - epoch_start).count();
    if (!std::isfinite(row.valid_loss)) {
      throw NumericError("non-finite validation loss at epoch " + std::to_string(epoch));
    }
    emit(row);

    if (row.valid_loss < best) {
      best = row.valid_loss;
      best_epoch = epoch;
      best_params = snapshot(params);
      stale = 0;
    } else if (++stale >= config.patience) {
      break;
    }
    if (config.max_seconds > 0.0 &&
        std::chrono::duration<double>(Clock::now() - started).count() >= config.max_seconds) {
      break;
    }
  }
  restore(params, best_params);
  result.best_epoch = best_epoch;
  result.best_valid_loss = best;
  return result;
}

GradCheckReport check_batch_gradient(PareModel& model, const Corpus& corpus,
                                     std::span<const TrainExample> batch, double h, double tol,
                                     std::size_t max_coords, std::uint64_t seed) {
  if (batch.empty()) throw DataError("gradient check needs at least one example");
  std::vector<ItemContext> ctx;
  for (const auto& ex : batch) ctx.push_back(model.context(corpus, ex.item, ex.bin));
  const double scale = 1.0 / static_cast<double>(batch.size());
  auto& params = model.params();
  params.zero_grad();
  for (std::size_t k = 0; k < batch.size(); ++k) model.accumulate_gradient(ctx[k], batch[k].target, scale);
  auto loss = [&](const ParamStore&) {
    double total = 0.0;
    for (std::size_t k = 0; k < batch.size(); ++k) total += model.loss(ctx[k], batch[k].target);
    return total * scale;
  };
  auto report = gradient_check(loss, params, h, tol, max_coords, seed);
  params.zero_grad();
  return report;
}

void write_train_log(std::span<const EpochLog> history, std::ostream& out) {
  out << "epoch,train_loss,valid_loss,lr,seconds\n";
  char buf[160];
  for (const auto& row : history) {
    std::snprintf(buf, sizeof(buf), "%d,%.10g,%.10g,%g,%.3f\n", row.epoch, row.train_loss,
                  row.valid_loss, row.lr, row.seconds);
    out << buf;
  }
}

void save_model(const PareModel& model, const std::filesystem::path& path) {
  save_checkpoint(model.params(), model.metadata(), path);
}

PareModel load_model(const Corpus& corpus, const std::filesystem::path& path) {
  const auto ckpt = load_checkpoint(path);
  PareModel model(ModelShape::of(corpus), PareModel::config_from_metadata(ckpt.metadata));
  restore_parameters(model.params(), ckpt);
  return model;
}

}  // namespace pare
