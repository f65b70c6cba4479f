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

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "pare/corpus.hpp"
#include "pare/model.hpp"

namespace pare {

struct TrainExample {
  std::size_t item = 0;
  int bin = 0;
  double target = 0.0;

  bool operator==(const TrainExample&) const = default;
};

struct ExampleSet {
  std::vector<TrainExample> train;  // (item, t) for release_bin <= t <= train_end_bin
  std::vector<TrainExample> valid;  // t = valid_bin
};

// Ordered by item index, then bin. Zero-count bins are included.
ExampleSet build_examples(const Corpus& corpus, const SplitSpec& split);

struct TrainConfig {
  double lr = 0.01;
  std::size_t batch_size = 64;
  int max_epochs = 60;
  int patience = 8;
  std::uint64_t seed = 42;
  double weight_decay = 1e-4;
  double max_seconds = 0.0;  // wall-clock cap, 0 = none

  void validate() const;
};

struct EpochLog {
  int epoch = 0;  // 0 is the untrained model
  double train_loss = 0.0;
  double valid_loss = 0.0;
  double lr = 0.0;
  double seconds = 0.0;
};

struct TrainResult {
  std::vector<EpochLog> history;
  int best_epoch = 0;
  double best_valid_loss = 0.0;
};

// Mean five-term loss over the examples.
double mean_loss(const PareModel& model, const Corpus& corpus, std::span<const TrainExample> examples);

// Minibatch Adam on the mean five-term loss. Keeps the parameters of the best
// validation epoch. `on_epoch` sees each log row as it is produced.
TrainResult train(PareModel& model, const Corpus& corpus, const ExampleSet& examples,
                  const TrainConfig& config,
                  const std::function<void(const EpochLog&)>& on_epoch = {});

// Checks the analytic gradient of the mean five-term loss over `batch`
// against central differences.
GradCheckReport check_batch_gradient(PareModel& model, const Corpus& corpus,
                                     std::span<const TrainExample> batch, double h = 1e-5,
                                     double tol = 1e-4, std::size_t max_coords = 0,
                                     std::uint64_t seed = 0);

void write_train_log(std::span<const EpochLog> history, std::ostream& out);

void save_model(const PareModel& model, const std::filesystem::path& path);
// Rebuilds a model for `corpus` from a checkpoint; shape mismatches throw.
PareModel load_model(const Corpus& corpus, const std::filesystem::path& path);

}  // namespace pare
