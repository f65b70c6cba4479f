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
#include <string>
#include <string_view>
#include <vector>

#include "pare/corpus.hpp"
#include "pare/model.hpp"
#include "pare/trainer.hpp"

namespace pare::cli {

// Everything a command needs. The file form is flat `key = value` lines with
// `#` comments; see to_text() for the full key list.
struct RunConfig {
  std::string interactions;
  std::string items;
  std::vector<std::string> side_fields;
  std::string corpus;  // serialized corpus, used instead of interactions/items
  std::string output_dir = "pare_out";
  std::string checkpoint;  // defaults to <output_dir>/model.ckpt
  std::string scores;      // external recommender scores for blend/sweep
  std::string category;    // profile filter; empty = every category
  std::int64_t bin_seconds = kDefaultBinSeconds;
  bool lenient = false;

  PareConfig model;
  TrainConfig train;

  std::vector<int> cutoffs = {1, 3, 5, 7, 10};
  double beta = 0.5;
  std::vector<double> betas = {0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
  std::string window;  // empty = 3, 6, 12 and ALL
  bool normalize = false;
  bool exclude_seen = false;
  std::size_t gradcheck_examples = 16;
  std::size_t gradcheck_coords = 0;

  std::string checkpoint_path() const;
};

// Sets one key; throws UsageError for unknown keys or unparsable values.
void apply_setting(RunConfig& config, std::string_view key, std::string_view value);
RunConfig parse_config(std::string_view text, RunConfig base = {});
RunConfig load_config(const std::string& path, RunConfig base = {});
std::string to_text(const RunConfig& config);

std::vector<int> parse_int_list(std::string_view text);
std::vector<double> parse_double_list(std::string_view text);

}  // namespace pare::cli
