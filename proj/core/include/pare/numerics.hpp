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
#include <map>
#include <span>
#include <string>
#include <vector>

#include "pare/tensor.hpp"

namespace pare {

using Vec = std::vector<double>;

enum class Activation { kNone, kSigmoid, kTanh, kRelu };

// Row-vector convention used throughout: y = act(x W + b) with x of length
// `in`, W of shape [in, out] and b of length `out`.
Vec affine(std::span<const double> x, const Tensor& W, const Tensor& b, Activation act);

// Backward pass of affine given its output y. Accumulates into dW and db when
// non-null and returns dL/dx.
Vec affine_backward(std::span<const double> x, const Tensor& W, std::span<const double> y,
                    Activation act, std::span<const double> dy, Tensor* dW, Tensor* db);

// Sum of the selected rows of `table`.
Vec embed(std::span<const std::size_t> rows, const Tensor& table);
// Same for a {0,1} selector of length table.rows().
Vec embed_multi_hot(std::span<const double> selector, const Tensor& table);
void embed_backward(std::span<const std::size_t> rows, std::span<const double> dy,
                    Tensor& dtable);

// Gate weights are [1 + hidden, hidden] acting on [p_t, H_{t-1}].
struct LstmWeights {
  const Tensor* W_I = nullptr;
  const Tensor* W_F = nullptr;
  const Tensor* W_G = nullptr;
  const Tensor* W_O = nullptr;
  const Tensor* b_I = nullptr;
  const Tensor* b_F = nullptr;
  const Tensor* b_G = nullptr;
  const Tensor* b_O = nullptr;

  std::size_t hidden() const { return b_I->size(); }
};

struct LstmGrads {
  Tensor* W_I = nullptr;
  Tensor* W_F = nullptr;
  Tensor* W_G = nullptr;
  Tensor* W_O = nullptr;
  Tensor* b_I = nullptr;
  Tensor* b_F = nullptr;
  Tensor* b_G = nullptr;
  Tensor* b_O = nullptr;
};

struct LstmTrace {
  Vec inputs;
  std::vector<Vec> I, F, G, O, C, H;  // per step, after activation
};

// Runs the cell over the sequence from H_0 = C_0 = 0 and returns the last
// hidden state (zeros for an empty sequence).
Vec lstm_sequence(std::span<const double> inputs, const LstmWeights& w,
                  LstmTrace* trace = nullptr);
void lstm_backward(const LstmTrace& trace, const LstmWeights& w, std::span<const double> dh_last,
                   const LstmGrads& grads);

inline double mse(double pred, double target) { return (target - pred) * (target - pred); }
inline double mse_grad(double pred, double target) { return -2.0 * (target - pred); }

struct AdamState {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 1e-4;
  std::int64_t step = 0;
  std::map<std::string, std::pair<Tensor, Tensor>> moments;
};

// One bias-corrected Adam update. weight_decay * value is added to the
// gradient of every parameter flagged for decay. Gradients are zeroed after.
void adam_step(ParamStore& store, AdamState& state);

struct GradCheckEntry {
  std::string name;
  double max_rel_error = 0.0;
  std::size_t worst_index = 0;
  double analytic = 0.0;
  double numeric = 0.0;
  std::size_t checked = 0;
  bool passed = true;
};

struct GradCheckReport {
  std::vector<GradCheckEntry> entries;
  double max_rel_error = 0.0;
  bool passed = true;

  std::vector<std::string> failed() const;
};

// Compares the gradients currently stored in `store` against central
// differences of `loss`. Relative error is |a - n| / max(|a|, |n|, 1e-8).
// `max_coords` > 0 checks a seeded random subset of each parameter.
GradCheckReport gradient_check(const std::function<double(const ParamStore&)>& loss,
                               ParamStore& store, double h = 1e-5, double tol = 1e-4,
                               std::size_t max_coords = 0, std::uint64_t seed = 0);

struct Checkpoint {
  std::map<std::string, std::string> metadata;
  std::map<std::string, Tensor> tensors;
};

inline constexpr std::uint32_t kCheckpointVersion = 1;

void save_checkpoint(const ParamStore& store, const std::map<std::string, std::string>& metadata,
                     const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);
// Copies tensors into `store`. Throws DataError listing every missing,
// unexpected or mis-shaped table; `store` is untouched on error.
void restore_parameters(ParamStore& store, const Checkpoint& checkpoint);

}  // namespace pare
