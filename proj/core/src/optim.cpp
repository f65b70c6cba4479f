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
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "pare/errors.hpp"
#include "pare/numerics.hpp"

namespace pare {

void adam_step(ParamStore& store, AdamState& state) {
  if (state.step == std::numeric_limits<std::int64_t>::max()) {
    throw NumericError("Adam step counter overflow");
  }
  for (const auto& [name, p] : store) {
    if (!p.grad.all_finite()) throw NumericError("non-finite gradient in parameter '" + name + "'");
  }
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double correction1 = 1.0 - std::pow(state.beta1, t);
  const double correction2 = 1.0 - std::pow(state.beta2, t);
  for (auto& [name, p] : store) {
    auto [it, inserted] = state.moments.try_emplace(name);
    auto& [m, v] = it->second;
    if (inserted) {
      m = Tensor(p.value.shape());
      v = Tensor(p.value.shape());
    }
    const double wd = p.decay ? state.weight_decay : 0.0;
    auto value = p.value.values();
    auto grad = p.grad.values();
    auto mv = m.values();
    auto vv = v.values();
    for (std::size_t k = 0; k < value.size(); ++k) {
      const double g = grad[k] + wd * value[k];
      mv[k] = state.beta1 * mv[k] + (1.0 - state.beta1) * g;
      vv[k] = state.beta2 * vv[k] + (1.0 - state.beta2) * g * g;
      const double m_hat = mv[k] / correction1;
      const double v_hat = vv[k] / correction2;
      value[k] -= state.lr * m_hat / (std::sqrt(v_hat) + state.eps);
    }
    p.grad.fill(0.0);
  }
}

std::vector<std::string> GradCheckReport::failed() const {
  std::vector<std::string> out;
  for (const auto& e : entries) {
    if (!e.passed) out.push_back(e.name);
  }
  return out;
}

GradCheckReport gradient_check(const std::function<double(const ParamStore&)>& loss,
                               ParamStore& store, double h, double tol, std::size_t max_coords,
                               std::uint64_t seed) {
  const double base = loss(store);
  if (loss(store) != base) throw NumericError("loss closure is not deterministic");

  std::mt19937_64 rng(seed);
  GradCheckReport report;
  for (auto& [name, p] : store) {
    GradCheckEntry entry;
    entry.name = name;
    std::vector<std::size_t> coords(p.value.size());
    std::iota(coords.begin(), coords.end(), std::size_t{0});
    if (max_coords > 0 && coords.size() > max_coords) {
      std::shuffle(coords.begin(), coords.end(), rng);
      coords.resize(max_coords);
      std::sort(coords.begin(), coords.end());
    }
    for (auto k : coords) {
      const double original = p.value[k];
      p.value[k] = original + h;
      const double up = loss(store);
      p.value[k] = original - h;
      const double down = loss(store);
      p.value[k] = original;
      const double numeric = (up - down) / (2.0 * h);
      const double analytic = p.grad[k];
      const double rel = std::abs(analytic - numeric) /
                         std::max({std::abs(analytic), std::abs(numeric), 1e-8});
      if (!std::isfinite(rel)) throw NumericError("non-finite gradient check for '" + name + "'");
      if (rel > entry.max_rel_error || entry.checked == 0) {
        entry.max_rel_error = rel;
        entry.worst_index = k;
        entry.analytic = analytic;
        entry.numeric = numeric;
      }
      ++entry.checked;
    }
    entry.passed = entry.max_rel_error < tol;
    report.max_rel_error = std::max(report.max_rel_error, entry.max_rel_error);
    report.passed = report.passed && entry.passed;
    report.entries.push_back(std::move(entry));
  }
  return report;
}

}  // namespace pare
