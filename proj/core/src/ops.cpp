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

#include "pare/errors.hpp"
#include "pare/numerics.hpp"

namespace pare {
namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

double activate(double z, Activation act) {
  switch (act) {
    case Activation::kSigmoid:
      return sigmoid(z);
    case Activation::kTanh:
      return std::tanh(z);
    case Activation::kRelu:
      return z > 0.0 ? z : 0.0;
    case Activation::kNone:
      break;
  }
  return z;
}

// Derivative expressed through the activation output y.
double activation_slope(double y, Activation act) {
  switch (act) {
    case Activation::kSigmoid:
      return y * (1.0 - y);
    case Activation::kTanh:
      return 1.0 - y * y;
    case Activation::kRelu:
      return y > 0.0 ? 1.0 : 0.0;
    case Activation::kNone:
      break;
  }
  return 1.0;
}

void gate_forward(std::span<const double> z, const Tensor& W, const Tensor& b, Activation act,
                  Vec& out) {
  const std::size_t h = b.size();
  out.assign(b.values().begin(), b.values().end());
  for (std::size_t j = 0; j < z.size(); ++j) {
    const double zj = z[j];
    if (zj == 0.0) continue;
    const auto w = W.row(j);
    for (std::size_t k = 0; k < h; ++k) out[k] += zj * w[k];
  }
  for (auto& v : out) v = activate(v, act);
}

void gate_backward(std::span<const double> z, const Tensor& W, std::span<const double> da,
                   Tensor& dW, Tensor& db, std::span<double> dz) {
  const std::size_t h = da.size();
  for (std::size_t k = 0; k < h; ++k) db[k] += da[k];
  for (std::size_t j = 0; j < z.size(); ++j) {
    const auto w = W.row(j);
    auto gw = dW.row(j);
    double acc = 0.0;
    for (std::size_t k = 0; k < h; ++k) {
      gw[k] += z[j] * da[k];
      acc += w[k] * da[k];
    }
    dz[j] += acc;
  }
}

}  // namespace

Vec affine(std::span<const double> x, const Tensor& W, const Tensor& b, Activation act) {
  if (W.shape().size() != 2 || W.rows() != x.size() || b.size() != W.cols()) {
    throw DataError("affine shape mismatch: x [" + std::to_string(x.size()) + "] vs W " +
                    W.shape_string() + ", b " + b.shape_string());
  }
  Vec y(b.values().begin(), b.values().end());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const auto w = W.row(i);
    for (std::size_t k = 0; k < y.size(); ++k) y[k] += x[i] * w[k];
  }
  for (auto& v : y) v = activate(v, act);
  return y;
}

Vec affine_backward(std::span<const double> x, const Tensor& W, std::span<const double> y,
                    Activation act, std::span<const double> dy, Tensor* dW, Tensor* db) {
  Vec dpre(dy.size());
  for (std::size_t k = 0; k < dy.size(); ++k) dpre[k] = dy[k] * activation_slope(y[k], act);
  Vec dx(x.size(), 0.0);
  for (std::size_t i = 0; i < x.size(); ++i) {
    const auto w = W.row(i);
    double acc = 0.0;
    for (std::size_t k = 0; k < dpre.size(); ++k) acc += w[k] * dpre[k];
    dx[i] = acc;
    if (dW) {
      auto g = dW->row(i);
      for (std::size_t k = 0; k < dpre.size(); ++k) g[k] += x[i] * dpre[k];
    }
  }
  if (db) {
    for (std::size_t k = 0; k < dpre.size(); ++k) (*db)[k] += dpre[k];
  }
  return dx;
}

Vec embed(std::span<const std::size_t> rows, const Tensor& table) {
  Vec out(table.cols(), 0.0);
  for (auto r : rows) {
    if (r >= table.rows()) {
      throw DataError("embedding index " + std::to_string(r) + " out of range for table " +
                      table.shape_string());
    }
    const auto src = table.row(r);
    for (std::size_t k = 0; k < out.size(); ++k) out[k] += src[k];
  }
  return out;
}

Vec embed_multi_hot(std::span<const double> selector, const Tensor& table) {
  if (selector.size() != table.rows()) {
    throw DataError("selector length " + std::to_string(selector.size()) +
                    " does not match table " + table.shape_string());
  }
  std::vector<std::size_t> rows;
  for (std::size_t r = 0; r < selector.size(); ++r) {
    if (selector[r] == 1.0) {
      rows.push_back(r);
    } else if (selector[r] != 0.0) {
      throw DataError("multi-hot selector entries must be 0 or 1");
    }
  }
  return embed(rows, table);
}

void embed_backward(std::span<const std::size_t> rows, std::span<const double> dy,
                    Tensor& dtable) {
  for (auto r : rows) {
    auto g = dtable.row(r);
    for (std::size_t k = 0; k < dy.size(); ++k) g[k] += dy[k];
  }
}

Vec lstm_sequence(std::span<const double> inputs, const LstmWeights& w, LstmTrace* trace) {
  const std::size_t h = w.hidden();
  Vec hidden(h, 0.0);
  Vec cell(h, 0.0);
  Vec z(1 + h, 0.0);
  Vec i_g, f_g, g_g, o_g;
  if (trace) {
    *trace = LstmTrace{};
    trace->inputs.assign(inputs.begin(), inputs.end());
  }
  for (double p : inputs) {
    if (!std::isfinite(p)) throw NumericError("non-finite LSTM input");
    z[0] = p;
    std::copy(hidden.begin(), hidden.end(), z.begin() + 1);
    gate_forward(z, *w.W_I, *w.b_I, Activation::kSigmoid, i_g);
    gate_forward(z, *w.W_F, *w.b_F, Activation::kSigmoid, f_g);
    gate_forward(z, *w.W_G, *w.b_G, Activation::kTanh, g_g);
    gate_forward(z, *w.W_O, *w.b_O, Activation::kSigmoid, o_g);
    for (std::size_t k = 0; k < h; ++k) {
      cell[k] = f_g[k] * cell[k] + i_g[k] * g_g[k];
      hidden[k] = o_g[k] * std::tanh(cell[k]);
    }
    if (trace) {
      trace->I.push_back(i_g);
      trace->F.push_back(f_g);
      trace->G.push_back(g_g);
      trace->O.push_back(o_g);
      trace->C.push_back(cell);
      trace->H.push_back(hidden);
    }
  }
  return hidden;
}

void lstm_backward(const LstmTrace& trace, const LstmWeights& w, std::span<const double> dh_last,
                   const LstmGrads& grads) {
  const std::size_t h = w.hidden();
  const std::size_t steps = trace.inputs.size();
  Vec dh(dh_last.begin(), dh_last.end());
  Vec dc(h, 0.0);
  Vec z(1 + h), dz(1 + h);
  Vec da_i(h), da_f(h), da_g(h), da_o(h);
  const Vec zeros(h, 0.0);
  for (std::size_t s = steps; s-- > 0;) {
    const auto& I = trace.I[s];
    const auto& F = trace.F[s];
    const auto& G = trace.G[s];
    const auto& O = trace.O[s];
    const auto& C = trace.C[s];
    const auto& c_prev = s ? trace.C[s - 1] : zeros;
    const auto& h_prev = s ? trace.H[s - 1] : zeros;
    for (std::size_t k = 0; k < h; ++k) {
      const double tc = std::tanh(C[k]);
      const double d_o = dh[k] * tc;
      dc[k] += dh[k] * O[k] * (1.0 - tc * tc);
      da_o[k] = d_o * O[k] * (1.0 - O[k]);
      da_f[k] = dc[k] * c_prev[k] * F[k] * (1.0 - F[k]);
      da_i[k] = dc[k] * G[k] * I[k] * (1.0 - I[k]);
      da_g[k] = dc[k] * I[k] * (1.0 - G[k] * G[k]);
      dc[k] *= F[k];
    }
    z[0] = trace.inputs[s];
    std::copy(h_prev.begin(), h_prev.end(), z.begin() + 1);
    std::fill(dz.begin(), dz.end(), 0.0);
    gate_backward(z, *w.W_I, da_i, *grads.W_I, *grads.b_I, dz);
    gate_backward(z, *w.W_F, da_f, *grads.W_F, *grads.b_F, dz);
    gate_backward(z, *w.W_G, da_g, *grads.W_G, *grads.b_G, dz);
    gate_backward(z, *w.W_O, da_o, *grads.W_O, *grads.b_O, dz);
    std::copy(dz.begin() + 1, dz.end(), dh.begin());
  }
}

}  // namespace pare
