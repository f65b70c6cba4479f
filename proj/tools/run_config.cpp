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
#include "run_config.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "pare/errors.hpp"

namespace pare::cli {
namespace {

std::string trim(std::string_view s) {
  const auto* ws = " \t\r\n";
  const auto begin = s.find_first_not_of(ws);
  if (begin == std::string_view::npos) return {};
  return std::string(s.substr(begin, s.find_last_not_of(ws) - begin + 1));
}

std::vector<std::string> split(std::string_view text, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto pos = text.find(sep, start);
    auto piece = trim(text.substr(start, pos == std::string_view::npos ? text.size() - start : pos - start));
    if (!piece.empty()) out.push_back(std::move(piece));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

template <typename T>
std::string join(const std::vector<T>& values) {
  std::string s;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) s += ',';
    if constexpr (std::is_same_v<T, double>) {
      s += fmt(values[i]);
    } else if constexpr (std::is_same_v<T, std::string>) {
      s += values[i];
    } else {
      s += std::to_string(values[i]);
    }
  }
  return s;
}

double to_double(std::string_view key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double d = std::stod(v, &used);
    if (used == v.size()) return d;
  } catch (const std::logic_error&) {
  }
  throw UsageError("invalid number for '" + std::string(key) + "': '" + v + "'");
}

long long to_int(std::string_view key, const std::string& v) {
  try {
    std::size_t used = 0;
    const long long n = std::stoll(v, &used);
    if (used == v.size()) return n;
  } catch (const std::logic_error&) {
  }
  throw UsageError("invalid integer for '" + std::string(key) + "': '" + v + "'");
}

std::size_t to_size(std::string_view key, const std::string& v) {
  const auto n = to_int(key, v);
  if (n < 0) throw UsageError("'" + std::string(key) + "' must be non-negative");
  return static_cast<std::size_t>(n);
}

bool to_bool(std::string_view key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw UsageError("invalid boolean for '" + std::string(key) + "': '" + v + "'");
}

}  // namespace

std::string RunConfig::checkpoint_path() const {
  return checkpoint.empty() ? output_dir + "/model.ckpt" : checkpoint;
}

std::vector<int> parse_int_list(std::string_view text) {
  std::vector<int> out;
  for (const auto& piece : split(text, ',')) out.push_back(static_cast<int>(to_int("list", piece)));
  return out;
}

std::vector<double> parse_double_list(std::string_view text) {
  std::vector<double> out;
  for (const auto& piece : split(text, ',')) out.push_back(to_double("list", piece));
  return out;
}

void apply_setting(RunConfig& c, std::string_view key_in, std::string_view value_in) {
  const auto key = trim(key_in);
  const auto v = trim(value_in);
  if (key == "interactions") c.interactions = v;
  else if (key == "items") c.items = v;
  else if (key == "side_fields") c.side_fields = split(v, ',');
  else if (key == "corpus") c.corpus = v;
  else if (key == "output_dir") c.output_dir = v;
  else if (key == "checkpoint") c.checkpoint = v;
  else if (key == "scores") c.scores = v;
  else if (key == "category") c.category = v;
  else if (key == "bin_seconds") c.bin_seconds = to_int(key, v);
  else if (key == "lenient") c.lenient = to_bool(key, v);
  else if (key == "d") c.model.d = to_size(key, v);
  else if (key == "alpha") c.model.alpha = to_double(key, v);
  else if (key == "omega") c.model.omega = static_cast<int>(to_int(key, v));
  else if (key == "lstm_hidden") c.model.lstm_hidden = to_size(key, v);
  else if (key == "heads") c.model.heads = HeadSet::parse(v);
  else if (key == "period_mode") {
    if (v == "bin") c.model.period_mode = PeriodMode::kBinIndex;
    else if (v == "calendar") c.model.period_mode = PeriodMode::kCalendarMonth;
    else throw UsageError("period_mode must be 'bin' or 'calendar'");
  } else if (key == "time_mode") {
    if (v == "index") c.model.time_mode = TimeMode::kIndex;
    else if (v == "carry") c.model.time_mode = TimeMode::kCarry;
    else throw UsageError("time_mode must be 'index' or 'carry'");
  }
  else if (key == "lr") c.train.lr = to_double(key, v);
  else if (key == "batch_size") c.train.batch_size = to_size(key, v);
  else if (key == "max_epochs") c.train.max_epochs = static_cast<int>(to_int(key, v));
  else if (key == "patience") c.train.patience = static_cast<int>(to_int(key, v));
  else if (key == "weight_decay") c.train.weight_decay = to_double(key, v);
  else if (key == "max_seconds") c.train.max_seconds = to_double(key, v);
  else if (key == "seed") c.train.seed = static_cast<std::uint64_t>(to_int(key, v));
  else if (key == "cutoffs") c.cutoffs = parse_int_list(v);
  else if (key == "beta") c.beta = to_double(key, v);
  else if (key == "betas") c.betas = parse_double_list(v);
  else if (key == "window") c.window = v;
  else if (key == "normalize") c.normalize = to_bool(key, v);
  else if (key == "exclude_seen") c.exclude_seen = to_bool(key, v);
  else if (key == "gradcheck_examples") c.gradcheck_examples = to_size(key, v);
  else if (key == "gradcheck_coords") c.gradcheck_coords = to_size(key, v);
  else throw UsageError("unknown config key '" + key + "'");
}

RunConfig parse_config(std::string_view text, RunConfig base) {
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    const auto body = trim(std::string_view(line).substr(0, hash));
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) {
      throw UsageError("config line " + std::to_string(line_no) + " is not 'key = value'");
    }
    apply_setting(base, body.substr(0, eq), body.substr(eq + 1));
  }
  return base;
}

RunConfig load_config(const std::string& path, RunConfig base) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), std::move(base));
}

std::string to_text(const RunConfig& c) {
  std::ostringstream out;
  out << "# data\n";
  out << "interactions = " << c.interactions << "\n";
  out << "items = " << c.items << "\n";
  out << "side_fields = " << join(c.side_fields) << "\n";
  out << "corpus = " << c.corpus << "\n";
  out << "output_dir = " << c.output_dir << "\n";
  out << "checkpoint = " << c.checkpoint << "\n";
  out << "scores = " << c.scores << "\n";
  out << "category = " << c.category << "\n";
  out << "bin_seconds = " << c.bin_seconds << "\n";
  out << "lenient = " << (c.lenient ? "true" : "false") << "\n";
  out << "# model\n";
  out << "d = " << c.model.d << "\n";
  out << "alpha = " << fmt(c.model.alpha) << "\n";
  out << "omega = " << c.model.omega << "\n";
  out << "lstm_hidden = " << c.model.lstm_hidden << "\n";
  out << "heads = " << c.model.heads.to_string() << "\n";
  out << "period_mode = " << (c.model.period_mode == PeriodMode::kCalendarMonth ? "calendar" : "bin") << "\n";
  out << "time_mode = " << (c.model.time_mode == TimeMode::kCarry ? "carry" : "index") << "\n";
  out << "# training\n";
  out << "lr = " << fmt(c.train.lr) << "\n";
  out << "batch_size = " << c.train.batch_size << "\n";
  out << "max_epochs = " << c.train.max_epochs << "\n";
  out << "patience = " << c.train.patience << "\n";
  out << "weight_decay = " << fmt(c.train.weight_decay) << "\n";
  out << "max_seconds = " << fmt(c.train.max_seconds) << "\n";
  out << "seed = " << c.train.seed << "\n";
  out << "# evaluation\n";
  out << "cutoffs = " << join(c.cutoffs) << "\n";
  out << "beta = " << fmt(c.beta) << "\n";
  out << "betas = " << join(c.betas) << "\n";
  out << "window = " << c.window << "\n";
  out << "normalize = " << (c.normalize ? "true" : "false") << "\n";
  out << "exclude_seen = " << (c.exclude_seen ? "true" : "false") << "\n";
  out << "gradcheck_examples = " << c.gradcheck_examples << "\n";
  out << "gradcheck_coords = " << c.gradcheck_coords << "\n";
  return out.str();
}

}  // namespace pare::cli
