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
#include "cli.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "pare/blend.hpp"
#include "pare/corpus.hpp"
#include "pare/errors.hpp"
#include "pare/metrics.hpp"
#include "pare/model.hpp"
#include "pare/ranker.hpp"
#include "pare/synthetic.hpp"
#include "pare/trainer.hpp"
#include "run_config.hpp"

namespace pare::cli {
namespace {

namespace fs = std::filesystem;

const std::vector<std::string> kCommands = {"ingest",   "stats", "train", "predict", "evaluate",
                                            "baseline", "blend", "sweep", "gradcheck", "profile"};

std::string fmt(const char* pattern, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), pattern, v);
  return buf;
}

std::string g17(double v) { return fmt("%.17g", v); }

class Session {
 public:
  Session(RunConfig config, std::ostream& out) : config_(std::move(config)), out_(out) {}

  void dispatch(const std::string& command) {
    if (command == "ingest") ingest();
    else if (command == "stats") stats();
    else if (command == "train") train_cmd();
    else if (command == "predict") predict();
    else if (command == "evaluate") evaluate_cmd();
    else if (command == "baseline") baseline();
    else if (command == "blend") blend();
    else if (command == "sweep") sweep();
    else if (command == "gradcheck") gradcheck();
    else if (command == "profile") profile();
  }

 private:
  fs::path output(const std::string& name) const { return fs::path(config_.output_dir) / name; }

  std::ofstream open(const std::string& name) {
    fs::create_directories(config_.output_dir);
    std::ofstream f(output(name), std::ios::binary);
    if (!f) throw DataError("cannot write " + output(name).string());
    return f;
  }

  static void require_file(const std::string& path, const std::string& what) {
    if (path.empty()) throw UsageError(what + " path is not set");
    if (!fs::exists(path)) throw DataError(what + " not found: " + path);
  }

  std::size_t depth() const {
    return static_cast<std::size_t>(*std::max_element(config_.cutoffs.begin(), config_.cutoffs.end()));
  }

  // Raw inputs take precedence; otherwise the serialized corpus, explicit or
  // left behind by `ingest` in the output directory.
  const Corpus& corpus() {
    if (corpus_) return *corpus_;
    if (!config_.interactions.empty()) {
      require_file(config_.interactions, "interactions file");
      require_file(config_.items, "items file");
      const auto mode = config_.lenient ? ParseMode::kLenient : ParseMode::kStrict;
      auto load = load_interactions(config_.interactions, mode);
      if (load.skipped > 0) out_ << "skipped " << load.skipped << " malformed interaction lines\n";
      auto catalog = load_items(config_.items, config_.side_fields);
      corpus_ = build_corpus(load.records, std::move(catalog), config_.bin_seconds);
    } else {
      std::string path = config_.corpus;
      if (path.empty() && fs::exists(output("corpus.json"))) path = output("corpus.json").string();
      if (path.empty()) throw UsageError("no input: set interactions and items, or corpus");
      require_file(path, "corpus");
      corpus_ = load_corpus(path);
    }
    split_ = split_global(corpus_->binning);
    return *corpus_;
  }

  const SplitSpec& split() {
    corpus();
    return split_;
  }

  PareModel model() {
    const auto path = config_.checkpoint_path();
    require_file(path, "checkpoint");
    return load_model(corpus(), path);
  }

  void ingest() {
    const auto& c = corpus();
    const auto path = output("corpus.json");
    fs::create_directories(config_.output_dir);
    save_corpus(c, path);
    out_ << "corpus: " << c.users.size() << " users, " << c.catalog.size() << " items, "
         << c.binning.num_bins() << " bins -> " << path.string() << "\n";
    if (c.report.orphan_interactions > 0) {
      out_ << "dropped " << c.report.orphan_interactions << " interactions with unknown items\n";
    }
    if (c.report.out_of_range > 0) out_ << "out of range: " << c.report.out_of_range << "\n";
    const auto missing = c.catalog.items_without_release();
    if (!missing.empty()) out_ << missing.size() << " items lack release_ts\n";
  }

  void stats() {
    const auto counts = split_counts(corpus(), split());
    std::ostringstream row;
    row << "#Users,#Items,#Train,#Validate,#Test\n"
        << counts.users << ',' << counts.items << ',' << counts.train << ',' << counts.valid << ','
        << counts.test << '\n';
    open("stats.csv") << row.str();
    out_ << row.str();
  }

  void train_cmd() {
    const auto& c = corpus();
    config_.model.validate();
    PareModel m(ModelShape::of(c), config_.model);
    m.initialize(config_.train.seed);
    const auto examples = build_examples(c, split());
    out_ << "training on " << examples.train.size() << " examples, validating on "
         << examples.valid.size() << "\n";
    const auto result = train(m, c, examples, config_.train, [&](const EpochLog& row) {
      out_ << "epoch " << row.epoch << " train " << fmt("%.6g", row.train_loss) << " valid "
           << fmt("%.6g", row.valid_loss) << "\n";
    });
    fs::create_directories(config_.output_dir);
    const auto ckpt = config_.checkpoint_path();
    if (!fs::path(ckpt).parent_path().empty()) fs::create_directories(fs::path(ckpt).parent_path());
    save_model(m, ckpt);
    auto log = open("train_log.csv");
    write_train_log(result.history, log);
    open("run_config.txt") << to_text(config_);
    out_ << "best epoch " << result.best_epoch << " valid " << fmt("%.6g", result.best_valid_loss)
         << " -> " << ckpt << "\n";
  }

  void predict() {
    const auto m = model();
    const auto& c = corpus();
    const int bin = split().test_bin;
    const auto rows = predict_all(m, c, bin);
    auto f = open("predictions.csv");
    f << "item_id,y_H,y_T,y_P,y_S,y_F,a_1,a_2,a_3,a_4\n";
    ScoreMap scores;
    for (const auto& r : rows) {
      f << r.item_id << ',' << g17(r.y_history) << ',' << g17(r.y_temporal) << ','
        << g17(r.y_periodic) << ',' << g17(r.y_side) << ',' << g17(r.y_fused);
      for (double a : r.weights) f << ',' << g17(a);
      f << '\n';
      scores[r.item_id] = r.y_fused;
    }
    auto ranked = open("ranked_pare.csv");
    write_ranked_list(top_n(scores, 0), ranked);
    auto pva = open("predicted_vs_actual.csv");
    pva << "item_id,predicted,actual\n";
    for (const auto& r : rows) {
      const auto idx = *c.catalog.find(r.item_id);
      pva << r.item_id << ',' << g17(r.y_fused) << ',' << c.series[idx].at(bin) << '\n';
    }
    out_ << "predicted " << rows.size() << " items for bin " << bin << "\n";
  }

  void evaluate_cmd() {
    const auto m = model();
    const auto& c = corpus();
    const int bin = split().test_bin;
    const auto scores = score_all(m, c, bin);
    const auto ranked = top_n(scores, depth());
    const auto truth = ground_truth(c, bin);
    const auto report = evaluate(ranked, truth, config_.cutoffs);
    const auto label = "PARE(" + m.config().heads.to_string() + ")";
    auto f = open("metrics.csv");
    write_metrics_header(f);
    write_metrics_rows(label, report, f);

    // Fusion weights are global, so any released item reports them.
    const auto sample = m.predict(c, c.catalog.find(scores.begin()->first).value(), bin);
    auto att = open("attention.csv");
    att << "heads,H,T,S,P\n"
        << m.config().heads.to_string() << ',' << fmt("%.4f", sample.weights[0]) << ','
        << fmt("%.4f", sample.weights[1]) << ',' << fmt("%.4f", sample.weights[3]) << ','
        << fmt("%.4f", sample.weights[2]) << '\n';

    const auto full = top_n(scores, 0);
    const auto toppop = cutoff_toppop(c, bin, std::nullopt, 0);
    auto ov = open("overlap.csv");
    ov << "N,overlap\n";
    const auto limit = std::min<std::size_t>(100, full.entries.size());
    for (std::size_t n = 1; n <= limit; ++n) ov << n << ',' << overlap_count(full, toppop, n) << '\n';

    out_ << "evaluated " << report.users << " users at bin " << bin << "\n";
    for (int n : report.cutoffs) {
      out_ << "HR@" << n << " " << fmt("%.4f", report.at.at(n).hr) << "\n";
    }
  }

  std::vector<Window> windows() const {
    if (!config_.window.empty()) return {parse_window(config_.window)};
    return {Window{3}, Window{6}, Window{12}, std::nullopt};
  }

  void baseline() {
    const auto& c = corpus();
    const int bin = split().test_bin;
    const auto truth = ground_truth(c, bin);
    auto metrics = open("baseline_metrics.csv");
    write_metrics_header(metrics);
    for (const auto& w : windows()) {
      const auto list = cutoff_toppop(c, bin, w, depth());
      auto f = open("toppop_" + window_name(w) + ".csv");
      write_ranked_list(list, f);
      const auto report = evaluate(list, truth, config_.cutoffs);
      write_metrics_rows("TopPop-" + window_name(w), report, metrics);
      out_ << "TopPop-" << window_name(w) << " HR@" << depth() << " "
           << fmt("%.4f", report.at.at(static_cast<int>(depth())).hr) << "\n";
    }
  }

  BlendOptions blend_options(const GroundTruth& truth) {
    BlendOptions options;
    options.normalize = config_.normalize;
    for (const auto& [user, _] : truth) options.extra_users.insert(user);
    if (config_.exclude_seen) {
      seen_ = seen_items(corpus(), split().valid_bin);
      options.exclude = &seen_;
    }
    return options;
  }

  ExternalScores external() {
    require_file(config_.scores, "scores file");
    auto scores = load_scores(config_.scores);
    if (scores.duplicates > 0) out_ << "scores: " << scores.duplicates << " duplicate pairs, last kept\n";
    return scores;
  }

  void blend() {
    const auto ext = external();
    const auto m = model();
    const auto& c = corpus();
    const int bin = split().test_bin;
    const auto truth = ground_truth(c, bin);
    const auto pare_scores = score_all(m, c, bin);
    const auto options = blend_options(truth);
    const auto lists = blend_rankings(ext, pare_scores, config_.beta, depth(), options);
    auto f = open("blend_ranked.csv");
    f << "user_id,rank,item_id,score\n";
    for (const auto& [user, list] : lists) {
      for (std::size_t r = 0; r < list.entries.size(); ++r) {
        f << user << ',' << r + 1 << ',' << list.entries[r].item_id << ','
          << g17(list.entries[r].score) << '\n';
      }
    }
    const auto report = evaluate(lists, truth, config_.cutoffs);
    auto metrics = open("blend_metrics.csv");
    write_metrics_header(metrics);
    write_metrics_rows("blend(beta=" + fmt("%.2f", config_.beta) + ")", report, metrics);
    out_ << "blended " << lists.size() << " users at beta " << fmt("%.2f", config_.beta) << "\n";
  }

  void sweep() {
    const auto ext = external();
    const auto m = model();
    const auto& c = corpus();
    const int bin = split().test_bin;
    const auto truth = ground_truth(c, bin);
    const auto pare_scores = score_all(m, c, bin);
    const auto rows = beta_sweep(ext, pare_scores, truth, config_.betas, config_.cutoffs,
                                 blend_options(truth));
    auto metrics = open("sweep_metrics.csv");
    write_metrics_header(metrics);
    for (const auto& row : rows) write_metrics_rows("beta=" + fmt("%.2f", row.beta), row.report, metrics);
    auto plot = open("sweep_hr10.csv");
    write_sweep_plot(rows, plot);
    std::ostringstream echo;
    write_sweep_plot(rows, echo);
    out_ << echo.str();
  }

  void gradcheck() {
    const auto data = miniature_synthetic(config_.train.seed);
    const auto c = build_corpus(data.interactions, data.catalog);
    PareConfig mc = config_.model;
    mc.d = 8;
    mc.lstm_hidden = 8;
    mc.validate();
    PareModel m(ModelShape::of(c), mc);
    m.randomize(config_.train.seed, 1.0);
    const auto examples = build_examples(c, split_global(c.binning));
    // An evenly strided batch covers young and old items alike.
    std::vector<TrainExample> batch;
    const auto want = std::max<std::size_t>(1, config_.gradcheck_examples);
    const auto stride = std::max<std::size_t>(1, examples.train.size() / want);
    for (std::size_t k = 0; k < examples.train.size() && batch.size() < want; k += stride) {
      batch.push_back(examples.train[k]);
    }
    const auto report =
        check_batch_gradient(m, c, batch, 1e-5, 1e-4, config_.gradcheck_coords, config_.train.seed);
    auto f = open("gradcheck.csv");
    f << "parameter,checked,max_rel_error,analytic,numeric,passed\n";
    for (const auto& e : report.entries) {
      f << e.name << ',' << e.checked << ',' << fmt("%.3e", e.max_rel_error) << ','
        << g17(e.analytic) << ',' << g17(e.numeric) << ',' << (e.passed ? "yes" : "no") << '\n';
    }
    out_ << "gradcheck seed " << config_.train.seed << " max rel error "
         << fmt("%.3e", report.max_rel_error) << (report.passed ? " PASS" : " FAIL") << "\n";
    if (!report.passed) {
      std::string names;
      for (const auto& n : report.failed()) names += (names.empty() ? "" : " ") + n;
      throw NumericError("gradient mismatch in: " + names);
    }
  }

  void profile() {
    const auto& c = corpus();
    auto age = open("profile_since_release.csv");
    age << "age,mean,support\n";
    for (const auto& r : popularity_profile(c.series)) {
      age << r.index << ',' << g17(r.mean) << ',' << r.support << '\n';
    }
    auto month = open("profile_month.csv");
    month << "category,month,mean,support\n";
    std::vector<std::string> categories;
    if (!config_.category.empty()) {
      categories.push_back(config_.category);
    } else {
      categories = c.catalog.vocabulary(0).names();
      std::sort(categories.begin(), categories.end());
    }
    for (const auto& cat : categories) {
      for (const auto& r : popularity_profile_by_month(c, cat)) {
        month << cat << ',' << r.index << ',' << g17(r.mean) << ',' << r.support << '\n';
      }
    }
    out_ << "profiles for " << categories.size() << " categories -> " << config_.output_dir << "\n";
  }

  RunConfig config_;
  std::ostream& out_;
  std::optional<Corpus> corpus_;
  SplitSpec split_;
  std::map<std::string, std::set<std::string>> seen_;
};

std::string quote(const std::string& message) {
  std::string s;
  for (char ch : message) {
    if (ch == '"' || ch == '\\') s += '\\';
    s += (ch == '\n' ? ' ' : ch);
  }
  return s;
}

int report_error(std::ostream& err, int code, const char* kind, const std::string& message) {
  err << "error code=" << code << " kind=" << kind << " message=\"" << quote(message) << "\"\n";
  return code;
}

}  // namespace

std::string usage() {
  std::string s = "usage: pare <command> [options]\ncommands:";
  for (const auto& c : kCommands) s += " " + c;
  s += "\nrun `pare --help` for options\n";
  return s;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"PARE popularity forecasting and ranking", "pare"};
  std::string command, config_path, seed, beta, window, cutoffs, heads, alpha, omega;
  std::string output_dir, interactions, items, scores, checkpoint, corpus_path;
  std::vector<std::string> settings;
  app.add_option("command", command, "one of: ingest stats train predict evaluate baseline blend sweep gradcheck profile");
  app.add_option("--config", config_path, "key = value config file");
  app.add_option("--seed", seed, "random seed");
  app.add_option("--beta", beta, "blend coefficient in [0, 1]");
  app.add_option("--window", window, "TopPop window: 3, 6, 12 or ALL");
  app.add_option("--cutoffs", cutoffs, "comma-separated cutoffs, e.g. 1,3,5,7,10");
  app.add_option("--heads", heads, "enabled heads, e.g. H,T,P,S");
  app.add_option("--alpha", alpha, "EMA coefficient");
  app.add_option("--omega", omega, "period length in bins");
  app.add_option("--out", output_dir, "output directory");
  app.add_option("--interactions", interactions, "interactions CSV");
  app.add_option("--items", items, "items JSON lines");
  app.add_option("--corpus", corpus_path, "serialized corpus");
  app.add_option("--scores", scores, "external scores CSV");
  app.add_option("--checkpoint", checkpoint, "model checkpoint path");
  app.add_option("--set", settings, "override any config key: --set key=value");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help() << usage();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << usage();
    return report_error(err, kExitUsage, "usage", e.what());
  }

  if (std::find(kCommands.begin(), kCommands.end(), command) == kCommands.end()) {
    err << usage();
    return report_error(err, kExitUsage, "usage",
                        command.empty() ? "missing command" : "unknown command '" + command + "'");
  }

  try {
    RunConfig config;
    if (!config_path.empty()) config = load_config(config_path);
    const std::pair<const char*, const std::string*> flags[] = {
        {"seed", &seed},   {"beta", &beta},         {"window", &window},
        {"cutoffs", &cutoffs}, {"heads", &heads},   {"alpha", &alpha},
        {"omega", &omega}, {"output_dir", &output_dir}, {"interactions", &interactions},
        {"items", &items}, {"scores", &scores},     {"checkpoint", &checkpoint},
        {"corpus", &corpus_path}};
    for (const auto& [key, value] : flags) {
      if (!value->empty()) apply_setting(config, key, *value);
    }
    for (const auto& s : settings) {
      const auto eq = s.find('=');
      if (eq == std::string::npos) throw UsageError("--set expects key=value, got '" + s + "'");
      apply_setting(config, s.substr(0, eq), s.substr(eq + 1));
    }
    config.model.validate();
    config.train.validate();
    if (config.cutoffs.empty() ||
        std::any_of(config.cutoffs.begin(), config.cutoffs.end(), [](int n) { return n < 1; })) {
      throw UsageError("cutoffs must be positive integers");
    }
    if (!(config.beta >= 0.0 && config.beta <= 1.0)) throw UsageError("beta must lie in [0, 1]");
    if (!config.window.empty()) parse_window(config.window);
    if (config.output_dir.empty()) throw UsageError("output_dir is empty");

    Session session(std::move(config), out);
    session.dispatch(command);
    return kExitOk;
  } catch (const UsageError& e) {
    return report_error(err, kExitUsage, "usage", e.what());
  } catch (const DataError& e) {
    return report_error(err, kExitData, "data", e.what());
  } catch (const NumericError& e) {
    return report_error(err, kExitNumeric, "numeric", e.what());
  } catch (const fs::filesystem_error& e) {
    return report_error(err, kExitData, "data", e.what());
  } catch (const std::exception& e) {
    return report_error(err, kExitData, "internal", e.what());
  }
}

}  // namespace pare::cli
