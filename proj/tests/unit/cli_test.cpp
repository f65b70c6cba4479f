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
#include <gtest/gtest.h>

#include <algorithm>
#include <sstream>

#include "cli.hpp"
#include "fixtures.hpp"
#include "pare/errors.hpp"
#include "pare/synthetic.hpp"
#include "run_config.hpp"

namespace pare {
namespace {

using testing::TempDir;

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome run_cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

// 5 bins; train = 1-3, valid = 4, test = 5. Raw line counts per region:
// train 4, valid 2, test 3. Users a, b, c, d; items x, y (z never appears).
void write_stats_fixture(const TempDir& dir) {
  using testing::at_bin;
  std::ostringstream csv;
  csv << "user_id,item_id,timestamp\n";
  csv << "a,x," << at_bin(1) << "\n";
  csv << "b,x," << at_bin(1, 90) << "\n";
  csv << "a,x," << at_bin(2) << "\n";
  csv << "c,y," << at_bin(3) << "\n";
  csv << "a,y," << at_bin(4) << "\n";
  csv << "d,y," << at_bin(4, 90) << "\n";
  csv << "a,x," << at_bin(5) << "\n";
  csv << "a,x," << at_bin(5, 90) << "\n";
  csv << "b,y," << at_bin(5, 120) << "\n";
  testing::write_text(dir / "interactions.csv", csv.str());
  testing::write_text(dir / "items.jsonl",
                      R"({"item_id":"x","release_ts":)" + std::to_string(at_bin(1)) +
                          R"(,"categories":["drama"],"directors":["d1"]})" "\n"
                          R"({"item_id":"y","categories":["comedy"],"directors":["d2"]})" "\n"
                          R"({"item_id":"z","categories":["drama"],"directors":[]})" "\n");
}

TEST(Cli, UnknownCommandPrintsUsage) {
  const auto r = run_cli({"frobnicate"});
  EXPECT_EQ(r.code, cli::kExitUsage);
  EXPECT_NE(r.err.find("usage: pare"), std::string::npos);
  EXPECT_NE(r.err.find("error code=1 kind=usage"), std::string::npos);
  EXPECT_EQ(run_cli({}).code, cli::kExitUsage);
}

TEST(Cli, ErrorLineIsSingleAndParseable) {
  TempDir dir;
  const auto r = run_cli({"stats", "--interactions", (dir / "missing.csv").string(), "--items",
                          (dir / "items.jsonl").string(), "--out", dir.path().string()});
  EXPECT_EQ(r.code, cli::kExitData);
  EXPECT_EQ(std::count(r.err.begin(), r.err.end(), '\n'), 1);
  EXPECT_EQ(r.err.rfind("error code=2 kind=data message=\"", 0), 0u) << r.err;
}

TEST(Cli, BadConfigValueIsUsageError) {
  TempDir dir;
  EXPECT_EQ(run_cli({"stats", "--set", "alpha=2", "--out", dir.path().string()}).code, cli::kExitUsage);
  EXPECT_EQ(run_cli({"stats", "--set", "colour=blue"}).code, cli::kExitUsage);
  EXPECT_EQ(run_cli({"stats", "--heads", "P,S"}).code, cli::kExitUsage);
  EXPECT_EQ(run_cli({"blend", "--beta", "1.5"}).code, cli::kExitUsage);
}

TEST(Cli, StatsOnFixture) {
  TempDir dir;
  write_stats_fixture(dir);
  const auto r = run_cli({"stats", "--interactions", (dir / "interactions.csv").string(), "--items",
                          (dir / "items.jsonl").string(), "--set", "side_fields=directors", "--out",
                          (dir / "out").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(testing::read_text(dir / "out" / "stats.csv"),
            "#Users,#Items,#Train,#Validate,#Test\n4,2,4,2,3\n");
}

TEST(Cli, IngestThenStatsFromSerializedCorpus) {
  TempDir dir;
  write_stats_fixture(dir);
  const auto out = (dir / "out").string();
  ASSERT_EQ(run_cli({"ingest", "--interactions", (dir / "interactions.csv").string(), "--items",
                     (dir / "items.jsonl").string(), "--out", out})
                .code,
            0);
  const auto r = run_cli({"stats", "--out", out});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("4,2,4,2,3"), std::string::npos);
}

TEST(Cli, GradcheckPasses) {
  TempDir dir;
  const auto r = run_cli({"gradcheck", "--seed", "7", "--out", dir.path().string()});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("PASS"), std::string::npos);
  EXPECT_TRUE(std::filesystem::exists(dir / "gradcheck.csv"));
}

TEST(Cli, FullPipelineIsDeterministic) {
  TempDir dir;
  SyntheticSpec spec;
  spec.users = 120;
  spec.items = 25;
  spec.bins = 14;
  spec.seed = 3;
  const auto data = generate_synthetic(spec);
  write_interactions(data.interactions, dir / "interactions.csv");
  write_items(data.catalog, dir / "items.jsonl");
  // Scores for the blend: every user likes item0 and item1.
  std::ostringstream scores;
  scores << "user_id,item_id,score\n";
  for (std::size_t u = 0; u < spec.users; ++u) {
    scores << "u" << u << ",item0,2\nu" << u << ",item1,1\n";
  }
  testing::write_text(dir / "scores.csv", scores.str());

  const std::string config = dir.path().string() + "/run.cfg";
  testing::write_text(config, "interactions = " + (dir / "interactions.csv").string() +
                                  "\nitems = " + (dir / "items.jsonl").string() +
                                  "\nside_fields = directors,actors\nd = 4\nlstm_hidden = 4\n"
                                  "max_epochs = 3\nscores = " + (dir / "scores.csv").string() + "\n");
  auto pipeline = [&](const std::string& out) {
    for (const char* cmd : {"ingest", "stats", "train", "predict", "evaluate", "baseline", "blend",
                            "sweep", "profile"}) {
      const auto r = run_cli({cmd, "--config", config, "--seed", "5", "--out", out});
      ASSERT_EQ(r.code, 0) << cmd << ": " << r.err;
    }
  };
  pipeline((dir / "run1").string());
  pipeline((dir / "run2").string());
  for (const char* file : {"corpus.json", "stats.csv", "model.ckpt", "predictions.csv",
                           "ranked_pare.csv", "predicted_vs_actual.csv", "metrics.csv",
                           "attention.csv", "overlap.csv", "toppop_3.csv", "toppop_ALL.csv",
                           "baseline_metrics.csv", "blend_ranked.csv", "blend_metrics.csv",
                           "sweep_metrics.csv", "sweep_hr10.csv", "profile_since_release.csv",
                           "profile_month.csv"}) {
    EXPECT_EQ(testing::read_text(dir / "run1" / file), testing::read_text(dir / "run2" / file)) << file;
  }
  const auto predictions = testing::read_text(dir / "run1" / "predictions.csv");
  EXPECT_EQ(predictions.rfind("item_id,y_H,y_T,y_P,y_S,y_F,a_1,a_2,a_3,a_4\n", 0), 0u);
  EXPECT_EQ(testing::read_text(dir / "run1" / "sweep_hr10.csv").rfind("beta,hr@10\n0.00,", 0), 0u);
}

TEST(Cli, HeadsFlagTrainsAblation) {
  TempDir dir;
  SyntheticSpec spec;
  spec.items = 12;
  spec.bins = 10;
  const auto data = generate_synthetic(spec);
  write_interactions(data.interactions, dir / "i.csv");
  write_items(data.catalog, dir / "items.jsonl");
  const auto out = (dir / "out").string();
  std::vector<std::string> common = {"--interactions", (dir / "i.csv").string(), "--items",
                                     (dir / "items.jsonl").string(), "--set",
                                     "side_fields=directors,actors", "--set", "d=4", "--set",
                                     "lstm_hidden=4", "--set", "max_epochs=2", "--out", out};
  auto with = [&](std::vector<std::string> head) {
    head.insert(head.end(), common.begin(), common.end());
    return head;
  };
  ASSERT_EQ(run_cli(with({"train", "--heads", "H,T"})).code, 0);
  ASSERT_EQ(run_cli(with({"evaluate"})).code, 0);
  const auto attention = testing::read_text(dir / "out" / "attention.csv");
  EXPECT_NE(attention.find("H+T,"), std::string::npos) << attention;
  EXPECT_NE(attention.find(",0.0000,0.0000\n"), std::string::npos) << attention;
}

TEST(RunConfig, RoundTripsThroughText) {
  cli::RunConfig c;
  c.interactions = "/data/i.csv";
  c.side_fields = {"directors", "actors"};
  c.model.alpha = 0.1 + 0.2;  // not representable in short decimal form
  c.model.heads = HeadSet::parse("H,T,S");
  c.model.period_mode = PeriodMode::kCalendarMonth;
  c.model.time_mode = TimeMode::kCarry;
  c.train.lr = 1.0 / 3.0;
  c.train.seed = 987654321;
  c.betas = {0.0, 0.35, 1.0};
  c.cutoffs = {2, 4};
  c.window = "6";
  c.normalize = true;
  const auto text = cli::to_text(c);
  const auto back = cli::parse_config(text);
  EXPECT_EQ(cli::to_text(back), text);
  EXPECT_EQ(back.model.alpha, c.model.alpha);
  EXPECT_EQ(back.train.lr, c.train.lr);
  EXPECT_EQ(back.model.heads, c.model.heads);
  EXPECT_EQ(back.model.time_mode, c.model.time_mode);
  EXPECT_EQ(back.side_fields, c.side_fields);
  EXPECT_EQ(back.betas, c.betas);
}

TEST(RunConfig, CommentsAndErrors) {
  const auto c = cli::parse_config("# comment\n\nseed = 3  # trailing\n");
  EXPECT_EQ(c.train.seed, 3u);
  EXPECT_THROW(cli::parse_config("seed 3\n"), UsageError);
  EXPECT_THROW(cli::parse_config("batch_size = -1\n"), UsageError);
}

}  // namespace
}  // namespace pare
