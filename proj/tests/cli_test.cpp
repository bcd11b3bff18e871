// Copyright 2026 The MemAudit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include "memaudit/cli.hpp"

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "test_util.hpp"

namespace memaudit {
namespace {

namespace fs = std::filesystem;

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = dispatch(std::move(args), out, err);
  return {code, out.str(), err.str()};
}

std::vector<Json> lines(const std::string& s) {
  std::istringstream in(s);
  return read_records(in);
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("memaudit_cli_" + std::to_string(::getpid()));
    fs::create_directories(dir_);
    std::mt19937_64 rng(1);
    write("low.jsonl", testing::make_set(ScoreKind::kLoss, testing::uniform_sample(rng, 300, 0.0, 1.0), "l",
                                         std::vector<bool>(300, true)));
    write("low2.jsonl", testing::make_set(ScoreKind::kLoss, testing::uniform_sample(rng, 300, 0.0, 1.0), "k",
                                          std::vector<bool>(300, false)));
    write("high.jsonl", testing::make_set(ScoreKind::kLoss, testing::uniform_sample(rng, 300, 0.5, 1.5), "h",
                                          std::vector<bool>(300, false)));
    write("conf.jsonl", testing::make_set(ScoreKind::kConfidence, testing::uniform_sample(rng, 30), "c"));
    std::ofstream(path("broken.jsonl")) << "{\"not\": \"a score file\"}\n";
  }
  void TearDown() override { fs::remove_all(dir_); }

  void write(const std::string& name, const ScoreSet& s) { write_scores(s, path(name)); }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  fs::path dir_;
};

TEST_F(CliTest, HelpAndUsageErrors) {
  EXPECT_EQ(run({"--help"}).code, kExitOk);
  EXPECT_NE(run({"--help"}).out.find("leak-detect"), std::string::npos);
  EXPECT_EQ(run({}).code, kExitUsage);
  EXPECT_EQ(run({"frobnicate"}).code, kExitUsage);
  EXPECT_EQ(run({"capacity", "--params", "10", "--pool", "1024", "--bogus"}).code, kExitUsage);
  EXPECT_EQ(run({"capacity", "--params", "10"}).code, kExitUsage);
  EXPECT_EQ(run({"ks-test", "--a", path("low.jsonl"), "--b", path("low.jsonl"), "--alpha", "2"}).code, kExitUsage);
}

TEST_F(CliTest, KsTestVerdicts) {
  const auto same = run({"ks-test", "--a", path("low.jsonl"), "--b", path("low2.jsonl")});
  EXPECT_EQ(same.code, kExitOk) << same.err;
  const auto rec = lines(same.out);
  ASSERT_EQ(rec.size(), 1u);
  EXPECT_EQ(rec[0].at("type"), "ks_test");
  EXPECT_EQ(rec[0].at("alpha"), 0.05);
  EXPECT_EQ(run({"ks-test", "--a", path("low.jsonl"), "--b", path("high.jsonl")}).code, kExitVerdict);
}

TEST_F(CliTest, LeakDetect) {
  const auto r = run({"leak-detect", "--val", path("high.jsonl"), "--test", path("low.jsonl"), "--pretty"});
  EXPECT_EQ(r.code, kExitVerdict);
  EXPECT_EQ(lines(r.out)[0].at("verdict"), "leakage_detected");
  EXPECT_EQ(lines(r.out)[0].at("alpha"), 0.01);
  EXPECT_NE(r.err.find("verdict"), std::string::npos);  // --pretty table
  EXPECT_EQ(run({"leak-detect", "--val", path("low.jsonl"), "--test", path("low.jsonl")}).code, kExitOk);
}

TEST_F(CliTest, KindChecks) {
  EXPECT_EQ(run({"ks-test", "--a", path("low.jsonl"), "--b", path("low.jsonl"), "--kind", "confidence"}).code,
            kExitUsage);
  EXPECT_EQ(run({"ks-test", "--a", path("low.jsonl"), "--b", path("conf.jsonl")}).code, kExitUsage);
  EXPECT_EQ(run({"ks-test", "--a", path("low.jsonl"), "--b", path("low.jsonl"), "--kind", "probability"}).code,
            kExitUsage);
}

TEST_F(CliTest, SourceInfer) {
  const auto r = run({"source-infer", "--batch", path("high.jsonl"), "--ref1", path("low.jsonl"), "--ref2",
                      path("high.jsonl")});
  EXPECT_EQ(r.code, kExitOk);
  EXPECT_EQ(lines(r.out)[0].at("assigned"), "source2");
}

TEST_F(CliTest, Attacks) {
  const auto b = run({"attack-bayes", "--members", path("low.jsonl"), "--nonmembers", path("high.jsonl")});
  EXPECT_EQ(b.code, kExitOk) << b.err;
  const auto br = lines(b.out);
  ASSERT_EQ(br.size(), 601u);
  EXPECT_EQ(br[0].at("accuracy"), 1.0);

  const auto m = run({"attack-mat", "--members", path("low.jsonl"), "--nonmembers", path("high.jsonl")});
  const auto mr = lines(m.out);
  EXPECT_EQ(mr[0].at("type"), "mat_model");
  EXPECT_EQ(mr[1].at("accuracy"), mr[0].at("est_accuracy"));

  const auto s = run({"attack-mat", "--members", path("low.jsonl"), "--nonmembers", path("high.jsonl"),
                      "--fit-fraction", "0.5", "--seed", "3"});
  EXPECT_EQ(s.code, kExitOk);
  EXPECT_EQ(lines(s.out)[1].at("count"), 300);

  const auto missing = run({"attack-bayes", "--members", path("nope.jsonl"), "--nonmembers", path("high.jsonl")});
  EXPECT_EQ(missing.code, kExitUsage);
  EXPECT_NE(missing.err.find("nope.jsonl"), std::string::npos);
}

TEST_F(CliTest, Capacity) {
  const auto r = run({"capacity", "--params", "90000", "--pool", "15000000", "--n", "1000"});
  EXPECT_EQ(r.code, kExitOk);
  const auto rec = lines(r.out);
  EXPECT_EQ(rec[0].at("n_star"), 7223);
  EXPECT_EQ(rec[0].at("n_star_2bits"), 15897);
  EXPECT_EQ(rec[1].at("type"), "capacity_bits");
  EXPECT_EQ(run({"capacity", "--params", "100000", "--pool", "100"}).code, kExitUsage);
}

TEST_F(CliTest, ValidateScores) {
  const auto ok = run({"validate-scores", "--scores", path("conf.jsonl")});
  EXPECT_EQ(ok.code, kExitOk);
  EXPECT_EQ(lines(ok.out)[0].at("count"), 30);
  EXPECT_EQ(lines(ok.out)[0].at("kind"), "confidence");
  const auto bad = run({"validate-scores", "--scores", path("broken.jsonl")});
  EXPECT_EQ(bad.code, kExitUsage);
  EXPECT_NE(bad.err.find("line 1"), std::string::npos);
}

TEST_F(CliTest, DedupPlantedAndDescriptorFile) {
  const std::string csv = path("groups.csv"), desc = path("desc.bin");
  const auto r = run({"dedup", "--planted", "--planted-size", "800", "--planted-groups", "60", "--out", csv,
                      "--write-descriptors", desc, "--histogram"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const auto rec = lines(r.out);
  EXPECT_EQ(rec[0].at("type"), "dedup");
  EXPECT_EQ(rec[0].at("images"), 800);
  std::size_t hist_total = 0;
  for (std::size_t i = 1; i < rec.size(); ++i) hist_total += rec[i].at("count").get<std::size_t>();
  EXPECT_EQ(hist_total, 800u);

  const auto again = run({"dedup", "--descriptors", desc, "--threshold", rec[0].at("threshold").dump()});
  EXPECT_EQ(lines(again.out)[0].at("groups"), rec[0].at("groups"));

  std::ifstream f(csv);
  std::string header;
  std::getline(f, header);
  EXPECT_EQ(header, "id,group_id,is_representative");
  EXPECT_EQ(run({"dedup"}).code, kExitUsage);
  EXPECT_EQ(run({"dedup", "--planted", "--descriptors", desc}).code, kExitUsage);
}

TEST_F(CliTest, ExperimentSpecs) {
  const std::string spec = path("mem.spec");
  std::ofstream(spec) << "kind = memorize\nmodel = t1_scaled:2\npool_size = 2000\ngrid = 6\n"
                         "augmentations = none\nseeds = 1\ntrain.max_epochs = 2\n";
  const std::string out = path("mem_out");
  const auto r = run({"memorize", "--spec", spec, "--out", out});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const auto rec = lines(r.out);
  ASSERT_EQ(rec.size(), 2u);
  EXPECT_EQ(rec[0].at("type"), "memorization_curve");
  EXPECT_EQ(rec[1].at("n"), 6);
  EXPECT_TRUE(fs::exists(fs::path(out) / "report.jsonl"));

  EXPECT_EQ(run({"experiment", "--spec", spec}).code, kExitOk);
  EXPECT_EQ(run({"shadow", "--spec", spec}).code, kExitUsage);
  EXPECT_EQ(run({"memorize"}).code, kExitUsage);
  std::ofstream(path("bad.spec")) << "kind = memorize\nwhat = 1\n";
  const auto bad = run({"memorize", "--spec", path("bad.spec")});
  EXPECT_EQ(bad.code, kExitUsage);
  EXPECT_NE(bad.err.find("line 2"), std::string::npos);
}

}  // namespace
}  // namespace memaudit
