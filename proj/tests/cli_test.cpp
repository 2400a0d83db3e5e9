// Copyright 2026 The crowdval Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <nlohmann/json.hpp>
#include <random>

#include "crowdval/corpus.hpp"
#include "crowdval/policies.hpp"
#include "crowdval/textmetrics.hpp"
#include "test_support.hpp"

namespace crowdval {
namespace {

using json = nlohmann::json;
using test::ShellQuote;

std::string Cli(const std::string& args) { return ShellQuote(test::CrowdvalBin()) + " " + args; }

class CliTest : public ::testing::Test {
 protected:
  // Twelve English prompts; the transcription fixture garbles every third.
  void SetUp() override {
    std::string manifest = "id\tlang\tprompt\trecording\tsilver\tgold\titeration\tsplit\n";
    std::string asr, gold, silver;
    const char* prompts[] = {"turn on the lights", "set an alarm", "play some jazz",
                             "what time is it",    "call my mother", "open the door"};
    for (int i = 0; i < 12; ++i) {
      const std::string id = "s" + std::to_string(i);
      const std::string prompt = prompts[i % 6];
      manifest += id + "\ten\t" + prompt + "\t" + id + ".wav\t\t\t1\tunsplit\n";
      const bool bad = i % 3 == 0;
      asr += id + "\t" + (bad ? "something else entirely" : prompt) + "\n";
      gold += id + "\t" + (bad ? "1" : "0") + "\n";
      if (bad) silver += id + "\t" + (i == 3 ? "0" : "1") + "\n";
    }
    test::WriteFile(dir_ / "manifest.tsv", manifest);
    test::WriteFile(dir_ / "asr.tsv", asr);
    test::WriteFile(dir_ / "gold.tsv", gold);
    test::WriteFile(dir_ / "silver.tsv", silver);
    test::WriteFile(dir_ / "backends.toml",
                    "[transcribe]\nmode = \"fixture\"\nbackend_id = \"asr\"\nfixture = \"asr.tsv\"\n");
  }

  std::string Out(const std::string& sub) const { return (dir_ / sub).string(); }

  test::CommandResult Run(const std::string& args) { return test::RunCommand(Cli(args)); }

  test::TempDir dir_;
};

TEST_F(CliTest, HelpAndUsageErrors) {
  EXPECT_EQ(Run("--help").exit_code, 0);
  EXPECT_EQ(Run("no-such-command").exit_code, 2);
  EXPECT_EQ(Run("ingest").exit_code, 2);  // --manifest missing
  EXPECT_EQ(Run("run-policy --dataset x --feature-table y --policy magic").exit_code, 2);
}

TEST_F(CliTest, DataErrorsExitThree) {
  test::WriteFile(dir_ / "bad.tsv", "id\tlang\n");
  auto r = Run("--out-dir " + Out("o") + " ingest --manifest " + Out("bad.tsv"));
  EXPECT_EQ(r.exit_code, 3) << r.output;
  r = Run("--out-dir " + Out("o") + " ingest --manifest " + Out("missing.tsv"));
  EXPECT_EQ(r.exit_code, 3) << r.output;
}

TEST_F(CliTest, IdentityBackendsGiveZeroDistances) {
  auto r = Run("--out-dir " + Out("f") + " features --dataset " + Out("manifest.tsv") +
               " --backends " + ShellQuote(test::DataPath("identity_backends.toml").string()));
  ASSERT_EQ(r.exit_code, 0) << r.output;
  FeatureTable ft = LoadFeatureTable(dir_ / "f" / "features.tsv");
  ASSERT_EQ(ft.size(), 12u);
  for (const auto& [id, fv] : ft) {
    EXPECT_EQ(*fv.cer, 0.0) << id;
    EXPECT_EQ(*fv.wer, 0.0) << id;
    EXPECT_EQ(*fv.per, 0.0) << id;
    EXPECT_EQ(*fv.ter, 0.0) << id;
  }
  json manifest = json::parse(test::ReadFile(dir_ / "f" / "run_manifest.json"));
  EXPECT_EQ(manifest["command"], "features");
  EXPECT_EQ(manifest["seed"], 0);
  EXPECT_EQ(manifest["profile"], "nfkc+lower+strip+collapse");
  EXPECT_FALSE(manifest["inputs"].empty());
  EXPECT_FALSE(manifest["outputs"].empty());
}

TEST_F(CliTest, TrainTreeIsReproducible) {
  ASSERT_EQ(Run("--out-dir " + Out("i") + " ingest --manifest " + Out("manifest.tsv") +
                " --gold " + Out("gold.tsv") + " --silver " + Out("silver.tsv"))
                .exit_code,
            0);
  ASSERT_EQ(Run("--out-dir " + Out("f") + " features --dataset " + Out("i/dataset.tsv") +
                " --backends " + Out("backends.toml") + " --features cer,wer")
                .exit_code,
            0);
  // Samples without a silver label get Valid so the silver feature is total.
  FeatureTable ft = LoadFeatureTable(dir_ / "f" / "features.tsv");
  for (auto& [id, fv] : ft)
    if (!fv.silver) fv.silver = Label::kValid;
  SaveFeatureTable(ft, NormalizationProfile{}, dir_ / "f" / "features.tsv");

  std::string args = " train-tree --dev " + Out("i/dataset.tsv") + " --feature-table " +
                     Out("f/features.tsv") + " --grid default -k 3 --threads ";
  auto a = Run("--seed 7 --out-dir " + Out("t1") + args + "1");
  ASSERT_EQ(a.exit_code, 0) << a.output;
  auto b = Run("--seed 7 --out-dir " + Out("t2") + args + "3");
  ASSERT_EQ(b.exit_code, 0) << b.output;
  json m1 = json::parse(test::ReadFile(dir_ / "t1" / "model.json"));
  json m2 = json::parse(test::ReadFile(dir_ / "t2" / "model.json"));
  EXPECT_EQ(m1, m2);
  EXPECT_EQ(test::ReadFile(dir_ / "t1" / "grid.csv"), test::ReadFile(dir_ / "t2" / "grid.csv"));
}

TEST_F(CliTest, CostReportPrintsSaving) {
  auto r = Run("--out-dir " + Out("c") + " cost-report --baseline " +
               ShellQuote(test::DataPath("ledger_fr.tsv").string()) + " --treatment " +
               ShellQuote(test::DataPath("ledger_de.tsv").string()));
  ASSERT_EQ(r.exit_code, 0) << r.output;
  EXPECT_NE(r.output.find("validation saving: 43.11%"), std::string::npos) << r.output;
  json s = json::parse(test::ReadFile(dir_ / "c" / "savings.json"));
  EXPECT_EQ(s["baseline_participants"], 224);
  EXPECT_EQ(s["treatment_participants"], 120);
}

TEST_F(CliTest, OfflinePipelineEvaluates) {
  ASSERT_EQ(Run("--out-dir " + Out("i") + " ingest --manifest " + Out("manifest.tsv") +
                " --silver " + Out("silver.tsv"))
                .exit_code,
            0);
  ASSERT_EQ(Run("--out-dir " + Out("f") + " features --dataset " + Out("i/dataset.tsv") +
                " --backends " + Out("backends.toml") + " --features cer,wer")
                .exit_code,
            0);
  auto p = Run("--out-dir " + Out("p") + " run-policy --dataset " + Out("i/dataset.tsv") +
               " --feature-table " + Out("f/features.tsv") + " --policy proposed");
  ASSERT_EQ(p.exit_code, 0) << p.output;
  auto d = Run("--out-dir " + Out("d") + " run-policy --dataset " + Out("i/dataset.tsv") +
               " --feature-table " + Out("f/features.tsv") + " --policy distance");
  ASSERT_EQ(d.exit_code, 0) << d.output;
  auto e = Run("--out-dir " + Out("e") + " evaluate --decisions proposed=" +
               Out("p/decisions.tsv") + " --decisions distance=" + Out("d/decisions.tsv") +
               " --gold " + Out("gold.tsv"));
  ASSERT_EQ(e.exit_code, 0) << e.output;
  std::string csv = test::ReadFile(dir_ / "e" / "eval.csv");
  // s3 is invalid but its silver label says valid, so the proposed policy misses it.
  EXPECT_NE(csv.find("proposed,1.000,0.750,0.857,0.000,0.250"), std::string::npos) << csv;
  EXPECT_NE(csv.find("distance,1.000,1.000,1.000,0.000,0.000"), std::string::npos) << csv;

  auto q = Run("--out-dir " + Out("q") + " quality --dataset " + Out("i/dataset.tsv") +
               " --bundles " + Out("f/bundles.jsonl") + " --decisions " + Out("d/decisions.tsv"));
  ASSERT_EQ(q.exit_code, 0) << q.output;
  EXPECT_NE(test::ReadFile(dir_ / "q" / "quality.csv").find("en,8,0.00,0.00"), std::string::npos);
}

TEST_F(CliTest, LiveReviewRoundTrip) {
  // No silver labels: every flagged sample goes to the review service.
  ASSERT_EQ(Run("--out-dir " + Out("i") + " ingest --manifest " + Out("manifest.tsv")).exit_code,
            0);
  ASSERT_EQ(Run("--out-dir " + Out("f") + " features --dataset " + Out("i/dataset.tsv") +
                " --backends " + Out("backends.toml") + " --features cer,wer")
                .exit_code,
            0);
  test::ServeProcess serve(dir_ / "state");
  const std::string url = "http://127.0.0.1:" + std::to_string(serve.port());
  auto p = Run("--out-dir " + Out("p") + " run-policy --dataset " + Out("i/dataset.tsv") +
               " --feature-table " + Out("f/features.tsv") +
               " --policy proposed --routing live_review --review-url " + url);
  ASSERT_EQ(p.exit_code, 0) << p.output;
  RunCheckpoint cp = LoadCheckpoint(dir_ / "p" / "checkpoint.json");
  EXPECT_EQ(cp.pending_review, (std::vector<std::string>{"s0", "s3", "s6", "s9"}));

  for (int n = 0;; ++n) {
    auto next = test::HttpGet(serve.port(), "/api/queue/next?reviewer=rev");
    if (next.status == 204) break;
    ASSERT_EQ(next.status, 200);
    ASSERT_LT(n, 10);
    json item = json::parse(next.body);
    json label = {{"sample_id", item["sample_id"]}, {"reviewer_id", "rev"}, {"label", 1}};
    ASSERT_EQ(test::HttpPost(serve.port(), "/api/labels", label.dump()).status, 200);
  }
  test::WriteFile(dir_ / "review.tsv", test::HttpGet(serve.port(), "/api/export").body);

  auto r = Run("--out-dir " + Out("r") + " run-policy --dataset " + Out("i/dataset.tsv") +
               " --feature-table " + Out("f/features.tsv") + " --resume " +
               Out("p/checkpoint.json") + " --silver " + Out("review.tsv"));
  ASSERT_EQ(r.exit_code, 0) << r.output;
  auto decisions = LoadDecisions(dir_ / "r" / "decisions.tsv");
  ASSERT_EQ(decisions.size(), 12u);
  std::size_t invalid = 0;
  for (const auto& d : decisions) invalid += d.label == Label::kInvalid;
  EXPECT_EQ(invalid, 4u);
  EXPECT_FALSE(std::filesystem::exists(dir_ / "r" / "checkpoint.json"));

  EXPECT_EQ(Run("--out-dir " + Out("x") + " run-policy --dataset " + Out("i/dataset.tsv") +
                " --feature-table " + Out("f/features.tsv") + " --resume " +
                Out("p/checkpoint.json"))
                .exit_code,
            2);
}

}  // namespace
}  // namespace crowdval
