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

#include "crowdval/policies.hpp"

#include <gtest/gtest.h>

#include "crowdval/error.hpp"
#include "test_support.hpp"

namespace crowdval {
namespace {

FeatureVector Fv(double cer, double wer, std::optional<Label> silver = std::nullopt) {
  FeatureVector fv;
  fv.cer = cer;
  fv.wer = wer;
  fv.silver = silver;
  return fv;
}

Dataset ThreeTriplets() {
  std::vector<Triplet> ts(3);
  ts[0] = {"a", "en", "turn on", "a.wav", std::nullopt, std::nullopt, 1, Split::kTest};
  ts[1] = {"b", "en", "turn off", "b.wav", Label::kValid, std::nullopt, 1, Split::kTest};
  ts[2] = {"c", "en", "set alarm", "c.wav", std::nullopt, std::nullopt, 1, Split::kTest};
  return Dataset(ts);
}

TEST(Distance, ExactMatchOnlyByDefault) {
  PolicyConfig cfg;
  EXPECT_EQ(DistancePolicy(Fv(0, 0), cfg), Label::kValid);
  EXPECT_EQ(DistancePolicy(Fv(0.1, 0), cfg), Label::kInvalid);
  EXPECT_EQ(DistancePolicy(Fv(0, 5), cfg), Label::kInvalid);
  cfg.cer_max = 10;
  cfg.wer_max = 20;
  EXPECT_EQ(DistancePolicy(Fv(10, 20), cfg), Label::kValid);
  EXPECT_EQ(DistancePolicy(Fv(10.5, 20), cfg), Label::kInvalid);
  FeatureVector no_wer;
  no_wer.cer = 0;
  EXPECT_THROW(DistancePolicy(no_wer, cfg), DataError);
}

TEST(Proposed, TruthTable) {
  struct Case {
    double cer, wer;
    std::optional<Label> silver;
    Label label;
    Stage stage;
  };
  const Case cases[] = {
      {0, 0, std::nullopt, Label::kValid, Stage::kAutomated},
      {0, 0, Label::kValid, Label::kValid, Stage::kAutomated},
      {0, 0, Label::kInvalid, Label::kValid, Stage::kAutomated},
      {5, 0, Label::kValid, Label::kValid, Stage::kHumanFallback},
      {5, 0, Label::kInvalid, Label::kInvalid, Stage::kHumanFallback},
      {0, 9, Label::kValid, Label::kValid, Stage::kHumanFallback},
      {3, 9, Label::kInvalid, Label::kInvalid, Stage::kHumanFallback},
      {3, 9, Label::kValid, Label::kValid, Stage::kHumanFallback},
  };
  for (const auto& c : cases) {
    PolicyDecision d = ProposedPolicy(Fv(c.cer, c.wer), c.silver);
    EXPECT_EQ(d.label, c.label) << c.cer << " " << c.wer;
    EXPECT_EQ(d.stage, c.stage) << c.cer << " " << c.wer;
  }
  EXPECT_THROW(ProposedPolicy(Fv(1, 0), std::nullopt), DataError);
}

TEST(Config, Validation) {
  PolicyConfig cfg;
  cfg.kind = PolicyKind::kTree;
  EXPECT_THROW(ValidatePolicyConfig(cfg), UsageError);
  cfg.kind = PolicyKind::kDistance;
  cfg.cer_max = -1;
  EXPECT_THROW(ValidatePolicyConfig(cfg), UsageError);
  EXPECT_EQ(ParsePolicyKind("proposed"), PolicyKind::kProposed);
  EXPECT_EQ(ParseRouting("live_review"), Routing::kLiveReview);
  EXPECT_FALSE(ParsePolicyKind("magic").has_value());
}

TEST(Run, OfflineSilverMissingListsIds) {
  Dataset ds = ThreeTriplets();
  FeatureTable ft{{"a", Fv(0, 0)}, {"b", Fv(20, 50)}, {"c", Fv(10, 50)}};
  PolicyConfig cfg;
  cfg.kind = PolicyKind::kProposed;
  try {
    RunPolicy(ds, ft, cfg);
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("c"), std::string::npos) << e.what();
  }
  ft["c"].silver = Label::kInvalid;
  RunResult r = RunPolicy(ds, ft, cfg);
  EXPECT_EQ(r.summary.total, 3u);
  EXPECT_EQ(r.summary.automated, 1u);
  EXPECT_EQ(r.summary.human_fallback, 2u);
  EXPECT_EQ(r.summary.invalid, 1u);
  EXPECT_EQ(r.decisions[2].label, Label::kInvalid);
}

TEST(Run, LiveReviewDefersUnlabeledIds) {
  Dataset ds = ThreeTriplets();
  FeatureTable ft{{"a", Fv(0, 0)}, {"b", Fv(20, 50)}, {"c", Fv(10, 50)}};
  PolicyConfig cfg;
  cfg.kind = PolicyKind::kProposed;
  cfg.routing = Routing::kLiveReview;
  RunResult r = RunPolicy(ds, ft, cfg);
  EXPECT_EQ(r.summary.pending_review, std::vector<std::string>{"c"});
  ASSERT_EQ(r.decisions.size(), 2u);
  EXPECT_EQ(r.decisions[1].id, "b");
}

TEST(Run, MissingFeaturesAreAnError) {
  Dataset ds = ThreeTriplets();
  FeatureTable ft{{"a", Fv(0, 0)}};
  EXPECT_THROW(RunPolicy(ds, ft, PolicyConfig{}), DataError);
}

TEST(Run, TreePolicyUsesModel) {
  auto model = std::make_shared<DecisionTreeModel>(LoadModel(test::DataPath("published_tree.json")));
  PolicyConfig cfg;
  cfg.kind = PolicyKind::kTree;
  cfg.model = model;
  Dataset ds = ThreeTriplets();
  FeatureTable ft{{"a", Fv(0, 0, Label::kValid)},
                  {"b", Fv(80, 50, Label::kValid)},
                  {"c", Fv(0, 20, Label::kInvalid)}};
  RunResult r = RunPolicy(ds, ft, cfg);
  EXPECT_EQ(r.decisions[0].label, Label::kValid);
  EXPECT_EQ(r.decisions[1].label, Label::kInvalid);
  EXPECT_EQ(r.decisions[2].label, Label::kInvalid);
}

TEST(Files, DecisionsAndCheckpointRoundTrip) {
  test::TempDir dir;
  std::vector<PolicyDecision> ds{{"a", Label::kValid, Stage::kAutomated, Fv(0, 0)},
                                 {"b", Label::kInvalid, Stage::kHumanFallback, Fv(12.5, 100)}};
  SaveDecisions(ds, dir / "d.tsv");
  auto back = LoadDecisions(dir / "d.tsv");
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[1].id, "b");
  EXPECT_EQ(back[1].label, Label::kInvalid);
  EXPECT_EQ(back[1].stage, Stage::kHumanFallback);
  EXPECT_EQ(*back[1].features.cer, 12.5);

  RunCheckpoint cp{"proposed", 0, 0, {"x", "y"}};
  SaveCheckpoint(cp, dir / "cp.json");
  RunCheckpoint cp2 = LoadCheckpoint(dir / "cp.json");
  EXPECT_EQ(cp2.policy, "proposed");
  EXPECT_EQ(cp2.pending_review, cp.pending_review);
  test::WriteFile(dir / "bad.json", "[]");
  EXPECT_THROW(LoadCheckpoint(dir / "bad.json"), DataError);
}

}  // namespace
}  // namespace crowdval
