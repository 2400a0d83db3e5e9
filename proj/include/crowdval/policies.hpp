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

// Validation policies: the distance rule, the decision-tree rule, and the
// two-step rule that accepts exact transcripts automatically and defers
// everything else to a human (silver) label.

#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "crowdval/corpus.hpp"
#include "crowdval/dtree.hpp"
#include "crowdval/textmetrics.hpp"

namespace crowdval {

enum class PolicyKind { kDistance, kTree, kProposed };
enum class Routing { kOfflineSilver, kLiveReview };
enum class Stage { kAutomated, kHumanFallback };

std::string_view PolicyKindName(PolicyKind k);
std::optional<PolicyKind> ParsePolicyKind(std::string_view s);
std::string_view RoutingName(Routing r);
std::optional<Routing> ParseRouting(std::string_view s);
std::string_view StageName(Stage s);

struct PolicyConfig {
  PolicyKind kind = PolicyKind::kDistance;
  double cer_max = 0.0;
  double wer_max = 0.0;
  std::shared_ptr<const DecisionTreeModel> model;
  Routing routing = Routing::kOfflineSilver;
};

/// Throws UsageError: tree needs a model, thresholds must be >= 0.
void ValidatePolicyConfig(const PolicyConfig& cfg);

struct PolicyDecision {
  std::string id;
  Label label = Label::kValid;
  Stage stage = Stage::kAutomated;
  FeatureVector features;
};

/// Valid iff cer <= cer_max and wer <= wer_max. Throws DataError when either
/// score is absent.
Label DistancePolicy(const FeatureVector& fv, const PolicyConfig& cfg);
Label TreePolicy(const FeatureVector& fv, const DecisionTreeModel& model);
/// Step 1: the distance rule; a pass is final. Step 2: the silver label.
/// Throws DataError if step 2 is reached without a silver label.
PolicyDecision ProposedPolicy(const FeatureVector& fv, std::optional<Label> silver,
                              const PolicyConfig& cfg = {});

struct RunSummary {
  std::size_t total = 0;
  std::size_t automated = 0;
  std::size_t human_fallback = 0;
  std::size_t valid = 0;
  std::size_t invalid = 0;
  /// Flagged ids that still need a human label (live_review routing only).
  std::vector<std::string> pending_review;
};

struct RunResult {
  std::vector<PolicyDecision> decisions;  // dataset order; pending ids omitted
  RunSummary summary;
};

/// Applies `cfg` to every triplet. Features come from `features` (keyed by
/// id); the silver label is taken from the triplet, falling back to the
/// feature vector. Errors: ids without features (listed); for the proposed
/// policy under offline routing, flagged ids without silver labels (listed).
/// Under live_review routing those ids go to summary.pending_review instead.
RunResult RunPolicy(const Dataset& ds, const FeatureTable& features, const PolicyConfig& cfg);

/// TSV: id label stage cer wer per ter.
std::string FormatDecisions(const std::vector<PolicyDecision>& decisions);
void SaveDecisions(const std::vector<PolicyDecision>& decisions, const std::filesystem::path& path);
std::vector<PolicyDecision> LoadDecisions(const std::filesystem::path& path);

/// Run checkpoint for a suspended live-review run.
struct RunCheckpoint {
  std::string policy;
  double cer_max = 0.0;
  double wer_max = 0.0;
  std::vector<std::string> pending_review;
};
void SaveCheckpoint(const RunCheckpoint& cp, const std::filesystem::path& path);
RunCheckpoint LoadCheckpoint(const std::filesystem::path& path);

}  // namespace crowdval
