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

// Scoring of policy decisions against gold labels. The positive class is
// Invalid everywhere: a type-1 error flags a valid sample (costs a
// re-recording), a type-2 error passes an invalid one (costs data quality).

#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "crowdval/adapters.hpp"
#include "crowdval/corpus.hpp"
#include "crowdval/policies.hpp"
#include "crowdval/textmetrics.hpp"

namespace crowdval {

struct ConfusionMatrix {
  std::size_t tp = 0;  // gold invalid, predicted invalid
  std::size_t fp = 0;  // gold valid, predicted invalid
  std::size_t fn = 0;  // gold invalid, predicted valid
  std::size_t tn = 0;  // gold valid, predicted valid

  std::size_t total() const { return tp + fp + fn + tn; }
  bool operator==(const ConfusionMatrix&) const = default;
};

/// Throws DataError listing decision ids without a gold label.
ConfusionMatrix Confusion(const std::vector<PolicyDecision>& decisions, const LabelMap& gold);
ConfusionMatrix Confusion(std::span<const Label> gold, std::span<const Label> predicted);

struct EvalRow {
  std::string policy;
  double precision = 0;
  double recall = 0;
  double f1 = 0;
  double type1 = 0;
  double type2 = 0;
  /// Names of rates whose denominator was zero (reported as 0).
  std::vector<std::string> degenerate;
};

EvalRow Metrics(const ConfusionMatrix& cm, std::string policy = {});

struct KappaResult {
  double kappa = 0;
  /// Chance agreement was 1, so kappa was defined by convention.
  bool degenerate = false;
};

/// Cohen's kappa for two binary labelings of equal length >= 1.
KappaResult CohenKappa(std::span<const Label> a, std::span<const Label> b);

/// policy,precision,recall,f1,type1,type2 with three decimals.
std::string FormatEvalRows(const std::vector<EvalRow>& rows);
std::vector<EvalRow> ParseEvalRows(std::string_view csv);

struct Zone {
  double type1_max = 1.0;
  double type2_max = 1.0;
};

/// policy,type1,type2,f1 for external plotting; rows outside `zone` dropped.
std::string TradeoffCsv(const std::vector<EvalRow>& rows, std::optional<Zone> zone = {});

struct QualityReport {
  std::string lang;
  std::size_t samples = 0;
  double wer = 0;
  double cer = 0;
  EditCounts word_edits;
  EditCounts char_edits;
};

/// Corpus-level rates over the retained triplets: 100 * total edits / total
/// reference length (not a mean of per-sample rates). `retained` selects ids;
/// empty means every triplet. Throws DataError on an empty retained set or a
/// retained id without a hypothesis.
QualityReport DatasetQuality(const Dataset& ds, const std::vector<TranscriptBundle>& bundles,
                             const NormalizationProfile& profile = {},
                             const std::vector<std::string>& retained = {});

/// lang,samples,wer,cer with two decimals.
std::string FormatQualityReport(const std::vector<QualityReport>& reports);

/// Every integer confusion matrix with the given total and positive count
/// whose five rates round (to `decimals`) to the targets.
struct RateTargets {
  double precision, recall, f1, type1, type2;
};
std::vector<ConfusionMatrix> SolveConfusion(const RateTargets& targets, std::size_t total,
                                            std::size_t positives, int decimals = 3);

}  // namespace crowdval
