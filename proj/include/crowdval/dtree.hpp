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

// CART-style binary decision trees over FeatureVectors, and a grid search
// with stratified k-fold cross-validation that selects by F1 on the Invalid
// class.
//
// Fitting rules (these are the contract the tests check against):
//  - A node becomes a leaf when depth == max_depth, when it holds fewer than
//    min_samples_split rows, or when it is pure.
//  - Candidate thresholds are midpoints between consecutive distinct sorted
//    values of a feature, restricted to cuts that leave at least
//    min_samples_leaf rows on each side. Rows with value <= threshold go left.
//  - splitter=best scans every candidate of every feature; splitter=random
//    draws one candidate per feature as `engine() % count` from a
//    std::mt19937_64 seeded with the fit seed. Draws happen in preorder over
//    nodes and in feature_set order within a node, only for nodes that pass
//    the leaf checks and features that have at least one candidate.
//  - The chosen split minimizes the weighted child impurity; a candidate
//    replaces the incumbent only if it is lower by more than 1e-12, so ties
//    keep the earliest candidate (feature_set order, then ascending threshold).
//  - class_weight=balanced weighs class c by n / (2 * n_c).
//  - A leaf predicts the weighted majority class; ties go to Invalid.

#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "crowdval/corpus.hpp"
#include "crowdval/textmetrics.hpp"

namespace crowdval {

enum class Splitter { kBest, kRandom };
enum class Criterion { kGini, kEntropy, kLogLoss };
enum class ClassWeight { kBalanced, kNone };

std::string_view SplitterName(Splitter s);
std::string_view CriterionName(Criterion c);
std::string_view ClassWeightName(ClassWeight w);

struct Hyperparams {
  int max_depth = 3;
  Splitter splitter = Splitter::kBest;
  Criterion criterion = Criterion::kGini;
  ClassWeight class_weight = ClassWeight::kNone;
  int min_samples_split = 3;
  int min_samples_leaf = 1;

  bool operator==(const Hyperparams&) const = default;
};

/// The search space: max_depth {1,2,3} x splitter {best,random} x criterion
/// {gini,entropy,log_loss} x class_weight {balanced,none} x min_samples_split
/// {3,5,7,9,11,13} x min_samples_leaf {1,3,5,7,9,11,13}, nested in that order
/// (min_samples_leaf varies fastest). 1512 points.
std::vector<Hyperparams> FullGrid();

struct TrainingRow {
  FeatureVector features;
  Label gold = Label::kValid;
};

struct TreeNode {
  bool leaf = true;
  // Internal nodes.
  Feature feature = Feature::kCer;
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  // Leaves.
  Label label = Label::kInvalid;
  // All nodes. class_counts are unweighted training rows {valid, invalid}.
  std::size_t sample_count = 0;
  std::array<std::size_t, 2> class_counts{0, 0};

  bool operator==(const TreeNode&) const = default;
};

class DecisionTreeModel {
 public:
  DecisionTreeModel() = default;
  /// `nodes` must be in preorder with node 0 as the root; internal nodes name
  /// their children by index. Throws DataError if the structure is not a tree
  /// or references a feature outside `feature_set`.
  DecisionTreeModel(std::vector<TreeNode> nodes, std::vector<Feature> feature_set);

  const std::vector<TreeNode>& nodes() const { return nodes_; }
  const std::vector<Feature>& feature_set() const { return feature_set_; }

  Hyperparams hyperparams;
  /// Mean cross-validated F1 when the model came out of a grid search.
  std::optional<double> cv_f1;
  std::uint64_t seed = 0;
  std::string train_fingerprint;
  std::vector<std::string> warnings;

  /// Routes `fv` from the root; throws DataError if a feature tested on the
  /// path is absent.
  Label Predict(const FeatureVector& fv) const;
  /// Index of the leaf `fv` lands in.
  int LeafIndex(const FeatureVector& fv) const;

  int Depth() const;
  std::size_t InternalCount() const;
  std::size_t LeafCount() const;

 private:
  std::vector<TreeNode> nodes_;
  std::vector<Feature> feature_set_;
};

/// Throws DataError on empty input or on rows missing a feature from
/// `feature_set`. Single-class input yields a one-leaf tree and a warning.
DecisionTreeModel Fit(std::span<const TrainingRow> rows, const Hyperparams& hp,
                      const std::vector<Feature>& feature_set, std::uint64_t seed);

inline Label Predict(const DecisionTreeModel& model, const FeatureVector& fv) {
  return model.Predict(fv);
}

/// Hash of the training rows (feature values in feature_set order + gold).
std::string TrainingFingerprint(std::span<const TrainingRow> rows,
                                const std::vector<Feature>& feature_set);

/// F1 with Invalid as the positive class; 0 when there is no true positive.
double F1Invalid(std::span<const Label> gold, std::span<const Label> predicted);

/// Stratified k-fold assignment. Each class is shuffled (Fisher-Yates with
/// mt19937_64(seed), `engine() % i`) and dealt round-robin; the second class
/// continues from the fold after the first class's last one. Returns the row
/// indices of each held-out fold, ascending.
std::vector<std::vector<std::size_t>> StratifiedFolds(std::span<const Label> labels, int k,
                                                      std::uint64_t seed);

struct GridRow {
  std::size_t grid_index = 0;
  Hyperparams hp;
  std::vector<double> fold_f1;
  double mean_f1 = 0.0;
  double std_f1 = 0.0;
  /// Held-out folds lacking a class; their F1 is counted as 0.
  int degenerate_folds = 0;
  /// Nodes of the tree refit on all rows with this config.
  std::size_t node_count = 0;
  std::size_t rank = 0;
};

struct GridSearchResult {
  DecisionTreeModel model;
  std::vector<GridRow> table;  // grid order
  std::size_t best_index = 0;
};

/// Evaluates every grid point by mean k-fold F1 and refits the winner on all
/// rows. Ties: higher mean F1, then fewer nodes, then grid order.
/// `threads` <= 0 uses the hardware concurrency.
GridSearchResult GridSearchCv(std::span<const TrainingRow> rows,
                              const std::vector<Hyperparams>& grid,
                              const std::vector<Feature>& feature_set, int k,
                              std::uint64_t seed, int threads = 0);

std::string FormatGridTable(const std::vector<GridRow>& table);

inline constexpr int kModelFormatVersion = 1;

std::string ModelToJson(const DecisionTreeModel& model);
DecisionTreeModel ModelFromJson(std::string_view json);
void SaveModel(const DecisionTreeModel& model, const std::filesystem::path& path);
DecisionTreeModel LoadModel(const std::filesystem::path& path);

}  // namespace crowdval
