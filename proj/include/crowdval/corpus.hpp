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

// Datasets of (prompt, recording, label) triplets.
//
// A triplet is the unit of validation: the text a speaker was asked to read,
// a reference to the recording they produced, the crowd ("silver") judgment
// and, for evaluation subsets, the expert ("gold") judgment. Recordings are
// only referenced here; nothing in this module opens audio.

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <variant>
#include <vector>

namespace crowdval {

/// Numeric encoding is fixed: 0 = valid, 1 = invalid.
enum class Label : int { kValid = 0, kInvalid = 1 };

std::string_view LabelName(Label l);
int LabelValue(Label l);
/// Accepts "0"/"1" only.
std::optional<Label> ParseLabel(std::string_view s);

enum class Split { kDev, kTest, kUnsplit };
std::string_view SplitName(Split s);
std::optional<Split> ParseSplit(std::string_view s);

struct Triplet {
  std::string id;
  std::string lang;
  std::string prompt;
  std::string recording;
  std::optional<Label> silver;
  std::optional<Label> gold;
  int iteration = 1;  // 1 or 2
  Split split = Split::kUnsplit;

  bool operator==(const Triplet&) const = default;
};

class Dataset {
 public:
  Dataset() = default;
  /// Validates invariants (unique ids, shared lang, iteration range,
  /// nonempty prompt); throws DataError otherwise.
  explicit Dataset(std::vector<Triplet> triplets,
                   std::map<std::string, std::string> provenance = {});

  const std::vector<Triplet>& triplets() const { return triplets_; }
  const std::string& lang() const { return lang_; }
  const std::map<std::string, std::string>& provenance() const { return provenance_; }
  std::map<std::string, std::string>& provenance() { return provenance_; }

  std::size_t size() const { return triplets_.size(); }
  bool empty() const { return triplets_.empty(); }

  const Triplet* Find(std::string_view id) const;
  /// Triplets whose split field equals `s`, in dataset order.
  Dataset Subset(Split s) const;

 private:
  std::vector<Triplet> triplets_;
  std::string lang_;
  std::map<std::string, std::string> provenance_;
  std::unordered_map<std::string, std::size_t> index_;
};

enum class ManifestFormat { kTsv, kJsonl };
std::optional<ManifestFormat> ParseManifestFormat(std::string_view s);
/// Picks the format from the file extension (.jsonl → JSONL, else TSV).
ManifestFormat GuessManifestFormat(const std::filesystem::path& path);

/// TSV header: id lang prompt recording silver gold iteration split. Empty
/// cell = absent. Cells use backslash escapes for tab/newline.
Dataset LoadManifest(const std::filesystem::path& path, ManifestFormat format);
void SaveManifest(const Dataset& ds, const std::filesystem::path& path, ManifestFormat format);

/// Parses a manifest already in memory; `source` is used in error messages.
Dataset ParseManifest(std::string_view content, ManifestFormat format,
                      std::string_view source = "<memory>");
std::string FormatManifest(const Dataset& ds, ManifestFormat format);

enum class LabelKind { kSilver, kGold };

/// id → label, as read from a label file (TSV id<TAB>{0|1}; '#' lines are
/// comments).
using LabelMap = std::map<std::string, Label>;
LabelMap LoadLabelFile(const std::filesystem::path& path);
void SaveLabelFile(const LabelMap& labels, const std::filesystem::path& path,
                   std::string_view header_comment = {});

struct AttachResult {
  Dataset dataset;
  std::vector<std::string> unmatched_ids;
  std::size_t matched = 0;
};

/// Sets the silver or gold label of every triplet named in `labels`. Ids not
/// in the dataset are collected as unmatched; under `strict` they throw.
AttachResult AttachLabels(const Dataset& ds, const LabelMap& labels, LabelKind kind,
                          bool strict = false);
AttachResult AttachLabels(const Dataset& ds, const std::filesystem::path& labels,
                          LabelKind kind, bool strict = false);

struct ExplicitSplit {
  std::vector<std::string> first_ids;
  std::vector<std::string> second_ids;
};

struct RatioSplit {
  double first_fraction = 0.5;
  std::uint64_t seed = 0;
};

using SplitSpec = std::variant<ExplicitSplit, RatioSplit>;

/// Splits into (dev, test): the first output has its split field set to dev,
/// the second to test. Explicit lists must be disjoint; ids missing from the
/// dataset are an error. Ratio splits are a seeded permutation, so the same
/// seed always yields the same partition.
std::pair<Dataset, Dataset> SplitDataset(const Dataset& ds, const SplitSpec& spec);

}  // namespace crowdval
