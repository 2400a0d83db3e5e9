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

// Text normalization, Levenshtein alignment and the edit-distance rates
// (CER, WER, PER, TER) used as validation features.
//
// All rates are on the percent scale: 100 * (S + D + I) / max(ref_len, 1).
// A rate of 0 means the token sequences are identical; rates may exceed 100
// when the hypothesis is much longer than the reference.

#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "crowdval/corpus.hpp"

namespace crowdval {

struct NormalizationProfile {
  enum class Form { kNfc, kNfkc };
  Form unicode_form = Form::kNfkc;
  bool lowercase = true;
  bool strip_punctuation = true;
  bool collapse_whitespace = true;

  bool operator==(const NormalizationProfile&) const = default;
};

/// "nfkc+lower+strip+collapse" style; "none" disables the optional steps.
std::string ProfileToString(const NormalizationProfile& p);
/// Throws UsageError on an unknown token.
NormalizationProfile ParseProfile(std::string_view s);

/// Idempotent for every profile.
std::string Normalize(std::string_view text, const NormalizationProfile& profile = {});

/// Unicode scalar values of a UTF-8 string. Invalid bytes map to U+FFFD.
std::vector<char32_t> CodePoints(std::string_view utf8);

struct EditCounts {
  std::size_t substitutions = 0;
  std::size_t deletions = 0;
  std::size_t insertions = 0;
  std::size_t ref_len = 0;

  std::size_t distance() const { return substitutions + deletions + insertions; }
  /// 100 * distance / max(ref_len, 1).
  double rate() const;

  bool operator==(const EditCounts&) const = default;
  EditCounts& operator+=(const EditCounts& o) {
    substitutions += o.substitutions;
    deletions += o.deletions;
    insertions += o.insertions;
    ref_len += o.ref_len;
    return *this;
  }
};

/// Minimal unit-cost Levenshtein alignment of `hyp` against `ref`. The
/// backtrace prefers match/substitution, then deletion, then insertion, so
/// the decomposition is deterministic.
template <typename T>
EditCounts Align(std::span<const T> ref, std::span<const T> hyp) {
  const std::size_t n = ref.size();
  const std::size_t m = hyp.size();
  // cost[i][j]: distance between ref[0, i) and hyp[0, j).
  std::vector<std::uint32_t> cost((n + 1) * (m + 1));
  auto at = [m](std::size_t i, std::size_t j) { return i * (m + 1) + j; };
  for (std::size_t i = 0; i <= n; ++i) cost[at(i, 0)] = static_cast<std::uint32_t>(i);
  for (std::size_t j = 0; j <= m; ++j) cost[at(0, j)] = static_cast<std::uint32_t>(j);
  for (std::size_t i = 1; i <= n; ++i) {
    for (std::size_t j = 1; j <= m; ++j) {
      std::uint32_t diag = cost[at(i - 1, j - 1)] + (ref[i - 1] == hyp[j - 1] ? 0u : 1u);
      std::uint32_t del = cost[at(i - 1, j)] + 1;
      std::uint32_t ins = cost[at(i, j - 1)] + 1;
      cost[at(i, j)] = std::min(diag, std::min(del, ins));
    }
  }
  EditCounts out;
  out.ref_len = n;
  std::size_t i = n, j = m;
  while (i > 0 || j > 0) {
    const std::uint32_t here = cost[at(i, j)];
    if (i > 0 && j > 0) {
      const bool same = ref[i - 1] == hyp[j - 1];
      if (cost[at(i - 1, j - 1)] + (same ? 0u : 1u) == here) {
        if (!same) ++out.substitutions;
        --i;
        --j;
        continue;
      }
    }
    if (i > 0 && cost[at(i - 1, j)] + 1 == here) {
      ++out.deletions;
      --i;
    } else {
      ++out.insertions;
      --j;
    }
  }
  return out;
}

template <typename T>
EditCounts Align(const std::vector<T>& ref, const std::vector<T>& hyp) {
  return Align(std::span<const T>(ref), std::span<const T>(hyp));
}

/// Character tokens: code points of the normalized text, spaces included.
std::vector<char32_t> CharTokens(std::string_view text, const NormalizationProfile& profile);
/// Word tokens: whitespace split of the normalized text.
std::vector<std::string> WordTokens(std::string_view text, const NormalizationProfile& profile);

EditCounts CharEdits(std::string_view ref, std::string_view hyp,
                     const NormalizationProfile& profile = {});
EditCounts WordEdits(std::string_view ref, std::string_view hyp,
                     const NormalizationProfile& profile = {});

double Cer(std::string_view ref, std::string_view hyp, const NormalizationProfile& profile = {});
double Wer(std::string_view ref, std::string_view hyp, const NormalizationProfile& profile = {});
/// Word-level edit rate between the English translations of prompt and
/// hypothesis. No shift moves.
double Ter(std::string_view ref_translation, std::string_view hyp_translation,
           const NormalizationProfile& profile = {});
/// Phoneme tokens are compared verbatim; no normalization applies.
double Per(std::span<const std::string> ref_phonemes, std::span<const std::string> hyp_phonemes);

enum class Feature { kCer = 0, kWer = 1, kPer = 2, kTer = 3, kSilver = 4 };
inline constexpr std::array<Feature, 5> kAllFeatures = {Feature::kCer, Feature::kWer,
                                                        Feature::kPer, Feature::kTer,
                                                        Feature::kSilver};

std::string_view FeatureName(Feature f);
std::optional<Feature> ParseFeature(std::string_view s);
/// Comma-separated list, e.g. "cer,wer,silver". Throws UsageError.
std::vector<Feature> ParseFeatureList(std::string_view s);
std::string FeatureListToString(const std::vector<Feature>& fs);

/// Percent-scale scores plus the crowd label. Absent members were not
/// requested or not available.
struct FeatureVector {
  std::optional<double> cer;
  std::optional<double> wer;
  std::optional<double> per;
  std::optional<double> ter;
  std::optional<Label> silver;

  /// silver is reported as 0/1.
  std::optional<double> Get(Feature f) const;
  void Set(Feature f, double v);

  bool operator==(const FeatureVector&) const = default;
};

struct TranscriptBundle;  // adapters.hpp

/// Computes the requested metric features from a triplet and its bundle;
/// silver is copied from the triplet when present. Throws DataError naming the
/// feature ("per", ...) whose bundle component is missing.
FeatureVector BuildFeatures(const Triplet& triplet, const TranscriptBundle& bundle,
                            const NormalizationProfile& profile,
                            const std::vector<Feature>& requested = {
                                Feature::kCer, Feature::kWer, Feature::kPer, Feature::kTer});

/// id → features, in id order.
using FeatureTable = std::map<std::string, FeatureVector>;

/// TSV: "# profile: ..." comment line, then header id cer wer per ter silver.
void SaveFeatureTable(const FeatureTable& table, const NormalizationProfile& profile,
                      const std::filesystem::path& path);
std::string FormatFeatureTable(const FeatureTable& table, const NormalizationProfile& profile);
FeatureTable LoadFeatureTable(const std::filesystem::path& path);

}  // namespace crowdval
