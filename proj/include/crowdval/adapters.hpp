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

// Backends that produce transcripts, English translations and phoneme
// sequences. Model inference always happens out of process: a backend is an
// external command, a precomputed cache file, or a fixture lookup table.
//
// Cache files are append-only TSV, one `key<TAB>payload` per line with the
// payload escaped (see util::EscapeTsv). Later lines win over earlier ones.
//
// Keys: transcription is keyed by triplet id. Translation and G2P run once
// over the prompts and once over the hypotheses, keyed "<id>/ref" and
// "<id>/hyp".

#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "crowdval/corpus.hpp"

namespace crowdval {

struct TranscriptBundle {
  std::string id;
  std::optional<std::string> hyp;
  std::optional<std::string> ref_translation;
  std::optional<std::string> hyp_translation;
  std::optional<std::vector<std::string>> ref_phonemes;
  std::optional<std::vector<std::string>> hyp_phonemes;
  std::string backend_id;
  std::string created_at;

  bool operator==(const TranscriptBundle&) const = default;
};

enum class BackendKind { kTranscribe, kTranslate, kG2p };
enum class BackendMode { kExternalCommand, kCacheFile, kFixture };

std::string_view BackendKindName(BackendKind k);

struct BackendSpec {
  BackendKind kind = BackendKind::kTranscribe;
  BackendMode mode = BackendMode::kFixture;
  std::string backend_id;
  /// Shell command with {input}, {output} and optionally {lang}. The input
  /// file holds `key<TAB>text` lines; the command must write the same format
  /// to {output}.
  std::string command_template;
  /// Relative paths resolve against $CROWDVAL_CACHE_DIR when set.
  std::filesystem::path cache_path;
  /// Fixture lookup table: `input<TAB>output` lines.
  std::filesystem::path fixture_path;
  /// Fixture fallback when an input is not in the table: echo the input.
  bool identity = false;
  std::string lang;
};

/// Throws UsageError when the spec is inconsistent (missing placeholder,
/// missing cache path, ...).
void ValidateBackendSpec(const BackendSpec& spec);

struct BackendItem {
  std::string key;
  /// Text, or a recording path for transcription.
  std::string input;
  /// Prompt text; lets an identity fixture transcriber echo the prompt.
  std::string reference;
};

/// Returns one output per item, sorted by key. Results are appended to the
/// cache when one is configured. Errors: BackendError for a failing command,
/// a cache miss (names the keys), a malformed cache line, or orphan outputs.
std::map<std::string, std::string> RunBackend(const std::vector<BackendItem>& batch,
                                              const BackendSpec& spec);

/// Reads a cache file; throws BackendError on a malformed line.
std::map<std::string, std::string> ReadCache(const std::filesystem::path& path);
/// Appends entries; each line goes out in a single write(2) on an O_APPEND
/// descriptor, so concurrent appenders never interleave within a line.
void AppendCache(const std::filesystem::path& path,
                 const std::map<std::string, std::string>& entries);

struct BackendSet {
  std::optional<BackendSpec> transcribe;
  std::optional<BackendSpec> translate;
  std::optional<BackendSpec> g2p;
};

/// Parses a TOML-style backends file with [transcribe], [translate] and [g2p]
/// sections; keys: mode, backend_id, command, cache, fixture, identity, lang.
/// Relative paths resolve against the file's directory.
BackendSet LoadBackendSet(const std::filesystem::path& path);

using Clock = std::function<std::string()>;

/// Runs the configured backends over a dataset. Translation and G2P need a
/// hypothesis, so they are skipped when no transcriber is configured. Bundles
/// are returned in dataset order.
std::vector<TranscriptBundle> AssembleBundles(const Dataset& ds, const BackendSet& specs,
                                              const Clock& clock = {});

/// JSONL, one bundle per line.
std::string FormatBundles(const std::vector<TranscriptBundle>& bundles);
void SaveBundles(const std::vector<TranscriptBundle>& bundles, const std::filesystem::path& path);
/// When `ds` is given, every bundle id must name a triplet (orphans throw).
std::vector<TranscriptBundle> LoadBundles(const std::filesystem::path& path,
                                          const Dataset* ds = nullptr);

}  // namespace crowdval
