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

// Small text and file helpers shared by the modules.

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace crowdval::util {

std::string_view Trim(std::string_view s);

/// Splits on every occurrence of `sep`; keeps empty fields.
std::vector<std::string> Split(std::string_view s, char sep);

/// Splits on runs of ASCII whitespace; drops empty fields.
std::vector<std::string> SplitWhitespace(std::string_view s);

std::string Join(const std::vector<std::string>& parts, std::string_view sep);

/// Escapes backslash, tab, CR and LF so a value fits in one TSV cell.
std::string EscapeTsv(std::string_view s);
/// Inverse of EscapeTsv. Returns nullopt on a dangling or unknown escape.
std::optional<std::string> UnescapeTsv(std::string_view s);

/// Shortest decimal representation that parses back to the same double.
std::string FormatDouble(double v);
/// Fixed-point rendering with `decimals` digits.
std::string FormatFixed(double v, int decimals);
/// Strict full-string parse; nullopt on trailing garbage or empty input.
std::optional<double> ParseDouble(std::string_view s);
std::optional<long long> ParseInt(std::string_view s);

/// 64-bit FNV-1a.
std::uint64_t Fnv1a64(std::string_view data, std::uint64_t seed = 0xcbf29ce484222325ULL);
std::string Hex64(std::uint64_t v);

std::string ReadFile(const std::filesystem::path& path);
/// Writes via a temporary sibling and rename, so readers never see a torn file.
void WriteFileAtomic(const std::filesystem::path& path, std::string_view content);

/// Lines without their terminators; a final unterminated line is kept.
std::vector<std::string> ReadLines(const std::filesystem::path& path);

/// UTC timestamp, ISO-8601 with seconds.
std::string NowIso8601();

}  // namespace crowdval::util
