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

#include "crowdval/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <sstream>

#include "crowdval/error.hpp"
#include "crowdval/util.hpp"
#include "json.hpp"

namespace crowdval {

namespace {

constexpr const char* kModule = "corpus";
const std::vector<std::string> kColumns = {"id",     "lang", "prompt",    "recording",
                                           "silver", "gold", "iteration", "split"};

[[noreturn]] void Fail(const std::string& msg) { throw DataError(kModule, msg); }

std::string RowPrefix(std::string_view source, std::size_t row) {
  std::ostringstream ss;
  ss << source << ": row " << row << ": ";
  return ss.str();
}

}  // namespace

std::string_view LabelName(Label l) { return l == Label::kValid ? "valid" : "invalid"; }
int LabelValue(Label l) { return static_cast<int>(l); }

std::optional<Label> ParseLabel(std::string_view s) {
  s = util::Trim(s);
  if (s == "0") return Label::kValid;
  if (s == "1") return Label::kInvalid;
  return std::nullopt;
}

std::string_view SplitName(Split s) {
  switch (s) {
    case Split::kDev: return "dev";
    case Split::kTest: return "test";
    case Split::kUnsplit: return "unsplit";
  }
  return "unsplit";
}

std::optional<Split> ParseSplit(std::string_view s) {
  s = util::Trim(s);
  if (s == "dev") return Split::kDev;
  if (s == "test") return Split::kTest;
  if (s == "unsplit" || s.empty()) return Split::kUnsplit;
  return std::nullopt;
}

Dataset::Dataset(std::vector<Triplet> triplets, std::map<std::string, std::string> provenance)
    : triplets_(std::move(triplets)), provenance_(std::move(provenance)) {
  index_.reserve(triplets_.size());
  for (std::size_t i = 0; i < triplets_.size(); ++i) {
    const Triplet& t = triplets_[i];
    if (t.id.empty()) Fail("triplet " + std::to_string(i + 1) + " has an empty id");
    if (!index_.emplace(t.id, i).second) Fail("duplicate id '" + t.id + "'");
    if (t.iteration != 1 && t.iteration != 2)
      Fail("id '" + t.id + "': iteration must be 1 or 2, got " + std::to_string(t.iteration));
    if (util::Trim(t.prompt).empty()) Fail("id '" + t.id + "': empty prompt");
    if (i == 0) {
      lang_ = t.lang;
    } else if (t.lang != lang_) {
      Fail("id '" + t.id + "': lang '" + t.lang + "' differs from dataset lang '" + lang_ + "'");
    }
  }
}

const Triplet* Dataset::Find(std::string_view id) const {
  auto it = index_.find(std::string(id));
  return it == index_.end() ? nullptr : &triplets_[it->second];
}

Dataset Dataset::Subset(Split s) const {
  std::vector<Triplet> out;
  for (const auto& t : triplets_)
    if (t.split == s) out.push_back(t);
  return Dataset(std::move(out), provenance_);
}

std::optional<ManifestFormat> ParseManifestFormat(std::string_view s) {
  if (s == "tsv") return ManifestFormat::kTsv;
  if (s == "jsonl") return ManifestFormat::kJsonl;
  return std::nullopt;
}

ManifestFormat GuessManifestFormat(const std::filesystem::path& path) {
  return path.extension() == ".jsonl" ? ManifestFormat::kJsonl : ManifestFormat::kTsv;
}

namespace {

// Raw cell values for one row, before typing.
struct RawRow {
  std::size_t row = 0;
  std::map<std::string, std::string> cells;
};

Triplet TypeRow(const RawRow& raw, std::string_view source) {
  const std::string prefix = RowPrefix(source, raw.row);
  auto cell = [&](const std::string& col) -> std::string {
    auto it = raw.cells.find(col);
    return it == raw.cells.end() ? std::string() : it->second;
  };
  auto required = [&](const std::string& col) {
    std::string v = cell(col);
    if (util::Trim(v).empty()) Fail(prefix + "missing required field '" + col + "'");
    return v;
  };
  auto label = [&](const std::string& col) -> std::optional<Label> {
    std::string v = cell(col);
    if (util::Trim(v).empty()) return std::nullopt;
    auto l = ParseLabel(v);
    if (!l) Fail(prefix + "column '" + col + "' must be 0 or 1, got '" + v + "'");
    return l;
  };

  Triplet t;
  t.id = std::string(util::Trim(required("id")));
  t.lang = std::string(util::Trim(required("lang")));
  t.prompt = required("prompt");
  t.recording = required("recording");
  t.silver = label("silver");
  t.gold = label("gold");
  std::string iter = required("iteration");
  auto it = util::ParseInt(iter);
  if (!it || (*it != 1 && *it != 2))
    Fail(prefix + "column 'iteration' must be 1 or 2, got '" + iter + "'");
  t.iteration = static_cast<int>(*it);
  std::string split = cell("split");
  auto sp = ParseSplit(split);
  if (!sp) Fail(prefix + "column 'split' must be dev, test or unsplit, got '" + split + "'");
  t.split = *sp;
  return t;
}

std::vector<RawRow> ReadTsvRows(std::string_view content, std::string_view source) {
  std::vector<RawRow> rows;
  auto lines = util::Split(content, '\n');
  if (!lines.empty() && lines.back().empty()) lines.pop_back();
  if (lines.empty()) Fail(std::string(source) + ": missing header");
  for (auto& l : lines)
    if (!l.empty() && l.back() == '\r') l.pop_back();
  auto header = util::Split(lines[0], '\t');
  if (header != kColumns)
    Fail(std::string(source) + ": header must be '" + util::Join(kColumns, "\\t") + "'");
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const std::size_t row = i;  // data rows counted from 1
    auto cells = util::Split(lines[i], '\t');
    if (cells.size() != kColumns.size())
      Fail(RowPrefix(source, row) + "expected " + std::to_string(kColumns.size()) +
           " columns, got " + std::to_string(cells.size()));
    RawRow raw;
    raw.row = row;
    for (std::size_t c = 0; c < cells.size(); ++c) {
      auto v = util::UnescapeTsv(cells[c]);
      if (!v) Fail(RowPrefix(source, row) + "bad escape in column '" + kColumns[c] + "'");
      raw.cells[kColumns[c]] = std::move(*v);
    }
    rows.push_back(std::move(raw));
  }
  return rows;
}

std::vector<RawRow> ReadJsonlRows(std::string_view content, std::string_view source) {
  std::vector<RawRow> rows;
  auto lines = util::Split(content, '\n');
  std::size_t row = 0;
  for (const auto& line : lines) {
    if (util::Trim(line).empty()) continue;
    ++row;
    nlohmann::json obj;
    try {
      obj = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      Fail(RowPrefix(source, row) + "invalid JSON: " + e.what());
    }
    if (!obj.is_object()) Fail(RowPrefix(source, row) + "expected a JSON object");
    RawRow raw;
    raw.row = row;
    for (const auto& col : kColumns) {
      if (!obj.contains(col) || obj[col].is_null()) continue;
      const auto& v = obj[col];
      if (v.is_string()) {
        raw.cells[col] = v.get<std::string>();
      } else if (v.is_number_integer()) {
        raw.cells[col] = std::to_string(v.get<long long>());
      } else {
        Fail(RowPrefix(source, row) + "field '" + col + "' has unsupported type");
      }
    }
    rows.push_back(std::move(raw));
  }
  return rows;
}

}  // namespace

Dataset ParseManifest(std::string_view content, ManifestFormat format, std::string_view source) {
  auto raw = format == ManifestFormat::kTsv ? ReadTsvRows(content, source)
                                            : ReadJsonlRows(content, source);
  std::vector<Triplet> triplets;
  triplets.reserve(raw.size());
  std::set<std::string> seen;
  for (const auto& r : raw) {
    Triplet t = TypeRow(r, source);
    if (!seen.insert(t.id).second)
      Fail(RowPrefix(source, r.row) + "duplicate id '" + t.id + "'");
    if (!triplets.empty() && t.lang != triplets.front().lang)
      Fail(RowPrefix(source, r.row) + "lang '" + t.lang + "' differs from '" +
           triplets.front().lang + "'");
    triplets.push_back(std::move(t));
  }
  return Dataset(std::move(triplets), {{"source", std::string(source)}});
}

Dataset LoadManifest(const std::filesystem::path& path, ManifestFormat format) {
  return ParseManifest(util::ReadFile(path), format, path.string());
}

std::string FormatManifest(const Dataset& ds, ManifestFormat format) {
  std::ostringstream out;
  auto label = [](const std::optional<Label>& l) {
    return l ? std::to_string(LabelValue(*l)) : std::string();
  };
  if (format == ManifestFormat::kTsv) {
    out << util::Join(kColumns, "\t") << '\n';
    for (const auto& t : ds.triplets()) {
      out << util::EscapeTsv(t.id) << '\t' << util::EscapeTsv(t.lang) << '\t'
          << util::EscapeTsv(t.prompt) << '\t' << util::EscapeTsv(t.recording) << '\t'
          << label(t.silver) << '\t' << label(t.gold) << '\t' << t.iteration << '\t'
          << SplitName(t.split) << '\n';
    }
  } else {
    for (const auto& t : ds.triplets()) {
      nlohmann::ordered_json obj;
      obj["id"] = t.id;
      obj["lang"] = t.lang;
      obj["prompt"] = t.prompt;
      obj["recording"] = t.recording;
      obj["silver"] = t.silver ? nlohmann::ordered_json(LabelValue(*t.silver)) : nullptr;
      obj["gold"] = t.gold ? nlohmann::ordered_json(LabelValue(*t.gold)) : nullptr;
      obj["iteration"] = t.iteration;
      obj["split"] = std::string(SplitName(t.split));
      out << obj.dump() << '\n';
    }
  }
  return out.str();
}

void SaveManifest(const Dataset& ds, const std::filesystem::path& path, ManifestFormat format) {
  util::WriteFileAtomic(path, FormatManifest(ds, format));
}

LabelMap LoadLabelFile(const std::filesystem::path& path) {
  LabelMap out;
  auto lines = util::ReadLines(path);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    std::string_view line = lines[i];
    if (util::Trim(line).empty() || line.front() == '#') continue;
    auto cells = util::Split(line, '\t');
    const std::string where = path.string() + ": line " + std::to_string(i + 1) + ": ";
    if (cells.size() != 2) Fail(where + "expected id<TAB>label");
    auto l = ParseLabel(cells[1]);
    if (!l) Fail(where + "label must be 0 or 1, got '" + cells[1] + "'");
    out[std::string(util::Trim(cells[0]))] = *l;
  }
  return out;
}

void SaveLabelFile(const LabelMap& labels, const std::filesystem::path& path,
                   std::string_view header_comment) {
  std::ostringstream out;
  if (!header_comment.empty()) out << "# " << header_comment << '\n';
  for (const auto& [id, l] : labels) out << id << '\t' << LabelValue(l) << '\n';
  util::WriteFileAtomic(path, out.str());
}

AttachResult AttachLabels(const Dataset& ds, const LabelMap& labels, LabelKind kind, bool strict) {
  AttachResult res;
  for (const auto& [id, l] : labels)
    if (!ds.Find(id)) res.unmatched_ids.push_back(id);
  if (strict && !res.unmatched_ids.empty())
    Fail("label file names " + std::to_string(res.unmatched_ids.size()) +
         " unknown id(s), first '" + res.unmatched_ids.front() + "'");
  std::vector<Triplet> triplets = ds.triplets();
  for (auto& t : triplets) {
    auto it = labels.find(t.id);
    if (it == labels.end()) continue;
    (kind == LabelKind::kSilver ? t.silver : t.gold) = it->second;
    ++res.matched;
  }
  res.dataset = Dataset(std::move(triplets), ds.provenance());
  return res;
}

AttachResult AttachLabels(const Dataset& ds, const std::filesystem::path& labels, LabelKind kind,
                          bool strict) {
  return AttachLabels(ds, LoadLabelFile(labels), kind, strict);
}

namespace {

Dataset Pick(const Dataset& ds, const std::vector<std::string>& ids, Split as) {
  std::vector<Triplet> out;
  out.reserve(ids.size());
  for (const auto& id : ids) {
    const Triplet* t = ds.Find(id);
    if (!t) Fail("split names unknown id '" + id + "'");
    out.push_back(*t);
    out.back().split = as;
  }
  return Dataset(std::move(out), ds.provenance());
}

}  // namespace

std::pair<Dataset, Dataset> SplitDataset(const Dataset& ds, const SplitSpec& spec) {
  if (const auto* ex = std::get_if<ExplicitSplit>(&spec)) {
    std::set<std::string> first(ex->first_ids.begin(), ex->first_ids.end());
    if (first.size() != ex->first_ids.size()) Fail("split: duplicate id in first list");
    std::set<std::string> second;
    for (const auto& id : ex->second_ids) {
      if (first.count(id)) Fail("split: id '" + id + "' appears in both lists");
      if (!second.insert(id).second) Fail("split: duplicate id in second list");
    }
    return {Pick(ds, ex->first_ids, Split::kDev), Pick(ds, ex->second_ids, Split::kTest)};
  }
  const auto& ratio = std::get<RatioSplit>(spec);
  if (!(ratio.first_fraction >= 0.0 && ratio.first_fraction <= 1.0))
    Fail("split: fraction must be in [0, 1]");
  std::vector<std::size_t> order(ds.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  // Fisher-Yates with the raw engine so the permutation does not depend on
  // the standard library's distribution implementation.
  std::mt19937_64 rng(ratio.seed);
  for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng() % i]);
  const auto n_first =
      static_cast<std::size_t>(std::llround(ratio.first_fraction * static_cast<double>(ds.size())));
  std::vector<std::size_t> a(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_first));
  std::vector<std::size_t> b(order.begin() + static_cast<std::ptrdiff_t>(n_first), order.end());
  // Keep dataset order inside each side.
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  auto ids = [&](const std::vector<std::size_t>& idx) {
    std::vector<std::string> out;
    for (auto i : idx) out.push_back(ds.triplets()[i].id);
    return out;
  };
  return {Pick(ds, ids(a), Split::kDev), Pick(ds, ids(b), Split::kTest)};
}

}  // namespace crowdval
