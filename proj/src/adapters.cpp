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

#include "crowdval/adapters.hpp"

#include <fcntl.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include <unicode/unistr.h>

#include "CLI11.hpp"
#include "crowdval/error.hpp"
#include "crowdval/textmetrics.hpp"
#include "crowdval/util.hpp"
#include "json.hpp"

namespace crowdval {

namespace {

constexpr const char* kModule = "adapters";

std::string ShellQuote(const std::string& s) {
  std::string out = "'";
  for (char c : s) {
    if (c == '\'') out += "'\\''";
    else out += c;
  }
  return out + "'";
}

std::string ReplaceAll(std::string s, std::string_view from, const std::string& to) {
  std::size_t pos = 0;
  while ((pos = s.find(from, pos)) != std::string::npos) {
    s.replace(pos, from.size(), to);
    pos += to.size();
  }
  return s;
}

std::filesystem::path ResolveCachePath(const std::filesystem::path& p) {
  if (p.empty() || p.is_absolute()) return p;
  if (const char* root = std::getenv("CROWDVAL_CACHE_DIR"); root && *root)
    return std::filesystem::path(root) / p;
  return p;
}

std::map<std::string, std::string> ParsePairs(const std::filesystem::path& path,
                                              const char* what) {
  std::map<std::string, std::string> out;
  auto lines = util::ReadLines(path);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::string& line = lines[i];
    if (line.empty()) continue;
    auto tab = line.find('\t');
    std::optional<std::string> key, value;
    if (tab != std::string::npos && line.find('\t', tab + 1) == std::string::npos) {
      key = util::UnescapeTsv(std::string_view(line).substr(0, tab));
      value = util::UnescapeTsv(std::string_view(line).substr(tab + 1));
    }
    if (!key || !value || key->empty())
      throw BackendError(kModule, std::string("malformed ") + what + " line " +
                                      std::to_string(i + 1) + " in " + path.string());
    out[*key] = std::move(*value);
  }
  return out;
}

std::string FixtureG2p(const std::string& text, const std::map<std::string, std::string>& table,
                       bool identity) {
  if (auto it = table.find(text); it != table.end()) return it->second;
  std::vector<std::string> phones;
  for (const auto& word : util::SplitWhitespace(text)) {
    if (auto it = table.find(word); it != table.end()) {
      for (auto& p : util::SplitWhitespace(it->second)) phones.push_back(p);
    } else if (identity) {
      std::string cps = Normalize(word, NormalizationProfile{NormalizationProfile::Form::kNfc,
                                                             false, false, false});
      for (char32_t c : CodePoints(cps)) {
        icu::UnicodeString u(static_cast<UChar32>(c));
        std::string s;
        phones.push_back(u.toUTF8String(s));
      }
    } else {
      throw BackendError(kModule, "fixture g2p has no entry for '" + word + "'");
    }
  }
  return util::Join(phones, " ");
}

std::map<std::string, std::string> RunFixture(const std::vector<BackendItem>& batch,
                                              const BackendSpec& spec) {
  std::map<std::string, std::string> table;
  if (!spec.fixture_path.empty()) table = ParsePairs(spec.fixture_path, "fixture");
  std::map<std::string, std::string> out;
  for (const auto& item : batch) {
    if (spec.kind == BackendKind::kG2p) {
      out[item.key] = FixtureG2p(item.input, table, spec.identity);
      continue;
    }
    auto it = table.find(item.key);
    if (it == table.end()) it = table.find(item.input);
    if (it != table.end()) {
      out[item.key] = it->second;
    } else if (spec.identity) {
      out[item.key] = spec.kind == BackendKind::kTranscribe ? item.reference : item.input;
    } else {
      throw BackendError(kModule, "fixture " + std::string(BackendKindName(spec.kind)) +
                                      " has no entry for '" + item.key + "'");
    }
  }
  return out;
}

std::map<std::string, std::string> RunCommand(const std::vector<BackendItem>& batch,
                                              const BackendSpec& spec) {
  std::random_device rd;
  auto dir = std::filesystem::temp_directory_path() /
             ("crowdval-" + util::Hex64((static_cast<std::uint64_t>(rd()) << 32) ^ rd() ^
                                        static_cast<std::uint64_t>(::getpid())));
  std::filesystem::create_directories(dir);
  struct Cleanup {
    std::filesystem::path dir;
    ~Cleanup() {
      std::error_code ec;
      std::filesystem::remove_all(dir, ec);
    }
  } cleanup{dir};

  const auto in_path = dir / "input.tsv";
  const auto out_path = dir / "output.tsv";
  const auto err_path = dir / "stderr.txt";
  {
    std::ostringstream in;
    for (const auto& item : batch)
      in << util::EscapeTsv(item.key) << '\t' << util::EscapeTsv(item.input) << '\n';
    util::WriteFileAtomic(in_path, in.str());
  }
  std::string cmd = spec.command_template;
  cmd = ReplaceAll(cmd, "{input}", ShellQuote(in_path.string()));
  cmd = ReplaceAll(cmd, "{output}", ShellQuote(out_path.string()));
  cmd = ReplaceAll(cmd, "{lang}", ShellQuote(spec.lang));
  cmd = "(" + cmd + "\n) 2> " + ShellQuote(err_path.string());
  int status = std::system(cmd.c_str());
  int code = status == -1 ? -1 : (WIFEXITED(status) ? WEXITSTATUS(status) : 128 + WTERMSIG(status));
  if (code != 0) {
    std::string err;
    if (std::filesystem::exists(err_path)) err = util::ReadFile(err_path);
    if (err.size() > 512) err = err.substr(0, 512) + "...";
    throw BackendError(kModule, "backend '" + spec.backend_id + "' exited with status " +
                                    std::to_string(code) + ": " + std::string(util::Trim(err)));
  }
  if (!std::filesystem::exists(out_path))
    throw BackendError(kModule, "backend '" + spec.backend_id + "' wrote no output file");
  return ParsePairs(out_path, "backend output");
}

}  // namespace

std::string_view BackendKindName(BackendKind k) {
  switch (k) {
    case BackendKind::kTranscribe: return "transcribe";
    case BackendKind::kTranslate: return "translate";
    case BackendKind::kG2p: return "g2p";
  }
  return "?";
}

void ValidateBackendSpec(const BackendSpec& spec) {
  const std::string who = std::string(BackendKindName(spec.kind)) + " backend: ";
  if (spec.backend_id.empty()) throw UsageError(kModule, who + "backend_id is required");
  switch (spec.mode) {
    case BackendMode::kExternalCommand:
      if (spec.command_template.find("{input}") == std::string::npos ||
          spec.command_template.find("{output}") == std::string::npos)
        throw UsageError(kModule, who + "command must contain {input} and {output}");
      break;
    case BackendMode::kCacheFile:
      if (spec.cache_path.empty()) throw UsageError(kModule, who + "cache path is required");
      break;
    case BackendMode::kFixture:
      if (spec.fixture_path.empty() && !spec.identity)
        throw UsageError(kModule, who + "fixture needs a table or identity = true");
      break;
  }
}

std::map<std::string, std::string> ReadCache(const std::filesystem::path& path) {
  return ParsePairs(path, "cache");
}

void AppendCache(const std::filesystem::path& path,
                 const std::map<std::string, std::string>& entries) {
  if (entries.empty()) return;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  int fd = ::open(path.c_str(), O_WRONLY | O_CREAT | O_APPEND | O_CLOEXEC, 0644);
  if (fd < 0)
    throw BackendError(kModule, "cannot open cache " + path.string() + ": " + std::strerror(errno));
  for (const auto& [key, value] : entries) {
    std::string line = util::EscapeTsv(key) + '\t' + util::EscapeTsv(value) + '\n';
    ssize_t n = ::write(fd, line.data(), line.size());
    if (n != static_cast<ssize_t>(line.size())) {
      ::close(fd);
      throw BackendError(kModule, "short write to cache " + path.string());
    }
  }
  ::close(fd);
}

std::map<std::string, std::string> RunBackend(const std::vector<BackendItem>& batch,
                                              const BackendSpec& spec) {
  ValidateBackendSpec(spec);
  std::set<std::string> keys;
  for (const auto& item : batch)
    if (!keys.insert(item.key).second)
      throw BackendError(kModule, "duplicate key '" + item.key + "' in batch");

  const auto cache_path = ResolveCachePath(spec.cache_path);
  std::map<std::string, std::string> cache;
  if (!cache_path.empty() && std::filesystem::exists(cache_path)) cache = ReadCache(cache_path);
  else if (spec.mode == BackendMode::kCacheFile)
    throw BackendError(kModule, "cache file " + cache_path.string() + " does not exist");

  std::map<std::string, std::string> out;
  std::vector<BackendItem> todo;
  for (const auto& item : batch) {
    if (auto it = cache.find(item.key); it != cache.end()) out[item.key] = it->second;
    else todo.push_back(item);
  }
  if (todo.empty()) return out;

  std::map<std::string, std::string> fresh;
  switch (spec.mode) {
    case BackendMode::kCacheFile: {
      std::vector<std::string> missing;
      for (const auto& item : todo) missing.push_back(item.key);
      if (missing.size() > 10) missing.resize(10);
      throw BackendError(kModule, "cache miss in " + cache_path.string() + " for " +
                                      std::to_string(todo.size()) +
                                      " key(s): " + util::Join(missing, ", "));
    }
    case BackendMode::kFixture:
      fresh = RunFixture(todo, spec);
      break;
    case BackendMode::kExternalCommand:
      fresh = RunCommand(todo, spec);
      break;
  }
  std::set<std::string> wanted;
  for (const auto& item : todo) wanted.insert(item.key);
  for (const auto& [key, value] : fresh)
    if (!wanted.count(key))
      throw BackendError(kModule, "backend '" + spec.backend_id + "' returned orphan key '" +
                                      key + "'");
  for (const auto& key : wanted)
    if (!fresh.count(key))
      throw BackendError(kModule, "backend '" + spec.backend_id + "' returned no output for '" +
                                      key + "'");
  if (!cache_path.empty()) AppendCache(cache_path, fresh);
  out.insert(fresh.begin(), fresh.end());
  return out;
}

BackendSet LoadBackendSet(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw UsageError(kModule, "cannot open backends file " + path.string());
  std::vector<CLI::ConfigItem> items;
  try {
    items = CLI::ConfigTOML().from_config(in);
  } catch (const CLI::Error& e) {
    throw UsageError(kModule, path.string() + ": " + e.what());
  }
  const auto base = path.has_parent_path() ? path.parent_path() : std::filesystem::path(".");
  auto resolve = [&](const std::string& p) -> std::filesystem::path {
    std::filesystem::path fp(p);
    return fp.is_absolute() ? fp : base / fp;
  };
  std::map<std::string, std::map<std::string, std::string>> sections;
  for (const auto& item : items) {
    if (item.parents.size() != 1 || item.name == "++" || item.name == "--") continue;
    sections[item.parents[0]][item.name] = item.inputs.empty() ? "" : item.inputs.front();
  }
  BackendSet set;
  for (const auto& [name, kv] : sections) {
    BackendSpec spec;
    if (name == "transcribe") spec.kind = BackendKind::kTranscribe;
    else if (name == "translate") spec.kind = BackendKind::kTranslate;
    else if (name == "g2p") spec.kind = BackendKind::kG2p;
    else throw UsageError(kModule, path.string() + ": unknown section [" + name + "]");
    for (const auto& [key, value] : kv) {
      if (key == "mode") {
        if (value == "external_command") spec.mode = BackendMode::kExternalCommand;
        else if (value == "cache_file") spec.mode = BackendMode::kCacheFile;
        else if (value == "fixture") spec.mode = BackendMode::kFixture;
        else throw UsageError(kModule, path.string() + ": unknown mode '" + value + "'");
      } else if (key == "backend_id") {
        spec.backend_id = value;
      } else if (key == "command") {
        spec.command_template = value;
      } else if (key == "cache") {
        // Relative cache paths stay relative so CROWDVAL_CACHE_DIR can root them.
        spec.cache_path = value;
        if (!std::getenv("CROWDVAL_CACHE_DIR") && !spec.cache_path.is_absolute())
          spec.cache_path = resolve(value);
      } else if (key == "fixture") {
        spec.fixture_path = resolve(value);
      } else if (key == "identity") {
        spec.identity = value == "true" || value == "1";
      } else if (key == "lang") {
        spec.lang = value;
      } else {
        throw UsageError(kModule, path.string() + ": unknown key '" + name + "." + key + "'");
      }
    }
    ValidateBackendSpec(spec);
    (spec.kind == BackendKind::kTranscribe  ? set.transcribe
     : spec.kind == BackendKind::kTranslate ? set.translate
                                            : set.g2p) = spec;
  }
  return set;
}

std::vector<TranscriptBundle> AssembleBundles(const Dataset& ds, const BackendSet& specs,
                                              const Clock& clock) {
  const std::string created_at = clock ? clock() : util::NowIso8601();
  std::vector<std::string> ids;
  for (const auto* s : {&specs.transcribe, &specs.translate, &specs.g2p})
    if (*s) ids.push_back((*s)->backend_id);
  const std::string backend_id = util::Join(ids, "+");

  std::vector<TranscriptBundle> bundles;
  bundles.reserve(ds.size());
  for (const auto& t : ds.triplets()) {
    TranscriptBundle b;
    b.id = t.id;
    b.backend_id = backend_id;
    b.created_at = created_at;
    bundles.push_back(std::move(b));
  }
  if (!specs.transcribe) return bundles;

  std::vector<BackendItem> batch;
  for (const auto& t : ds.triplets()) batch.push_back({t.id, t.recording, t.prompt});
  auto hyps = RunBackend(batch, *specs.transcribe);
  for (auto& b : bundles) b.hyp = hyps.at(b.id);

  auto paired = [&](const BackendSpec& spec) {
    std::vector<BackendItem> items;
    for (std::size_t i = 0; i < bundles.size(); ++i) {
      const auto& t = ds.triplets()[i];
      items.push_back({t.id + "/ref", t.prompt, t.prompt});
      items.push_back({t.id + "/hyp", *bundles[i].hyp, t.prompt});
    }
    return RunBackend(items, spec);
  };
  if (specs.translate) {
    auto out = paired(*specs.translate);
    for (auto& b : bundles) {
      b.ref_translation = out.at(b.id + "/ref");
      b.hyp_translation = out.at(b.id + "/hyp");
    }
  }
  if (specs.g2p) {
    auto out = paired(*specs.g2p);
    for (auto& b : bundles) {
      b.ref_phonemes = util::SplitWhitespace(out.at(b.id + "/ref"));
      b.hyp_phonemes = util::SplitWhitespace(out.at(b.id + "/hyp"));
    }
  }
  return bundles;
}

std::string FormatBundles(const std::vector<TranscriptBundle>& bundles) {
  std::ostringstream out;
  auto opt = [](const auto& v) -> nlohmann::ordered_json {
    if (!v) return nullptr;
    return *v;
  };
  for (const auto& b : bundles) {
    nlohmann::ordered_json j;
    j["id"] = b.id;
    j["hyp"] = opt(b.hyp);
    j["ref_translation"] = opt(b.ref_translation);
    j["hyp_translation"] = opt(b.hyp_translation);
    j["ref_phonemes"] = opt(b.ref_phonemes);
    j["hyp_phonemes"] = opt(b.hyp_phonemes);
    j["backend_id"] = b.backend_id;
    j["created_at"] = b.created_at;
    out << j.dump() << '\n';
  }
  return out.str();
}

void SaveBundles(const std::vector<TranscriptBundle>& bundles, const std::filesystem::path& path) {
  util::WriteFileAtomic(path, FormatBundles(bundles));
}

std::vector<TranscriptBundle> LoadBundles(const std::filesystem::path& path, const Dataset* ds) {
  std::vector<TranscriptBundle> out;
  std::set<std::string> seen;
  auto lines = util::ReadLines(path);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (util::Trim(lines[i]).empty()) continue;
    const std::string where = path.string() + ": line " + std::to_string(i + 1) + ": ";
    try {
      auto j = nlohmann::json::parse(lines[i]);
      TranscriptBundle b;
      b.id = j.at("id").get<std::string>();
      auto str = [&](const char* k) -> std::optional<std::string> {
        if (!j.contains(k) || j[k].is_null()) return std::nullopt;
        return j[k].get<std::string>();
      };
      auto list = [&](const char* k) -> std::optional<std::vector<std::string>> {
        if (!j.contains(k) || j[k].is_null()) return std::nullopt;
        return j[k].get<std::vector<std::string>>();
      };
      b.hyp = str("hyp");
      b.ref_translation = str("ref_translation");
      b.hyp_translation = str("hyp_translation");
      b.ref_phonemes = list("ref_phonemes");
      b.hyp_phonemes = list("hyp_phonemes");
      b.backend_id = j.at("backend_id").get<std::string>();
      b.created_at = j.value("created_at", "");
      if (b.backend_id.empty()) throw DataError(kModule, where + "empty backend_id");
      if (!seen.insert(b.id).second) throw DataError(kModule, where + "duplicate id '" + b.id + "'");
      if (ds && !ds->Find(b.id))
        throw DataError(kModule, where + "orphan bundle '" + b.id + "' names no triplet");
      out.push_back(std::move(b));
    } catch (const nlohmann::json::exception& e) {
      throw DataError(kModule, where + e.what());
    }
  }
  return out;
}

}  // namespace crowdval
