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

#include <sstream>

#include "crowdval/error.hpp"
#include "crowdval/util.hpp"
#include "json.hpp"

namespace crowdval {

namespace {
constexpr const char* kModule = "policies";

std::string ListIds(const std::vector<std::string>& ids) {
  std::vector<std::string> head(ids.begin(), ids.begin() + std::min<std::ptrdiff_t>(
                                                              static_cast<std::ptrdiff_t>(ids.size()), 20));
  std::string s = util::Join(head, ", ");
  if (ids.size() > head.size()) s += ", ... (" + std::to_string(ids.size()) + " total)";
  return s;
}
}  // namespace

std::string_view PolicyKindName(PolicyKind k) {
  switch (k) {
    case PolicyKind::kDistance: return "distance";
    case PolicyKind::kTree: return "tree";
    case PolicyKind::kProposed: return "proposed";
  }
  return "?";
}

std::optional<PolicyKind> ParsePolicyKind(std::string_view s) {
  for (auto k : {PolicyKind::kDistance, PolicyKind::kTree, PolicyKind::kProposed})
    if (PolicyKindName(k) == s) return k;
  return std::nullopt;
}

std::string_view RoutingName(Routing r) {
  return r == Routing::kOfflineSilver ? "offline_silver" : "live_review";
}

std::optional<Routing> ParseRouting(std::string_view s) {
  if (s == "offline_silver") return Routing::kOfflineSilver;
  if (s == "live_review") return Routing::kLiveReview;
  return std::nullopt;
}

std::string_view StageName(Stage s) {
  return s == Stage::kAutomated ? "automated" : "human_fallback";
}

void ValidatePolicyConfig(const PolicyConfig& cfg) {
  if (cfg.kind == PolicyKind::kTree && !cfg.model)
    throw UsageError(kModule, "tree policy requires a model");
  if (!(cfg.cer_max >= 0) || !(cfg.wer_max >= 0))
    throw UsageError(kModule, "distance thresholds must be >= 0");
}

Label DistancePolicy(const FeatureVector& fv, const PolicyConfig& cfg) {
  if (!fv.cer || !fv.wer) throw DataError(kModule, "distance policy needs cer and wer");
  return (*fv.cer <= cfg.cer_max && *fv.wer <= cfg.wer_max) ? Label::kValid : Label::kInvalid;
}

Label TreePolicy(const FeatureVector& fv, const DecisionTreeModel& model) {
  return model.Predict(fv);
}

PolicyDecision ProposedPolicy(const FeatureVector& fv, std::optional<Label> silver,
                              const PolicyConfig& cfg) {
  PolicyDecision d;
  d.features = fv;
  if (DistancePolicy(fv, cfg) == Label::kValid) {
    d.label = Label::kValid;
    d.stage = Stage::kAutomated;
    return d;
  }
  if (!silver) throw DataError(kModule, "flagged sample has no silver label");
  d.label = *silver;
  d.stage = Stage::kHumanFallback;
  return d;
}

RunResult RunPolicy(const Dataset& ds, const FeatureTable& features, const PolicyConfig& cfg) {
  ValidatePolicyConfig(cfg);
  std::vector<std::string> missing;
  for (const auto& t : ds.triplets())
    if (!features.count(t.id)) missing.push_back(t.id);
  if (!missing.empty())
    throw DataError(kModule, "no features for " + std::to_string(missing.size()) +
                                 " id(s): " + ListIds(missing));

  RunResult res;
  std::vector<std::string> need_review;
  for (const auto& t : ds.triplets()) {
    FeatureVector fv = features.at(t.id);
    if (t.silver) fv.silver = t.silver;
    PolicyDecision d;
    switch (cfg.kind) {
      case PolicyKind::kDistance:
        d.label = DistancePolicy(fv, cfg);
        d.features = fv;
        break;
      case PolicyKind::kTree:
        d.label = TreePolicy(fv, *cfg.model);
        d.features = fv;
        break;
      case PolicyKind::kProposed:
        if (DistancePolicy(fv, cfg) == Label::kInvalid && !fv.silver) {
          need_review.push_back(t.id);
          continue;
        }
        d = ProposedPolicy(fv, fv.silver, cfg);
        break;
    }
    d.id = t.id;
    res.decisions.push_back(std::move(d));
  }
  if (!need_review.empty() && cfg.routing == Routing::kOfflineSilver)
    throw DataError(kModule, std::to_string(need_review.size()) +
                                 " flagged id(s) need a silver label: " + ListIds(need_review));

  auto& s = res.summary;
  s.total = ds.size();
  s.pending_review = std::move(need_review);
  for (const auto& d : res.decisions) {
    (d.stage == Stage::kAutomated ? s.automated : s.human_fallback)++;
    (d.label == Label::kValid ? s.valid : s.invalid)++;
  }
  return res;
}

std::string FormatDecisions(const std::vector<PolicyDecision>& decisions) {
  std::ostringstream out;
  out << "id\tlabel\tstage\tcer\twer\tper\tter\n";
  auto num = [](const std::optional<double>& v) {
    return v ? util::FormatDouble(*v) : std::string();
  };
  for (const auto& d : decisions) {
    out << util::EscapeTsv(d.id) << '\t' << LabelValue(d.label) << '\t' << StageName(d.stage)
        << '\t' << num(d.features.cer) << '\t' << num(d.features.wer) << '\t'
        << num(d.features.per) << '\t' << num(d.features.ter) << '\n';
  }
  return out.str();
}

void SaveDecisions(const std::vector<PolicyDecision>& decisions,
                   const std::filesystem::path& path) {
  util::WriteFileAtomic(path, FormatDecisions(decisions));
}

std::vector<PolicyDecision> LoadDecisions(const std::filesystem::path& path) {
  std::vector<PolicyDecision> out;
  auto lines = util::ReadLines(path);
  if (lines.empty() || lines[0] != "id\tlabel\tstage\tcer\twer\tper\tter")
    throw DataError(kModule, path.string() + ": bad decisions header");
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const std::string where = path.string() + ": line " + std::to_string(i + 1) + ": ";
    auto cells = util::Split(lines[i], '\t');
    if (cells.size() != 7) throw DataError(kModule, where + "expected 7 columns");
    PolicyDecision d;
    auto id = util::UnescapeTsv(cells[0]);
    auto label = ParseLabel(cells[1]);
    if (!id || !label) throw DataError(kModule, where + "bad id or label");
    d.id = *id;
    d.label = *label;
    if (cells[2] == "automated") d.stage = Stage::kAutomated;
    else if (cells[2] == "human_fallback") d.stage = Stage::kHumanFallback;
    else throw DataError(kModule, where + "bad stage '" + cells[2] + "'");
    const Feature cols[] = {Feature::kCer, Feature::kWer, Feature::kPer, Feature::kTer};
    for (int c = 0; c < 4; ++c) {
      if (cells[3 + c].empty()) continue;
      auto v = util::ParseDouble(cells[3 + c]);
      if (!v) throw DataError(kModule, where + "bad number '" + cells[3 + c] + "'");
      d.features.Set(cols[c], *v);
    }
    out.push_back(std::move(d));
  }
  return out;
}

void SaveCheckpoint(const RunCheckpoint& cp, const std::filesystem::path& path) {
  nlohmann::ordered_json j;
  j["policy"] = cp.policy;
  j["cer_max"] = cp.cer_max;
  j["wer_max"] = cp.wer_max;
  j["pending_review"] = cp.pending_review;
  util::WriteFileAtomic(path, j.dump(2) + "\n");
}

RunCheckpoint LoadCheckpoint(const std::filesystem::path& path) {
  try {
    auto j = nlohmann::json::parse(util::ReadFile(path));
    RunCheckpoint cp;
    cp.policy = j.at("policy").get<std::string>();
    cp.cer_max = j.at("cer_max").get<double>();
    cp.wer_max = j.at("wer_max").get<double>();
    cp.pending_review = j.at("pending_review").get<std::vector<std::string>>();
    return cp;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(kModule, path.string() + ": corrupt checkpoint: " + e.what());
  }
}

}  // namespace crowdval
