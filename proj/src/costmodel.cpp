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

#include "crowdval/costmodel.hpp"

#include <cctype>
#include <sstream>

#include "crowdval/error.hpp"
#include "crowdval/util.hpp"
#include "json.hpp"

namespace crowdval {

namespace {
constexpr const char* kModule = "costmodel";
constexpr std::string_view kPound = "\xC2\xA3";

bool IsValidation(Phase p) { return p != Phase::kRecording; }
}  // namespace

std::string Money::ToString() const {
  const std::int64_t abs = cents < 0 ? -cents : cents;
  std::string digits = std::to_string(abs / 100) + "." + (abs % 100 < 10 ? "0" : "") +
                       std::to_string(abs % 100);
  if (cents < 0) digits = "-" + digits;
  return unit == "GBP" ? std::string(kPound) + digits : unit + " " + digits;
}

Money ParseMoney(std::string_view s, std::string_view default_unit) {
  const std::string original(s);
  s = util::Trim(s);
  Money m;
  m.unit = std::string(default_unit);
  if (s.substr(0, kPound.size()) == kPound) {
    m.unit = "GBP";
    s.remove_prefix(kPound.size());
  } else {
    std::size_t i = 0;
    while (i < s.size() && std::isalpha(static_cast<unsigned char>(s[i]))) ++i;
    if (i > 0) {
      m.unit = std::string(s.substr(0, i));
      s.remove_prefix(i);
    }
  }
  s = util::Trim(s);
  bool negative = false;
  if (!s.empty() && s.front() == '-') {
    negative = true;
    s.remove_prefix(1);
  }
  auto dot = s.find('.');
  std::string_view whole = s.substr(0, dot);
  std::string_view frac = dot == std::string_view::npos ? std::string_view{} : s.substr(dot + 1);
  auto all_digits = [](std::string_view v) {
    for (char c : v)
      if (!std::isdigit(static_cast<unsigned char>(c))) return false;
    return true;
  };
  if (whole.empty() || !all_digits(whole) || !all_digits(frac) || frac.size() > 2 ||
      (dot != std::string_view::npos && frac.empty()))
    throw DataError(kModule, "bad amount '" + original + "'");
  std::string f(frac);
  while (f.size() < 2) f += '0';
  m.cents = *util::ParseInt(whole) * 100 + *util::ParseInt(f);
  if (negative) m.cents = -m.cents;
  return m;
}

std::string_view PhaseName(Phase p) {
  switch (p) {
    case Phase::kRecording: return "recording";
    case Phase::kAutomatedValidation: return "automated_validation";
    case Phase::kHumanValidation: return "human_validation";
  }
  return "?";
}

std::optional<Phase> ParsePhase(std::string_view s) {
  s = util::Trim(s);
  for (auto p : {Phase::kRecording, Phase::kAutomatedValidation, Phase::kHumanValidation})
    if (PhaseName(p) == s) return p;
  return std::nullopt;
}

CostLedger ParseLedger(std::string_view tsv, std::string_view source) {
  CostLedger ledger;
  auto lines = util::Split(tsv, '\n');
  bool header = true;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    std::string line = lines[i];
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (util::Trim(line).empty() || line.front() == '#') continue;
    const std::string where = std::string(source) + ": line " + std::to_string(i + 1) + ": ";
    auto cells = util::Split(line, '\t');
    if (header) {
      if (cells != std::vector<std::string>{"iteration", "phase", "cost", "participants"})
        throw DataError(kModule, where + "header must be iteration, phase, cost, participants");
      header = false;
      continue;
    }
    if (cells.size() != 4) throw DataError(kModule, where + "expected 4 columns");
    LedgerEntry e;
    auto it = util::ParseInt(cells[0]);
    if (!it || (*it != 1 && *it != 2)) throw DataError(kModule, where + "iteration must be 1 or 2");
    e.iteration = static_cast<int>(*it);
    auto ph = ParsePhase(cells[1]);
    if (!ph) throw DataError(kModule, where + "unknown phase '" + cells[1] + "'");
    e.phase = *ph;
    try {
      e.cost = ParseMoney(cells[2]);
    } catch (const DataError& err) {
      throw DataError(kModule, where + err.what());
    }
    if (e.cost.cents < 0) throw DataError(kModule, where + "negative cost");
    auto p = util::Trim(cells[3]);
    if (!p.empty() && p != "N/A") {
      auto n = util::ParseInt(p);
      if (!n || *n < 0) throw DataError(kModule, where + "bad participant count");
      e.participants = static_cast<int>(*n);
    }
    ledger.entries.push_back(std::move(e));
  }
  if (header) throw DataError(kModule, std::string(source) + ": missing header");
  return ledger;
}

CostLedger LoadLedger(const std::filesystem::path& path) {
  return ParseLedger(util::ReadFile(path), path.string());
}

Money ValidationTotal(const CostLedger& ledger) {
  Money total;
  bool first = true;
  for (const auto& e : ledger.entries) {
    if (!IsValidation(e.phase)) continue;
    if (first) total.unit = e.cost.unit;
    else if (e.cost.unit != total.unit)
      throw DataError(kModule, "ledger mixes units " + total.unit + " and " + e.cost.unit);
    first = false;
    total.cents += e.cost.cents;
  }
  return total;
}

int ValidationParticipants(const CostLedger& ledger) {
  int n = 0;
  for (const auto& e : ledger.entries)
    if (IsValidation(e.phase)) n += e.participants.value_or(0);
  return n;
}

SavingsReport Savings(const CostLedger& baseline, const CostLedger& treatment) {
  if (baseline.entries.empty() || treatment.entries.empty())
    throw DataError(kModule, "savings need two nonempty ledgers");
  SavingsReport r;
  r.baseline_total = ValidationTotal(baseline);
  r.treatment_total = ValidationTotal(treatment);
  if (r.baseline_total.unit != r.treatment_total.unit)
    throw DataError(kModule, "ledgers use different units");
  if (r.baseline_total.cents == 0) throw DataError(kModule, "baseline validation total is zero");
  r.saving_percent = 100.0 * static_cast<double>(r.baseline_total.cents - r.treatment_total.cents) /
                     static_cast<double>(r.baseline_total.cents);
  r.baseline_participants = ValidationParticipants(baseline);
  r.treatment_participants = ValidationParticipants(treatment);
  return r;
}

std::string SavingsReport::ToText() const {
  std::ostringstream out;
  out << "validation cost: baseline " << baseline_total.ToString() << " ("
      << baseline_participants << " participants), treatment " << treatment_total.ToString()
      << " (" << treatment_participants << " participants)\n";
  out << "validation saving: " << util::FormatFixed(saving_percent, 2) << "%\n";
  return out.str();
}

std::string SavingsReport::ToJson() const {
  nlohmann::ordered_json j;
  j["unit"] = baseline_total.unit;
  j["baseline_validation_total"] = baseline_total.value();
  j["treatment_validation_total"] = treatment_total.value();
  j["saving_percent"] = saving_percent;
  j["baseline_participants"] = baseline_participants;
  j["treatment_participants"] = treatment_participants;
  j["participant_delta"] = treatment_participants - baseline_participants;
  return j.dump(2) + "\n";
}

}  // namespace crowdval
