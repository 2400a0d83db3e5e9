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

// Collection-cost ledgers and validation-phase savings.

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace crowdval {

/// Fixed-point amount in hundredths of the unit. No conversion between units.
struct Money {
  std::int64_t cents = 0;
  std::string unit = "GBP";

  double value() const { return static_cast<double>(cents) / 100.0; }
  /// "£351.20" for GBP, "<UNIT> 12.00" otherwise.
  std::string ToString() const;
  bool operator==(const Money&) const = default;
};

/// Parses "351.2", "£ 351.2", "GBP 351.20". Throws DataError on more than two
/// decimals or garbage.
Money ParseMoney(std::string_view s, std::string_view default_unit = "GBP");

enum class Phase { kRecording, kAutomatedValidation, kHumanValidation };
std::string_view PhaseName(Phase p);
std::optional<Phase> ParsePhase(std::string_view s);

struct LedgerEntry {
  int iteration = 1;
  Phase phase = Phase::kRecording;
  Money cost;
  std::optional<int> participants;  // N/A when absent
};

struct CostLedger {
  std::vector<LedgerEntry> entries;
};

/// TSV: iteration phase cost participants (header required; "N/A" or empty
/// participants means not applicable).
CostLedger LoadLedger(const std::filesystem::path& path);
CostLedger ParseLedger(std::string_view tsv, std::string_view source = "<memory>");

/// Human + automated validation cost over all iterations. Recording excluded.
Money ValidationTotal(const CostLedger& ledger);
/// Participants across validation phases (N/A counts as 0).
int ValidationParticipants(const CostLedger& ledger);

struct SavingsReport {
  Money baseline_total;
  Money treatment_total;
  /// 100 * (baseline - treatment) / baseline.
  double saving_percent = 0;
  int baseline_participants = 0;
  int treatment_participants = 0;

  std::string ToText() const;
  std::string ToJson() const;
};

/// Throws DataError on an empty ledger, mixed units or a zero baseline total.
SavingsReport Savings(const CostLedger& baseline, const CostLedger& treatment);

}  // namespace crowdval
