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

#include "crowdval/evalreport.hpp"

#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include "crowdval/error.hpp"
#include "crowdval/util.hpp"

namespace crowdval {

namespace {
constexpr const char* kModule = "evalreport";

double Ratio(std::size_t num, std::size_t den, const char* name, std::vector<std::string>& flags) {
  if (den == 0) {
    flags.emplace_back(name);
    return 0.0;
  }
  return static_cast<double>(num) / static_cast<double>(den);
}
}  // namespace

ConfusionMatrix Confusion(std::span<const Label> gold, std::span<const Label> predicted) {
  if (gold.size() != predicted.size())
    throw DataError(kModule, "gold and predicted lengths differ");
  ConfusionMatrix cm;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    const bool g = gold[i] == Label::kInvalid;
    const bool p = predicted[i] == Label::kInvalid;
    if (g && p) ++cm.tp;
    else if (!g && p) ++cm.fp;
    else if (g && !p) ++cm.fn;
    else ++cm.tn;
  }
  return cm;
}

ConfusionMatrix Confusion(const std::vector<PolicyDecision>& decisions, const LabelMap& gold) {
  std::vector<Label> g, p;
  std::vector<std::string> missing;
  for (const auto& d : decisions) {
    auto it = gold.find(d.id);
    if (it == gold.end()) {
      missing.push_back(d.id);
      continue;
    }
    g.push_back(it->second);
    p.push_back(d.label);
  }
  if (!missing.empty()) {
    if (missing.size() > 10) missing.resize(10);
    throw DataError(kModule, "decision id(s) without gold label: " + util::Join(missing, ", "));
  }
  return Confusion(g, p);
}

EvalRow Metrics(const ConfusionMatrix& cm, std::string policy) {
  EvalRow r;
  r.policy = std::move(policy);
  r.precision = Ratio(cm.tp, cm.tp + cm.fp, "precision", r.degenerate);
  r.recall = Ratio(cm.tp, cm.tp + cm.fn, "recall", r.degenerate);
  r.f1 = (r.precision + r.recall) > 0 ? 2 * r.precision * r.recall / (r.precision + r.recall) : 0.0;
  r.type1 = Ratio(cm.fp, cm.fp + cm.tn, "type1", r.degenerate);
  r.type2 = Ratio(cm.fn, cm.tp + cm.fn, "type2", r.degenerate);
  return r;
}

KappaResult CohenKappa(std::span<const Label> a, std::span<const Label> b) {
  if (a.size() != b.size()) throw DataError(kModule, "kappa: label lists differ in length");
  if (a.empty()) throw DataError(kModule, "kappa: empty label lists");
  const double n = static_cast<double>(a.size());
  double agree = 0, a1 = 0, b1 = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    agree += a[i] == b[i];
    a1 += a[i] == Label::kInvalid;
    b1 += b[i] == Label::kInvalid;
  }
  const double po = agree / n;
  const double pe = (a1 / n) * (b1 / n) + (1 - a1 / n) * (1 - b1 / n);
  if (pe >= 1.0) return {po >= 1.0 ? 1.0 : 0.0, true};
  return {(po - pe) / (1 - pe), false};
}

std::string FormatEvalRows(const std::vector<EvalRow>& rows) {
  std::ostringstream out;
  out << "policy,precision,recall,f1,type1,type2\n";
  for (const auto& r : rows)
    out << r.policy << ',' << util::FormatFixed(r.precision, 3) << ','
        << util::FormatFixed(r.recall, 3) << ',' << util::FormatFixed(r.f1, 3) << ','
        << util::FormatFixed(r.type1, 3) << ',' << util::FormatFixed(r.type2, 3) << '\n';
  return out.str();
}

std::vector<EvalRow> ParseEvalRows(std::string_view csv) {
  std::vector<EvalRow> out;
  auto lines = util::Split(csv, '\n');
  bool header = true;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    auto line = util::Trim(lines[i]);
    if (line.empty()) continue;
    if (header) {
      if (line != "policy,precision,recall,f1,type1,type2")
        throw DataError(kModule, "bad eval CSV header");
      header = false;
      continue;
    }
    auto cells = util::Split(line, ',');
    if (cells.size() != 6)
      throw DataError(kModule, "eval CSV line " + std::to_string(i + 1) + ": expected 6 columns");
    EvalRow r;
    r.policy = cells[0];
    double* fields[] = {&r.precision, &r.recall, &r.f1, &r.type1, &r.type2};
    for (int c = 0; c < 5; ++c) {
      auto v = util::ParseDouble(cells[c + 1]);
      if (!v) throw DataError(kModule, "eval CSV line " + std::to_string(i + 1) + ": bad number");
      *fields[c] = *v;
    }
    out.push_back(std::move(r));
  }
  return out;
}

std::string TradeoffCsv(const std::vector<EvalRow>& rows, std::optional<Zone> zone) {
  std::ostringstream out;
  out << "policy,type1,type2,f1\n";
  for (const auto& r : rows) {
    if (zone && (r.type1 > zone->type1_max || r.type2 > zone->type2_max)) continue;
    out << r.policy << ',' << util::FormatFixed(r.type1, 3) << ','
        << util::FormatFixed(r.type2, 3) << ',' << util::FormatFixed(r.f1, 3) << '\n';
  }
  return out.str();
}

QualityReport DatasetQuality(const Dataset& ds, const std::vector<TranscriptBundle>& bundles,
                             const NormalizationProfile& profile,
                             const std::vector<std::string>& retained) {
  std::map<std::string, const TranscriptBundle*> by_id;
  for (const auto& b : bundles) by_id[b.id] = &b;
  std::set<std::string> keep(retained.begin(), retained.end());
  QualityReport rep;
  rep.lang = ds.lang();
  for (const auto& t : ds.triplets()) {
    if (!keep.empty() && !keep.count(t.id)) continue;
    auto it = by_id.find(t.id);
    if (it == by_id.end() || !it->second->hyp)
      throw DataError(kModule, "no hypothesis transcript for retained id '" + t.id + "'");
    rep.word_edits += WordEdits(t.prompt, *it->second->hyp, profile);
    rep.char_edits += CharEdits(t.prompt, *it->second->hyp, profile);
    ++rep.samples;
  }
  if (rep.samples == 0) throw DataError(kModule, "quality report over an empty retained set");
  rep.wer = rep.word_edits.rate();
  rep.cer = rep.char_edits.rate();
  return rep;
}

std::string FormatQualityReport(const std::vector<QualityReport>& reports) {
  std::ostringstream out;
  out << "lang,samples,wer,cer\n";
  for (const auto& r : reports)
    out << r.lang << ',' << r.samples << ',' << util::FormatFixed(r.wer, 2) << ','
        << util::FormatFixed(r.cer, 2) << '\n';
  return out.str();
}

std::vector<ConfusionMatrix> SolveConfusion(const RateTargets& targets, std::size_t total,
                                            std::size_t positives, int decimals) {
  std::vector<ConfusionMatrix> out;
  if (positives > total) return out;
  const double tol = 0.5 * std::pow(10.0, -decimals) + 1e-12;
  auto near = [&](double v, double target) { return std::fabs(v - target) <= tol; };
  const std::size_t negatives = total - positives;
  for (std::size_t tp = 0; tp <= positives; ++tp) {
    const std::size_t fn = positives - tp;
    for (std::size_t fp = 0; fp <= negatives; ++fp) {
      ConfusionMatrix cm{tp, fp, fn, negatives - fp};
      EvalRow r = Metrics(cm);
      if (near(r.precision, targets.precision) && near(r.recall, targets.recall) &&
          near(r.f1, targets.f1) && near(r.type1, targets.type1) && near(r.type2, targets.type2))
        out.push_back(cm);
    }
  }
  return out;
}

}  // namespace crowdval
