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

#include "crowdval/textmetrics.hpp"

#include <unicode/locid.h>
#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>
#include <unicode/utf8.h>

#include <sstream>

#include "crowdval/adapters.hpp"
#include "crowdval/error.hpp"
#include "crowdval/util.hpp"

namespace crowdval {

namespace {

const icu::Normalizer2& Normalizer(NormalizationProfile::Form form) {
  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* n = form == NormalizationProfile::Form::kNfc
                                  ? icu::Normalizer2::getNFCInstance(status)
                                  : icu::Normalizer2::getNFKCInstance(status);
  if (U_FAILURE(status) || n == nullptr)
    throw Error(ErrorKind::kInternal, "textmetrics", "ICU normalizer unavailable");
  return *n;
}

icu::UnicodeString ApplyForm(const icu::UnicodeString& s, NormalizationProfile::Form form) {
  UErrorCode status = U_ZERO_ERROR;
  icu::UnicodeString out = Normalizer(form).normalize(s, status);
  if (U_FAILURE(status)) throw Error(ErrorKind::kInternal, "textmetrics", "normalization failed");
  return out;
}

}  // namespace

std::string ProfileToString(const NormalizationProfile& p) {
  std::string s = p.unicode_form == NormalizationProfile::Form::kNfc ? "nfc" : "nfkc";
  if (p.lowercase) s += "+lower";
  if (p.strip_punctuation) s += "+strip";
  if (p.collapse_whitespace) s += "+collapse";
  return s;
}

NormalizationProfile ParseProfile(std::string_view s) {
  NormalizationProfile p{NormalizationProfile::Form::kNfkc, false, false, false};
  if (util::Trim(s) == "default") return NormalizationProfile{};
  std::string norm(s);
  for (char& c : norm)
    if (c == ',') c = '+';
  for (const auto& tok : util::Split(norm, '+')) {
    auto t = util::Trim(tok);
    if (t == "nfc") p.unicode_form = NormalizationProfile::Form::kNfc;
    else if (t == "nfkc") p.unicode_form = NormalizationProfile::Form::kNfkc;
    else if (t == "lower") p.lowercase = true;
    else if (t == "strip") p.strip_punctuation = true;
    else if (t == "collapse") p.collapse_whitespace = true;
    else if (t == "none" || t.empty()) continue;
    else throw UsageError("textmetrics", "unknown profile token '" + std::string(t) + "'");
  }
  return p;
}

std::string Normalize(std::string_view text, const NormalizationProfile& profile) {
  icu::UnicodeString s =
      icu::UnicodeString::fromUTF8(icu::StringPiece(text.data(), static_cast<int32_t>(text.size())));
  s = ApplyForm(s, profile.unicode_form);
  if (profile.lowercase) s.toLower(icu::Locale::getRoot());

  icu::UnicodeString filtered;
  bool pending_space = false;
  bool any = false;
  for (int32_t i = 0; i < s.length();) {
    UChar32 c = s.char32At(i);
    i += U16_LENGTH(c);
    if (profile.strip_punctuation && u_ispunct(c)) continue;
    if (profile.collapse_whitespace && u_isUWhiteSpace(c)) {
      pending_space = any;
      continue;
    }
    if (pending_space) filtered.append(static_cast<UChar32>(' '));
    pending_space = false;
    filtered.append(c);
    any = true;
  }
  // Removing characters can leave combining sequences that compose
  // differently; a second pass restores the normal form.
  s = ApplyForm(filtered, profile.unicode_form);
  if (profile.lowercase) s.toLower(icu::Locale::getRoot());
  std::string out;
  s.toUTF8String(out);
  return out;
}

std::vector<char32_t> CodePoints(std::string_view utf8) {
  std::vector<char32_t> out;
  out.reserve(utf8.size());
  const auto* p = reinterpret_cast<const uint8_t*>(utf8.data());
  const auto len = static_cast<int32_t>(utf8.size());
  for (int32_t i = 0; i < len;) {
    UChar32 c;
    U8_NEXT(p, i, len, c);
    out.push_back(c < 0 ? char32_t{0xFFFD} : static_cast<char32_t>(c));
  }
  return out;
}

double EditCounts::rate() const {
  return 100.0 * static_cast<double>(distance()) / static_cast<double>(std::max<std::size_t>(ref_len, 1));
}

std::vector<char32_t> CharTokens(std::string_view text, const NormalizationProfile& profile) {
  return CodePoints(Normalize(text, profile));
}

std::vector<std::string> WordTokens(std::string_view text, const NormalizationProfile& profile) {
  std::string n = Normalize(text, profile);
  // Non-ASCII white space survives when collapse is off; split on it too.
  icu::UnicodeString u = icu::UnicodeString::fromUTF8(n);
  std::vector<std::string> out;
  icu::UnicodeString cur;
  auto flush = [&] {
    if (cur.isEmpty()) return;
    std::string w;
    cur.toUTF8String(w);
    out.push_back(std::move(w));
    cur.remove();
  };
  for (int32_t i = 0; i < u.length();) {
    UChar32 c = u.char32At(i);
    i += U16_LENGTH(c);
    if (u_isUWhiteSpace(c)) {
      flush();
    } else {
      cur.append(c);
    }
  }
  flush();
  return out;
}

EditCounts CharEdits(std::string_view ref, std::string_view hyp,
                     const NormalizationProfile& profile) {
  return Align(CharTokens(ref, profile), CharTokens(hyp, profile));
}

EditCounts WordEdits(std::string_view ref, std::string_view hyp,
                     const NormalizationProfile& profile) {
  return Align(WordTokens(ref, profile), WordTokens(hyp, profile));
}

double Cer(std::string_view ref, std::string_view hyp, const NormalizationProfile& profile) {
  return CharEdits(ref, hyp, profile).rate();
}

double Wer(std::string_view ref, std::string_view hyp, const NormalizationProfile& profile) {
  return WordEdits(ref, hyp, profile).rate();
}

double Ter(std::string_view ref_translation, std::string_view hyp_translation,
           const NormalizationProfile& profile) {
  return WordEdits(ref_translation, hyp_translation, profile).rate();
}

double Per(std::span<const std::string> ref_phonemes, std::span<const std::string> hyp_phonemes) {
  return Align(ref_phonemes, hyp_phonemes).rate();
}

std::string_view FeatureName(Feature f) {
  switch (f) {
    case Feature::kCer: return "cer";
    case Feature::kWer: return "wer";
    case Feature::kPer: return "per";
    case Feature::kTer: return "ter";
    case Feature::kSilver: return "silver";
  }
  return "?";
}

std::optional<Feature> ParseFeature(std::string_view s) {
  s = util::Trim(s);
  for (Feature f : kAllFeatures)
    if (FeatureName(f) == s) return f;
  return std::nullopt;
}

std::vector<Feature> ParseFeatureList(std::string_view s) {
  std::vector<Feature> out;
  for (const auto& tok : util::Split(s, ',')) {
    if (util::Trim(tok).empty()) continue;
    auto f = ParseFeature(tok);
    if (!f) throw UsageError("textmetrics", "unknown feature '" + tok + "'");
    if (std::find(out.begin(), out.end(), *f) == out.end()) out.push_back(*f);
  }
  if (out.empty()) throw UsageError("textmetrics", "empty feature list");
  return out;
}

std::string FeatureListToString(const std::vector<Feature>& fs) {
  std::vector<std::string> names;
  for (Feature f : fs) names.emplace_back(FeatureName(f));
  return util::Join(names, ",");
}

std::optional<double> FeatureVector::Get(Feature f) const {
  switch (f) {
    case Feature::kCer: return cer;
    case Feature::kWer: return wer;
    case Feature::kPer: return per;
    case Feature::kTer: return ter;
    case Feature::kSilver:
      if (!silver) return std::nullopt;
      return static_cast<double>(LabelValue(*silver));
  }
  return std::nullopt;
}

void FeatureVector::Set(Feature f, double v) {
  switch (f) {
    case Feature::kCer: cer = v; break;
    case Feature::kWer: wer = v; break;
    case Feature::kPer: per = v; break;
    case Feature::kTer: ter = v; break;
    case Feature::kSilver: silver = v >= 0.5 ? Label::kInvalid : Label::kValid; break;
  }
}

FeatureVector BuildFeatures(const Triplet& triplet, const TranscriptBundle& bundle,
                            const NormalizationProfile& profile,
                            const std::vector<Feature>& requested) {
  auto missing = [&](Feature f, std::string_view part) {
    return DataError("textmetrics", "id '" + triplet.id + "': cannot compute " +
                                        std::string(FeatureName(f)) + ": bundle lacks " +
                                        std::string(part));
  };
  FeatureVector fv;
  fv.silver = triplet.silver;
  for (Feature f : requested) {
    switch (f) {
      case Feature::kCer:
        if (!bundle.hyp) throw missing(f, "hyp");
        fv.cer = Cer(triplet.prompt, *bundle.hyp, profile);
        break;
      case Feature::kWer:
        if (!bundle.hyp) throw missing(f, "hyp");
        fv.wer = Wer(triplet.prompt, *bundle.hyp, profile);
        break;
      case Feature::kTer:
        if (!bundle.ref_translation || !bundle.hyp_translation) throw missing(f, "translations");
        fv.ter = Ter(*bundle.ref_translation, *bundle.hyp_translation, profile);
        break;
      case Feature::kPer:
        if (!bundle.ref_phonemes || !bundle.hyp_phonemes) throw missing(f, "phonemes");
        fv.per = Per(*bundle.ref_phonemes, *bundle.hyp_phonemes);
        break;
      case Feature::kSilver:
        break;
    }
  }
  return fv;
}

std::string FormatFeatureTable(const FeatureTable& table, const NormalizationProfile& profile) {
  std::ostringstream out;
  out << "# profile: " << ProfileToString(profile) << '\n';
  out << "id\tcer\twer\tper\tter\tsilver\n";
  auto num = [](const std::optional<double>& v) {
    return v ? util::FormatDouble(*v) : std::string();
  };
  for (const auto& [id, fv] : table) {
    out << util::EscapeTsv(id) << '\t' << num(fv.cer) << '\t' << num(fv.wer) << '\t'
        << num(fv.per) << '\t' << num(fv.ter) << '\t'
        << (fv.silver ? std::to_string(LabelValue(*fv.silver)) : std::string()) << '\n';
  }
  return out.str();
}

void SaveFeatureTable(const FeatureTable& table, const NormalizationProfile& profile,
                      const std::filesystem::path& path) {
  util::WriteFileAtomic(path, FormatFeatureTable(table, profile));
}

FeatureTable LoadFeatureTable(const std::filesystem::path& path) {
  FeatureTable out;
  bool header_seen = false;
  auto lines = util::ReadLines(path);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::string& line = lines[i];
    if (line.empty() || line.front() == '#') continue;
    const std::string where = path.string() + ": line " + std::to_string(i + 1) + ": ";
    auto cells = util::Split(line, '\t');
    if (!header_seen) {
      if (cells != std::vector<std::string>{"id", "cer", "wer", "per", "ter", "silver"})
        throw DataError("textmetrics", where + "bad feature table header");
      header_seen = true;
      continue;
    }
    if (cells.size() != 6) throw DataError("textmetrics", where + "expected 6 columns");
    FeatureVector fv;
    const Feature cols[] = {Feature::kCer, Feature::kWer, Feature::kPer, Feature::kTer};
    for (int c = 0; c < 4; ++c) {
      if (cells[c + 1].empty()) continue;
      auto v = util::ParseDouble(cells[c + 1]);
      if (!v || *v < 0)
        throw DataError("textmetrics", where + "bad " + std::string(FeatureName(cols[c])) +
                                           " value '" + cells[c + 1] + "'");
      fv.Set(cols[c], *v);
    }
    if (!cells[5].empty()) {
      fv.silver = ParseLabel(cells[5]);
      if (!fv.silver) throw DataError("textmetrics", where + "silver must be 0 or 1");
    }
    auto id = util::UnescapeTsv(cells[0]);
    if (!id || id->empty()) throw DataError("textmetrics", where + "bad id");
    if (!out.emplace(*id, fv).second) throw DataError("textmetrics", where + "duplicate id");
  }
  if (!header_seen) throw DataError("textmetrics", path.string() + ": missing header");
  return out;
}

}  // namespace crowdval
