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

#include <gtest/gtest.h>

#include <random>

#include "crowdval/adapters.hpp"
#include "crowdval/error.hpp"
#include "oracles.hpp"
#include "test_support.hpp"

namespace crowdval {
namespace {

std::string Utf8(std::u32string_view s) {
  std::string out;
  for (char32_t c : s) {
    if (c < 0x80) {
      out += static_cast<char>(c);
    } else if (c < 0x800) {
      out += static_cast<char>(0xC0 | (c >> 6));
      out += static_cast<char>(0x80 | (c & 0x3F));
    } else if (c < 0x10000) {
      out += static_cast<char>(0xE0 | (c >> 12));
      out += static_cast<char>(0x80 | ((c >> 6) & 0x3F));
      out += static_cast<char>(0x80 | (c & 0x3F));
    } else {
      out += static_cast<char>(0xF0 | (c >> 18));
      out += static_cast<char>(0x80 | ((c >> 12) & 0x3F));
      out += static_cast<char>(0x80 | ((c >> 6) & 0x3F));
      out += static_cast<char>(0x80 | (c & 0x3F));
    }
  }
  return out;
}

TEST(Normalize, DefaultProfile) {
  EXPECT_EQ(Normalize("Hello,  World!"), "hello world");
  EXPECT_EQ(Normalize("  tabs\tand\nnewlines  "), "tabs and newlines");
  EXPECT_EQ(Normalize(""), "");
  EXPECT_EQ(Normalize("?!."), "");
}

// Expected code points come from Python's unicodedata.normalize.
TEST(Normalize, KoreanAndCompatibilityForms) {
  EXPECT_EQ(Normalize(Utf8(U"한")), Utf8(U"한"));
  EXPECT_EQ(Normalize(Utf8(U"ㄱ")), Utf8(U"ᄀ"));
  EXPECT_EQ(Normalize(Utf8(U"ＡＢＣ")), "abc");
  EXPECT_EQ(Normalize(Utf8(U"①")), "1");
  EXPECT_EQ(Normalize(Utf8(U"ﾊﾟ")), Utf8(U"パ"));

  NormalizationProfile nfc = ParseProfile("nfc");
  EXPECT_EQ(Normalize(Utf8(U"한"), nfc), Utf8(U"한"));
  EXPECT_EQ(Normalize(Utf8(U"ㄱ"), nfc), Utf8(U"ㄱ"));
  EXPECT_EQ(Normalize("Hello, World", nfc), "Hello, World");
}

TEST(Normalize, ProfileStrings) {
  EXPECT_EQ(ProfileToString(NormalizationProfile{}), "nfkc+lower+strip+collapse");
  EXPECT_EQ(ParseProfile("default"), NormalizationProfile{});
  EXPECT_EQ(ParseProfile("nfkc,lower,strip,collapse"), NormalizationProfile{});
  NormalizationProfile p = ParseProfile("nfc+lower");
  EXPECT_EQ(p.unicode_form, NormalizationProfile::Form::kNfc);
  EXPECT_TRUE(p.lowercase);
  EXPECT_FALSE(p.strip_punctuation);
  EXPECT_EQ(ParseProfile(ProfileToString(p)), p);
  EXPECT_THROW(ParseProfile("nfkc+shout"), UsageError);
}

TEST(Align, CountsEachOperation) {
  auto chars = [](std::string_view s) { return CodePoints(s); };
  EditCounts sub = Align(chars("abcd"), chars("abxd"));
  EXPECT_EQ(sub, (EditCounts{1, 0, 0, 4}));
  EditCounts del = Align(chars("abcd"), chars("abd"));
  EXPECT_EQ(del, (EditCounts{0, 1, 0, 4}));
  EditCounts ins = Align(chars("abd"), chars("abcd"));
  EXPECT_EQ(ins, (EditCounts{0, 0, 1, 3}));
  EditCounts empty = Align(chars(""), chars("xy"));
  EXPECT_EQ(empty, (EditCounts{0, 0, 2, 0}));
}

TEST(Rates, WorkedExamples) {
  EXPECT_DOUBLE_EQ(Cer("abcd", "abxd"), 25.0);
  EXPECT_DOUBLE_EQ(Cer("", "x"), 100.0);
  EXPECT_DOUBLE_EQ(Cer("", ""), 0.0);
  EXPECT_DOUBLE_EQ(Wer("turn off the lights", "turn of the lights"), 25.0);
  EXPECT_NEAR(Wer("turn off lights", "turn of lights"), 100.0 / 3.0, 1e-12);
  EXPECT_DOUBLE_EQ(Wer("a b", "a b c d"), 100.0);
  EXPECT_DOUBLE_EQ(Ter("set alarm at seven", "set an alarm at seven"), 25.0);
  std::vector<std::string> ref{"k", "a", "t"}, hyp{"k", "a", "p"};
  EXPECT_NEAR(Per(ref, hyp), 100.0 / 3.0, 1e-12);
  // One wrong character in ten.
  EXPECT_DOUBLE_EQ(Cer("abcdefghij", "abcdefghiz"), 10.0);
}

TEST(Rates, CerCountsSpacesAfterCollapsing) {
  // "a b" has three characters; dropping the space is one deletion.
  EXPECT_NEAR(Cer("a b", "ab"), 100.0 / 3.0, 1e-12);
  EXPECT_DOUBLE_EQ(Cer("a  b", "a b"), 0.0);
}

TEST(Rates, MatchOracleOnRandomAsciiPairs) {
  std::mt19937_64 rng(11);
  const std::string alphabet = "ab c";
  auto draw = [&] {
    std::string s;
    const std::size_t len = rng() % 13;
    for (std::size_t i = 0; i < len; ++i) s += alphabet[rng() % alphabet.size()];
    return s;
  };
  for (int i = 0; i < 500; ++i) {
    const std::string r = draw(), h = draw();
    const auto rc = oracle::Chars(r), hc = oracle::Chars(h);
    const auto rw = oracle::Words(r), hw = oracle::Words(h);
    EditCounts ce = CharEdits(r, h);
    EXPECT_EQ(ce.distance(), oracle::EditDistance(rc, hc)) << '"' << r << "\" / \"" << h << '"';
    EXPECT_EQ(ce.ref_len, rc.size());
    EXPECT_NEAR(Cer(r, h), oracle::Rate(oracle::EditDistance(rc, hc), rc.size()), 1e-9);
    EXPECT_NEAR(Wer(r, h), oracle::Rate(oracle::EditDistance(rw, hw), rw.size()), 1e-9);
  }
}

TEST(Features, ParseAndFormatLists) {
  EXPECT_EQ(ParseFeatureList("cer,wer,silver"),
            (std::vector<Feature>{Feature::kCer, Feature::kWer, Feature::kSilver}));
  EXPECT_EQ(FeatureListToString({Feature::kPer, Feature::kTer}), "per,ter");
  EXPECT_THROW(ParseFeatureList("cer,bleu"), UsageError);
}

TEST(Features, BuildFromBundle) {
  Triplet t;
  t.id = "a";
  t.lang = "en";
  t.prompt = "turn off lights";
  t.recording = "a.wav";
  t.silver = Label::kInvalid;
  TranscriptBundle b;
  b.id = "a";
  b.hyp = "turn of lights";
  b.ref_translation = "turn off lights";
  b.hyp_translation = "turn of lights";
  b.ref_phonemes = std::vector<std::string>{"t", "ɜ", "n"};
  b.hyp_phonemes = std::vector<std::string>{"t", "ɜ", "n"};
  FeatureVector fv = BuildFeatures(t, b, NormalizationProfile{});
  EXPECT_NEAR(*fv.wer, 100.0 / 3.0, 1e-12);
  EXPECT_NEAR(*fv.ter, 100.0 / 3.0, 1e-12);
  EXPECT_DOUBLE_EQ(*fv.per, 0.0);
  EXPECT_GT(*fv.cer, 0.0);
  EXPECT_EQ(fv.silver, Label::kInvalid);
  EXPECT_EQ(fv.Get(Feature::kSilver), 1.0);

  TranscriptBundle no_phonemes = b;
  no_phonemes.ref_phonemes.reset();
  EXPECT_THROW(BuildFeatures(t, no_phonemes, NormalizationProfile{}), DataError);
  FeatureVector cw = BuildFeatures(t, no_phonemes, NormalizationProfile{},
                                   {Feature::kCer, Feature::kWer});
  EXPECT_FALSE(cw.per.has_value());
}

TEST(Features, TableRoundTrip) {
  test::TempDir dir;
  FeatureTable table;
  table["a"].cer = 12.5;
  table["a"].wer = 100.0 / 3.0;
  table["a"].silver = Label::kValid;
  table["b"].cer = 0;
  table["b"].wer = 0;
  table["b"].per = 7.25;
  SaveFeatureTable(table, NormalizationProfile{}, dir / "f.tsv");
  EXPECT_EQ(test::ReadFile(dir / "f.tsv").rfind("# profile: nfkc+lower+strip+collapse\n", 0), 0u);
  EXPECT_EQ(LoadFeatureTable(dir / "f.tsv"), table);
}

}  // namespace
}  // namespace crowdval
