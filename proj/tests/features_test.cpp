// Copyright 2026 The mixtag Authors.
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

#include <algorithm>
#include <random>
#include <set>

#include <gtest/gtest.h>

#include "mixtag/features.hpp"

namespace mixtag {
namespace {

Sentence make_sentence(std::initializer_list<const char*> words, const char* lang = "bn") {
  Sentence s;
  for (const char* w : words) s.tokens.push_back(Token{w, lang, std::nullopt});
  return s;
}

bool has(const AttributeSet& attrs, const std::string& a) {
  return std::find(attrs.begin(), attrs.end(), a) != attrs.end();
}

// --- lexicon ---------------------------------------------------------------

TEST(Lexicon, LoadsShortFormPairs) {
  const auto lex = load_lexicon("krte\tkorte\n");
  ASSERT_EQ(lex.size(), 1u);
  EXPECT_EQ(lex.lookup("krte"), "korte");
}

TEST(Lexicon, EmptyTextIsEmptyLexicon) { EXPECT_TRUE(load_lexicon("").empty()); }

TEST(Lexicon, DuplicateKeyReportsLine) {
  try {
    load_lexicon("krte\tkorte\nkrte\tkarte\n");
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
}

TEST(Lexicon, CommentsAndBlankLinesSkipped) {
  const auto lex = load_lexicon("# Bengali-English\n\nkrte\tkorte\r\nkno\tkeno\n");
  EXPECT_EQ(lex.size(), 2u);
  EXPECT_EQ(lex.lookup("kno"), "keno");
}

TEST(Lexicon, WrongColumnCount) {
  EXPECT_THROW(load_lexicon("krte\n"), DataError);
  EXPECT_THROW(load_lexicon("krte\tkorte\textra\n"), DataError);
  EXPECT_THROW(load_lexicon("krte\t\n"), DataError);
}

TEST(Lexicon, FingerprintDependsOnContent) {
  const auto a = load_lexicon("krte\tkorte\n");
  const auto b = load_lexicon("krte\tkarte\n");
  EXPECT_NE(a.fingerprint(), b.fingerprint());
  EXPECT_EQ(a.fingerprint(), load_lexicon("# c\nkrte\tkorte\n").fingerprint());
}

// --- flags -----------------------------------------------------------------

TEST(OrthoFlags, AtMention) {
  const auto f = ortho_flags("@kamal");
  EXPECT_TRUE(f[Flag::ContainsAtTheRateBeg]);
  EXPECT_TRUE(f[Flag::ContainsAtTheRate]);
  EXPECT_FALSE(f[Flag::ContainsDigit]);
  EXPECT_FALSE(f[Flag::ContainsMoreDots]);
  EXPECT_FALSE(f[Flag::ContainsSlash]);
  EXPECT_FALSE(f[Flag::ContainsMoreSlash]);
  EXPECT_FALSE(f[Flag::ContainsPureDigitSeq]);
  EXPECT_FALSE(f[Flag::ContainsHyphenatedNumber]);
}

TEST(OrthoFlags, DigitSixSuffix) {
  const auto f = ortho_flags("kor6e");
  EXPECT_TRUE(f[Flag::ThereExistsAsuffixDigit6FollowsAlphabets]);
  EXPECT_TRUE(f[Flag::ThereExistsAsuffixDigitFollowsAlph]);
  EXPECT_TRUE(f[Flag::ContainsDigitAndAlphabetBoth]);
  EXPECT_FALSE(ortho_flags("kor7e")[Flag::ThereExistsAsuffixDigit6FollowsAlphabets]);
  EXPECT_TRUE(ortho_flags("kor7e")[Flag::ThereExistsAsuffixDigitFollowsAlph]);
  EXPECT_FALSE(ortho_flags("kore6")[Flag::ThereExistsAsuffixDigitFollowsAlph]);
  EXPECT_TRUE(ortho_flags("2day")[Flag::ThereExistsAsuffixDigitFollowsAlph]);
}

TEST(OrthoFlags, Url) {
  const auto f = ortho_flags("http://t.co/x");
  EXPECT_TRUE(f[Flag::ContainsHttp]);
  EXPECT_TRUE(f[Flag::ContainsColon]);
  EXPECT_TRUE(f[Flag::ContainsSlash]);
  EXPECT_TRUE(f[Flag::ContainsMoreSlash]);
  EXPECT_FALSE(f[Flag::ContainsMoreDots]);  // one dot only
  EXPECT_TRUE(ortho_flags("http://t.co.in/x")[Flag::ContainsMoreDots]);
  EXPECT_TRUE(ortho_flags("HTTPS")[Flag::ContainsHttp]);
}

TEST(OrthoFlags, HyphenatedNumber) {
  const auto f = ortho_flags("1947-48");
  EXPECT_TRUE(f[Flag::ContainsHyphenatedNumber]);
  EXPECT_TRUE(f[Flag::ContainsDigit]);
  EXPECT_TRUE(f[Flag::ContainsHyphen]);
  EXPECT_FALSE(f[Flag::ContainsPureDigitSeq]);
  EXPECT_FALSE(ortho_flags("1947-")[Flag::ContainsHyphenatedNumber]);
  EXPECT_FALSE(ortho_flags("-48")[Flag::ContainsHyphenatedNumber]);
  EXPECT_FALSE(ortho_flags("1-2-3")[Flag::ContainsHyphenatedNumber]);
}

TEST(OrthoFlags, PunctuationRun) {
  const auto f = ortho_flags("!!!");
  EXPECT_TRUE(f[Flag::ContainsPuncSeq]);
  EXPECT_TRUE(f[Flag::ContainsSeqOfSameChar]);
  EXPECT_TRUE(f[Flag::LongRepeatedCharSeqAtEnd]);
  EXPECT_FALSE(f[Flag::ContainsCharsOtherThanAlphDigitPunc]);
}

TEST(OrthoFlags, SlashCountsBothDirections) {
  EXPECT_TRUE(ortho_flags("a\\b")[Flag::ContainsSlash]);
  EXPECT_TRUE(ortho_flags("a/b")[Flag::ContainsSlash]);
  EXPECT_TRUE(ortho_flags("a/b\\c")[Flag::ContainsMoreSlash]);
  EXPECT_FALSE(ortho_flags("a/b")[Flag::ContainsMoreSlash]);
}

TEST(OrthoFlags, CaseAndRepetition) {
  EXPECT_TRUE(ortho_flags("OK")[Flag::ContainsAllCaps]);
  EXPECT_FALSE(ortho_flags("Ok")[Flag::ContainsAllCaps]);
  EXPECT_FALSE(ortho_flags("OK!")[Flag::ContainsAllCaps]);
  EXPECT_FALSE(ortho_flags("a")[Flag::ContainsSeqOfSameChar]);
  EXPECT_TRUE(ortho_flags("aa")[Flag::ContainsSeqOfSameChar]);
  EXPECT_TRUE(ortho_flags("hmmm")[Flag::LongRepeatedCharSeqAtEnd]);
  EXPECT_FALSE(ortho_flags("hmm")[Flag::LongRepeatedCharSeqAtEnd]);
  EXPECT_TRUE(ortho_flags("😀😀😀")[Flag::LongRepeatedCharSeqAtEnd]);
  EXPECT_TRUE(ortho_flags("😀😀")[Flag::ContainsSeqOfSameChar]);
}

TEST(OrthoFlags, VowelSequences) {
  EXPECT_TRUE(ortho_flags("Khuuuuuub")[Flag::ContainsLongVowelSeqInside]);
  EXPECT_TRUE(ortho_flags("beautiful")[Flag::ContainsLongVowelSeqInside]);  // "eau"
  EXPECT_FALSE(ortho_flags("naa")[Flag::ContainsLongVowelSeqInside]);
}

TEST(OrthoFlags, DigitsAndOtherCharacters) {
  EXPECT_TRUE(ortho_flags("2016")[Flag::ContainsPureDigitSeq]);
  EXPECT_FALSE(ortho_flags("2016a")[Flag::ContainsPureDigitSeq]);
  EXPECT_TRUE(ortho_flags("r2d2")[Flag::ContainsDigitAndAlphabetBoth]);
  EXPECT_TRUE(ortho_flags("আমি")[Flag::ContainsCharsOtherThanAlphDigitPunc]);
  EXPECT_FALSE(ortho_flags("ami")[Flag::ContainsCharsOtherThanAlphDigitPunc]);
  EXPECT_TRUE(ortho_flags("#ICON2016")[Flag::ContainsHash]);
}

TEST(OrthoFlags, LetterHeadOtherTail) {
  const Flag f = Flag::ContainsFirstPartAlphabetSecondPartContainsOtherThanAlphDigitPunc;
  EXPECT_TRUE(ortho_flags("khub😀")[f]);
  EXPECT_TRUE(ortho_flags("ok!😀")[f]);
  EXPECT_FALSE(ortho_flags("😀khub")[f]);
  EXPECT_FALSE(ortho_flags("khub")[f]);
  EXPECT_FALSE(ortho_flags("khub!!")[f]);
}

// Implications between flags, checked over random strings.
TEST(OrthoFlags, ImplicationProperty) {
  std::mt19937_64 rng(11);
  const std::string alphabet = "aeiouAEbkz0169./\\@#-:!?_ ";
  std::uniform_int_distribution<std::size_t> len(1, 10), pick(0, alphabet.size() - 1);
  for (int i = 0; i < 5000; ++i) {
    std::string s;
    const std::size_t n = len(rng);
    for (std::size_t k = 0; k < n; ++k) s += alphabet[pick(rng)];
    const auto f = ortho_flags(s);
    if (f[Flag::ContainsMoreDots]) {
      EXPECT_GE(std::count(s.begin(), s.end(), '.'), 2) << s;
    }
    if (f[Flag::ContainsMoreSlash]) {
      EXPECT_TRUE(f[Flag::ContainsSlash]) << s;
    }
    if (f[Flag::ContainsAtTheRateBeg]) {
      EXPECT_TRUE(f[Flag::ContainsAtTheRate]) << s;
    }
    if (f[Flag::ContainsPureDigitSeq]) {
      EXPECT_TRUE(f[Flag::ContainsDigit]) << s;
    }
    if (f[Flag::ContainsHyphenatedNumber]) {
      EXPECT_TRUE(f[Flag::ContainsDigit] && f[Flag::ContainsHyphen]) << s;
    }
    if (f[Flag::ThereExistsAsuffixDigit6FollowsAlphabets]) {
      EXPECT_TRUE(f[Flag::ThereExistsAsuffixDigitFollowsAlph]) << s;
    }
  }
}

// --- word forms ------------------------------------------------------------

TEST(VowelCount, Examples) {
  EXPECT_EQ(vowel_count("khub"), 1u);
  EXPECT_EQ(vowel_count("AEIOU"), 5u);
  EXPECT_EQ(vowel_count("xyz"), 0u);
  EXPECT_EQ(vowel_count(""), 0u);
}

TEST(CollapseVowelRuns, Examples) {
  EXPECT_EQ(collapse_vowel_runs("Khuuuuuub"), "Khub");
  EXPECT_EQ(collapse_vowel_runs("abc"), "abc");
  EXPECT_EQ(collapse_vowel_runs("naa"), "na");
  EXPECT_EQ(collapse_vowel_runs("seeeela"), "sela");
  EXPECT_EQ(collapse_vowel_runs("book"), "bok");
  EXPECT_EQ(collapse_vowel_runs("hmmm"), "hmmm");  // consonant runs kept
  EXPECT_EQ(collapse_vowel_runs("beautiful"), "beautiful");  // mixed vowels kept
}

TEST(CollapseVowelRuns, IdempotentAndNeverAddsVowels) {
  std::mt19937_64 rng(3);
  const std::string alphabet = "aaeeiouUUbk";
  std::uniform_int_distribution<std::size_t> len(0, 12), pick(0, alphabet.size() - 1);
  for (int i = 0; i < 2000; ++i) {
    std::string s;
    const std::size_t n = len(rng);
    for (std::size_t k = 0; k < n; ++k) s += alphabet[pick(rng)];
    const std::string once = collapse_vowel_runs(s);
    EXPECT_EQ(collapse_vowel_runs(once), once) << s;
    EXPECT_LE(vowel_count(once), vowel_count(s)) << s;
  }
}

TEST(NormalizeShortForm, LookupOrIdentity) {
  const auto lex = load_lexicon("krte\tkorte\n");
  EXPECT_EQ(normalize_short_form("krte", lex), "korte");
  EXPECT_EQ(normalize_short_form("korte", lex), "korte");
  EXPECT_EQ(normalize_short_form("Krte", lex), "Krte");  // case-sensitive
  EXPECT_EQ(normalize_short_form("anything", NormalizationLexicon{}), "anything");
}

TEST(LengthBucket, Buckets) {
  EXPECT_EQ(length_bucket("a"), "L_1");
  EXPECT_EQ(length_bucket("ab"), "L_2");
  EXPECT_EQ(length_bucket("abc"), "L_3");
  EXPECT_EQ(length_bucket("abcd"), "L_4");
  EXPECT_EQ(length_bucket("abcdefghijkl"), "L_4");
  EXPECT_EQ(length_bucket("আমি"), "L_3");  // counted in characters, not bytes
}

TEST(Affixes, FiveCharacters) {
  const Affixes a = affixes("abcde");
  EXPECT_EQ(a.prefix, (std::array<std::string, 4>{"abcd", "abc", "ab", "a"}));
  EXPECT_EQ(a.suffix, (std::array<std::string, 4>{"e", "de", "cde", "bcde"}));
}

TEST(Affixes, ShortWordsFallBackToWholeWord) {
  const Affixes two = affixes("ab");
  EXPECT_EQ(two.prefix, (std::array<std::string, 4>{"a", "ab", "ab", "ab"}));
  EXPECT_EQ(two.suffix, (std::array<std::string, 4>{"b", "ab", "ab", "ab"}));
  const Affixes one = affixes("x");
  for (int k = 0; k < 4; ++k) {
    EXPECT_EQ(one.prefix[k], "x");
    EXPECT_EQ(one.suffix[k], "x");
  }
}

TEST(Affixes, MultibyteCharacters) {
  const Affixes a = affixes("আমি");  // 3 code points
  EXPECT_EQ(a.prefix[0], "আম");
  EXPECT_EQ(a.suffix[0], "ি");
  EXPECT_EQ(a.prefix[2], "আমি");
}

TEST(Affixes, FirstPrefixPlusFirstSuffixIsWord) {
  for (const char* w : {"ab", "khub", "Khuuuuuub", "আমি", "😀x"}) {
    const Affixes a = affixes(w);
    EXPECT_EQ(a.prefix[0] + a.suffix[0], w);
  }
}

// --- context and language --------------------------------------------------

TEST(ContextComposites, MiddleOfThree) {
  const auto attrs = context_composites(make_sentence({"a", "b", "c"}), 1);
  const AttributeSet want = {
      "W[-2]=<S>",        "W[-1]=a",        "W[0]=b",        "W[+1]=c",         "W[+2]=</S>",
      "W[-1]|W[-2]=a|<S>", "W[-1]|W[0]=a|b", "W[0]|W[+1]=b|c", "W[+1]|W[+2]=c|</S>",
  };
  EXPECT_EQ(attrs, want);
}

TEST(ContextComposites, SingleTokenAllSentinels) {
  const auto attrs = context_composites(make_sentence({"ok"}), 0);
  EXPECT_TRUE(has(attrs, "W[-2]=<S>"));
  EXPECT_TRUE(has(attrs, "W[-1]=<S>"));
  EXPECT_TRUE(has(attrs, "W[+1]=</S>"));
  EXPECT_TRUE(has(attrs, "W[+2]=</S>"));
  EXPECT_TRUE(has(attrs, "W[-1]|W[-2]=<S>|<S>"));
}

TEST(ContextComposites, OutOfRange) {
  EXPECT_THROW(context_composites(make_sentence({"a", "b", "c"}), 3), std::out_of_range);
}

TEST(LanguageComposite, Examples) {
  EXPECT_EQ(language_composite(Token{"khub", "bn", {}}),
            (std::array<std::string, 2>{"LANG=bn", "LANGW=bn|khub"}));
  EXPECT_EQ(language_composite(Token{"@user", "univ", {}}),
            (std::array<std::string, 2>{"LANG=univ", "LANGW=univ|@user"}));
  EXPECT_EQ(language_composite(Token{"Modi", "ne", {}}),
            (std::array<std::string, 2>{"LANG=ne", "LANGW=ne|Modi"}));
}

// --- full extraction -------------------------------------------------------

TEST(ExtractAttributes, WorkedExamples) {
  const auto lex = load_lexicon("krte\tkorte\n");
  const Sentence s = make_sentence({"Khuuuuuub", "krte"});
  const auto a0 = extract_attributes(s, 0, lex);
  const auto a1 = extract_attributes(s, 1, lex);
  EXPECT_TRUE(has(a0, "CVR=Khub"));
  EXPECT_TRUE(has(a0, "FLAG=ContainsLongVowelSeqInside"));
  EXPECT_TRUE(has(a0, "LEN=L_4"));
  EXPECT_TRUE(has(a0, "VC=6"));
  EXPECT_TRUE(has(a1, "NORM=korte"));
  EXPECT_TRUE(has(a1, "P1=krt"));
  EXPECT_TRUE(has(a1, "S4=krte"));
  EXPECT_TRUE(has(a1, "LANGW=bn|krte"));
}

TEST(ExtractAttributes, FamilyOrderIsFixed) {
  const auto attrs = extract_attributes(make_sentence({"@x1"}), 0, {});
  std::vector<std::string> families;
  for (const auto& a : attrs) families.push_back(a.substr(0, a.find('=')));
  const std::vector<std::string> head(families.begin(), families.begin() + 11);
  EXPECT_EQ(head[0], "W[-2]");
  EXPECT_EQ(head[9], "LANG");
  EXPECT_EQ(head[10], "LANGW");
  EXPECT_EQ(families.back(), "S4");
  EXPECT_EQ(families[families.size() - 9], "LEN");
}

TEST(ExtractAttributes, OnlyLengthEnabled) {
  FeatureCatalogue cat;
  for (std::size_t i = 0; i < kFamilyCount; ++i) cat.disable(static_cast<Family>(i));
  cat.set(Family::Length, true);
  const auto attrs = extract_attributes(make_sentence({"Khuuuuuub", "krte"}), 1, {}, cat);
  EXPECT_EQ(attrs, AttributeSet{"LEN=L_4"});
}

TEST(ExtractAttributes, DisabledFlagNotEmitted) {
  FeatureCatalogue cat;
  cat.disable(family_of(Flag::ContainsAtTheRate));
  const auto attrs = extract_attributes(make_sentence({"@x"}), 0, {}, cat);
  EXPECT_TRUE(has(attrs, "FLAG=ContainsAtTheRateBeg"));
  EXPECT_FALSE(has(attrs, "FLAG=ContainsAtTheRate"));
}

TEST(ExtractAttributes, EscapesValues) {
  const auto attrs = extract_attributes(make_sentence({"a\\b", "x|y"}), 0, {});
  EXPECT_TRUE(has(attrs, "W[0]=a\\\\b"));
  EXPECT_TRUE(has(attrs, "W[+1]=x\\|y"));
  EXPECT_TRUE(has(attrs, "W[0]|W[+1]=a\\\\b|x\\|y"));
}

// Determinism, uniqueness, and tab/newline freedom over random sentences.
TEST(ExtractAttributes, RandomSentenceProperties) {
  std::mt19937_64 rng(5);
  const std::vector<std::string> words = {"ami", "Khuuub", "@x", "#y", "http://a.b", "1947-48",
                                          "!!!", "kor6e", "আমি", "😀", "a|b", "c\\d", "OK"};
  std::uniform_int_distribution<std::size_t> len(1, 8), pick(0, words.size() - 1);
  const auto lex = load_lexicon("krte\tkorte\n");
  for (int trial = 0; trial < 300; ++trial) {
    Sentence s;
    const std::size_t n = len(rng);
    for (std::size_t i = 0; i < n; ++i) s.tokens.push_back(Token{words[pick(rng)], "en", {}});
    for (std::size_t i = 0; i < n; ++i) {
      const auto attrs = extract_attributes(s, i, lex);
      EXPECT_EQ(attrs, extract_attributes(s, i, lex));
      std::set<std::string> uniq(attrs.begin(), attrs.end());
      EXPECT_EQ(uniq.size(), attrs.size());
      for (const auto& a : attrs) {
        EXPECT_EQ(a.find_first_of("\t\n\r"), std::string::npos) << a;
      }
    }
  }
}

TEST(FeatureCatalogue, StringRoundTrip) {
  FeatureCatalogue cat;
  EXPECT_EQ(cat.to_string(), "all");
  cat.disable(Family::Affix);
  cat.disable(family_of(Flag::ContainsHttp));
  EXPECT_EQ(cat.to_string(), "-ContainsHttp,-affix");
  EXPECT_EQ(FeatureCatalogue::from_string(cat.to_string()), cat);
  EXPECT_THROW(FeatureCatalogue::from_string("-bogus"), DataError);
}

TEST(FeatureCatalogue, AllDisabledIsInvalid) {
  FeatureCatalogue cat;
  for (std::size_t i = 0; i < kFamilyCount; ++i) cat.disable(static_cast<Family>(i));
  EXPECT_THROW(cat.validate(), std::invalid_argument);
}

}  // namespace
}  // namespace mixtag
