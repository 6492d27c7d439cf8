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

// Observation attributes for code-mixed social-media tokens.
//
// Every token position is turned into an ordered list of strings of the
// form "FAMILY=value". The trainer conjoins each attribute with each label
// to form state features. Character classes are ASCII: romanized text is
// the target, so anything outside ASCII letters, digits and punctuation
// counts as "other".

#pragma once

#include <array>
#include <cstdint>
#include <cstdio>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "mixtag/corpus.hpp"
#include "mixtag/error.hpp"
#include "mixtag/utf8.hpp"

namespace mixtag {

// ---------------------------------------------------------------------------
// Normalization lexicon

/// Short (vowel-deleted) form -> dictionary word, e.g. "krte" -> "korte".
class NormalizationLexicon {
 public:
  NormalizationLexicon() = default;

  /// Two tab-separated columns per line; '#' lines are comments.
  static NormalizationLexicon parse(std::string_view text) {
    text = utf8::strip_bom(text);
    NormalizationLexicon lex;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos < text.size()) {
      std::size_t nl = text.find('\n', pos);
      std::string_view line = text.substr(
          pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
      pos = nl == std::string_view::npos ? text.size() : nl + 1;
      ++line_no;
      if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
      if (detail::is_blank(line) || line.front() == '#') continue;

      auto cols = detail::split_tabs(line);
      if (cols.size() != 2) {
        throw DataError("lexicon entries need 2 tab-separated columns, found " +
                            std::to_string(cols.size()),
                        line_no);
      }
      if (cols[0].empty() || cols[1].empty()) {
        throw DataError("empty lexicon field", line_no);
      }
      auto [it, inserted] =
          lex.entries_.emplace(std::string(cols[0]), std::string(cols[1]));
      if (!inserted) {
        throw DataError("duplicate lexicon key '" + it->first + "'", line_no);
      }
    }
    return lex;
  }

  std::optional<std::string_view> lookup(std::string_view word) const {
    auto it = entries_.find(word);
    if (it == entries_.end()) return std::nullopt;
    return std::string_view(it->second);
  }

  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  const std::map<std::string, std::string, std::less<>>& entries() const {
    return entries_;
  }

  /// Serialized in the same format `parse` reads, keys sorted.
  std::string to_text() const {
    std::string out;
    for (const auto& [k, v] : entries_) out += k + '\t' + v + '\n';
    return out;
  }

  /// Content hash (FNV-1a 64 over the sorted entries) plus entry count.
  std::string fingerprint() const {
    std::uint64_t h = 14695981039346656037ULL;
    for (char c : to_text()) {
      h ^= static_cast<unsigned char>(c);
      h *= 1099511628211ULL;
    }
    char buf[64];
    std::snprintf(buf, sizeof buf, "n=%zu;fnv1a=%016llx", entries_.size(),
                  static_cast<unsigned long long>(h));
    return buf;
  }

  bool operator==(const NormalizationLexicon&) const = default;

 private:
  std::map<std::string, std::string, std::less<>> entries_;
};

inline NormalizationLexicon load_lexicon(std::string_view text) {
  return NormalizationLexicon::parse(text);
}

// ---------------------------------------------------------------------------
// Character classes

namespace chars {

inline bool is_letter(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'); }
inline bool is_upper(char c) { return c >= 'A' && c <= 'Z'; }
inline bool is_digit(char c) { return c >= '0' && c <= '9'; }
inline bool is_punct(char c) {
  return (c >= '!' && c <= '/') || (c >= ':' && c <= '@') ||
         (c >= '[' && c <= '`') || (c >= '{' && c <= '~');
}
inline bool is_vowel(char c) {
  switch (c) {
    case 'a': case 'e': case 'i': case 'o': case 'u':
    case 'A': case 'E': case 'I': case 'O': case 'U':
      return true;
    default:
      return false;
  }
}

// Single-character views; a multi-byte character is never ASCII.
inline bool is_ascii(std::string_view ch) {
  return ch.size() == 1 && static_cast<unsigned char>(ch[0]) < 0x80;
}
inline bool is_letter(std::string_view ch) { return is_ascii(ch) && is_letter(ch[0]); }
inline bool is_digit(std::string_view ch) { return is_ascii(ch) && is_digit(ch[0]); }
inline bool is_punct(std::string_view ch) { return is_ascii(ch) && is_punct(ch[0]); }
inline bool is_vowel(std::string_view ch) { return is_ascii(ch) && is_vowel(ch[0]); }
inline bool is_other(std::string_view ch) {
  return !is_letter(ch) && !is_digit(ch) && !is_punct(ch);
}

}  // namespace chars

// ---------------------------------------------------------------------------
// Orthographic, punctuation and shape flags

enum class Flag : std::uint8_t {
  ContainsDigit,
  ContainsMoreDots,
  ContainsSlash,
  ContainsMoreSlash,
  ContainsAtTheRateBeg,
  ContainsAtTheRate,
  LongRepeatedCharSeqAtEnd,
  ContainsLongVowelSeqInside,
  ContainsDigitAndAlphabetBoth,
  ContainsPureDigitSeq,
  ContainsSeqOfSameChar,
  ContainsAllCaps,
  ThereExistsAsuffixDigitFollowsAlph,
  ThereExistsAsuffixDigit6FollowsAlphabets,
  ContainsPuncSeq,
  ContainsCharsOtherThanAlphDigitPunc,
  ContainsHash,
  ContainsHttp,
  ContainsHyphen,
  ContainsColon,
  ContainsHyphenatedNumber,
  ContainsFirstPartAlphabetSecondPartContainsOtherThanAlphDigitPunc,
};

inline constexpr std::size_t kFlagCount = 22;

inline constexpr std::array<std::string_view, kFlagCount> kFlagNames = {
    "ContainsDigit",
    "ContainsMoreDots",
    "ContainsSlash",
    "ContainsMoreSlash",
    "ContainsAtTheRateBeg",
    "ContainsAtTheRate",
    "LongRepeatedCharSeqAtEnd",
    "ContainsLongVowelSeqInside",
    "ContainsDigitAndAlphabetBoth",
    "ContainsPureDigitSeq",
    "ContainsSeqOfSameChar",
    "ContainsAllCaps",
    "ThereExistsAsuffixDigitFollowsAlph",
    "ThereExistsAsuffixDigit6FollowsAlphabets",
    "ContainsPuncSeq",
    "ContainsCharsOtherThanAlphDigitPunc",
    "ContainsHash",
    "ContainsHttp",
    "ContainsHyphen",
    "ContainsColon",
    "ContainsHyphenatedNumber",
    "ContainsFirstPartAlphabetSecondPartContainsOtherThanAlphDigitPunc",
};

inline std::string_view to_string(Flag f) { return kFlagNames[static_cast<std::size_t>(f)]; }

/// Values of all flags for one token, indexed by Flag.
class OrthoFlags {
 public:
  bool operator[](Flag f) const { return bits_[static_cast<std::size_t>(f)]; }
  void set(Flag f, bool v) { bits_[static_cast<std::size_t>(f)] = v; }
  bool operator==(const OrthoFlags&) const = default;

 private:
  std::array<bool, kFlagCount> bits_{};
};

inline OrthoFlags ortho_flags(std::string_view surface) {
  using namespace chars;
  const auto cs = utf8::characters(surface);
  const std::size_t n = cs.size();

  std::size_t digits = 0, letters = 0, puncts = 0, others = 0, uppers = 0;
  std::size_t dots = 0, slashes = 0;
  bool at = false, hash = false, hyphen = false, colon = false;
  for (auto c : cs) {
    if (is_digit(c)) ++digits;
    if (is_letter(c)) {
      ++letters;
      if (is_upper(c[0])) ++uppers;
    }
    if (is_punct(c)) ++puncts;
    if (is_other(c)) ++others;
    if (c == ".") ++dots;
    if (c == "/" || c == "\\") ++slashes;
    at |= c == "@";
    hash |= c == "#";
    hyphen |= c == "-";
    colon |= c == ":";
  }

  bool all_same = n >= 2;
  for (std::size_t i = 1; i < n && all_same; ++i) all_same = cs[i] == cs[0];

  bool repeated_end = false;
  if (n >= 3) repeated_end = cs[n - 1] == cs[n - 2] && cs[n - 2] == cs[n - 3];

  bool long_vowel_run = false;
  for (std::size_t i = 0, run = 0; i < n; ++i) {
    run = is_vowel(cs[i]) ? run + 1 : 0;
    if (run >= 3) long_vowel_run = true;
  }

  // Trailing letter run preceded by a digit: .*[0-9][A-Za-z]+$
  std::size_t tail_letters = 0;
  while (tail_letters < n && is_letter(cs[n - 1 - tail_letters])) ++tail_letters;
  const bool digit_then_letters =
      tail_letters > 0 && tail_letters < n && is_digit(cs[n - 1 - tail_letters]);
  const bool six_then_letters = digit_then_letters && cs[n - 1 - tail_letters] == "6";

  // ^[0-9]+-[0-9]+$
  bool hyphenated_number = false;
  {
    std::size_t i = 0;
    while (i < n && is_digit(cs[i])) ++i;
    if (i > 0 && i < n && cs[i] == "-") {
      std::size_t j = i + 1;
      while (j < n && is_digit(cs[j])) ++j;
      hyphenated_number = j == n && j > i + 1;
    }
  }

  // The letter-only head can always be taken maximal: characters outside
  // letters/digits/punctuation can only sit in the tail.
  const bool letter_head_other_tail = n > 0 && is_letter(cs[0]) && others > 0;

  std::string lower(surface);
  for (auto& ch : lower) {
    if (ch >= 'A' && ch <= 'Z') ch = static_cast<char>(ch - 'A' + 'a');
  }

  OrthoFlags f;
  f.set(Flag::ContainsDigit, digits > 0);
  f.set(Flag::ContainsMoreDots, dots >= 2);
  f.set(Flag::ContainsSlash, slashes >= 1);
  f.set(Flag::ContainsMoreSlash, slashes >= 2);
  f.set(Flag::ContainsAtTheRateBeg, n > 0 && cs[0] == "@");
  f.set(Flag::ContainsAtTheRate, at);
  f.set(Flag::LongRepeatedCharSeqAtEnd, repeated_end);
  f.set(Flag::ContainsLongVowelSeqInside, long_vowel_run);
  f.set(Flag::ContainsDigitAndAlphabetBoth, digits > 0 && letters > 0);
  f.set(Flag::ContainsPureDigitSeq, n > 0 && digits == n);
  f.set(Flag::ContainsSeqOfSameChar, all_same);
  f.set(Flag::ContainsAllCaps, n > 0 && uppers == n);
  f.set(Flag::ThereExistsAsuffixDigitFollowsAlph, digit_then_letters);
  f.set(Flag::ThereExistsAsuffixDigit6FollowsAlphabets, six_then_letters);
  f.set(Flag::ContainsPuncSeq, n > 0 && puncts == n);
  f.set(Flag::ContainsCharsOtherThanAlphDigitPunc, others > 0);
  f.set(Flag::ContainsHash, hash);
  f.set(Flag::ContainsHttp, lower.find("http") != std::string::npos);
  f.set(Flag::ContainsHyphen, hyphen);
  f.set(Flag::ContainsColon, colon);
  f.set(Flag::ContainsHyphenatedNumber, hyphenated_number);
  f.set(Flag::ContainsFirstPartAlphabetSecondPartContainsOtherThanAlphDigitPunc,
        letter_head_other_tail);
  return f;
}

// ---------------------------------------------------------------------------
// Word-form features

/// Number of characters in {a,e,i,o,u}, either case.
inline std::size_t vowel_count(std::string_view surface) {
  std::size_t n = 0;
  for (char c : surface) n += chars::is_vowel(c) ? 1 : 0;
  return n;
}

/// Replaces each run of two or more identical vowels by one: "Khuuuuuub" -> "Khub".
inline std::string collapse_vowel_runs(std::string_view surface) {
  std::string out;
  out.reserve(surface.size());
  for (std::size_t i = 0; i < surface.size(); ++i) {
    char c = surface[i];
    if (i > 0 && chars::is_vowel(c) && surface[i - 1] == c) continue;
    out += c;
  }
  return out;
}

inline std::string normalize_short_form(std::string_view surface,
                                        const NormalizationLexicon& lexicon) {
  if (auto hit = lexicon.lookup(surface)) return std::string(*hit);
  return std::string(surface);
}

/// "L_1".."L_3" for short words, "L_4" for anything longer.
inline std::string length_bucket(std::string_view surface) {
  const std::size_t n = utf8::length(surface);
  return "L_" + std::to_string(n <= 3 ? n : 4);
}

struct Affixes {
  std::array<std::string, 4> prefix;  // P1..P4
  std::array<std::string, 4> suffix;  // S1..S4

  bool operator==(const Affixes&) const = default;
};

/// Pk drops the last k characters and Sk keeps the last k, both only when
/// the word has more than k characters; otherwise the whole word.
inline Affixes affixes(std::string_view surface) {
  const auto cs = utf8::characters(surface);
  const std::size_t n = cs.size();
  // Byte offset of character i.
  auto offset = [&](std::size_t i) {
    return i == n ? surface.size()
                  : static_cast<std::size_t>(cs[i].data() - surface.data());
  };
  Affixes a;
  for (std::size_t k = 1; k <= 4; ++k) {
    if (n >= k + 1) {
      a.prefix[k - 1] = std::string(surface.substr(0, offset(n - k)));
      a.suffix[k - 1] = std::string(surface.substr(offset(n - k)));
    } else {
      a.prefix[k - 1] = std::string(surface);
      a.suffix[k - 1] = std::string(surface);
    }
  }
  return a;
}

// ---------------------------------------------------------------------------
// Attribute strings

/// Escapes backslash, tab, CR, LF and the composite separator '|'.
inline std::string escape_value(std::string_view v) {
  std::string out;
  out.reserve(v.size());
  for (char c : v) {
    switch (c) {
      case '\\': out += "\\\\"; break;
      case '\t': out += "\\t"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      case '|': out += "\\|"; break;
      default: out += c;
    }
  }
  return out;
}

inline constexpr std::string_view kBos = "<S>";
inline constexpr std::string_view kEos = "</S>";

/// Window of +/-2 words around `i`: five unigrams, then the composites
/// <w-1,w-2>, <w-1,w0>, <w0,w+1>, <w+1,w+2>.
inline std::vector<std::string> context_composites(const Sentence& sentence,
                                                   std::size_t i) {
  const std::size_t n = sentence.size();
  if (i >= n) {
    throw std::out_of_range("position " + std::to_string(i) +
                            " outside sentence of length " + std::to_string(n));
  }
  auto word = [&](std::ptrdiff_t off) -> std::string {
    std::ptrdiff_t j = static_cast<std::ptrdiff_t>(i) + off;
    if (j < 0) return std::string(kBos);
    if (j >= static_cast<std::ptrdiff_t>(n)) return std::string(kEos);
    return escape_value(sentence.tokens[static_cast<std::size_t>(j)].surface);
  };
  const std::string m2 = word(-2), m1 = word(-1), w0 = word(0), p1 = word(1),
                    p2 = word(2);
  return {
      "W[-2]=" + m2,
      "W[-1]=" + m1,
      "W[0]=" + w0,
      "W[+1]=" + p1,
      "W[+2]=" + p2,
      "W[-1]|W[-2]=" + m1 + "|" + m2,
      "W[-1]|W[0]=" + m1 + "|" + w0,
      "W[0]|W[+1]=" + w0 + "|" + p1,
      "W[+1]|W[+2]=" + p1 + "|" + p2,
  };
}

inline std::array<std::string, 2> language_composite(const Token& token) {
  const std::string lang = escape_value(token.lang);
  return {"LANG=" + lang, "LANGW=" + lang + "|" + escape_value(token.surface)};
}

// ---------------------------------------------------------------------------
// Feature catalogue

enum class Family : std::uint8_t {
  Context,
  Language,
  // one entry per Flag, same order
  FlagFirst,
  VowelCount = FlagFirst + kFlagCount,
  VowelCollapse,
  NormalForm,
  Length,
  Affix,
};

inline constexpr std::size_t kFamilyCount = static_cast<std::size_t>(Family::Affix) + 1;

inline constexpr Family family_of(Flag f) {
  return static_cast<Family>(static_cast<std::size_t>(Family::FlagFirst) +
                             static_cast<std::size_t>(f));
}

inline std::string_view family_name(Family fam) {
  const auto i = static_cast<std::size_t>(fam);
  const auto first_flag = static_cast<std::size_t>(Family::FlagFirst);
  if (i >= first_flag && i < first_flag + kFlagCount) return kFlagNames[i - first_flag];
  switch (fam) {
    case Family::Context: return "context";
    case Family::Language: return "language";
    case Family::VowelCount: return "vowel-count";
    case Family::VowelCollapse: return "vowel-collapse";
    case Family::NormalForm: return "normal-form";
    case Family::Length: return "length";
    case Family::Affix: return "affix";
    default: break;
  }
  return "?";
}

/// Family by name. "ortho" is not a family; callers expand it to all flags.
inline std::optional<Family> family_from_name(std::string_view name) {
  for (std::size_t i = 0; i < kFamilyCount; ++i) {
    auto fam = static_cast<Family>(i);
    if (family_name(fam) == name) return fam;
  }
  return std::nullopt;
}

/// Which feature families are switched on. Everything is on by default.
class FeatureCatalogue {
 public:
  FeatureCatalogue() { enabled_.fill(true); }

  bool enabled(Family f) const { return enabled_[static_cast<std::size_t>(f)]; }
  bool enabled(Flag f) const { return enabled(family_of(f)); }

  void set(Family f, bool on) { enabled_[static_cast<std::size_t>(f)] = on; }
  void disable(Family f) { set(f, false); }

  std::size_t enabled_count() const {
    std::size_t n = 0;
    for (bool b : enabled_) n += b;
    return n;
  }

  /// Throws std::invalid_argument when every family is off.
  void validate() const {
    if (enabled_count() == 0) {
      throw std::invalid_argument("feature catalogue has every family disabled");
    }
  }

  /// "all", or "-name,-name" listing the disabled families.
  std::string to_string() const {
    std::string out;
    for (std::size_t i = 0; i < kFamilyCount; ++i) {
      if (enabled_[i]) continue;
      if (!out.empty()) out += ',';
      out += '-';
      out += family_name(static_cast<Family>(i));
    }
    return out.empty() ? "all" : out;
  }

  static FeatureCatalogue from_string(std::string_view s) {
    FeatureCatalogue cat;
    if (s == "all") return cat;
    std::size_t pos = 0;
    while (pos <= s.size()) {
      std::size_t comma = s.find(',', pos);
      std::string_view item = s.substr(pos, comma == std::string_view::npos
                                                ? std::string_view::npos
                                                : comma - pos);
      if (item.size() < 2 || item.front() != '-') {
        throw DataError("bad catalogue entry '" + std::string(item) + "'");
      }
      auto fam = family_from_name(item.substr(1));
      if (!fam) throw DataError("unknown feature family '" + std::string(item.substr(1)) + "'");
      cat.disable(*fam);
      if (comma == std::string_view::npos) break;
      pos = comma + 1;
    }
    cat.validate();
    return cat;
  }

  bool operator==(const FeatureCatalogue&) const = default;

 private:
  std::array<bool, kFamilyCount> enabled_{};
};

using AttributeSet = std::vector<std::string>;

/// All attributes firing at position `i`, in fixed family order.
inline AttributeSet extract_attributes(const Sentence& sentence, std::size_t i,
                                       const NormalizationLexicon& lexicon,
                                       const FeatureCatalogue& cat = {}) {
  if (i >= sentence.size()) {
    throw std::out_of_range("position " + std::to_string(i) +
                            " outside sentence of length " +
                            std::to_string(sentence.size()));
  }
  const Token& tok = sentence.tokens[i];
  AttributeSet attrs;
  attrs.reserve(48);

  if (cat.enabled(Family::Context)) {
    auto ctx = context_composites(sentence, i);
    attrs.insert(attrs.end(), std::make_move_iterator(ctx.begin()),
                 std::make_move_iterator(ctx.end()));
  }
  if (cat.enabled(Family::Language)) {
    for (auto& a : language_composite(tok)) attrs.push_back(std::move(a));
  }
  const OrthoFlags flags = ortho_flags(tok.surface);
  for (std::size_t k = 0; k < kFlagCount; ++k) {
    const auto f = static_cast<Flag>(k);
    if (cat.enabled(f) && flags[f]) attrs.push_back("FLAG=" + std::string(kFlagNames[k]));
  }
  if (cat.enabled(Family::VowelCount)) {
    attrs.push_back("VC=" + std::to_string(vowel_count(tok.surface)));
  }
  if (cat.enabled(Family::VowelCollapse)) {
    attrs.push_back("CVR=" + escape_value(collapse_vowel_runs(tok.surface)));
  }
  if (cat.enabled(Family::NormalForm)) {
    attrs.push_back("NORM=" + escape_value(normalize_short_form(tok.surface, lexicon)));
  }
  if (cat.enabled(Family::Length)) {
    attrs.push_back("LEN=" + length_bucket(tok.surface));
  }
  if (cat.enabled(Family::Affix)) {
    const Affixes a = affixes(tok.surface);
    for (std::size_t k = 0; k < 4; ++k) {
      attrs.push_back("P" + std::to_string(k + 1) + "=" + escape_value(a.prefix[k]));
    }
    for (std::size_t k = 0; k < 4; ++k) {
      attrs.push_back("S" + std::to_string(k + 1) + "=" + escape_value(a.suffix[k]));
    }
  }
  return attrs;
}

/// Attribute sets for every position of a sentence.
inline std::vector<AttributeSet> extract_sentence(const Sentence& sentence,
                                                  const NormalizationLexicon& lexicon,
                                                  const FeatureCatalogue& cat = {}) {
  std::vector<AttributeSet> out;
  out.reserve(sentence.size());
  for (std::size_t i = 0; i < sentence.size(); ++i) {
    out.push_back(extract_attributes(sentence, i, lexicon, cat));
  }
  return out;
}

}  // namespace mixtag
