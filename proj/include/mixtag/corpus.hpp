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

// Column-formatted code-mixed corpora.
//
// One token per line, columns separated by a single tab:
//
//   train3col:  surface \t lang \t pos
//   test2col:   surface \t lang
//
// Blank lines separate sentences; runs of blank lines count as one
// boundary. A UTF-8 byte-order mark at the start of input is ignored and
// CRLF line endings are accepted.

#pragma once

#include <algorithm>
#include <cctype>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mixtag/error.hpp"
#include "mixtag/utf8.hpp"

namespace mixtag {

struct Token {
  std::string surface;
  std::string lang;
  std::optional<std::string> pos;

  bool operator==(const Token&) const = default;
};

struct Sentence {
  std::vector<Token> tokens;

  std::size_t size() const { return tokens.size(); }
  const Token& operator[](std::size_t i) const { return tokens[i]; }
  bool operator==(const Sentence&) const = default;
};

enum class Source { facebook, twitter, whatsapp, mixed, unknown };
enum class Granularity { coarse, fine, unknown };

struct CorpusMeta {
  Source source = Source::unknown;
  Granularity granularity = Granularity::unknown;
  std::string pair;

  bool operator==(const CorpusMeta&) const = default;
};

struct Corpus {
  std::vector<Sentence> sentences;
  CorpusMeta meta;

  std::size_t size() const { return sentences.size(); }
  bool empty() const { return sentences.empty(); }

  std::size_t token_count() const {
    std::size_t n = 0;
    for (const auto& s : sentences) n += s.size();
    return n;
  }

  bool operator==(const Corpus&) const = default;
};

enum class Schema { train3col, test2col };

inline std::size_t column_count(Schema schema) {
  return schema == Schema::train3col ? 3 : 2;
}

inline std::string_view to_string(Source s) {
  switch (s) {
    case Source::facebook: return "facebook";
    case Source::twitter: return "twitter";
    case Source::whatsapp: return "whatsapp";
    case Source::mixed: return "mixed";
    case Source::unknown: break;
  }
  return "unknown";
}

inline std::string_view to_string(Granularity g) {
  switch (g) {
    case Granularity::coarse: return "coarse";
    case Granularity::fine: return "fine";
    case Granularity::unknown: break;
  }
  return "unknown";
}

namespace detail {

inline std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> cols;
  std::size_t start = 0;
  for (;;) {
    std::size_t tab = line.find('\t', start);
    if (tab == std::string_view::npos) {
      cols.push_back(line.substr(start));
      return cols;
    }
    cols.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
}

inline bool is_blank(std::string_view line) {
  return std::all_of(line.begin(), line.end(),
                     [](char c) { return c == ' ' || c == '\t'; });
}

}  // namespace detail

/// Parses a whole corpus. Throws DataError carrying the offending line.
inline Corpus parse_corpus(std::string_view text, Schema schema,
                           CorpusMeta meta = {}) {
  text = utf8::strip_bom(text);
  Corpus corpus;
  corpus.meta = std::move(meta);
  Sentence current;
  std::size_t line_no = 0;
  const std::size_t want = column_count(schema);

  auto close_sentence = [&] {
    if (!current.tokens.empty()) {
      corpus.sentences.push_back(std::move(current));
      current = Sentence{};
    }
  };

  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t nl = text.find('\n', pos);
    std::string_view line = text.substr(
        pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() : nl + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);

    if (detail::is_blank(line)) {
      close_sentence();
      continue;
    }
    auto cols = detail::split_tabs(line);
    if (cols.size() != want) {
      throw DataError("expected " + std::to_string(want) +
                          " tab-separated columns, found " +
                          std::to_string(cols.size()),
                      line_no);
    }
    if (cols[0].empty()) throw DataError("empty surface field", line_no);
    if (cols[0].find('\r') != std::string_view::npos) {
      throw DataError("carriage return inside surface field", line_no);
    }
    if (cols[1].empty()) throw DataError("empty language field", line_no);
    Token tok{std::string(cols[0]), std::string(cols[1]), std::nullopt};
    if (schema == Schema::train3col) {
      if (cols[2].empty()) throw DataError("empty POS field", line_no);
      tok.pos = std::string(cols[2]);
    }
    current.tokens.push_back(std::move(tok));
  }
  close_sentence();
  return corpus;
}

/// Concatenates corpora in argument order. Known granularities must agree.
inline Corpus merge_corpora(const std::vector<Corpus>& parts) {
  Corpus out;
  if (parts.empty()) return out;
  out.meta = parts.front().meta;
  for (const auto& part : parts) {
    const auto g = part.meta.granularity;
    if (g != Granularity::unknown) {
      if (out.meta.granularity == Granularity::unknown) {
        out.meta.granularity = g;
      } else if (out.meta.granularity != g) {
        throw DataError("cannot merge " + std::string(to_string(out.meta.granularity)) +
                        " and " + std::string(to_string(g)) + " corpora");
      }
    }
    if (part.meta.source != out.meta.source) out.meta.source = Source::mixed;
    if (part.meta.pair != out.meta.pair) {
      if (out.meta.pair.empty()) {
        out.meta.pair = part.meta.pair;
      } else if (!part.meta.pair.empty()) {
        out.meta.pair += "+" + part.meta.pair;
      }
    }
    out.sentences.insert(out.sentences.end(), part.sentences.begin(),
                         part.sentences.end());
  }
  return out;
}

/// Inverse of parse_corpus. Metadata is not serialized.
inline std::string write_corpus(const Corpus& corpus, Schema schema) {
  std::string out;
  bool first = true;
  std::size_t sentence_no = 0;
  for (const auto& sentence : corpus.sentences) {
    ++sentence_no;
    if (!first) out += '\n';
    first = false;
    for (const auto& tok : sentence.tokens) {
      out += tok.surface;
      out += '\t';
      out += tok.lang;
      if (schema == Schema::train3col) {
        if (!tok.pos) {
          throw DataError("token '" + tok.surface + "' in sentence " +
                          std::to_string(sentence_no) + " has no POS label");
        }
        out += '\t';
        out += *tok.pos;
      }
      out += '\n';
    }
  }
  return out;
}

/// Guesses source and granularity from a file name, e.g.
/// "BN_EN_coarse_fb_train.txt". Anything unrecognized stays unknown.
inline CorpusMeta infer_meta(std::string_view path) {
  std::string lower(path);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  auto slash = lower.find_last_of("/\\");
  if (slash != std::string::npos) lower.erase(0, slash + 1);

  // Split on anything that is not alphanumeric.
  std::vector<std::string> words;
  std::string cur;
  for (char c : lower) {
    if (std::isalnum(static_cast<unsigned char>(c))) {
      cur += c;
    } else if (!cur.empty()) {
      words.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) words.push_back(std::move(cur));

  CorpusMeta meta;
  for (const auto& w : words) {
    if (w == "fb" || w == "facebook") meta.source = Source::facebook;
    else if (w == "tw" || w == "twt" || w == "twitter" || w == "tweet" || w == "tweets")
      meta.source = Source::twitter;
    else if (w == "wa" || w == "whatsapp") meta.source = Source::whatsapp;
    else if (w == "coarse") meta.granularity = Granularity::coarse;
    else if (w == "fine") meta.granularity = Granularity::fine;
  }
  return meta;
}

}  // namespace mixtag
