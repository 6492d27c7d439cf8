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

// Per-tag precision / recall / F1 scoring of a tagged corpus.

#pragma once

#include <algorithm>
#include <cmath>
#include <initializer_list>
#include <cstdio>
#include <map>
#include <span>
#include <stdexcept>
#include <string>

#include "mixtag/corpus.hpp"
#include "mixtag/error.hpp"

namespace mixtag {

struct LabelScore {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t gold = 0;
  std::size_t pred = 0;
  std::size_t correct = 0;
};

struct EvalReport {
  std::map<std::string, LabelScore> per_label;
  std::size_t total = 0;
  std::size_t correct = 0;
  double token_accuracy = 0.0;
  double micro_f1 = 0.0;
  double macro_f1 = 0.0;
  /// Designated headline score; equal to micro_f1.
  double overall_f1 = 0.0;
};

namespace detail {

inline double ratio(std::size_t num, std::size_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

inline double harmonic(double p, double r) { return p + r == 0.0 ? 0.0 : 2.0 * p * r / (p + r); }

}  // namespace detail

/// Scores `pred` against `gold`. Both must hold the same tokens in the same
/// sentence structure and carry a POS label on every token.
inline EvalReport evaluate(const Corpus& gold, const Corpus& pred) {
  if (gold.size() != pred.size()) {
    throw DataError("gold has " + std::to_string(gold.size()) + " sentences, prediction has " +
                    std::to_string(pred.size()));
  }
  EvalReport rep;
  for (std::size_t s = 0; s < gold.size(); ++s) {
    const auto& gs = gold.sentences[s];
    const auto& ps = pred.sentences[s];
    const std::string where = "sentence " + std::to_string(s + 1);
    if (gs.size() != ps.size()) {
      throw DataError(where + ": gold has " + std::to_string(gs.size()) +
                      " tokens, prediction has " + std::to_string(ps.size()));
    }
    for (std::size_t t = 0; t < gs.size(); ++t) {
      const Token& g = gs.tokens[t];
      const Token& p = ps.tokens[t];
      const std::string at = where + ", token " + std::to_string(t + 1);
      if (g.surface != p.surface) {
        throw DataError(at + ": surface mismatch '" + g.surface + "' vs '" + p.surface + "'");
      }
      if (!g.pos) throw DataError(at + ": gold token is unlabeled");
      if (!p.pos) throw DataError(at + ": predicted token is unlabeled");
      auto& gl = rep.per_label[*g.pos];
      auto& pl = rep.per_label[*p.pos];
      ++gl.gold;
      ++pl.pred;
      if (*g.pos == *p.pos) {
        ++gl.correct;
        ++rep.correct;
      }
      ++rep.total;
    }
  }

  double f1_sum = 0.0;
  std::size_t gold_sum = 0, pred_sum = 0;
  for (auto& [label, sc] : rep.per_label) {
    sc.precision = detail::ratio(sc.correct, sc.pred);
    sc.recall = detail::ratio(sc.correct, sc.gold);
    sc.f1 = detail::harmonic(sc.precision, sc.recall);
    f1_sum += sc.f1;
    gold_sum += sc.gold;
    pred_sum += sc.pred;
  }
  rep.token_accuracy = detail::ratio(rep.correct, rep.total);
  rep.micro_f1 = detail::harmonic(detail::ratio(rep.correct, pred_sum),
                                  detail::ratio(rep.correct, gold_sum));
  rep.macro_f1 = rep.per_label.empty() ? 0.0 : f1_sum / static_cast<double>(rep.per_label.size());
  rep.overall_f1 = rep.micro_f1;
  return rep;
}

/// Arithmetic mean. Throws std::invalid_argument on empty input.
inline double average_scores(std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("cannot average an empty score list");
  double sum = 0.0;
  for (double v : values) sum += v;
  return sum / static_cast<double>(values.size());
}

inline double average_scores(std::initializer_list<double> values) {
  return average_scores(std::span<const double>(values.begin(), values.size()));
}

/// Half-up rounding for display. Reports keep full precision.
inline double round_half_up(double x, int decimals = 2) {
  const double scale = std::pow(10.0, decimals);
  // The nudge absorbs representation error such as 2.675 -> 2.67499999.
  return std::floor(x * scale + 0.5 + 1e-9) / scale;
}

inline std::string format_score(double x, int decimals = 2) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, round_half_up(x, decimals));
  return buf;
}

/// "label\tP\tR\tF1\tgold\tpred\tcorrect" lines (rates in percent), then
/// the overall F1 as the final line.
inline std::string format_report_lines(const EvalReport& rep) {
  std::string out;
  for (const auto& [label, sc] : rep.per_label) {
    out += label + '\t' + format_score(100.0 * sc.precision) + '\t' +
           format_score(100.0 * sc.recall) + '\t' + format_score(100.0 * sc.f1) + '\t' +
           std::to_string(sc.gold) + '\t' + std::to_string(sc.pred) + '\t' +
           std::to_string(sc.correct) + '\n';
  }
  out += "accuracy\t" + format_score(100.0 * rep.token_accuracy) + '\n';
  out += "macro_f1\t" + format_score(100.0 * rep.macro_f1) + '\n';
  out += "overall_f1\t" + format_score(100.0 * rep.overall_f1) + '\n';
  return out;
}

inline std::string format_report_table(const EvalReport& rep) {
  std::size_t width = 5;
  for (const auto& [label, sc] : rep.per_label) width = std::max(width, label.size());
  std::string out;
  char buf[256];
  std::snprintf(buf, sizeof buf, "%-*s %9s %9s %9s %7s %7s %7s\n", static_cast<int>(width),
                "label", "precision", "recall", "f1", "gold", "pred", "correct");
  out += buf;
  for (const auto& [label, sc] : rep.per_label) {
    std::snprintf(buf, sizeof buf, "%-*s %9s %9s %9s %7zu %7zu %7zu\n", static_cast<int>(width),
                  label.c_str(), format_score(100.0 * sc.precision).c_str(),
                  format_score(100.0 * sc.recall).c_str(), format_score(100.0 * sc.f1).c_str(),
                  sc.gold, sc.pred, sc.correct);
    out += buf;
  }
  out += "\ntokens: " + std::to_string(rep.total) + "  correct: " + std::to_string(rep.correct) +
         '\n';
  out += "accuracy: " + format_score(100.0 * rep.token_accuracy) + '\n';
  out += "macro F1: " + format_score(100.0 * rep.macro_f1) + '\n';
  out += "overall F1 (micro): " + format_score(100.0 * rep.overall_f1) + '\n';
  return out;
}

}  // namespace mixtag
