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

// First-order linear-chain CRF.
//
// The score of a labeling y of a length-T sentence is
//
//   score(y) = sum_t state[t][y_t] + sum_{t>=1} trans[y_{t-1}][y_t]
//
// where state[t][y] sums the weights of the (attribute, y) features firing
// at t and trans holds one weight per label pair. The first position has
// no incoming transition. P(y|x) = exp(score(y)) / Z(x). All inference is
// done in log space.

#pragma once

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "mixtag/error.hpp"
#include "mixtag/features.hpp"

namespace mixtag {

using LabelId = std::uint32_t;
using AttrId = std::uint32_t;

// ---------------------------------------------------------------------------
// Labels and feature index

/// Label alphabet with stable 0-based indices.
class LabelSet {
 public:
  LabelSet() = default;

  explicit LabelSet(std::vector<std::string> labels) : labels_(std::move(labels)) {
    for (std::size_t i = 0; i < labels_.size(); ++i) {
      if (!ids_.emplace(labels_[i], static_cast<LabelId>(i)).second) {
        throw DataError("duplicate label '" + labels_[i] + "'");
      }
    }
  }

  /// Sorted set of all POS labels in a fully labeled corpus.
  static LabelSet from_corpus(const Corpus& corpus) {
    std::vector<std::string> labels;
    for (const auto& s : corpus.sentences) {
      for (const auto& t : s.tokens) {
        if (!t.pos) throw DataError("unlabeled token '" + t.surface + "' in training data");
        labels.push_back(*t.pos);
      }
    }
    std::sort(labels.begin(), labels.end());
    labels.erase(std::unique(labels.begin(), labels.end()), labels.end());
    return LabelSet(std::move(labels));
  }

  std::size_t size() const { return labels_.size(); }
  bool empty() const { return labels_.empty(); }
  const std::string& operator[](LabelId id) const { return labels_[id]; }
  const std::vector<std::string>& labels() const { return labels_; }

  std::optional<LabelId> find(std::string_view label) const {
    auto it = ids_.find(std::string(label));
    if (it == ids_.end()) return std::nullopt;
    return it->second;
  }

  LabelId at(std::string_view label) const {
    if (auto id = find(label)) return *id;
    throw DataError("unknown label '" + std::string(label) + "'");
  }

  bool operator==(const LabelSet& o) const { return labels_ == o.labels_; }

 private:
  std::vector<std::string> labels_;
  std::unordered_map<std::string, LabelId> ids_;
};

/// Parameter layout. Transition slots come first (from * L + to, all L*L
/// pairs); every retained attribute then owns L consecutive state slots.
class FeatureIndex {
 public:
  FeatureIndex() = default;
  explicit FeatureIndex(std::size_t label_count) : label_count_(label_count) {}

  std::size_t label_count() const { return label_count_; }
  std::size_t attribute_count() const { return attributes_.size(); }
  std::size_t transition_count() const { return label_count_ * label_count_; }
  std::size_t size() const { return transition_count() + attributes_.size() * label_count_; }

  std::size_t transition_slot(LabelId from, LabelId to) const {
    return static_cast<std::size_t>(from) * label_count_ + to;
  }
  std::size_t state_slot(AttrId attr, LabelId label) const {
    return transition_count() + static_cast<std::size_t>(attr) * label_count_ + label;
  }

  std::optional<AttrId> find(std::string_view attribute) const {
    auto it = ids_.find(std::string(attribute));
    if (it == ids_.end()) return std::nullopt;
    return it->second;
  }

  const std::string& attribute(AttrId id) const { return attributes_[id]; }

  /// Adds an attribute if new; returns its id.
  AttrId add(std::string_view attribute) {
    auto [it, inserted] =
        ids_.emplace(std::string(attribute), static_cast<AttrId>(attributes_.size()));
    if (inserted) attributes_.emplace_back(attribute);
    return it->second;
  }

  bool operator==(const FeatureIndex& o) const {
    return label_count_ == o.label_count_ && attributes_ == o.attributes_;
  }

 private:
  std::size_t label_count_ = 0;
  std::vector<std::string> attributes_;
  std::unordered_map<std::string, AttrId> ids_;
};

/// Retains every attribute occurring at least `cutoff` times in `corpus`
/// (one attribute set per token) and conjoins it with every label.
/// Attribute ids follow first occurrence order.
inline FeatureIndex index_features(const std::vector<std::vector<AttributeSet>>& corpus,
                                   const LabelSet& labels, std::size_t cutoff = 1) {
  if (labels.empty()) throw DataError("empty label set");
  if (corpus.empty()) throw DataError("cannot index features of an empty corpus");
  if (cutoff < 1) cutoff = 1;

  std::unordered_map<std::string_view, std::size_t> counts;
  std::vector<std::string_view> order;
  for (const auto& sentence : corpus) {
    for (const auto& attrs : sentence) {
      for (const auto& a : attrs) {
        auto [it, inserted] = counts.emplace(a, 0);
        if (inserted) order.push_back(a);
        ++it->second;
      }
    }
  }
  FeatureIndex index(labels.size());
  for (auto a : order) {
    if (counts[a] >= cutoff) index.add(a);
  }
  return index;
}

// ---------------------------------------------------------------------------
// Model

struct Model {
  LabelSet labels;
  FeatureIndex index;
  std::vector<double> weights;
  FeatureCatalogue catalogue;
  NormalizationLexicon lexicon;

  std::string lexicon_fingerprint() const { return lexicon.fingerprint(); }

  /// Attribute ids of each position; attributes unknown to the index are dropped.
  std::vector<std::vector<AttrId>> compile(const std::vector<AttributeSet>& attrs) const {
    std::vector<std::vector<AttrId>> out(attrs.size());
    for (std::size_t t = 0; t < attrs.size(); ++t) {
      out[t].reserve(attrs[t].size());
      for (const auto& a : attrs[t]) {
        if (auto id = index.find(a)) out[t].push_back(*id);
      }
    }
    return out;
  }

  bool operator==(const Model& o) const {
    if (weights.size() != o.weights.size()) return false;
    for (std::size_t i = 0; i < weights.size(); ++i) {
      if (std::bit_cast<std::uint64_t>(weights[i]) != std::bit_cast<std::uint64_t>(o.weights[i]))
        return false;
    }
    return labels == o.labels && index == o.index && catalogue == o.catalogue &&
           lexicon == o.lexicon;
  }
};

// ---------------------------------------------------------------------------
// Lattice and inference

/// Per-position label scores plus the transition matrix.
struct Lattice {
  std::size_t length = 0;   // T
  std::size_t labels = 0;   // L
  std::vector<double> state;  // T x L, row-major
  std::vector<double> trans;  // L x L, [from][to]

  Lattice() = default;
  Lattice(std::size_t T, std::size_t L)
      : length(T), labels(L), state(T * L, 0.0), trans(L * L, 0.0) {}

  double& state_at(std::size_t t, std::size_t y) { return state[t * labels + y]; }
  double state_at(std::size_t t, std::size_t y) const { return state[t * labels + y]; }
  double& trans_at(std::size_t from, std::size_t to) { return trans[from * labels + to]; }
  double trans_at(std::size_t from, std::size_t to) const { return trans[from * labels + to]; }
};

/// state[t][y] sums the weights of (a, y) over the attributes a firing at t.
inline Lattice build_lattice(const FeatureIndex& index, std::span<const double> weights,
                             const std::vector<std::vector<AttrId>>& compiled) {
  const std::size_t L = index.label_count();
  Lattice lat(compiled.size(), L);
  for (std::size_t t = 0; t < compiled.size(); ++t) {
    for (AttrId a : compiled[t]) {
      const std::size_t base = index.state_slot(a, 0);
      for (std::size_t y = 0; y < L; ++y) lat.state_at(t, y) += weights[base + y];
    }
  }
  std::copy_n(weights.begin(), L * L, lat.trans.begin());
  return lat;
}

inline Lattice build_lattice(const Model& model,
                             const std::vector<std::vector<AttrId>>& compiled) {
  return build_lattice(model.index, model.weights, compiled);
}

inline Lattice build_lattice(const Model& model, const std::vector<AttributeSet>& attrs) {
  return build_lattice(model, model.compile(attrs));
}

namespace detail {

inline double log_sum_exp(std::span<const double> v) {
  double m = -std::numeric_limits<double>::infinity();
  for (double x : v) m = std::max(m, x);
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (double x : v) s += std::exp(x - m);
  return m + std::log(s);
}

// alpha[t][y]: log-sum of scores of all prefixes ending in y at t.
inline std::vector<double> forward(const Lattice& lat) {
  const std::size_t T = lat.length, L = lat.labels;
  std::vector<double> alpha(T * L);
  std::vector<double> buf(L);
  for (std::size_t y = 0; y < L; ++y) alpha[y] = lat.state_at(0, y);
  for (std::size_t t = 1; t < T; ++t) {
    for (std::size_t y = 0; y < L; ++y) {
      for (std::size_t yp = 0; yp < L; ++yp) {
        buf[yp] = alpha[(t - 1) * L + yp] + lat.trans_at(yp, y);
      }
      alpha[t * L + y] = log_sum_exp(buf) + lat.state_at(t, y);
    }
  }
  return alpha;
}

// beta[t][y]: log-sum of scores of all suffixes after t given y at t.
inline std::vector<double> backward(const Lattice& lat) {
  const std::size_t T = lat.length, L = lat.labels;
  std::vector<double> beta(T * L, 0.0);
  std::vector<double> buf(L);
  for (std::size_t t = T - 1; t-- > 0;) {
    for (std::size_t yp = 0; yp < L; ++yp) {
      for (std::size_t y = 0; y < L; ++y) {
        buf[y] = lat.trans_at(yp, y) + lat.state_at(t + 1, y) + beta[(t + 1) * L + y];
      }
      beta[t * L + yp] = log_sum_exp(buf);
    }
  }
  return beta;
}

}  // namespace detail

/// log Z(x) by the forward recursion.
inline double log_partition(const Lattice& lat) {
  if (lat.length == 0) return 0.0;
  const auto alpha = detail::forward(lat);
  return detail::log_sum_exp(
      std::span<const double>(alpha).subspan((lat.length - 1) * lat.labels, lat.labels));
}

struct Marginals {
  std::size_t length = 0;
  std::size_t labels = 0;
  double log_z = 0.0;
  std::vector<double> node;  // T x L
  std::vector<double> edge;  // T x L x L; slice t=0 unused (all zero)

  double node_at(std::size_t t, std::size_t y) const { return node[t * labels + y]; }
  /// P(y_{t-1} = from, y_t = to | x), for t >= 1.
  double edge_at(std::size_t t, std::size_t from, std::size_t to) const {
    return edge[(t * labels + from) * labels + to];
  }
};

inline Marginals posterior_marginals(const Lattice& lat) {
  const std::size_t T = lat.length, L = lat.labels;
  Marginals m;
  m.length = T;
  m.labels = L;
  m.node.assign(T * L, 0.0);
  m.edge.assign(T * L * L, 0.0);
  if (T == 0) return m;

  const auto alpha = detail::forward(lat);
  const auto beta = detail::backward(lat);
  m.log_z = detail::log_sum_exp(std::span<const double>(alpha).subspan((T - 1) * L, L));

  for (std::size_t i = 0; i < T * L; ++i) m.node[i] = std::exp(alpha[i] + beta[i] - m.log_z);
  for (std::size_t t = 1; t < T; ++t) {
    for (std::size_t yp = 0; yp < L; ++yp) {
      const double a = alpha[(t - 1) * L + yp];
      for (std::size_t y = 0; y < L; ++y) {
        m.edge[(t * L + yp) * L + y] = std::exp(a + lat.trans_at(yp, y) + lat.state_at(t, y) +
                                                beta[t * L + y] - m.log_z);
      }
    }
  }
  return m;
}

/// Unnormalized score of one labeling, summed left to right.
inline double sequence_score(const Lattice& lat, std::span<const LabelId> y) {
  if (y.size() != lat.length) throw DataError("label sequence length does not match lattice");
  double s = 0.0;
  for (std::size_t t = 0; t < y.size(); ++t) {
    if (y[t] >= lat.labels) throw DataError("label index out of range");
    if (t == 0) {
      s = lat.state_at(0, y[0]);
    } else {
      s = (s + lat.trans_at(y[t - 1], y[t])) + lat.state_at(t, y[t]);
    }
  }
  return s;
}

/// log P(labels | x).
inline double sequence_log_prob(const Model& model, const std::vector<AttributeSet>& attrs,
                                const std::vector<std::string>& labels) {
  if (labels.size() != attrs.size()) {
    throw DataError("label sequence has " + std::to_string(labels.size()) +
                    " entries for " + std::to_string(attrs.size()) + " positions");
  }
  std::vector<LabelId> ids;
  ids.reserve(labels.size());
  for (const auto& l : labels) ids.push_back(model.labels.at(l));
  const Lattice lat = build_lattice(model, attrs);
  return sequence_score(lat, ids) - log_partition(lat);
}

struct Decoded {
  std::vector<LabelId> labels;
  double score = 0.0;
};

/// Highest-scoring labeling. Among equal-score labelings the
/// lexicographically least label-index sequence wins.
inline Decoded viterbi(const Lattice& lat) {
  const std::size_t T = lat.length, L = lat.labels;
  Decoded out;
  if (T == 0 || L == 0) return out;

  std::vector<double> delta(T * L);
  std::vector<LabelId> back(T * L, 0);
  // rank[y]: position of the best prefix ending in y within the
  // lexicographic order of all such prefixes at the current step.
  std::vector<std::size_t> rank(L), next_rank(L), order(L);
  for (std::size_t y = 0; y < L; ++y) {
    delta[y] = lat.state_at(0, y);
    rank[y] = y;
  }
  for (std::size_t t = 1; t < T; ++t) {
    for (std::size_t y = 0; y < L; ++y) {
      std::size_t best = 0;
      double best_score = delta[(t - 1) * L] + lat.trans_at(0, y);
      for (std::size_t yp = 1; yp < L; ++yp) {
        const double s = delta[(t - 1) * L + yp] + lat.trans_at(yp, y);
        if (s > best_score || (s == best_score && rank[yp] < rank[best])) {
          best = yp;
          best_score = s;
        }
      }
      delta[t * L + y] = best_score + lat.state_at(t, y);
      back[t * L + y] = static_cast<LabelId>(best);
    }
    // Prefix order at t: by the predecessor's prefix, then by y.
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      const std::size_t ra = rank[back[t * L + a]], rb = rank[back[t * L + b]];
      return ra != rb ? ra < rb : a < b;
    });
    for (std::size_t k = 0; k < L; ++k) next_rank[order[k]] = k;
    rank.swap(next_rank);
  }

  std::size_t best = 0;
  for (std::size_t y = 1; y < L; ++y) {
    const double s = delta[(T - 1) * L + y];
    const double b = delta[(T - 1) * L + best];
    if (s > b || (s == b && rank[y] < rank[best])) best = y;
  }
  out.score = delta[(T - 1) * L + best];
  out.labels.resize(T);
  out.labels[T - 1] = static_cast<LabelId>(best);
  for (std::size_t t = T - 1; t > 0; --t) {
    out.labels[t - 1] = back[t * L + out.labels[t]];
  }
  return out;
}

inline Decoded viterbi(const Model& model, const std::vector<AttributeSet>& attrs) {
  return viterbi(build_lattice(model, attrs));
}

// ---------------------------------------------------------------------------
// Persistence
//
//   MIXTAG-MODEL 1
//   catalogue <TAB> all | -family,-family...
//   lexicon <TAB> <fingerprint> <TAB> <n>
//   <short> <TAB> <canonical>                 (n lines)
//   labels <TAB> <L>
//   <label>                                   (L lines)
//   transitions <TAB> <L*L>
//   <from> <TAB> <to> <TAB> <weight>          (L*L lines)
//   states <TAB> <A*L>
//   <attribute> <TAB> <label> <TAB> <weight>  (A*L lines, attribute-major)
//   end
//
// Weights are rendered with 17 significant digits so they reload bit-exact.

inline constexpr std::string_view kModelMagic = "MIXTAG-MODEL";
inline constexpr int kModelVersion = 1;

namespace detail {

inline void append_weight(std::string& out, double w) {
  char buf[40];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, w, std::chars_format::general, 17);
  out.append(buf, end);
}

inline double parse_weight(std::string_view s, std::size_t line_no) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec == std::errc::result_out_of_range) {
    throw DataError("non-finite weight '" + std::string(s) + "'", line_no);
  }
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    throw DataError("malformed weight '" + std::string(s) + "'", line_no);
  }
  if (!std::isfinite(v)) throw DataError("non-finite weight '" + std::string(s) + "'", line_no);
  return v;
}

class LineReader {
 public:
  explicit LineReader(std::string_view text) : text_(text) {}

  std::string_view next() {
    if (pos_ >= text_.size()) throw DataError("truncated model file", line_ + 1);
    std::size_t nl = text_.find('\n', pos_);
    std::string_view line = text_.substr(
        pos_, nl == std::string_view::npos ? std::string_view::npos : nl - pos_);
    pos_ = nl == std::string_view::npos ? text_.size() : nl + 1;
    ++line_;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    return line;
  }

  std::size_t line() const { return line_; }

 private:
  std::string_view text_;
  std::size_t pos_ = 0;
  std::size_t line_ = 0;
};

inline std::size_t parse_count(std::string_view s, std::size_t line_no) {
  std::size_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty()) {
    throw DataError("malformed count '" + std::string(s) + "'", line_no);
  }
  return v;
}

// "key <TAB> a <TAB> b..." with an exact field count.
inline std::vector<std::string_view> expect_fields(LineReader& in, std::string_view key,
                                                   std::size_t fields) {
  auto cols = split_tabs(in.next());
  if (cols.empty() || cols[0] != key || cols.size() != fields) {
    throw DataError("expected '" + std::string(key) + "' section header", in.line());
  }
  return cols;
}

}  // namespace detail

inline std::string save_model(const Model& model) {
  const std::size_t L = model.labels.size();
  std::string out;
  out += kModelMagic;
  out += ' ';
  out += std::to_string(kModelVersion);
  out += '\n';
  out += "catalogue\t" + model.catalogue.to_string() + '\n';
  out += "lexicon\t" + model.lexicon_fingerprint() + '\t' +
         std::to_string(model.lexicon.size()) + '\n';
  out += model.lexicon.to_text();
  out += "labels\t" + std::to_string(L) + '\n';
  for (const auto& l : model.labels.labels()) out += l + '\n';
  out += "transitions\t" + std::to_string(L * L) + '\n';
  for (LabelId a = 0; a < L; ++a) {
    for (LabelId b = 0; b < L; ++b) {
      out += model.labels[a] + '\t' + model.labels[b] + '\t';
      detail::append_weight(out, model.weights[model.index.transition_slot(a, b)]);
      out += '\n';
    }
  }
  out += "states\t" + std::to_string(model.index.attribute_count() * L) + '\n';
  for (AttrId a = 0; a < model.index.attribute_count(); ++a) {
    for (LabelId y = 0; y < L; ++y) {
      out += model.index.attribute(a) + '\t' + model.labels[y] + '\t';
      detail::append_weight(out, model.weights[model.index.state_slot(a, y)]);
      out += '\n';
    }
  }
  out += "end\n";
  return out;
}

inline Model load_model(std::string_view text) {
  detail::LineReader in(text);
  {
    const std::string_view header = in.next();
    const std::string prefix = std::string(kModelMagic) + ' ';
    if (header.substr(0, prefix.size()) != prefix) {
      throw DataError("not a model file (bad magic)", 1);
    }
    if (header.substr(prefix.size()) != std::to_string(kModelVersion)) {
      throw DataError("unsupported model version '" +
                          std::string(header.substr(prefix.size())) + "'",
                      1);
    }
  }

  Model m;
  m.catalogue = FeatureCatalogue::from_string(detail::expect_fields(in, "catalogue", 2)[1]);

  auto lex_head = detail::expect_fields(in, "lexicon", 3);
  const std::string fingerprint(lex_head[1]);
  const std::size_t lex_n = detail::parse_count(lex_head[2], in.line());
  std::string lex_text;
  for (std::size_t i = 0; i < lex_n; ++i) {
    lex_text += in.next();
    lex_text += '\n';
  }
  m.lexicon = load_lexicon(lex_text);
  if (m.lexicon.size() != lex_n || m.lexicon.fingerprint() != fingerprint) {
    throw DataError("embedded lexicon does not match its fingerprint", in.line());
  }

  const std::size_t L = detail::parse_count(detail::expect_fields(in, "labels", 2)[1], in.line());
  if (L == 0) throw DataError("model has no labels", in.line());
  std::vector<std::string> labels;
  for (std::size_t i = 0; i < L; ++i) labels.emplace_back(in.next());
  m.labels = LabelSet(std::move(labels));
  m.index = FeatureIndex(L);

  const std::size_t n_trans =
      detail::parse_count(detail::expect_fields(in, "transitions", 2)[1], in.line());
  if (n_trans != L * L) throw DataError("transition block must have L*L entries", in.line());
  std::vector<double> trans(L * L, 0.0);
  for (std::size_t i = 0; i < n_trans; ++i) {
    auto cols = detail::split_tabs(in.next());
    if (cols.size() != 3) throw DataError("transition lines need 3 columns", in.line());
    const LabelId a = m.labels.at(cols[0]);
    const LabelId b = m.labels.at(cols[1]);
    if (i != static_cast<std::size_t>(a) * L + b) {
      throw DataError("transition entries out of order", in.line());
    }
    trans[i] = detail::parse_weight(cols[2], in.line());
  }

  const std::size_t n_state =
      detail::parse_count(detail::expect_fields(in, "states", 2)[1], in.line());
  if (n_state % L != 0) throw DataError("state block size is not a multiple of L", in.line());
  m.weights = std::move(trans);
  m.weights.reserve(L * L + n_state);
  for (std::size_t i = 0; i < n_state; ++i) {
    auto cols = detail::split_tabs(in.next());
    if (cols.size() != 3) throw DataError("state lines need 3 columns", in.line());
    const LabelId y = m.labels.at(cols[1]);
    if (y != i % L) throw DataError("state entries out of order", in.line());
    if (y == 0) {
      if (m.index.find(cols[0])) {
        throw DataError("duplicate attribute '" + std::string(cols[0]) + "'", in.line());
      }
      m.index.add(cols[0]);
    } else if (m.index.attribute(static_cast<AttrId>(i / L)) != cols[0]) {
      throw DataError("state entries out of order", in.line());
    }
    m.weights.push_back(detail::parse_weight(cols[2], in.line()));
  }
  if (in.next() != "end") throw DataError("missing end marker", in.line());
  return m;
}

}  // namespace mixtag
