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

// Maximum-likelihood training with a Gaussian prior:
//
//   minimize  -sum_s log P(y_s | x_s) + ||theta||^2 / (2 sigma^2)
//
// The gradient of each parameter is its expected count under the model
// minus its empirical count, plus theta / sigma^2.

#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <mutex>
#include <stdexcept>
#include <thread>
#include <vector>

#include "mixtag/corpus.hpp"
#include "mixtag/crf.hpp"
#include "mixtag/error.hpp"
#include "mixtag/features.hpp"
#include "mixtag/lbfgs.hpp"

namespace mixtag {

struct TrainConfig {
  std::size_t cutoff = 1;
  double l2_sigma2 = 10.0;
  std::size_t max_iterations = 200;
  double tolerance = 1e-5;
  std::size_t lbfgs_memory = 10;
  std::size_t worker_count = 1;

  void validate() const {
    if (cutoff < 1) throw std::invalid_argument("cutoff must be >= 1");
    if (!(l2_sigma2 > 0.0) || !std::isfinite(l2_sigma2))
      throw std::invalid_argument("sigma2 must be positive and finite");
    if (!(tolerance > 0.0)) throw std::invalid_argument("tolerance must be positive");
    if (lbfgs_memory < 1) throw std::invalid_argument("L-BFGS memory must be >= 1");
    if (worker_count < 1) throw std::invalid_argument("worker count must be >= 1");
  }
};

struct IterationRecord {
  double objective = 0.0;
  double gradient_norm = 0.0;
};

struct TrainReport {
  std::size_t sentences = 0;
  std::size_t tokens = 0;
  std::size_t labels = 0;
  std::size_t attributes = 0;
  std::size_t parameters = 0;
  std::size_t iterations = 0;
  std::vector<IterationRecord> history;  // one entry per accepted iteration
  double initial_objective = 0.0;
  double final_objective = 0.0;
  bool converged = false;
  double seconds = 0.0;
};

/// Training data reduced to attribute ids and gold label ids.
struct IndexedCorpus {
  std::vector<std::vector<std::vector<AttrId>>> attrs;  // sentence -> position -> ids
  std::vector<std::vector<LabelId>> gold;

  std::size_t size() const { return attrs.size(); }
};

inline IndexedCorpus index_corpus(const Model& shape, const Corpus& corpus,
                                  const std::vector<std::vector<AttributeSet>>& attrs) {
  IndexedCorpus out;
  out.attrs.reserve(corpus.size());
  out.gold.reserve(corpus.size());
  for (std::size_t s = 0; s < corpus.size(); ++s) {
    out.attrs.push_back(shape.compile(attrs[s]));
    std::vector<LabelId> gold;
    for (const auto& tok : corpus.sentences[s].tokens) {
      if (!tok.pos) throw DataError("unlabeled token '" + tok.surface + "' in training data");
      gold.push_back(shape.labels.at(*tok.pos));
    }
    out.gold.push_back(std::move(gold));
  }
  return out;
}

namespace detail {

// Sentences are processed in fixed-size batches: marginals in parallel,
// then accumulated strictly in sentence order, so the floating-point
// result does not depend on the number of workers.
inline constexpr std::size_t kBatch = 128;

template <class Fn>
void parallel_for(std::size_t n, std::size_t workers, Fn&& fn) {
  workers = std::min(workers, n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::mutex error_mu;
  std::exception_ptr error;
  {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        try {
          for (std::size_t i; (i = next.fetch_add(1)) < n;) fn(i);
        } catch (...) {
          std::lock_guard lock(error_mu);
          if (!error) error = std::current_exception();
          next.store(n);
        }
      });
    }
  }
  if (error) std::rethrow_exception(error);
}

}  // namespace detail

/// Penalized negative log-likelihood and its gradient at `weights`.
inline double objective_and_gradient(std::span<const double> weights, const FeatureIndex& index,
                                     const IndexedCorpus& data, double l2_sigma2,
                                     std::span<double> grad, std::size_t workers = 1) {
  const std::size_t L = index.label_count();
  std::fill(grad.begin(), grad.end(), 0.0);

  struct SentenceStats {
    Marginals marg;
    double gold_score = 0.0;
  };
  std::vector<SentenceStats> batch(detail::kBatch);
  double nll = 0.0;

  for (std::size_t begin = 0; begin < data.size(); begin += detail::kBatch) {
    const std::size_t count = std::min(detail::kBatch, data.size() - begin);
    detail::parallel_for(count, workers, [&](std::size_t k) {
      const std::size_t s = begin + k;
      const Lattice lat = build_lattice(index, weights, data.attrs[s]);
      batch[k].marg = posterior_marginals(lat);
      batch[k].gold_score = sequence_score(lat, data.gold[s]);
    });

    for (std::size_t k = 0; k < count; ++k) {
      const std::size_t s = begin + k;
      const Marginals& m = batch[k].marg;
      const auto& gold = data.gold[s];
      nll -= batch[k].gold_score - m.log_z;
      for (std::size_t t = 0; t < gold.size(); ++t) {
        for (AttrId a : data.attrs[s][t]) {
          const std::size_t base = index.state_slot(a, 0);
          for (std::size_t y = 0; y < L; ++y) grad[base + y] += m.node_at(t, y);
          grad[base + gold[t]] -= 1.0;
        }
        if (t == 0) continue;
        for (std::size_t yp = 0; yp < L; ++yp) {
          for (std::size_t y = 0; y < L; ++y) {
            grad[index.transition_slot(static_cast<LabelId>(yp), static_cast<LabelId>(y))] +=
                m.edge_at(t, yp, y);
          }
        }
        grad[index.transition_slot(gold[t - 1], gold[t])] -= 1.0;
      }
    }
  }

  double penalty = 0.0;
  for (std::size_t k = 0; k < weights.size(); ++k) {
    penalty += weights[k] * weights[k];
    grad[k] += weights[k] / l2_sigma2;
  }
  return nll + penalty / (2.0 * l2_sigma2);
}

struct TrainResult {
  Model model;
  TrainReport report;
};

/// Fits a model from zero weights. Throws DataError on unusable data and
/// NumericError when the objective stops being finite.
inline TrainResult train(const Corpus& corpus, const NormalizationLexicon& lexicon,
                         const FeatureCatalogue& catalogue, const TrainConfig& config,
                         const lbfgs::Progress& progress = {}) {
  config.validate();
  catalogue.validate();
  if (corpus.empty()) throw DataError("training corpus is empty");
  const auto started = std::chrono::steady_clock::now();

  TrainResult out;
  Model& model = out.model;
  model.catalogue = catalogue;
  model.lexicon = lexicon;
  model.labels = LabelSet::from_corpus(corpus);

  std::vector<std::vector<AttributeSet>> attrs(corpus.size());
  detail::parallel_for(corpus.size(), config.worker_count, [&](std::size_t s) {
    attrs[s] = extract_sentence(corpus.sentences[s], lexicon, catalogue);
  });
  model.index = index_features(attrs, model.labels, config.cutoff);
  const IndexedCorpus data = index_corpus(model, corpus, attrs);
  attrs.clear();
  attrs.shrink_to_fit();

  model.weights.assign(model.index.size(), 0.0);

  TrainReport& report = out.report;
  report.sentences = corpus.size();
  report.tokens = corpus.token_count();
  report.labels = model.labels.size();
  report.attributes = model.index.attribute_count();
  report.parameters = model.index.size();

  lbfgs::Options opt;
  opt.memory = config.lbfgs_memory;
  opt.max_iterations = config.max_iterations;
  opt.tolerance = config.tolerance;

  bool first_eval = true;
  auto fn = [&](std::span<const double> w, std::span<double> g) {
    const double v =
        objective_and_gradient(w, model.index, data, config.l2_sigma2, g, config.worker_count);
    if (first_eval) {
      report.initial_objective = v;
      first_eval = false;
    }
    return v;
  };
  auto on_step = [&](std::size_t it, double f, double gnorm) {
    report.history.push_back({f, gnorm});
    if (progress) progress(it, f, gnorm);
  };

  const lbfgs::Result res = lbfgs::minimize(fn, model.weights, opt, on_step);
  for (double w : model.weights) {
    if (!std::isfinite(w)) throw NumericError("training produced a non-finite weight");
  }
  report.iterations = res.iterations;
  report.final_objective = res.objective;
  report.converged = res.status != lbfgs::Status::max_iterations;
  report.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return out;
}

}  // namespace mixtag
