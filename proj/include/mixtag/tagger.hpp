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

#pragma once

#include <cmath>

#include "mixtag/corpus.hpp"
#include "mixtag/crf.hpp"
#include "mixtag/trainer.hpp"

namespace mixtag {

/// Viterbi labels for one sentence, using the model's own lexicon and catalogue.
inline std::vector<std::string> tag_sentence(const Model& model, const Sentence& sentence) {
  const auto attrs = extract_sentence(sentence, model.lexicon, model.catalogue);
  const Decoded best = viterbi(model, attrs);
  if (!best.labels.empty() && !std::isfinite(best.score)) {
    throw NumericError("non-finite sequence score");
  }
  std::vector<std::string> out;
  out.reserve(best.labels.size());
  for (LabelId y : best.labels) out.push_back(model.labels[y]);
  return out;
}

/// Copy of `input` with every token's POS replaced by the model's prediction.
/// Sentences are tagged concurrently; output order matches input order.
inline Corpus tag_corpus(const Model& model, const Corpus& input, std::size_t workers = 1) {
  Corpus out = input;
  detail::parallel_for(out.size(), workers, [&](std::size_t s) {
    auto& sentence = out.sentences[s];
    const auto labels = tag_sentence(model, sentence);
    for (std::size_t t = 0; t < labels.size(); ++t) sentence.tokens[t].pos = labels[t];
  });
  return out;
}

}  // namespace mixtag
