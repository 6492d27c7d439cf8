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

// mixtag: train / tag / eval / features.
//
// Exit codes: 0 ok, 1 usage, 2 data error, 3 numeric failure.

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "mixtag/mixtag.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kUsage = 1;
constexpr int kData = 2;
constexpr int kNumeric = 3;

// Thrown to leave a command with a given exit code after printing `what`.
struct Exit {
  int code;
  std::string what;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Exit{kData, path + ": cannot open for reading"};
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Exit{kData, path + ": cannot open for writing"};
  out << content;
  if (!out.flush()) throw Exit{kData, path + ": write failed"};
}

mixtag::Corpus read_corpus(const std::string& path, mixtag::Schema schema) {
  try {
    return mixtag::parse_corpus(read_file(path), schema, mixtag::infer_meta(path));
  } catch (const mixtag::DataError& e) {
    throw Exit{kData, path + ":" + std::to_string(e.line()) + ": " + e.message()};
  }
}

mixtag::NormalizationLexicon read_lexicon(const std::string& path) {
  if (path.empty()) return {};
  try {
    return mixtag::load_lexicon(read_file(path));
  } catch (const mixtag::DataError& e) {
    throw Exit{kData, path + ": " + e.what()};
  }
}

std::size_t default_workers() {
  return std::max(1u, std::thread::hardware_concurrency());
}

// ---------------------------------------------------------------------------

struct TrainArgs {
  std::vector<std::string> train;
  std::string lexicon;
  std::string model;
  std::size_t cutoff = 1;
  double sigma2 = 10.0;
  std::size_t max_iter = 200;
  double tol = 1e-5;
  std::vector<std::string> disabled;
};

mixtag::FeatureCatalogue catalogue_from(const std::vector<std::string>& disabled) {
  mixtag::FeatureCatalogue cat;
  for (const auto& name : disabled) {
    if (name == "ortho") {
      for (std::size_t k = 0; k < mixtag::kFlagCount; ++k) {
        cat.disable(mixtag::family_of(static_cast<mixtag::Flag>(k)));
      }
      continue;
    }
    auto fam = mixtag::family_from_name(name);
    if (!fam) throw Exit{kUsage, "unknown feature family '" + name + "'"};
    cat.disable(*fam);
  }
  if (cat.enabled_count() == 0) throw Exit{kUsage, "every feature family is disabled"};
  return cat;
}

int run_train(const TrainArgs& args) {
  const auto catalogue = catalogue_from(args.disabled);
  std::vector<mixtag::Corpus> parts;
  for (const auto& path : args.train) parts.push_back(read_corpus(path, mixtag::Schema::train3col));
  mixtag::Corpus corpus;
  try {
    corpus = mixtag::merge_corpora(parts);
  } catch (const mixtag::DataError& e) {
    throw Exit{kData, e.what()};
  }
  if (corpus.empty()) throw Exit{kData, "training data contains no sentences"};
  const auto lexicon = read_lexicon(args.lexicon);

  mixtag::TrainConfig cfg;
  cfg.cutoff = args.cutoff;
  cfg.l2_sigma2 = args.sigma2;
  cfg.max_iterations = args.max_iter;
  cfg.tolerance = args.tol;
  cfg.worker_count = default_workers();

  mixtag::TrainResult result;
  try {
    result = mixtag::train(corpus, lexicon, catalogue, cfg,
                           [](std::size_t it, double f, double g) {
                             std::fprintf(stderr, "iter %zu  objective %.6f  |grad| %.6g\n", it,
                                          f, g);
                           });
  } catch (const mixtag::NumericError& e) {
    throw Exit{kNumeric, e.what()};
  } catch (const std::invalid_argument& e) {
    throw Exit{kUsage, e.what()};
  }
  write_file(args.model, mixtag::save_model(result.model));

  const auto& r = result.report;
  std::printf("training sentences: %zu\n", r.sentences);
  std::printf("training tokens: %zu\n", r.tokens);
  std::printf("labels: %zu\n", r.labels);
  std::printf("attributes: %zu\n", r.attributes);
  std::printf("parameters: %zu\n", r.parameters);
  std::printf("iterations: %zu\n", r.iterations);
  std::printf("converged: %s\n", r.converged ? "yes" : "no");
  std::printf("initial objective: %.6f\n", r.initial_objective);
  std::printf("final objective: %.6f\n", r.final_objective);
  std::printf("seconds: %.2f\n", r.seconds);
  return kOk;
}

// ---------------------------------------------------------------------------

mixtag::Model read_model(const std::string& path) {
  try {
    return mixtag::load_model(read_file(path));
  } catch (const mixtag::DataError& e) {
    throw Exit{kData, path + ": " + e.what()};
  }
}

int run_tag(const std::string& model_path, const std::string& input, const std::string& output) {
  const auto model = read_model(model_path);
  const auto corpus = read_corpus(input, mixtag::Schema::test2col);
  const auto tagged = mixtag::tag_corpus(model, corpus, default_workers());
  write_file(output, mixtag::write_corpus(tagged, mixtag::Schema::train3col));
  std::fprintf(stderr, "tagged %zu sentences, %zu tokens\n", tagged.size(), tagged.token_count());
  return kOk;
}

// ---------------------------------------------------------------------------

int run_eval(const std::string& gold_path, const std::string& pred_path,
             const std::string& format) {
  const auto gold = read_corpus(gold_path, mixtag::Schema::train3col);
  const auto pred = read_corpus(pred_path, mixtag::Schema::train3col);
  mixtag::EvalReport rep;
  try {
    rep = mixtag::evaluate(gold, pred);
  } catch (const mixtag::DataError& e) {
    throw Exit{kData, std::string("structure mismatch: ") + e.what()};
  }
  std::fputs(format == "lines" ? mixtag::format_report_lines(rep).c_str()
                               : mixtag::format_report_table(rep).c_str(),
             stdout);
  return kOk;
}

// ---------------------------------------------------------------------------

mixtag::Corpus read_any_corpus(const std::string& path) {
  const std::string text = read_file(path);
  try {
    return mixtag::parse_corpus(text, mixtag::Schema::train3col);
  } catch (const mixtag::DataError&) {
  }
  try {
    return mixtag::parse_corpus(text, mixtag::Schema::test2col);
  } catch (const mixtag::DataError& e) {
    throw Exit{kData, path + ": not a 2- or 3-column corpus (" + e.what() + ")"};
  }
}

int run_features(const std::string& input, const std::string& lexicon_path,
                 const std::string& position) {
  const auto corpus = read_any_corpus(input);
  const auto lexicon = read_lexicon(lexicon_path);

  auto print_position = [&](std::size_t s, std::size_t t) {
    const auto& sentence = corpus.sentences[s];
    std::printf("# %zu:%zu\t%s\n", s, t, sentence.tokens[t].surface.c_str());
    for (const auto& a : mixtag::extract_attributes(sentence, t, lexicon)) {
      std::printf("%s\n", a.c_str());
    }
  };

  if (!position.empty()) {
    const auto colon = position.find(':');
    std::size_t s = 0, t = 0;
    auto parse = [](std::string_view v, std::size_t& out) {
      auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
      return ec == std::errc{} && p == v.data() + v.size() && !v.empty();
    };
    if (colon == std::string::npos || !parse(std::string_view(position).substr(0, colon), s) ||
        !parse(std::string_view(position).substr(colon + 1), t)) {
      throw Exit{kUsage, "--position expects SENTENCE:TOKEN, e.g. 0:2"};
    }
    if (s >= corpus.size()) {
      throw Exit{kData, "sentence " + std::to_string(s) + " out of range (corpus has " +
                            std::to_string(corpus.size()) + ")"};
    }
    if (t >= corpus.sentences[s].size()) {
      throw Exit{kData, "token " + std::to_string(t) + " out of range (sentence " +
                            std::to_string(s) + " has " +
                            std::to_string(corpus.sentences[s].size()) + ")"};
    }
    print_position(s, t);
    return kOk;
  }
  for (std::size_t s = 0; s < corpus.size(); ++s) {
    for (std::size_t t = 0; t < corpus.sentences[s].size(); ++t) print_position(s, t);
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"mixtag: CRF part-of-speech tagger for code-mixed social-media text"};
  app.require_subcommand(1);

  TrainArgs targs;
  auto* train = app.add_subcommand("train", "train a model from train3col files");
  train->add_option("--train", targs.train, "training file (repeatable; files are merged)")
      ->required()
      ->expected(1, -1);
  train->add_option("--lexicon", targs.lexicon, "short-form normalization lexicon");
  train->add_option("--model", targs.model, "output model path")->required();
  train->add_option("--cutoff", targs.cutoff, "minimum attribute frequency")
      ->check(CLI::PositiveNumber);
  train->add_option("--sigma2", targs.sigma2, "L2 prior variance")->check(CLI::PositiveNumber);
  train->add_option("--max-iter", targs.max_iter, "maximum L-BFGS iterations")
      ->check(CLI::NonNegativeNumber);
  train->add_option("--tol", targs.tol, "relative objective-change stopping tolerance")
      ->check(CLI::PositiveNumber);
  train->add_option("--disable-feature", targs.disabled,
                    "feature family to switch off (repeatable; 'ortho' = all flags)");

  std::string model_path, input, output;
  auto* tag = app.add_subcommand("tag", "tag a test2col file");
  tag->add_option("--model", model_path, "model file")->required();
  tag->add_option("--input", input, "test2col input")->required();
  tag->add_option("--output", output, "train3col output")->required();

  std::string gold, pred, format = "table";
  auto* eval = app.add_subcommand("eval", "score predictions against gold");
  eval->add_option("--gold", gold, "gold train3col file")->required();
  eval->add_option("--pred", pred, "predicted train3col file")->required();
  eval->add_option("--report", format, "table | lines")
      ->check(CLI::IsMember({"table", "lines"}));

  std::string feat_input, feat_lexicon, position;
  auto* features = app.add_subcommand("features", "print attributes per token");
  features->add_option("--input", feat_input, "corpus file (2 or 3 columns)")->required();
  features->add_option("--lexicon", feat_lexicon, "short-form normalization lexicon");
  features->add_option("--position", position, "SENTENCE:TOKEN, 0-based");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (*train) return run_train(targs);
    if (*tag) return run_tag(model_path, input, output);
    if (*eval) return run_eval(gold, pred, format);
    if (*features) return run_features(feat_input, feat_lexicon, position);
  } catch (const Exit& e) {
    std::fprintf(stderr, "mixtag: %s\n", e.what.c_str());
    if (e.code == kUsage) std::fputs(app.help().c_str(), stderr);
    return e.code;
  } catch (const mixtag::DataError& e) {
    std::fprintf(stderr, "mixtag: %s\n", e.what());
    return kData;
  } catch (const mixtag::NumericError& e) {
    std::fprintf(stderr, "mixtag: %s\n", e.what());
    return kNumeric;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "mixtag: %s\n", e.what());
    return kData;
  }
  return kUsage;
}
