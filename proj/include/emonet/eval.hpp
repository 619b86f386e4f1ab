// Copyright 2026 The emonet-cpp Authors
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

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "emonet/corpus.hpp"
#include "emonet/run_config.hpp"

namespace emonet {

/// K x K counts; rows are reference classes, columns predictions.
struct ConfusionMatrix {
  std::size_t classes = 0;
  std::vector<std::size_t> counts;

  explicit ConfusionMatrix(std::size_t k = 0) : classes(k), counts(k * k, 0) {}
  std::size_t& at(std::size_t ref, std::size_t pred) { return counts[ref * classes + pred]; }
  std::size_t at(std::size_t ref, std::size_t pred) const { return counts[ref * classes + pred]; }
  std::size_t row_sum(std::size_t ref) const;
  std::size_t total() const;
};

ConfusionMatrix confusion(const std::vector<int>& reference, const std::vector<int>& prediction,
                          std::size_t classes);

/// Mean recall over classes with at least one reference sample.
double uar(const ConfusionMatrix& m);
std::vector<double> per_class_recall(const ConfusionMatrix& m);  // NaN for absent classes
double chance_level(std::size_t classes);

enum class Direction { Improvement, Decrease, None };
std::string_view to_string(Direction d);

struct McNemarSettings {
  std::size_t exact_below = 25;  // b + c below this uses the exact binomial test
  double alpha = 0.05;
  double critical = 3.841;  // chi-square(1) at alpha 0.05
};

struct McNemarResult {
  std::size_t b = 0;  // baseline correct, candidate wrong
  std::size_t c = 0;  // baseline wrong, candidate correct
  double statistic = 0.0;  // continuity-corrected chi-square
  double p_value = 1.0;    // exact binomial below the threshold, chi-square above
  bool exact = false;
  bool significant = false;
  Direction direction = Direction::None;
};

/// Two-sided exact binomial p-value of min(b,c) under Binomial(b+c, 0.5).
double binomial_two_sided(std::size_t b, std::size_t c);

McNemarResult mcnemar(const std::vector<int>& baseline, const std::vector<int>& candidate,
                      const std::vector<int>& reference, const McNemarSettings& settings = {});

/// Predictions of one run on one partition, aligned by sample order.
struct Predictions {
  std::string corpus_id;
  std::vector<std::string> labels;  // class index -> name
  std::vector<std::string> sample_ids;
  std::vector<int> reference;
  std::vector<int> prediction;
};

void write_predictions(std::ostream& out, const Predictions& p);
void save_predictions(const std::filesystem::path& path, const Predictions& p);
/// Reads `sample_id,reference,prediction`; class indices follow the sorted
/// label names found in the file.
Predictions load_predictions(const std::filesystem::path& path);

struct EvalReport {
  std::string corpus_id;
  std::string partition;
  std::vector<std::string> labels;
  ConfusionMatrix confusion;
  std::vector<double> recalls;
  std::vector<std::string> absent_classes;  // excluded from UAR
  double uar = 0.0;
  double accuracy = 0.0;
  double chance = 0.0;
};

EvalReport make_report(const Predictions& p, const std::string& partition);
Json to_json(const EvalReport& r);
std::string format_report(const EvalReport& r);

struct CompareRow {
  std::string name;
  double uar = 0.0;
  McNemarResult test;
  char mark = ' ';  // '+', '-' or ' '
};

struct CompareTable {
  std::string corpus_id;
  double chance = 0.0;
  double baseline_uar = 0.0;
  std::vector<CompareRow> rows;
};

/// McNemar of every candidate against the baseline. Throws MisalignedRuns
/// unless all runs cover the same samples in the same order with the same
/// references.
CompareTable compare_report(const Predictions& baseline,
                            const std::vector<std::pair<std::string, Predictions>>& candidates,
                            const McNemarSettings& settings = {});
std::string format_compare(const CompareTable& t);
Json to_json(const CompareTable& t);

}  // namespace emonet
