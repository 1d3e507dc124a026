// Copyright 2026 The semvqa Authors
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

#include <cstddef>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "core/synth_data.hpp"

namespace semvqa {

// One line of a prediction file.
struct PredictionEntry {
  std::string question_id;
  std::string answer;
  double lambda = 0.0;
  std::vector<double> scores;     // optional
  std::vector<double> distances;  // optional
};

// question_id \t answer \t lambda \t scores \t distances, vectors
// comma-joined (empty when absent), shortest round-trip decimals.
void write_predictions(std::ostream& out, std::span<const PredictionEntry> entries);
std::vector<PredictionEntry> read_predictions(std::istream& in);
void save_predictions(const std::string& path, std::span<const PredictionEntry> entries);
std::vector<PredictionEntry> load_predictions(const std::string& path);

// Ground truth as the metrics see it. `group` is the question form used by
// plausibility and distribution.
struct Truth {
  std::string question_id;
  std::string qtype;
  std::vector<std::string> answers;
  std::optional<std::string> entailed_by;
  std::string group;
};

std::vector<Truth> truths_from(std::span<const QAInstance> instances, const Inventory& inventory);

struct Prediction {
  std::string question_id;
  std::string answer;
};

std::vector<Prediction> predictions_from(std::span<const PredictionEntry> entries);

// Every metric looks up each prediction's ground truth by id and throws
// kInvalidArgument when it is missing. Record order never matters.

double accuracy(std::span<const Prediction> preds, std::span<const Truth> truths);

// Absent qtypes are omitted.
std::map<std::string, double> per_type_accuracy(std::span<const Prediction> preds,
                                                std::span<const Truth> truths);

// Among predictions whose ground truth contains `answer`, the fraction that
// are correct; nullopt when there is none. Throws when `answer` is not in
// `vocabulary`.
std::optional<double> answer_recall(std::span<const Prediction> preds, std::span<const Truth> truths,
                                    const std::string& answer,
                                    const std::set<std::string>& vocabulary);

// Recall for every answer of the vocabulary that has a non-empty denominator.
std::map<std::string, double> answer_recall_map(std::span<const Prediction> preds,
                                                std::span<const Truth> truths,
                                                const std::set<std::string>& vocabulary);

struct ConsistencyResult {
  double rate = 1.0;
  std::size_t eligible = 0;  // entailed questions whose source was answered correctly
  std::size_t agreeing = 0;
};

// Over entailed questions whose source question was answered correctly, the
// fraction answered correctly themselves; 1.0 when there are none. A link to
// a question without ground truth or prediction throws.
ConsistencyResult consistency(std::span<const Prediction> preds, std::span<const Truth> truths);

using ScopeMap = std::map<std::string, std::set<std::string>>;

// verify and logical: {yes, no}; choose: colors, shapes and sizes; query:
// every answer of `answers` except yes and no.
ScopeMap default_scope_map(const Inventory& inventory, const Vocabulary& answers);

// Fraction of predictions inside their qtype's admissible set. Throws when
// a qtype has no entry.
double validity(std::span<const Prediction> preds, std::span<const Truth> truths,
                const ScopeMap& scope);

using CooccurrenceTable = std::map<std::string, std::set<std::string>>;

// group -> every answer observed with it.
CooccurrenceTable build_cooccurrence(std::span<const Truth> truths);

// Fraction of predictions that were observed with their group. Throws when a
// group is unknown to the table.
double plausibility(std::span<const Prediction> preds, std::span<const Truth> truths,
                    const CooccurrenceTable& table);

// Per group: 1/2 sum_i (p_i - q_i)^2 / (p_i + q_i) between the predicted and
// ground-truth answer frequencies (first listed answer), 0/0 = 0; overall is
// the question-count-weighted mean. Throws on empty input.
double distribution(std::span<const Prediction> preds, std::span<const Truth> truths);

struct MetricReport {
  std::string label;
  double lambda = 0.0;
  std::size_t count = 0;
  double accuracy = 0.0;
  std::map<std::string, double> per_type_accuracy;
  std::map<std::string, std::size_t> per_type_count;
  std::map<std::string, double> answer_recall;
  double validity = 0.0;
  double plausibility = 0.0;
  double distribution = 0.0;
  double consistency = 1.0;
  std::size_t consistency_pairs = 0;
};

MetricReport compute_report(std::span<const Prediction> preds, std::span<const Truth> truths,
                            const ScopeMap& scope, const CooccurrenceTable& table,
                            const std::set<std::string>& vocabulary);

// Flat key=value lines; recall entries are "recall.<answer>=<rate>".
void write_report_text(std::ostream& out, const MetricReport& report);
MetricReport read_report_text(std::istream& in);
std::string report_json(const MetricReport& report);

}  // namespace semvqa
