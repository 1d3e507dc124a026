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

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "core/checkpoint.hpp"
#include "core/embedding_store.hpp"
#include "core/metrics.hpp"
#include "core/model.hpp"
#include "core/synth_data.hpp"

namespace semvqa {

// Maps string records onto vocabulary indices. Unknown tokens or answers
// throw kVocabMismatch.
std::vector<Instance> encode_dataset(std::span<const QAInstance> records, const Vocabulary& tokens,
                                     const Vocabulary& answers);

// Answer matrix from config.m_scheme and config.seed, then a fresh model
// shaped by the config and the vocabularies.
ModelParameters build_model(const TrainConfig& config, const Vocabulary& tokens,
                            const Vocabulary& answers, const EmbeddingTable& embeddings,
                            std::size_t image_dim);

// build_model followed by train on the encoded records.
ModelState train_model(const TrainConfig& config, std::span<const QAInstance> records,
                       const Vocabulary& tokens, const Vocabulary& answers,
                       const EmbeddingTable& embeddings, std::vector<HistoryRecord>* history = nullptr);

// Evaluates against the model's own vocabularies, with its training metric.
std::vector<PredictionEntry> predict_entries(const ModelState& model,
                                             std::span<const QAInstance> records, double lambda);

// Averages the members' softmax(y) and softmax(-d) per question. Members
// must share vocabularies; entries carry no score or distance vectors.
std::vector<PredictionEntry> ensemble_entries(std::span<const ModelState> models,
                                              std::span<const QAInstance> records, double lambda);

// Replaces M by bag-of-words rows for `novel` from `embeddings`, frozen,
// and makes `novel` the model's answer vocabulary. Only lambda = 0 remains
// meaningful when the answer count changes.
ModelState swap_answers(ModelState model, const Vocabulary& novel, const EmbeddingTable& embeddings);

// Full metric report. Plausibility co-occurrences come from `records` plus
// `reference` (typically the training split) when given.
MetricReport evaluate_report(std::span<const PredictionEntry> entries,
                             std::span<const QAInstance> records, const Inventory& inventory,
                             const Vocabulary& answers,
                             std::span<const QAInstance> reference = {},
                             const std::string& label = {}, double lambda = 0.0);

// Aligned text table of the headline metrics, one row per report plus a
// "mean" row when there is more than one.
std::string report_table(std::span<const MetricReport> reports);

}  // namespace semvqa
