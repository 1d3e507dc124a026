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

#include "core/experiment.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

namespace semvqa {

std::vector<Instance> encode_dataset(std::span<const QAInstance> records, const Vocabulary& tokens,
                                     const Vocabulary& answers) {
  std::vector<Instance> out;
  out.reserve(records.size());
  for (const auto& r : records) {
    Instance inst;
    inst.question_id = r.question_id;
    for (const auto& t : r.tokens) {
      const auto id = tokens.find(t);
      require(id.has_value(), ErrorCode::kVocabMismatch,
              "question " + r.question_id + ": token '" + t + "' not in the token vocabulary");
      inst.tokens.push_back(*id);
    }
    for (const auto& a : r.answers) {
      const auto id = answers.find(a);
      require(id.has_value(), ErrorCode::kVocabMismatch,
              "question " + r.question_id + ": answer '" + a + "' not in the answer vocabulary");
      inst.answers.push_back(*id);
    }
    inst.image = Eigen::Map<const Vector>(r.features.data(), static_cast<Eigen::Index>(r.features.size()));
    out.push_back(std::move(inst));
  }
  return out;
}

ModelParameters build_model(const TrainConfig& config, const Vocabulary& tokens,
                            const Vocabulary& answers, const EmbeddingTable& embeddings,
                            std::size_t image_dim) {
  config.validate();
  AnswerMatrix m = build_answer_matrix(answers, embeddings, config.m_scheme, config.seed);
  m.trainable = config.m_trainable;
  ModelShape shape;
  shape.num_tokens = tokens.size();
  shape.embed_dim = config.embed_dim;
  shape.image_dim = image_dim;
  shape.fused_dim = config.fused_dim;
  shape.hidden_dim = config.hidden_dim;
  shape.num_answers = answers.size();
  shape.weight_norm = config.weight_norm;
  shape.normalize_projection = config.normalize_projection;
  return initialize_model(shape, std::move(m), config.seed);
}

ModelState train_model(const TrainConfig& config, std::span<const QAInstance> records,
                       const Vocabulary& tokens, const Vocabulary& answers,
                       const EmbeddingTable& embeddings, std::vector<HistoryRecord>* history) {
  require(!records.empty(), ErrorCode::kInvalidArgument, "training set is empty");
  const auto data = encode_dataset(records, tokens, answers);
  auto initial = build_model(config, tokens, answers, embeddings, records.front().features.size());
  auto result = train(data, config, std::move(initial));
  if (history) *history = std::move(result.history);
  return {std::move(result.params), config, tokens, answers};
}

std::vector<PredictionEntry> predict_entries(const ModelState& model,
                                             std::span<const QAInstance> records, double lambda) {
  const auto data = encode_dataset(records, model.tokens, model.answers);
  const auto recs = evaluate(model.params, data, lambda, model.config.metric);
  std::vector<PredictionEntry> out;
  out.reserve(recs.size());
  for (const auto& r : recs) {
    out.push_back({r.question_id, model.answers.at(r.predicted), r.lambda,
                   std::vector<double>(r.scores.data(), r.scores.data() + r.scores.size()),
                   std::vector<double>(r.distances.data(), r.distances.data() + r.distances.size())});
  }
  return out;
}

std::vector<PredictionEntry> ensemble_entries(std::span<const ModelState> models,
                                              std::span<const QAInstance> records, double lambda) {
  require(!models.empty(), ErrorCode::kInvalidArgument, "ensemble has no members");
  for (const auto& m : models) {
    require(m.tokens == models.front().tokens && m.answers == models.front().answers,
            ErrorCode::kVocabMismatch, "ensemble members use different vocabularies");
  }
  std::vector<std::vector<PredictionRecord>> member_records;
  for (const auto& m : models) {
    const auto data = encode_dataset(records, m.tokens, m.answers);
    member_records.push_back(evaluate(m.params, data, lambda, m.config.metric));
  }
  std::vector<PredictionEntry> out;
  out.reserve(records.size());
  std::vector<ScoreDistance> members(models.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    for (std::size_t k = 0; k < models.size(); ++k) {
      members[k] = {member_records[k][i].scores, member_records[k][i].distances};
    }
    const auto best = ensemble_predict(members, lambda);
    out.push_back({records[i].question_id, models.front().answers.at(best), lambda, {}, {}});
  }
  return out;
}

ModelState swap_answers(ModelState model, const Vocabulary& novel, const EmbeddingTable& embeddings) {
  require(!novel.empty(), ErrorCode::kInvalidArgument, "replacement answer vocabulary is empty");
  AnswerMatrix m = build_answer_matrix(novel, embeddings, InitScheme::kGlove, model.config.seed);
  m.trainable = false;
  model.params.head = swap_answer_matrix(std::move(model.params.head), std::move(m));
  model.answers = novel;
  return model;
}

MetricReport evaluate_report(std::span<const PredictionEntry> entries,
                             std::span<const QAInstance> records, const Inventory& inventory,
                             const Vocabulary& answers, std::span<const QAInstance> reference,
                             const std::string& label, double lambda) {
  const auto truths = truths_from(records, inventory);
  auto observed = truths;
  for (auto& t : truths_from(reference, inventory)) observed.push_back(std::move(t));
  const auto preds = predictions_from(entries);
  const std::set<std::string> vocab(answers.answers().begin(), answers.answers().end());
  auto report = compute_report(preds, truths, default_scope_map(inventory, answers),
                               build_cooccurrence(observed), vocab);
  report.label = label;
  report.lambda = lambda;
  return report;
}

std::string report_table(std::span<const MetricReport> reports) {
  require(!reports.empty(), ErrorCode::kInvalidArgument, "no reports to tabulate");
  struct Column {
    const char* name;
    double MetricReport::*field;
  };
  static constexpr Column kColumns[] = {
      {"accuracy", &MetricReport::accuracy},       {"validity", &MetricReport::validity},
      {"plausibility", &MetricReport::plausibility}, {"distribution", &MetricReport::distribution},
      {"consistency", &MetricReport::consistency},
  };
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> header = {"label", "lambda", "count"};
  for (const auto& c : kColumns) header.emplace_back(c.name);
  rows.push_back(header);
  auto num = [](double v, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return std::string(buf);
  };
  std::vector<double> sums(std::size(kColumns), 0.0);
  for (std::size_t i = 0; i < reports.size(); ++i) {
    const auto& r = reports[i];
    std::vector<std::string> row = {r.label.empty() ? "run" + std::to_string(i + 1) : r.label,
                                    num(r.lambda, 2), std::to_string(r.count)};
    for (std::size_t c = 0; c < std::size(kColumns); ++c) {
      row.push_back(num(r.*kColumns[c].field, 4));
      sums[c] += r.*kColumns[c].field;
    }
    rows.push_back(std::move(row));
  }
  if (reports.size() > 1) {
    std::vector<std::string> row = {"mean", "", ""};
    for (double s : sums) row.push_back(num(s / static_cast<double>(reports.size()), 4));
    rows.push_back(std::move(row));
  }
  std::vector<std::size_t> width(header.size(), 0);
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], row[c].size());
  }
  std::ostringstream out;
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c == 0) {
        out << row[c] << std::string(width[c] - row[c].size(), ' ');
      } else {
        out << "  " << std::string(width[c] - row[c].size(), ' ') << row[c];
      }
    }
    out << '\n';
  }
  return out.str();
}

}  // namespace semvqa
