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

// extern "C" surface over the C++ core. Every entry point converts
// exceptions into status codes and records the message per thread.

#include "semvqa/semvqa.h"

#include <cstring>
#include <algorithm>
#include <exception>
#include <fstream>
#include <memory>
#include <new>
#include <sstream>
#include <string>
#include <vector>

#include "core/checkpoint.hpp"
#include "core/config.hpp"
#include "core/experiment.hpp"
#include "core/gradcheck.hpp"
#include "core/metrics.hpp"

struct semvqa_config {
  semvqa::ExperimentConfig value;
};
struct semvqa_embeddings {
  semvqa::EmbeddingTable value;
};
struct semvqa_vocab {
  semvqa::Vocabulary value;
};
struct semvqa_answer_matrix {
  semvqa::AnswerMatrix value;
};
struct semvqa_dataset {
  std::vector<semvqa::QAInstance> value;
};
struct semvqa_model {
  semvqa::ModelState value;
};
struct semvqa_history {
  std::vector<semvqa::HistoryRecord> value;
};
struct semvqa_predictions {
  std::vector<semvqa::PredictionEntry> value;
};
struct semvqa_report {
  semvqa::MetricReport value;
};

namespace {

thread_local std::string g_last_error;

semvqa_status record(semvqa_status status, const char* what) {
  g_last_error = what;
  return status;
}

template <class F>
semvqa_status guard(F&& f) {
  try {
    g_last_error.clear();
    f();
    return SEMVQA_OK;
  } catch (const semvqa::Error& e) {
    return record(static_cast<semvqa_status>(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return record(SEMVQA_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return record(SEMVQA_ERR_INTERNAL, e.what());
  } catch (...) {
    return record(SEMVQA_ERR_INTERNAL, "unknown error");
  }
}

void need(const void* p, const char* name) {
  if (p == nullptr) {
    semvqa::fail(semvqa::ErrorCode::kInvalidArgument, std::string(name) + " must not be NULL");
  }
}

void copy_out(const std::string& s, char* buffer, std::size_t capacity, std::size_t* required) {
  if (required) *required = s.size();
  if (buffer && capacity > 0) {
    const std::size_t n = std::min(s.size(), capacity - 1);
    std::memcpy(buffer, s.data(), n);
    buffer[n] = '\0';
  }
}

template <class Handle, class T>
void emit(Handle** out, T&& value) {
  *out = new Handle{std::forward<T>(value)};
}

}  // namespace

extern "C" {

const char* semvqa_last_error(void) { return g_last_error.c_str(); }

const char* semvqa_status_name(semvqa_status status) {
  switch (status) {
    case SEMVQA_OK: return "ok";
    case SEMVQA_ERR_INVALID_ARGUMENT: return "invalid argument";
    case SEMVQA_ERR_SHAPE_MISMATCH: return "shape mismatch";
    case SEMVQA_ERR_PARSE: return "parse error";
    case SEMVQA_ERR_IO: return "i/o error";
    case SEMVQA_ERR_NUMERIC: return "numeric error";
    case SEMVQA_ERR_INFEASIBLE: return "infeasible";
    case SEMVQA_ERR_OUT_OF_RANGE: return "out of range";
    case SEMVQA_ERR_VOCAB_MISMATCH: return "vocabulary mismatch";
    case SEMVQA_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

const char* semvqa_version(void) { return SEMVQA_VERSION_STRING; }

// ---- config

semvqa_status semvqa_config_create(semvqa_config** out) {
  return guard([&] {
    need(out, "out");
    emit(out, semvqa::ExperimentConfig{});
  });
}

void semvqa_config_destroy(semvqa_config* config) { delete config; }

semvqa_status semvqa_config_clone(const semvqa_config* config, semvqa_config** out) {
  return guard([&] {
    need(config, "config");
    need(out, "out");
    emit(out, config->value);
  });
}

semvqa_status semvqa_config_load(semvqa_config* config, const char* path) {
  return guard([&] {
    need(config, "config");
    need(path, "path");
    auto updated = config->value;
    updated.apply(semvqa::load_key_values(path));
    config->value = std::move(updated);
  });
}

semvqa_status semvqa_config_save(const semvqa_config* config, const char* path) {
  return guard([&] {
    need(config, "config");
    need(path, "path");
    std::ofstream out(path, std::ios::trunc);
    if (!out) semvqa::fail(semvqa::ErrorCode::kIo, std::string("cannot open '") + path + "' for writing");
    semvqa::write_key_values(out, config->value.to_key_values());
    if (!out) semvqa::fail(semvqa::ErrorCode::kIo, std::string("write failed for '") + path + "'");
  });
}

semvqa_status semvqa_config_set(semvqa_config* config, const char* key, const char* value) {
  return guard([&] {
    need(config, "config");
    need(key, "key");
    need(value, "value");
    config->value.set(key, value);
  });
}

semvqa_status semvqa_config_get(const semvqa_config* config, const char* key, char* buffer,
                                size_t capacity, size_t* required) {
  return guard([&] {
    need(config, "config");
    need(key, "key");
    copy_out(config->value.get(key), buffer, capacity, required);
  });
}

semvqa_status semvqa_config_validate(const semvqa_config* config) {
  return guard([&] {
    need(config, "config");
    config->value.validate();
  });
}

semvqa_status semvqa_config_seed_count(const semvqa_config* config, size_t* count) {
  return guard([&] {
    need(config, "config");
    need(count, "count");
    *count = config->value.seed_list().size();
  });
}

semvqa_status semvqa_config_seed_at(const semvqa_config* config, size_t index, uint64_t* seed) {
  return guard([&] {
    need(config, "config");
    need(seed, "seed");
    const auto seeds = config->value.seed_list();
    semvqa::require(index < seeds.size(), semvqa::ErrorCode::kOutOfRange, "seed index out of range");
    *seed = seeds[index];
  });
}

// ---- embeddings

semvqa_status semvqa_embeddings_load(const char* path, semvqa_embeddings** out) {
  return guard([&] {
    need(path, "path");
    need(out, "out");
    emit(out, semvqa::load_embedding_file(path));
  });
}

semvqa_status semvqa_embeddings_synthetic(const semvqa_config* config, semvqa_embeddings** out) {
  return guard([&] {
    need(config, "config");
    need(out, "out");
    emit(out, semvqa::synthetic_embeddings(config->value.data.inventory, config->value.embedding));
  });
}

semvqa_status semvqa_embeddings_save(const semvqa_embeddings* table, const char* path) {
  return guard([&] {
    need(table, "table");
    need(path, "path");
    semvqa::save_embedding_file(path, table->value);
  });
}

semvqa_status semvqa_embeddings_shape(const semvqa_embeddings* table, size_t* words,
                                      size_t* dimension) {
  return guard([&] {
    need(table, "table");
    if (words) *words = table->value.size();
    if (dimension) *dimension = table->value.dimension();
  });
}

void semvqa_embeddings_destroy(semvqa_embeddings* table) { delete table; }

// ---- vocabularies

semvqa_status semvqa_vocab_load(const char* path, semvqa_vocab** out) {
  return guard([&] {
    need(path, "path");
    need(out, "out");
    emit(out, semvqa::load_vocabulary(path));
  });
}

semvqa_status semvqa_vocab_save(const semvqa_vocab* vocab, const char* path) {
  return guard([&] {
    need(vocab, "vocab");
    need(path, "path");
    semvqa::save_vocabulary(path, vocab->value);
  });
}

semvqa_status semvqa_vocab_answers(const semvqa_config* config, semvqa_vocab** out) {
  return guard([&] {
    need(config, "config");
    need(out, "out");
    config->value.data.inventory.validate();
    emit(out, semvqa::answer_vocabulary(config->value.data.inventory));
  });
}

semvqa_status semvqa_vocab_tokens(const semvqa_config* config, semvqa_vocab** out) {
  return guard([&] {
    need(config, "config");
    need(out, "out");
    config->value.data.inventory.validate();
    emit(out, semvqa::token_vocabulary(config->value.data.inventory));
  });
}

semvqa_status semvqa_vocab_size(const semvqa_vocab* vocab, size_t* size) {
  return guard([&] {
    need(vocab, "vocab");
    need(size, "size");
    *size = vocab->value.size();
  });
}

semvqa_status semvqa_vocab_at(const semvqa_vocab* vocab, size_t index, char* buffer,
                              size_t capacity, size_t* required) {
  return guard([&] {
    need(vocab, "vocab");
    semvqa::require(index < vocab->value.size(), semvqa::ErrorCode::kOutOfRange,
                    "vocabulary index out of range");
    copy_out(vocab->value.at(index), buffer, capacity, required);
  });
}

void semvqa_vocab_destroy(semvqa_vocab* vocab) { delete vocab; }

// ---- answer matrices

semvqa_status semvqa_answer_matrix_build(const semvqa_vocab* answers,
                                         const semvqa_embeddings* table, const char* scheme,
                                         uint64_t seed, semvqa_answer_matrix** out) {
  return guard([&] {
    need(answers, "answers");
    need(table, "table");
    need(scheme, "scheme");
    need(out, "out");
    emit(out, semvqa::build_answer_matrix(answers->value, table->value,
                                          semvqa::parse_init_scheme(scheme), seed));
  });
}

semvqa_status semvqa_answer_matrix_load(const char* path, semvqa_answer_matrix** out) {
  return guard([&] {
    need(path, "path");
    need(out, "out");
    emit(out, semvqa::load_answer_matrix(path));
  });
}

semvqa_status semvqa_answer_matrix_save(const semvqa_answer_matrix* m, const char* path) {
  return guard([&] {
    need(m, "matrix");
    need(path, "path");
    semvqa::save_answer_matrix(path, m->value);
  });
}

semvqa_status semvqa_answer_matrix_shape(const semvqa_answer_matrix* m, size_t* rows,
                                         size_t* cols) {
  return guard([&] {
    need(m, "matrix");
    if (rows) *rows = m->value.num_answers();
    if (cols) *cols = m->value.dimension();
  });
}

semvqa_status semvqa_answer_matrix_values(const semvqa_answer_matrix* m, double* values,
                                          size_t count) {
  return guard([&] {
    need(m, "matrix");
    need(values, "values");
    const auto& rows = m->value.rows;
    semvqa::require(count == static_cast<size_t>(rows.size()), semvqa::ErrorCode::kShapeMismatch,
                    "value buffer size != rows * cols");
    std::size_t i = 0;
    for (Eigen::Index r = 0; r < rows.rows(); ++r) {
      for (Eigen::Index c = 0; c < rows.cols(); ++c) values[i++] = rows(r, c);
    }
  });
}

semvqa_status semvqa_answer_matrix_neighbors(const semvqa_answer_matrix* m, size_t index, size_t k,
                                             size_t* indices, double* distances, size_t* found) {
  return guard([&] {
    need(m, "matrix");
    need(found, "found");
    const std::size_t rows = m->value.num_answers();
    const auto nn = rows < 2 || k == 0 ? std::vector<semvqa::Neighbor>{}
                                       : semvqa::nearest_neighbors(m->value, index, std::min(k, rows - 1));
    for (std::size_t i = 0; i < nn.size(); ++i) {
      if (indices) indices[i] = nn[i].index;
      if (distances) distances[i] = nn[i].distance;
    }
    *found = nn.size();
  });
}

void semvqa_answer_matrix_destroy(semvqa_answer_matrix* m) { delete m; }

// ---- datasets

semvqa_status semvqa_dataset_generate(const semvqa_config* config, semvqa_dataset** out) {
  return guard([&] {
    need(config, "config");
    need(out, "out");
    emit(out, semvqa::generate_benchmark(config->value.data).instances);
  });
}

semvqa_status semvqa_dataset_load(const char* path, semvqa_dataset** out) {
  return guard([&] {
    need(path, "path");
    need(out, "out");
    emit(out, semvqa::load_dataset(path));
  });
}

semvqa_status semvqa_dataset_save(const semvqa_dataset* data, const char* path) {
  return guard([&] {
    need(data, "data");
    need(path, "path");
    semvqa::save_dataset(path, data->value);
  });
}

semvqa_status semvqa_dataset_size(const semvqa_dataset* data, size_t* size) {
  return guard([&] {
    need(data, "data");
    need(size, "size");
    *size = data->value.size();
  });
}

semvqa_status semvqa_dataset_split(const semvqa_dataset* data, const semvqa_config* config,
                                   semvqa_dataset** train, semvqa_dataset** test,
                                   semvqa_vocab** train_answers, semvqa_vocab** test_answers) {
  return guard([&] {
    need(data, "data");
    need(config, "config");
    need(train, "train");
    need(test, "test");
    auto s = semvqa::split(data->value, config->value.split);
    auto tr = std::make_unique<semvqa_dataset>(semvqa_dataset{std::move(s.train)});
    auto te = std::make_unique<semvqa_dataset>(semvqa_dataset{std::move(s.test)});
    std::unique_ptr<semvqa_vocab> tra, tea;
    if (train_answers) tra.reset(new semvqa_vocab{semvqa::Vocabulary(s.train_answers)});
    if (test_answers) tea.reset(new semvqa_vocab{semvqa::Vocabulary(s.test_answers)});
    *train = tr.release();
    *test = te.release();
    if (train_answers) *train_answers = tra.release();
    if (test_answers) *test_answers = tea.release();
  });
}

void semvqa_dataset_destroy(semvqa_dataset* data) { delete data; }

// ---- models

semvqa_status semvqa_model_train(const semvqa_config* config, uint64_t seed,
                                 const semvqa_dataset* train, const semvqa_vocab* tokens,
                                 const semvqa_vocab* answers, const semvqa_embeddings* embeddings,
                                 semvqa_model** model, semvqa_history** history) {
  return guard([&] {
    need(config, "config");
    need(train, "train");
    need(tokens, "tokens");
    need(answers, "answers");
    need(embeddings, "embeddings");
    need(model, "model");
    semvqa::TrainConfig tc = config->value.train;
    tc.seed = seed;
    std::vector<semvqa::HistoryRecord> records;
    auto state = semvqa::train_model(tc, train->value, tokens->value, answers->value,
                                     embeddings->value, &records);
    auto m = std::make_unique<semvqa_model>(semvqa_model{std::move(state)});
    if (history) *history = new semvqa_history{std::move(records)};
    *model = m.release();
  });
}

semvqa_status semvqa_model_load(const char* path, semvqa_model** out) {
  return guard([&] {
    need(path, "path");
    need(out, "out");
    emit(out, semvqa::load_model(path));
  });
}

semvqa_status semvqa_model_save(const semvqa_model* model, const char* path) {
  return guard([&] {
    need(model, "model");
    need(path, "path");
    semvqa::save_model(path, model->value);
  });
}

semvqa_status semvqa_model_get(const semvqa_model* model, const char* key, char* buffer,
                               size_t capacity, size_t* required) {
  return guard([&] {
    need(model, "model");
    need(key, "key");
    std::string_view k = key;
    if (k.starts_with("train.")) k.remove_prefix(6);
    const auto keys = semvqa::train_config_keys(model->value.config);
    auto it = keys.find(std::string(k));
    semvqa::require(it != keys.end(), semvqa::ErrorCode::kInvalidArgument,
                    std::string("unknown training key '") + key + "'");
    copy_out(it->second, buffer, capacity, required);
  });
}

semvqa_status semvqa_model_answers(const semvqa_model* model, semvqa_vocab** out) {
  return guard([&] {
    need(model, "model");
    need(out, "out");
    emit(out, model->value.answers);
  });
}

semvqa_status semvqa_model_swap_answers(const semvqa_model* model, const semvqa_vocab* novel,
                                        const semvqa_embeddings* embeddings, semvqa_model** out) {
  return guard([&] {
    need(model, "model");
    need(novel, "novel");
    need(embeddings, "embeddings");
    need(out, "out");
    emit(out, semvqa::swap_answers(model->value, novel->value, embeddings->value));
  });
}

void semvqa_model_destroy(semvqa_model* model) { delete model; }

semvqa_status semvqa_history_size(const semvqa_history* history, size_t* size) {
  return guard([&] {
    need(history, "history");
    need(size, "size");
    *size = history->value.size();
  });
}

semvqa_status semvqa_history_at(const semvqa_history* history, size_t index,
                                semvqa_history_record* record) {
  return guard([&] {
    need(history, "history");
    need(record, "record");
    semvqa::require(index < history->value.size(), semvqa::ErrorCode::kOutOfRange,
                    "history index out of range");
    const auto& r = history->value[index];
    *record = {r.iteration, r.loss, r.classification, r.regression, r.accuracy};
  });
}

semvqa_status semvqa_history_save(const semvqa_history* history, const char* path) {
  return guard([&] {
    need(history, "history");
    need(path, "path");
    std::ofstream out(path, std::ios::trunc);
    if (!out) semvqa::fail(semvqa::ErrorCode::kIo, std::string("cannot open '") + path + "' for writing");
    semvqa::write_history_csv(out, history->value);
    if (!out) semvqa::fail(semvqa::ErrorCode::kIo, std::string("write failed for '") + path + "'");
  });
}

void semvqa_history_destroy(semvqa_history* history) { delete history; }

// ---- prediction

semvqa_status semvqa_evaluate(const semvqa_model* model, const semvqa_dataset* data, double lambda,
                              semvqa_predictions** out) {
  return guard([&] {
    need(model, "model");
    need(data, "data");
    need(out, "out");
    emit(out, semvqa::predict_entries(model->value, data->value, lambda));
  });
}

semvqa_status semvqa_evaluate_ensemble(const semvqa_model* const* models, size_t count,
                                       const semvqa_dataset* data, double lambda,
                                       semvqa_predictions** out) {
  return guard([&] {
    need(models, "models");
    need(data, "data");
    need(out, "out");
    std::vector<semvqa::ModelState> members;
    for (std::size_t i = 0; i < count; ++i) {
      need(models[i], "model");
      members.push_back(models[i]->value);
    }
    emit(out, semvqa::ensemble_entries(members, data->value, lambda));
  });
}

semvqa_status semvqa_predictions_load(const char* path, semvqa_predictions** out) {
  return guard([&] {
    need(path, "path");
    need(out, "out");
    emit(out, semvqa::load_predictions(path));
  });
}

semvqa_status semvqa_predictions_save(const semvqa_predictions* preds, const char* path) {
  return guard([&] {
    need(preds, "predictions");
    need(path, "path");
    semvqa::save_predictions(path, preds->value);
  });
}

semvqa_status semvqa_predictions_size(const semvqa_predictions* preds, size_t* size) {
  return guard([&] {
    need(preds, "predictions");
    need(size, "size");
    *size = preds->value.size();
  });
}

semvqa_status semvqa_predictions_answer(const semvqa_predictions* preds, size_t index,
                                        char* buffer, size_t capacity, size_t* required) {
  return guard([&] {
    need(preds, "predictions");
    semvqa::require(index < preds->value.size(), semvqa::ErrorCode::kOutOfRange,
                    "prediction index out of range");
    copy_out(preds->value[index].answer, buffer, capacity, required);
  });
}

void semvqa_predictions_destroy(semvqa_predictions* preds) { delete preds; }

// ---- reports

semvqa_status semvqa_report_compute(const semvqa_predictions* preds, const semvqa_dataset* data,
                                    const semvqa_dataset* reference, const semvqa_config* config,
                                    const semvqa_vocab* answers, const char* label, double lambda,
                                    semvqa_report** out) {
  return guard([&] {
    need(preds, "predictions");
    need(data, "data");
    need(config, "config");
    need(answers, "answers");
    need(out, "out");
    std::span<const semvqa::QAInstance> ref;
    if (reference) ref = reference->value;
    emit(out, semvqa::evaluate_report(preds->value, data->value, config->value.data.inventory,
                                      answers->value, ref, label ? label : "", lambda));
  });
}

semvqa_status semvqa_report_load(const char* path, semvqa_report** out) {
  return guard([&] {
    need(path, "path");
    need(out, "out");
    std::ifstream in(path);
    if (!in) semvqa::fail(semvqa::ErrorCode::kIo, std::string("cannot open '") + path + "' for reading");
    emit(out, semvqa::read_report_text(in));
  });
}

semvqa_status semvqa_report_save(const semvqa_report* report, const char* path,
                                 const char* json_path) {
  return guard([&] {
    need(report, "report");
    need(path, "path");
    {
      std::ofstream out(path, std::ios::trunc);
      if (!out) semvqa::fail(semvqa::ErrorCode::kIo, std::string("cannot open '") + path + "' for writing");
      semvqa::write_report_text(out, report->value);
      if (!out) semvqa::fail(semvqa::ErrorCode::kIo, std::string("write failed for '") + path + "'");
    }
    if (json_path) {
      std::ofstream out(json_path, std::ios::trunc);
      if (!out) {
        semvqa::fail(semvqa::ErrorCode::kIo, std::string("cannot open '") + json_path + "' for writing");
      }
      out << semvqa::report_json(report->value) << '\n';
      if (!out) semvqa::fail(semvqa::ErrorCode::kIo, std::string("write failed for '") + json_path + "'");
    }
  });
}

semvqa_status semvqa_report_value(const semvqa_report* report, const char* key, double* value) {
  return guard([&] {
    need(report, "report");
    need(key, "key");
    need(value, "value");
    const auto& r = report->value;
    const std::string k = key;
    auto lookup = [&](const std::map<std::string, double>& m, std::size_t prefix) {
      auto it = m.find(k.substr(prefix));
      semvqa::require(it != m.end(), semvqa::ErrorCode::kInvalidArgument,
                      "report has no value for '" + k + "'");
      return it->second;
    };
    if (k == "accuracy") *value = r.accuracy;
    else if (k == "validity") *value = r.validity;
    else if (k == "plausibility") *value = r.plausibility;
    else if (k == "distribution") *value = r.distribution;
    else if (k == "consistency") *value = r.consistency;
    else if (k == "lambda") *value = r.lambda;
    else if (k == "count") *value = static_cast<double>(r.count);
    else if (k.starts_with("accuracy.")) *value = lookup(r.per_type_accuracy, 9);
    else if (k.starts_with("recall.")) *value = lookup(r.answer_recall, 7);
    else semvqa::fail(semvqa::ErrorCode::kInvalidArgument, "unknown report key '" + k + "'");
  });
}

semvqa_status semvqa_report_text(const semvqa_report* report, char* buffer, size_t capacity,
                                 size_t* required) {
  return guard([&] {
    need(report, "report");
    std::ostringstream out;
    semvqa::write_report_text(out, report->value);
    copy_out(out.str(), buffer, capacity, required);
  });
}

semvqa_status semvqa_report_table(const semvqa_report* const* reports, size_t count, char* buffer,
                                  size_t capacity, size_t* required) {
  return guard([&] {
    need(reports, "reports");
    std::vector<semvqa::MetricReport> rs;
    for (std::size_t i = 0; i < count; ++i) {
      need(reports[i], "report");
      rs.push_back(reports[i]->value);
    }
    copy_out(semvqa::report_table(rs), buffer, capacity, required);
  });
}

void semvqa_report_destroy(semvqa_report* report) { delete report; }

// ---- gradient verification

semvqa_status semvqa_gradcheck_run(size_t instances, uint64_t seed,
                                   semvqa_gradcheck_summary* summary) {
  return guard([&] {
    need(summary, "summary");
    semvqa::require(instances > 0, semvqa::ErrorCode::kInvalidArgument, "instances must be positive");
    semvqa::GradCheckOptions options;
    options.instances = instances;
    options.seed = seed;
    const auto r = semvqa::run_gradient_suite(options);
    *summary = {r.loss_cases,     r.head_cases,     r.model_cases,     r.redrawn,
                r.failures.size(), r.max_loss_error, r.max_head_error, r.max_model_error,
                r.passed() ? 1 : 0};
    if (!r.passed()) {
      const auto& f = r.failures.front();
      g_last_error = f.scope + " gradient mismatch (metric " + std::string(semvqa::to_string(f.metric)) +
                     ", lambda " + std::to_string(f.lambda) + ", instance " +
                     std::to_string(f.instance) + ", " + f.worst + ")";
    }
  });
}

}  // extern "C"
