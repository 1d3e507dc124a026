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

#ifndef SEMVQA_SEMVQA_H_
#define SEMVQA_SEMVQA_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define SEMVQA_API __declspec(dllexport)
#else
#define SEMVQA_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

/* Every function returns a status. On failure a description is available
   from semvqa_last_error() on the same thread until the next call. Output
   handles are only written on success. Strings are copied out through
   (buffer, capacity, required) triples: *required receives the length
   without the terminator, and the copy is truncated when capacity is too
   small. */
typedef enum semvqa_status {
  SEMVQA_OK = 0,
  SEMVQA_ERR_INVALID_ARGUMENT = 1,
  SEMVQA_ERR_SHAPE_MISMATCH = 2,
  SEMVQA_ERR_PARSE = 3,
  SEMVQA_ERR_IO = 4,
  SEMVQA_ERR_NUMERIC = 5,
  SEMVQA_ERR_INFEASIBLE = 6,
  SEMVQA_ERR_OUT_OF_RANGE = 7,
  SEMVQA_ERR_VOCAB_MISMATCH = 8,
  SEMVQA_ERR_INTERNAL = 99
} semvqa_status;

SEMVQA_API const char* semvqa_last_error(void);
SEMVQA_API const char* semvqa_status_name(semvqa_status status);
SEMVQA_API const char* semvqa_version(void);

typedef struct semvqa_config semvqa_config;
typedef struct semvqa_embeddings semvqa_embeddings;
typedef struct semvqa_vocab semvqa_vocab;
typedef struct semvqa_answer_matrix semvqa_answer_matrix;
typedef struct semvqa_dataset semvqa_dataset;
typedef struct semvqa_model semvqa_model;
typedef struct semvqa_history semvqa_history;
typedef struct semvqa_predictions semvqa_predictions;
typedef struct semvqa_report semvqa_report;

/* ---- experiment configuration (prefixed key = value) ---- */

SEMVQA_API semvqa_status semvqa_config_create(semvqa_config** out);
SEMVQA_API void semvqa_config_destroy(semvqa_config* config);
SEMVQA_API semvqa_status semvqa_config_clone(const semvqa_config* config, semvqa_config** out);
/* Applies every key of a config file on top of the current values. */
SEMVQA_API semvqa_status semvqa_config_load(semvqa_config* config, const char* path);
SEMVQA_API semvqa_status semvqa_config_save(const semvqa_config* config, const char* path);
SEMVQA_API semvqa_status semvqa_config_set(semvqa_config* config, const char* key, const char* value);
SEMVQA_API semvqa_status semvqa_config_get(const semvqa_config* config, const char* key,
                                           char* buffer, size_t capacity, size_t* required);
SEMVQA_API semvqa_status semvqa_config_validate(const semvqa_config* config);
/* Number of seeds in train.seeds (1 when unset) and the i-th one. */
SEMVQA_API semvqa_status semvqa_config_seed_count(const semvqa_config* config, size_t* count);
SEMVQA_API semvqa_status semvqa_config_seed_at(const semvqa_config* config, size_t index,
                                               uint64_t* seed);

/* ---- word embeddings ---- */

SEMVQA_API semvqa_status semvqa_embeddings_load(const char* path, semvqa_embeddings** out);
/* Structured synthetic vectors for the configured inventory. */
SEMVQA_API semvqa_status semvqa_embeddings_synthetic(const semvqa_config* config,
                                                     semvqa_embeddings** out);
SEMVQA_API semvqa_status semvqa_embeddings_save(const semvqa_embeddings* table, const char* path);
SEMVQA_API semvqa_status semvqa_embeddings_shape(const semvqa_embeddings* table, size_t* words,
                                                 size_t* dimension);
SEMVQA_API void semvqa_embeddings_destroy(semvqa_embeddings* table);

/* ---- vocabularies ---- */

SEMVQA_API semvqa_status semvqa_vocab_load(const char* path, semvqa_vocab** out);
SEMVQA_API semvqa_status semvqa_vocab_save(const semvqa_vocab* vocab, const char* path);
/* The canonical answer or token vocabulary of the configured inventory. */
SEMVQA_API semvqa_status semvqa_vocab_answers(const semvqa_config* config, semvqa_vocab** out);
SEMVQA_API semvqa_status semvqa_vocab_tokens(const semvqa_config* config, semvqa_vocab** out);
SEMVQA_API semvqa_status semvqa_vocab_size(const semvqa_vocab* vocab, size_t* size);
SEMVQA_API semvqa_status semvqa_vocab_at(const semvqa_vocab* vocab, size_t index, char* buffer,
                                         size_t capacity, size_t* required);
SEMVQA_API void semvqa_vocab_destroy(semvqa_vocab* vocab);

/* ---- answer matrices ---- */

/* scheme: "glove", "random" or "shuffled-glove". */
SEMVQA_API semvqa_status semvqa_answer_matrix_build(const semvqa_vocab* answers,
                                                    const semvqa_embeddings* table,
                                                    const char* scheme, uint64_t seed,
                                                    semvqa_answer_matrix** out);
SEMVQA_API semvqa_status semvqa_answer_matrix_load(const char* path, semvqa_answer_matrix** out);
SEMVQA_API semvqa_status semvqa_answer_matrix_save(const semvqa_answer_matrix* m, const char* path);
SEMVQA_API semvqa_status semvqa_answer_matrix_shape(const semvqa_answer_matrix* m, size_t* rows,
                                                    size_t* cols);
/* Row-major copy into values[rows * cols]. */
SEMVQA_API semvqa_status semvqa_answer_matrix_values(const semvqa_answer_matrix* m, double* values,
                                                     size_t count);
/* Up to k nearest rows to row `index`; *found receives the count written. */
SEMVQA_API semvqa_status semvqa_answer_matrix_neighbors(const semvqa_answer_matrix* m, size_t index,
                                                        size_t k, size_t* indices,
                                                        double* distances, size_t* found);
SEMVQA_API void semvqa_answer_matrix_destroy(semvqa_answer_matrix* m);

/* ---- datasets ---- */

/* The full synthetic benchmark of the data.* keys. */
SEMVQA_API semvqa_status semvqa_dataset_generate(const semvqa_config* config, semvqa_dataset** out);
SEMVQA_API semvqa_status semvqa_dataset_load(const char* path, semvqa_dataset** out);
SEMVQA_API semvqa_status semvqa_dataset_save(const semvqa_dataset* data, const char* path);
SEMVQA_API semvqa_status semvqa_dataset_size(const semvqa_dataset* data, size_t* size);
/* Split by the split.* keys. train_answers and test_answers receive the
   disjoint answer sets of an oov split and empty vocabularies otherwise;
   either may be NULL. */
SEMVQA_API semvqa_status semvqa_dataset_split(const semvqa_dataset* data,
                                              const semvqa_config* config, semvqa_dataset** train,
                                              semvqa_dataset** test, semvqa_vocab** train_answers,
                                              semvqa_vocab** test_answers);
SEMVQA_API void semvqa_dataset_destroy(semvqa_dataset* data);

/* ---- models ---- */

/* Trains with the train.* keys, using `seed` instead of train.seed. */
SEMVQA_API semvqa_status semvqa_model_train(const semvqa_config* config, uint64_t seed,
                                            const semvqa_dataset* train, const semvqa_vocab* tokens,
                                            const semvqa_vocab* answers,
                                            const semvqa_embeddings* embeddings,
                                            semvqa_model** model, semvqa_history** history);
SEMVQA_API semvqa_status semvqa_model_load(const char* path, semvqa_model** out);
SEMVQA_API semvqa_status semvqa_model_save(const semvqa_model* model, const char* path);
/* A train.* key of the configuration the model was trained with. */
SEMVQA_API semvqa_status semvqa_model_get(const semvqa_model* model, const char* key, char* buffer,
                                          size_t capacity, size_t* required);
/* Copy of the model's answer vocabulary (the rows of M). */
SEMVQA_API semvqa_status semvqa_model_answers(const semvqa_model* model, semvqa_vocab** out);
/* New model whose M holds frozen bag-of-words rows for `novel`. */
SEMVQA_API semvqa_status semvqa_model_swap_answers(const semvqa_model* model,
                                                   const semvqa_vocab* novel,
                                                   const semvqa_embeddings* embeddings,
                                                   semvqa_model** out);
SEMVQA_API void semvqa_model_destroy(semvqa_model* model);

typedef struct semvqa_history_record {
  size_t iteration;
  double loss;
  double classification;
  double regression;
  double accuracy;
} semvqa_history_record;

SEMVQA_API semvqa_status semvqa_history_size(const semvqa_history* history, size_t* size);
SEMVQA_API semvqa_status semvqa_history_at(const semvqa_history* history, size_t index,
                                           semvqa_history_record* record);
SEMVQA_API semvqa_status semvqa_history_save(const semvqa_history* history, const char* path);
SEMVQA_API void semvqa_history_destroy(semvqa_history* history);

/* ---- prediction ---- */

SEMVQA_API semvqa_status semvqa_evaluate(const semvqa_model* model, const semvqa_dataset* data,
                                         double lambda, semvqa_predictions** out);
SEMVQA_API semvqa_status semvqa_evaluate_ensemble(const semvqa_model* const* models, size_t count,
                                                  const semvqa_dataset* data, double lambda,
                                                  semvqa_predictions** out);
SEMVQA_API semvqa_status semvqa_predictions_load(const char* path, semvqa_predictions** out);
SEMVQA_API semvqa_status semvqa_predictions_save(const semvqa_predictions* preds, const char* path);
SEMVQA_API semvqa_status semvqa_predictions_size(const semvqa_predictions* preds, size_t* size);
SEMVQA_API semvqa_status semvqa_predictions_answer(const semvqa_predictions* preds, size_t index,
                                                   char* buffer, size_t capacity, size_t* required);
SEMVQA_API void semvqa_predictions_destroy(semvqa_predictions* preds);

/* ---- metric reports ---- */

/* Scores predictions against `data`. The scope of valid answers comes from
   the configured inventory and `answers`; plausibility co-occurrences from
   `data` plus `reference` (may be NULL). */
SEMVQA_API semvqa_status semvqa_report_compute(const semvqa_predictions* preds,
                                               const semvqa_dataset* data,
                                               const semvqa_dataset* reference,
                                               const semvqa_config* config,
                                               const semvqa_vocab* answers, const char* label,
                                               double lambda, semvqa_report** out);
SEMVQA_API semvqa_status semvqa_report_load(const char* path, semvqa_report** out);
/* Writes the key=value form to `path` and, when json_path is not NULL, the
   JSON form there. */
SEMVQA_API semvqa_status semvqa_report_save(const semvqa_report* report, const char* path,
                                            const char* json_path);
/* Headline values: "accuracy", "validity", "plausibility", "distribution",
   "consistency", "lambda", "count", "accuracy.<qtype>", "recall.<answer>". */
SEMVQA_API semvqa_status semvqa_report_value(const semvqa_report* report, const char* key,
                                             double* value);
SEMVQA_API semvqa_status semvqa_report_text(const semvqa_report* report, char* buffer,
                                            size_t capacity, size_t* required);
/* Aligned comparison table of several reports. */
SEMVQA_API semvqa_status semvqa_report_table(const semvqa_report* const* reports, size_t count,
                                             char* buffer, size_t capacity, size_t* required);
SEMVQA_API void semvqa_report_destroy(semvqa_report* report);

/* ---- gradient verification ---- */

typedef struct semvqa_gradcheck_summary {
  size_t loss_cases;
  size_t head_cases;
  size_t model_cases;
  size_t redrawn;
  size_t failures;
  double max_loss_error;
  double max_head_error;
  double max_model_error;
  int passed;
} semvqa_gradcheck_summary;

/* Finite-difference suite over `instances` random instances per
   (metric, lambda) pair. */
SEMVQA_API semvqa_status semvqa_gradcheck_run(size_t instances, uint64_t seed,
                                              semvqa_gradcheck_summary* summary);

#ifdef __cplusplus
}
#endif

#endif  /* SEMVQA_SEMVQA_H_ */
