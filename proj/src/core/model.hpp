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
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "core/common.hpp"
#include "core/embedding_store.hpp"
#include "core/head.hpp"

namespace semvqa {

// Joint-embedding VQA network at desk scale:
//   q = relu_wn(Q mean(token_embeddings[tokens]) + q_b)     (D)
//   v = relu_wn(I image + i_b)                                (D)
//   x = q * v  (element-wise)
// followed by the two-branch head.
struct ModelParameters {
  Matrix token_embeddings;        // T x E
  NonlinearLayer question_layer;  // E -> D
  NonlinearLayer image_layer;     // F -> D
  HeadParameters head;

  Eigen::Index num_tokens() const { return token_embeddings.rows(); }
  Eigen::Index embed_dim() const { return token_embeddings.cols(); }
  Eigen::Index image_dim() const { return image_layer.in_dim(); }
  Eigen::Index fused_dim() const { return question_layer.out_dim(); }

  void validate() const;
};

template <class Model, class F>
void for_each_tensor(Model& model, F&& f)
  requires requires { model.token_embeddings; }
{
  f("token_embeddings", model.token_embeddings);
  f("Q_W", model.question_layer.weight);
  f("Q_b", model.question_layer.bias);
  if (model.question_layer.weight_normalized()) f("Q_g", model.question_layer.gain);
  f("I_W", model.image_layer.weight);
  f("I_b", model.image_layer.bias);
  if (model.image_layer.weight_normalized()) f("I_g", model.image_layer.gain);
  for_each_tensor(model.head, f);
}

ModelParameters zeros_like(const ModelParameters& params);

struct ModelShape {
  std::size_t num_tokens = 0;
  std::size_t embed_dim = 32;
  std::size_t image_dim = 0;
  std::size_t fused_dim = 128;
  std::size_t hidden_dim = 32;
  std::size_t num_answers = 0;  // classifier width
  bool weight_norm = true;
  bool normalize_projection = false;
};

// Weights uniform in +-sqrt(6 / (fan_in + fan_out)), biases zero, gains set
// to the initial row norms. Every tensor except M is drawn from the "init"
// stream of `seed`, so models that differ only in `answers` share all other
// initial values bit-for-bit.
ModelParameters initialize_model(const ModelShape& shape, AnswerMatrix answers,
                                 std::uint64_t seed);

// A dataset record encoded against the token and answer vocabularies.
struct Instance {
  std::string question_id;
  std::vector<std::size_t> tokens;
  Vector image;
  std::vector<std::size_t> answers;
};

Vector ground_truth_vector(const Instance& instance, Eigen::Index num_answers);

Vector encode_question(std::span<const std::size_t> tokens, const ModelParameters& params);
Vector encode_image(const Vector& features, const ModelParameters& params);
Vector fuse(const Vector& question, const Vector& image);

struct BatchBackward {
  ModelParameters grad;
  LossBreakdown loss;      // means over the batch
  std::size_t correct = 0;  // instances whose prediction hits a ground-truth answer
};

// Gradient of the batch-mean combined loss with respect to every tensor.
BatchBackward batch_backward(std::span<const Instance> batch, const ModelParameters& params,
                             const Objective& objective);

double batch_loss(std::span<const Instance> batch, const ModelParameters& params,
                  const Objective& objective);

enum class OptimizerKind { kSgd, kAdamax };

std::string_view to_string(OptimizerKind kind);
OptimizerKind parse_optimizer(std::string_view name);

struct TrainConfig {
  double lambda = 0.5;
  double margin = 1.0;
  Metric metric = Metric::kEuclidean;
  std::size_t iterations = 3000;
  std::size_t batch_size = 64;
  double base_lr = 0.02;
  std::size_t warmup_iters = 200;
  double warmup_start_factor = 0.1;
  std::vector<std::size_t> lr_decay_steps = {2000, 2600};
  double decay_factor = 0.1;
  OptimizerKind optimizer = OptimizerKind::kAdamax;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::uint64_t seed = 1;
  bool normalize_projection = false;
  InitScheme m_scheme = InitScheme::kGlove;
  bool m_trainable = true;
  bool weight_norm = true;
  std::size_t embed_dim = 32;
  std::size_t fused_dim = 128;
  std::size_t hidden_dim = 32;
  std::size_t log_every = 100;

  Objective objective() const { return {lambda, margin, metric}; }
  void validate() const;
  // Linear warm-up from warmup_start_factor * base_lr to base_lr over
  // warmup_iters, then multiplied by decay_factor at each decay step.
  double learning_rate(std::size_t iteration) const;
};

struct HistoryRecord {
  std::size_t iteration = 0;
  double loss = 0.0;
  double classification = 0.0;
  double regression = 0.0;
  double accuracy = 0.0;
};

void write_history_csv(std::ostream& out, std::span<const HistoryRecord> history);

struct TrainResult {
  ModelParameters params;
  std::vector<HistoryRecord> history;
};

// Mini-batch optimization of the batch-mean combined loss. Batches are drawn
// by per-epoch shuffles from the "batches" stream of config.seed; identical
// inputs give bit-identical outputs. Throws kNumeric on a non-finite loss.
TrainResult train(std::span<const Instance> data, const TrainConfig& config,
                  ModelParameters initial);

struct PredictionRecord {
  std::string question_id;
  std::size_t predicted = 0;
  Vector scores;
  Vector distances;
  double lambda = 0.0;
};

std::vector<PredictionRecord> evaluate(const ModelParameters& params,
                                       std::span<const Instance> data, double lambda,
                                       Metric metric);

// argmax of the classifier scores alone; never touches the projection branch.
std::vector<std::size_t> classify(const ModelParameters& params, std::span<const Instance> data);

// Fraction of records whose prediction is one of the instance's answers.
double accuracy_of(std::span<const PredictionRecord> records, std::span<const Instance> data);

}  // namespace semvqa
