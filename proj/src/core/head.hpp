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
#include <string_view>

#include "core/common.hpp"
#include "core/embedding_store.hpp"

namespace semvqa {

// relu(W x + b). When `gain` is non-empty the layer is weight-normalized:
// row i of the effective weight is gain[i] * weight.row(i) / |weight.row(i)|.
struct NonlinearLayer {
  Matrix weight;
  Vector bias;
  Vector gain;

  bool weight_normalized() const { return gain.size() > 0; }
  Eigen::Index in_dim() const { return weight.cols(); }
  Eigen::Index out_dim() const { return weight.rows(); }
  Matrix effective_weight() const;
};

struct LinearLayer {
  Matrix weight;
  Vector bias;
};

// The two output branches over the fused representation x (dimension D):
//   classifier  y = W2 relu_wn(W1 x + b1) + b2              (length A)
//   projection  p = V2 relu_wn(V1 x + c1) + c2, optionally   (length P)
//               rescaled to unit length
// and the answer matrix M whose rows live in the projection space.
struct HeadParameters {
  NonlinearLayer classifier_hidden;  // W1, b1
  LinearLayer classifier_out;        // W2, b2
  NonlinearLayer projection_hidden;  // V1, c1
  LinearLayer projection_out;        // V2, c2
  AnswerMatrix answers;              // M
  bool normalize_projection = false;

  Eigen::Index fused_dim() const { return classifier_hidden.in_dim(); }
  Eigen::Index hidden_dim() const { return classifier_hidden.out_dim(); }
  Eigen::Index num_classes() const { return classifier_out.weight.rows(); }
  Eigen::Index num_answers() const { return answers.rows.rows(); }
  Eigen::Index answer_dim() const { return projection_out.weight.rows(); }

  // Throws kShapeMismatch if the tensors do not agree on D, H, A and P.
  void validate() const;
};

// Visits every tensor in persistence order with its canonical name. Gains
// are only visited for weight-normalized layers.
template <class Head, class F>
void for_each_tensor(Head& head, F&& f)
  requires requires { head.classifier_out; }
{
  f("W1", head.classifier_hidden.weight);
  f("b1", head.classifier_hidden.bias);
  if (head.classifier_hidden.weight_normalized()) f("W1_g", head.classifier_hidden.gain);
  f("W2", head.classifier_out.weight);
  f("b2", head.classifier_out.bias);
  f("V1", head.projection_hidden.weight);
  f("c1", head.projection_hidden.bias);
  if (head.projection_hidden.weight_normalized()) f("V1_g", head.projection_hidden.gain);
  f("V2", head.projection_out.weight);
  f("c2", head.projection_out.bias);
  f("M", head.answers.rows);
}

// A tensor-for-tensor zero copy of `params`; used as gradient container.
HeadParameters zeros_like(const HeadParameters& params);

enum class Metric : std::uint32_t { kEuclidean = 0, kDot = 1, kCosine = 2 };

std::string_view to_string(Metric metric);
Metric parse_metric(std::string_view name);

struct Objective {
  double lambda = 0.5;
  double margin = 1.0;
  Metric metric = Metric::kEuclidean;

  void validate() const;
};

struct LossTerm {
  double value = 0.0;
  Vector grad;
};

struct LossBreakdown {
  double classification = 0.0;  // L_c
  double regression = 0.0;      // L_p
  double total = 0.0;           // lambda L_c + (1 - lambda) L_p
  double lambda = 0.0;
  double margin = 1.0;
};

Vector forward_classifier(const Vector& x, const HeadParameters& params);
Vector forward_projection(const Vector& x, const HeadParameters& params);

// Per-answer binary cross-entropy on logits, summed over answers. The
// gradient with respect to y is sigmoid(y) - gt.
LossTerm classification_loss(const Vector& scores, const Vector& ground_truth);

// Euclidean: |p - M_i|. Dot and cosine are negated similarities so that
// smaller always means closer.
Vector distances(const Vector& projection, const Matrix& answers, Metric metric);

// Margin hinge on distances: d_i for correct answers, max(0, margin - d_i)
// otherwise. The subgradient at d_i == margin is 0.
LossTerm regression_loss(const Vector& dist, const Vector& ground_truth, double margin);

double combined_loss(double classification, double regression, double lambda);

struct HeadBackward {
  HeadParameters grad;  // same shapes as the parameters
  Vector input;         // dL/dx
  LossBreakdown loss;
};

// Exact gradients of the combined loss for one instance. M only receives
// gradient when params.answers.trainable is set.
HeadBackward backward(const Vector& x, const Vector& ground_truth,
                      const HeadParameters& params, const Objective& objective);

Vector softmax(const Vector& v);

// argmax_i lambda softmax(y)_i + (1 - lambda) softmax(-d)_i, lowest index on
// ties. y is ignored when lambda == 0 and d when lambda == 1, so after an
// answer-matrix swap the two may have different lengths at lambda == 0.
std::size_t predict(const Vector& scores, const Vector& dist, double lambda);

struct ScoreDistance {
  Vector scores;
  Vector distances;
};

// Averages softmax(y) and softmax(-d) over members before combining.
std::size_t ensemble_predict(std::span<const ScoreDistance> members, double lambda);

// Replaces M. Afterwards only lambda == 0 predictions are meaningful when
// the new row count differs from the classifier's; see
// check_prediction_lambda.
HeadParameters swap_answer_matrix(HeadParameters params, AnswerMatrix replacement);

// Rejects lambda > 0 when M no longer matches the classifier's answer set.
void check_prediction_lambda(const HeadParameters& params, double lambda);

namespace detail {

// Effective (weight-norm resolved) view of the head used by the batched
// forward/backward passes. Gradients are accumulated with respect to the
// effective weights and mapped back once per batch.
struct ResolvedHead {
  Matrix w1;
  Vector b1;
  Matrix w2;
  Vector b2;
  Matrix v1;
  Vector c1;
  Matrix v2;
  Vector c2;
  const AnswerMatrix* answers = nullptr;
  bool normalize_projection = false;
};

ResolvedHead resolve(const HeadParameters& params);

struct HeadActivations {
  Vector cls_pre, cls_hidden, scores;
  Vector proj_pre, proj_hidden, proj_raw, projection, dist;
};

HeadActivations forward(const Vector& x, const ResolvedHead& head, Metric metric);

struct EffectiveGrad {
  Matrix w1, w2, v1, v2, m;
  Vector b1, b2, c1, c2;

  explicit EffectiveGrad(const ResolvedHead& head);
};

// Adds scale * dL/d(effective tensors) into `acc`; returns scale * dL/dx.
Vector accumulate_backward(const Vector& x, const Vector& ground_truth,
                           const ResolvedHead& head, const HeadActivations& act,
                           const Objective& objective, double scale, EffectiveGrad& acc,
                           LossBreakdown* loss);

// Maps effective-weight gradients back onto the stored parameters.
void finalize(const HeadParameters& params, const EffectiveGrad& acc, HeadParameters& grad);

Matrix resolve_weight(const NonlinearLayer& layer);
// d(effective) -> d(weight), d(gain), accumulated into `grad`.
void weight_norm_backward(const NonlinearLayer& layer, const Matrix& d_effective,
                          NonlinearLayer& grad);

}  // namespace detail
}  // namespace semvqa
