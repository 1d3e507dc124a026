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

#include "core/head.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace semvqa {

Matrix NonlinearLayer::effective_weight() const { return detail::resolve_weight(*this); }

void HeadParameters::validate() const {
  const auto d = classifier_hidden.in_dim();
  const auto h = classifier_hidden.out_dim();
  require_shape(d > 0 && h > 0, "head: empty classifier hidden layer");
  require_shape(classifier_hidden.bias.size() == h, "head: b1 length != H");
  require_shape(!classifier_hidden.weight_normalized() || classifier_hidden.gain.size() == h,
                "head: W1 gain length != H");
  require_shape(classifier_out.weight.cols() == h, "head: W2 columns != H");
  require_shape(classifier_out.bias.size() == classifier_out.weight.rows(), "head: b2 length != A");
  require_shape(projection_hidden.in_dim() == d, "head: V1 columns != D");
  require_shape(projection_hidden.out_dim() == h, "head: V1 rows != H");
  require_shape(projection_hidden.bias.size() == h, "head: c1 length != H");
  require_shape(!projection_hidden.weight_normalized() || projection_hidden.gain.size() == h,
                "head: V1 gain length != H");
  require_shape(projection_out.weight.cols() == h, "head: V2 columns != H");
  require_shape(projection_out.bias.size() == projection_out.weight.rows(), "head: c2 length != P");
  require_shape(answers.rows.cols() == projection_out.weight.rows(), "head: M columns != P");
  require_shape(answers.rows.rows() > 0, "head: empty answer matrix");
}

HeadParameters zeros_like(const HeadParameters& params) {
  HeadParameters z = params;
  for_each_tensor(z, [](std::string_view, auto& t) { t.setZero(); });
  return z;
}

std::string_view to_string(Metric metric) {
  switch (metric) {
    case Metric::kEuclidean: return "euclidean";
    case Metric::kDot: return "dot";
    case Metric::kCosine: return "cosine";
  }
  return "unknown";
}

Metric parse_metric(std::string_view name) {
  if (name == "euclidean") return Metric::kEuclidean;
  if (name == "dot") return Metric::kDot;
  if (name == "cosine") return Metric::kCosine;
  fail(ErrorCode::kInvalidArgument, "unknown metric '" + std::string(name) + "'");
}

void Objective::validate() const {
  require(lambda >= 0.0 && lambda <= 1.0, ErrorCode::kInvalidArgument, "lambda must lie in [0, 1]");
  require(margin > 0.0 && std::isfinite(margin), ErrorCode::kInvalidArgument,
          "margin must be positive");
}

namespace {

double log_sigmoid(double z) {
  // log sigma(z) = -log(1 + e^{-z}), evaluated without overflow.
  return z >= 0.0 ? -std::log1p(std::exp(-z)) : z - std::log1p(std::exp(z));
}

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

Vector relu(const Vector& v) { return v.cwiseMax(0.0); }

Vector relu_mask(const Vector& pre, const Vector& upstream) {
  Vector out(pre.size());
  for (Eigen::Index i = 0; i < pre.size(); ++i) out[i] = pre[i] > 0.0 ? upstream[i] : 0.0;
  return out;
}

void check_ground_truth(const Vector& gt) {
  for (Eigen::Index i = 0; i < gt.size(); ++i) {
    require(gt[i] == 0.0 || gt[i] == 1.0, ErrorCode::kInvalidArgument,
            "ground truth entries must be 0 or 1");
  }
}

}  // namespace

LossTerm classification_loss(const Vector& y, const Vector& gt) {
  require_shape(y.size() == gt.size(), "classification_loss: length mismatch");
  check_ground_truth(gt);
  LossTerm out;
  out.grad.resize(y.size());
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    // -[a log s(y) + (1 - a) log s(-y)]
    out.value -= gt[i] * log_sigmoid(y[i]) + (1.0 - gt[i]) * log_sigmoid(-y[i]);
    out.grad[i] = sigmoid(y[i]) - gt[i];
  }
  return out;
}

Vector distances(const Vector& p, const Matrix& m, Metric metric) {
  require_shape(p.size() == m.cols(), "distances: projection/answer dimension mismatch");
  Vector d(m.rows());
  switch (metric) {
    case Metric::kEuclidean:
      for (Eigen::Index i = 0; i < m.rows(); ++i) d[i] = (p - m.row(i).transpose()).norm();
      break;
    case Metric::kDot:
      d.noalias() = -(m * p);
      break;
    case Metric::kCosine: {
      const double pn = p.norm();
      for (Eigen::Index i = 0; i < m.rows(); ++i) {
        const double mn = m.row(i).norm();
        d[i] = (pn == 0.0 || mn == 0.0) ? 0.0 : -m.row(i).dot(p) / (pn * mn);
      }
      break;
    }
  }
  return d;
}

LossTerm regression_loss(const Vector& d, const Vector& gt, double margin) {
  require_shape(d.size() == gt.size(), "regression_loss: length mismatch");
  require(margin > 0.0, ErrorCode::kInvalidArgument, "margin must be positive");
  check_ground_truth(gt);
  LossTerm out;
  out.grad = Vector::Zero(d.size());
  for (Eigen::Index i = 0; i < d.size(); ++i) {
    if (gt[i] == 1.0) {
      out.value += d[i];
      out.grad[i] = 1.0;
    } else if (d[i] < margin) {
      out.value += margin - d[i];
      out.grad[i] = -1.0;
    }
  }
  return out;
}

double combined_loss(double classification, double regression, double lambda) {
  require(lambda >= 0.0 && lambda <= 1.0, ErrorCode::kInvalidArgument, "lambda must lie in [0, 1]");
  if (lambda == 1.0) return classification;
  if (lambda == 0.0) return regression;
  return lambda * classification + (1.0 - lambda) * regression;
}

Vector forward_classifier(const Vector& x, const HeadParameters& params) {
  params.validate();
  require_shape(x.size() == params.fused_dim(), "forward_classifier: input dimension != D");
  const Matrix w1 = params.classifier_hidden.effective_weight();
  const Vector h = relu(w1 * x + params.classifier_hidden.bias);
  return params.classifier_out.weight * h + params.classifier_out.bias;
}

Vector forward_projection(const Vector& x, const HeadParameters& params) {
  params.validate();
  require_shape(x.size() == params.fused_dim(), "forward_projection: input dimension != D");
  const Matrix v1 = params.projection_hidden.effective_weight();
  const Vector h = relu(v1 * x + params.projection_hidden.bias);
  Vector p = params.projection_out.weight * h + params.projection_out.bias;
  if (params.normalize_projection) {
    const double n = p.norm();
    if (n > 0.0) p /= n;
  }
  return p;
}

HeadBackward backward(const Vector& x, const Vector& gt, const HeadParameters& params,
                      const Objective& objective) {
  params.validate();
  objective.validate();
  require_shape(x.size() == params.fused_dim(), "backward: input dimension != D");
  require_shape(gt.size() == params.num_classes() && gt.size() == params.num_answers(),
                "backward: ground truth length != A");
  const auto head = detail::resolve(params);
  const auto act = detail::forward(x, head, objective.metric);
  detail::EffectiveGrad acc(head);
  HeadBackward out;
  out.input = detail::accumulate_backward(x, gt, head, act, objective, 1.0, acc, &out.loss);
  out.grad = zeros_like(params);
  detail::finalize(params, acc, out.grad);
  return out;
}

Vector softmax(const Vector& v) {
  require(v.size() > 0, ErrorCode::kInvalidArgument, "softmax of an empty vector");
  const double mx = v.maxCoeff();
  Vector e = (v.array() - mx).exp().matrix();
  return e / e.sum();
}

namespace {

std::size_t argmax_lowest(const Vector& v) {
  std::size_t best = 0;
  for (Eigen::Index i = 1; i < v.size(); ++i) {
    if (v[i] > v[static_cast<Eigen::Index>(best)]) best = static_cast<std::size_t>(i);
  }
  return best;
}

void check_lambda(double lambda) {
  require(lambda >= 0.0 && lambda <= 1.0, ErrorCode::kInvalidArgument, "lambda must lie in [0, 1]");
}

std::size_t combine(const Vector* score_probs, const Vector* dist_probs, double lambda) {
  if (lambda == 1.0) return argmax_lowest(*score_probs);
  if (lambda == 0.0) return argmax_lowest(*dist_probs);
  return argmax_lowest(lambda * *score_probs + (1.0 - lambda) * *dist_probs);
}

}  // namespace

std::size_t predict(const Vector& y, const Vector& d, double lambda) {
  check_lambda(lambda);
  const bool use_scores = lambda > 0.0;
  const bool use_dist = lambda < 1.0;
  if (use_scores && use_dist) {
    require_shape(y.size() == d.size(), "predict: score and distance lengths differ");
  }
  Vector sy, sd;
  if (use_scores) sy = softmax(y);
  if (use_dist) sd = softmax(-d);
  return combine(&sy, &sd, lambda);
}

std::size_t ensemble_predict(std::span<const ScoreDistance> members, double lambda) {
  check_lambda(lambda);
  require(!members.empty(), ErrorCode::kInvalidArgument, "ensemble needs at least one member");
  const bool use_scores = lambda > 0.0;
  const bool use_dist = lambda < 1.0;
  const auto ny = members.front().scores.size();
  const auto nd = members.front().distances.size();
  if (use_scores && use_dist) require_shape(ny == nd, "ensemble: score and distance lengths differ");
  Vector sy = Vector::Zero(use_scores ? ny : 0);
  Vector sd = Vector::Zero(use_dist ? nd : 0);
  for (const auto& m : members) {
    if (use_scores) {
      require_shape(m.scores.size() == ny, "ensemble: member score lengths differ");
      sy += softmax(m.scores);
    }
    if (use_dist) {
      require_shape(m.distances.size() == nd, "ensemble: member distance lengths differ");
      sd += softmax(-m.distances);
    }
  }
  const double k = static_cast<double>(members.size());
  if (use_scores) sy /= k;
  if (use_dist) sd /= k;
  return combine(&sy, &sd, lambda);
}

HeadParameters swap_answer_matrix(HeadParameters params, AnswerMatrix replacement) {
  require_shape(replacement.rows.cols() == params.answer_dim(),
                "swap_answer_matrix: new rows have dimension " +
                    std::to_string(replacement.rows.cols()) + ", projection has " +
                    std::to_string(params.answer_dim()));
  require(replacement.rows.rows() > 0, ErrorCode::kInvalidArgument, "swap_answer_matrix: empty matrix");
  params.answers = std::move(replacement);
  return params;
}

void check_prediction_lambda(const HeadParameters& params, double lambda) {
  check_lambda(lambda);
  if (lambda > 0.0 && params.num_answers() != params.num_classes()) {
    fail(ErrorCode::kInvalidArgument,
         "lambda > 0 requires the classifier and answer matrix to cover the same answers "
         "(classifier " + std::to_string(params.num_classes()) + ", answer matrix " +
             std::to_string(params.num_answers()) + "); use lambda = 0 after a swap");
  }
}

namespace detail {

Matrix resolve_weight(const NonlinearLayer& layer) {
  if (!layer.weight_normalized()) return layer.weight;
  Matrix w = layer.weight;
  for (Eigen::Index i = 0; i < w.rows(); ++i) {
    const double n = layer.weight.row(i).norm();
    if (n > 0.0) {
      w.row(i) *= layer.gain[i] / n;
    } else {
      w.row(i).setZero();
    }
  }
  return w;
}

void weight_norm_backward(const NonlinearLayer& layer, const Matrix& d_eff, NonlinearLayer& grad) {
  if (!layer.weight_normalized()) {
    grad.weight += d_eff;
    return;
  }
  for (Eigen::Index i = 0; i < layer.weight.rows(); ++i) {
    const auto v = layer.weight.row(i);
    const double n = v.norm();
    if (n == 0.0) continue;
    const double proj = d_eff.row(i).dot(v) / n;  // G_i . v_i / |v_i|
    grad.gain[i] += proj;
    grad.weight.row(i) += (layer.gain[i] / n) * (d_eff.row(i) - (proj / n) * v);
  }
}

ResolvedHead resolve(const HeadParameters& params) {
  ResolvedHead h;
  h.w1 = resolve_weight(params.classifier_hidden);
  h.b1 = params.classifier_hidden.bias;
  h.w2 = params.classifier_out.weight;
  h.b2 = params.classifier_out.bias;
  h.v1 = resolve_weight(params.projection_hidden);
  h.c1 = params.projection_hidden.bias;
  h.v2 = params.projection_out.weight;
  h.c2 = params.projection_out.bias;
  h.answers = &params.answers;
  h.normalize_projection = params.normalize_projection;
  return h;
}

HeadActivations forward(const Vector& x, const ResolvedHead& head, Metric metric) {
  HeadActivations a;
  a.cls_pre.noalias() = head.w1 * x;
  a.cls_pre += head.b1;
  a.cls_hidden = relu(a.cls_pre);
  a.scores.noalias() = head.w2 * a.cls_hidden;
  a.scores += head.b2;

  a.proj_pre.noalias() = head.v1 * x;
  a.proj_pre += head.c1;
  a.proj_hidden = relu(a.proj_pre);
  a.proj_raw.noalias() = head.v2 * a.proj_hidden;
  a.proj_raw += head.c2;
  a.projection = a.proj_raw;
  if (head.normalize_projection) {
    const double n = a.proj_raw.norm();
    if (n > 0.0) a.projection /= n;
  }
  a.dist = distances(a.projection, head.answers->rows, metric);
  return a;
}

EffectiveGrad::EffectiveGrad(const ResolvedHead& head)
    : w1(Matrix::Zero(head.w1.rows(), head.w1.cols())),
      w2(Matrix::Zero(head.w2.rows(), head.w2.cols())),
      v1(Matrix::Zero(head.v1.rows(), head.v1.cols())),
      v2(Matrix::Zero(head.v2.rows(), head.v2.cols())),
      m(Matrix::Zero(head.answers->rows.rows(), head.answers->rows.cols())),
      b1(Vector::Zero(head.b1.size())),
      b2(Vector::Zero(head.b2.size())),
      c1(Vector::Zero(head.c1.size())),
      c2(Vector::Zero(head.c2.size())) {}

namespace {

// Adds sum_i dd_i * d(d_i)/dp to dp, and dd_i * d(d_i)/dM_i to dm when
// dm is non-null.
void distance_backward(const Vector& p, const Matrix& m, const Vector& dist, const Vector& dd,
                       Metric metric, Vector& dp, Matrix* dm) {
  switch (metric) {
    case Metric::kEuclidean:
      for (Eigen::Index i = 0; i < m.rows(); ++i) {
        if (dd[i] == 0.0 || dist[i] == 0.0) continue;
        const Vector u = (p - m.row(i).transpose()) / dist[i];
        dp += dd[i] * u;
        if (dm) dm->row(i) -= dd[i] * u.transpose();
      }
      break;
    case Metric::kDot:
      dp.noalias() -= m.transpose() * dd;
      if (dm) dm->noalias() -= dd * p.transpose();
      break;
    case Metric::kCosine: {
      const double pn = p.norm();
      if (pn == 0.0) break;
      for (Eigen::Index i = 0; i < m.rows(); ++i) {
        const double mn = m.row(i).norm();
        if (dd[i] == 0.0 || mn == 0.0) continue;
        const double dotpm = m.row(i).dot(p);
        const Vector mi = m.row(i).transpose();
        dp -= dd[i] * (mi / (pn * mn) - (dotpm / (pn * pn * pn * mn)) * p);
        if (dm) dm->row(i) -= dd[i] * (p / (pn * mn) - (dotpm / (pn * mn * mn * mn)) * mi).transpose();
      }
      break;
    }
  }
}

}  // namespace

Vector accumulate_backward(const Vector& x, const Vector& gt, const ResolvedHead& head,
                           const HeadActivations& act, const Objective& objective, double scale,
                           EffectiveGrad& acc, LossBreakdown* loss) {
  const double lambda = objective.lambda;
  Vector dx = Vector::Zero(x.size());

  const bool cls_used = lambda > 0.0;
  const bool reg_used = lambda < 1.0;
  const bool scores_match = act.scores.size() == gt.size();

  LossTerm lc;
  if (scores_match) lc = classification_loss(act.scores, gt);
  LossTerm lp = regression_loss(act.dist, gt, objective.margin);
  if (loss) {
    loss->classification = lc.value;
    loss->regression = lp.value;
    loss->lambda = lambda;
    loss->margin = objective.margin;
    loss->total = lambda * lc.value + (1.0 - lambda) * lp.value;
  }

  if (cls_used) {
    require_shape(scores_match, "classifier output length != ground truth length");
    const Vector dy = (scale * lambda) * lc.grad;
    acc.w2.noalias() += dy * act.cls_hidden.transpose();
    acc.b2 += dy;
    const Vector dh = head.w2.transpose() * dy;
    const Vector dpre = relu_mask(act.cls_pre, dh);
    acc.w1.noalias() += dpre * x.transpose();
    acc.b1 += dpre;
    dx.noalias() += head.w1.transpose() * dpre;
  }

  if (reg_used) {
    const Vector dd = (scale * (1.0 - lambda)) * lp.grad;
    Vector dp = Vector::Zero(act.projection.size());
    distance_backward(act.projection, head.answers->rows, act.dist, dd, objective.metric, dp,
                      head.answers->trainable ? &acc.m : nullptr);
    Vector draw = dp;
    if (head.normalize_projection) {
      const double n = act.proj_raw.norm();
      if (n > 0.0) {
        draw = (dp - act.projection * act.projection.dot(dp)) / n;
      } else {
        draw.setZero();
      }
    }
    acc.v2.noalias() += draw * act.proj_hidden.transpose();
    acc.c2 += draw;
    const Vector dh = head.v2.transpose() * draw;
    const Vector dpre = relu_mask(act.proj_pre, dh);
    acc.v1.noalias() += dpre * x.transpose();
    acc.c1 += dpre;
    dx.noalias() += head.v1.transpose() * dpre;
  }
  return dx;
}

void finalize(const HeadParameters& params, const EffectiveGrad& acc, HeadParameters& grad) {
  weight_norm_backward(params.classifier_hidden, acc.w1, grad.classifier_hidden);
  grad.classifier_hidden.bias += acc.b1;
  grad.classifier_out.weight += acc.w2;
  grad.classifier_out.bias += acc.b2;
  weight_norm_backward(params.projection_hidden, acc.v1, grad.projection_hidden);
  grad.projection_hidden.bias += acc.c1;
  grad.projection_out.weight += acc.v2;
  grad.projection_out.bias += acc.c2;
  if (params.answers.trainable) grad.answers.rows += acc.m;
}

}  // namespace detail
}  // namespace semvqa
