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

#include "core/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <random>

#include "core/rng.hpp"

namespace semvqa {

void ModelParameters::validate() const {
  require_shape(token_embeddings.rows() > 0 && token_embeddings.cols() > 0,
                "model: empty token embedding table");
  require_shape(question_layer.in_dim() == embed_dim(), "model: Q_W columns != E");
  require_shape(question_layer.bias.size() == question_layer.out_dim(), "model: Q_b length != D");
  require_shape(image_layer.out_dim() == question_layer.out_dim(), "model: I_W rows != D");
  require_shape(image_layer.bias.size() == image_layer.out_dim(), "model: I_b length != D");
  require_shape(head.fused_dim() == fused_dim(), "model: head input != D");
  head.validate();
}

ModelParameters zeros_like(const ModelParameters& params) {
  ModelParameters z = params;
  for_each_tensor(z, [](std::string_view, auto& t) { t.setZero(); });
  return z;
}

namespace {

Matrix xavier(Rng& rng, std::size_t rows, std::size_t cols, std::size_t fan_in,
              std::size_t fan_out) {
  const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  std::uniform_real_distribution<double> u(-bound, bound);
  Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = u(rng);
  }
  return m;
}

NonlinearLayer make_nonlinear(Rng& rng, std::size_t in, std::size_t out, bool weight_norm) {
  NonlinearLayer layer;
  layer.weight = xavier(rng, out, in, in, out);
  layer.bias = Vector::Zero(static_cast<Eigen::Index>(out));
  if (weight_norm) layer.gain = layer.weight.rowwise().norm();
  return layer;
}

LinearLayer make_linear(Rng& rng, std::size_t in, std::size_t out) {
  LinearLayer layer;
  layer.weight = xavier(rng, out, in, in, out);
  layer.bias = Vector::Zero(static_cast<Eigen::Index>(out));
  return layer;
}

}  // namespace

ModelParameters initialize_model(const ModelShape& s, AnswerMatrix answers, std::uint64_t seed) {
  require(s.num_tokens > 0 && s.embed_dim > 0 && s.image_dim > 0 && s.fused_dim > 0 &&
              s.hidden_dim > 0 && s.num_answers > 0,
          ErrorCode::kInvalidArgument, "model dimensions must be positive");
  require_shape(answers.rows.rows() > 0 && answers.rows.cols() > 0, "empty answer matrix");
  Rng rng = make_rng(seed, "init");
  ModelParameters p;
  p.token_embeddings = xavier(rng, s.num_tokens, s.embed_dim, s.num_tokens, s.embed_dim);
  p.question_layer = make_nonlinear(rng, s.embed_dim, s.fused_dim, s.weight_norm);
  p.image_layer = make_nonlinear(rng, s.image_dim, s.fused_dim, s.weight_norm);
  const auto answer_dim = static_cast<std::size_t>(answers.rows.cols());
  p.head.classifier_hidden = make_nonlinear(rng, s.fused_dim, s.hidden_dim, s.weight_norm);
  p.head.classifier_out = make_linear(rng, s.hidden_dim, s.num_answers);
  p.head.projection_hidden = make_nonlinear(rng, s.fused_dim, s.hidden_dim, s.weight_norm);
  p.head.projection_out = make_linear(rng, s.hidden_dim, answer_dim);
  p.head.answers = std::move(answers);
  p.head.normalize_projection = s.normalize_projection;
  p.validate();
  return p;
}

Vector ground_truth_vector(const Instance& instance, Eigen::Index num_answers) {
  Vector gt = Vector::Zero(num_answers);
  for (auto a : instance.answers) {
    require(static_cast<Eigen::Index>(a) < num_answers, ErrorCode::kVocabMismatch,
            "answer index out of range for the model");
    gt[static_cast<Eigen::Index>(a)] = 1.0;
  }
  return gt;
}

namespace {

struct ResolvedModel {
  const ModelParameters* params;
  Matrix q_w;
  Matrix i_w;
  detail::ResolvedHead head;
};

ResolvedModel resolve(const ModelParameters& p) {
  return {&p, detail::resolve_weight(p.question_layer), detail::resolve_weight(p.image_layer),
          detail::resolve(p.head)};
}

struct Activations {
  Vector q_in, q_pre, q, v_pre, v, x;
  detail::HeadActivations head;
};

Vector mean_embedding(std::span<const std::size_t> tokens, const Matrix& table) {
  require(!tokens.empty(), ErrorCode::kInvalidArgument, "empty question");
  Vector acc = Vector::Zero(table.cols());
  for (auto t : tokens) {
    require(static_cast<Eigen::Index>(t) < table.rows(), ErrorCode::kOutOfRange,
            "token id out of range");
    acc += table.row(static_cast<Eigen::Index>(t)).transpose();
  }
  return acc / static_cast<double>(tokens.size());
}

Activations forward(const Instance& in, const ResolvedModel& m, Metric metric) {
  const auto& p = *m.params;
  require_shape(in.image.size() == p.image_dim(), "image feature length != F");
  Activations a;
  a.q_in = mean_embedding(in.tokens, p.token_embeddings);
  a.q_pre.noalias() = m.q_w * a.q_in;
  a.q_pre += p.question_layer.bias;
  a.q = a.q_pre.cwiseMax(0.0);
  a.v_pre.noalias() = m.i_w * in.image;
  a.v_pre += p.image_layer.bias;
  a.v = a.v_pre.cwiseMax(0.0);
  a.x = a.q.cwiseProduct(a.v);
  a.head = detail::forward(a.x, m.head, metric);
  return a;
}

bool hits(std::size_t predicted, const Instance& in) {
  return std::find(in.answers.begin(), in.answers.end(), predicted) != in.answers.end();
}

}  // namespace

Vector encode_question(std::span<const std::size_t> tokens, const ModelParameters& params) {
  const Vector q_in = mean_embedding(tokens, params.token_embeddings);
  return (params.question_layer.effective_weight() * q_in + params.question_layer.bias)
      .cwiseMax(0.0);
}

Vector encode_image(const Vector& features, const ModelParameters& params) {
  require_shape(features.size() == params.image_dim(), "image feature length != F");
  return (params.image_layer.effective_weight() * features + params.image_layer.bias)
      .cwiseMax(0.0);
}

Vector fuse(const Vector& question, const Vector& image) {
  require_shape(question.size() == image.size(), "fuse: dimension mismatch");
  return question.cwiseProduct(image);
}

BatchBackward batch_backward(std::span<const Instance> batch, const ModelParameters& params,
                             const Objective& objective) {
  objective.validate();
  require(!batch.empty(), ErrorCode::kInvalidArgument, "empty batch");
  const auto m = resolve(params);
  const double scale = 1.0 / static_cast<double>(batch.size());
  const auto a_count = params.head.num_classes();

  detail::EffectiveGrad head_acc(m.head);
  Matrix dq_w = Matrix::Zero(m.q_w.rows(), m.q_w.cols());
  Matrix di_w = Matrix::Zero(m.i_w.rows(), m.i_w.cols());
  BatchBackward out;
  out.grad = zeros_like(params);

  for (const auto& in : batch) {
    const auto act = forward(in, m, objective.metric);
    const Vector gt = ground_truth_vector(in, a_count);
    LossBreakdown lb;
    const Vector dx = detail::accumulate_backward(act.x, gt, m.head, act.head, objective, scale,
                                                  head_acc, &lb);
    out.loss.classification += scale * lb.classification;
    out.loss.regression += scale * lb.regression;
    if (hits(predict(act.head.scores, act.head.dist, objective.lambda), in)) ++out.correct;

    const Vector dq_pre = (dx.cwiseProduct(act.v).array() * (act.q_pre.array() > 0.0).cast<double>()).matrix();
    const Vector dv_pre = (dx.cwiseProduct(act.q).array() * (act.v_pre.array() > 0.0).cast<double>()).matrix();
    dq_w.noalias() += dq_pre * act.q_in.transpose();
    out.grad.question_layer.bias += dq_pre;
    di_w.noalias() += dv_pre * in.image.transpose();
    out.grad.image_layer.bias += dv_pre;
    const Vector dq_in = m.q_w.transpose() * dq_pre / static_cast<double>(in.tokens.size());
    for (auto t : in.tokens) out.grad.token_embeddings.row(static_cast<Eigen::Index>(t)) += dq_in.transpose();
  }
  detail::finalize(params.head, head_acc, out.grad.head);
  detail::weight_norm_backward(params.question_layer, dq_w, out.grad.question_layer);
  detail::weight_norm_backward(params.image_layer, di_w, out.grad.image_layer);
  out.loss.lambda = objective.lambda;
  out.loss.margin = objective.margin;
  out.loss.total = objective.lambda * out.loss.classification +
                   (1.0 - objective.lambda) * out.loss.regression;
  return out;
}

double batch_loss(std::span<const Instance> batch, const ModelParameters& params,
                  const Objective& objective) {
  objective.validate();
  require(!batch.empty(), ErrorCode::kInvalidArgument, "empty batch");
  const auto m = resolve(params);
  double total = 0.0;
  for (const auto& in : batch) {
    const auto act = forward(in, m, objective.metric);
    const Vector gt = ground_truth_vector(in, params.head.num_classes());
    const double lc = classification_loss(act.head.scores, gt).value;
    const double lp = regression_loss(act.head.dist, gt, objective.margin).value;
    total += combined_loss(lc, lp, objective.lambda);
  }
  return total / static_cast<double>(batch.size());
}

std::string_view to_string(OptimizerKind kind) {
  return kind == OptimizerKind::kSgd ? "sgd" : "adamax";
}

OptimizerKind parse_optimizer(std::string_view name) {
  if (name == "sgd") return OptimizerKind::kSgd;
  if (name == "adamax") return OptimizerKind::kAdamax;
  fail(ErrorCode::kInvalidArgument, "unknown optimizer '" + std::string(name) + "'");
}

void TrainConfig::validate() const {
  objective().validate();
  require(batch_size > 0, ErrorCode::kInvalidArgument, "batch_size must be positive");
  require(base_lr > 0.0 && std::isfinite(base_lr), ErrorCode::kInvalidArgument,
          "base_lr must be positive");
  require(warmup_start_factor > 0.0 && warmup_start_factor <= 1.0, ErrorCode::kInvalidArgument,
          "warmup_start_factor must lie in (0, 1]");
  require(decay_factor > 0.0, ErrorCode::kInvalidArgument, "decay_factor must be positive");
  for (std::size_t i = 1; i < lr_decay_steps.size(); ++i) {
    require(lr_decay_steps[i] > lr_decay_steps[i - 1], ErrorCode::kInvalidArgument,
            "lr_decay_steps must be strictly increasing");
  }
  require(embed_dim > 0 && fused_dim > 0 && hidden_dim > 0, ErrorCode::kInvalidArgument,
          "model dimensions must be positive");
  require(log_every > 0, ErrorCode::kInvalidArgument, "log_every must be positive");
}

double TrainConfig::learning_rate(std::size_t iteration) const {
  double lr = base_lr;
  if (warmup_iters > 0 && iteration < warmup_iters) {
    const double alpha = static_cast<double>(iteration) / static_cast<double>(warmup_iters);
    lr *= warmup_start_factor + (1.0 - warmup_start_factor) * alpha;
  }
  for (auto step : lr_decay_steps) {
    if (iteration >= step) lr *= decay_factor;
  }
  return lr;
}

void write_history_csv(std::ostream& out, std::span<const HistoryRecord> history) {
  out << "iteration,loss,classification,regression,accuracy\n";
  const auto old = out.precision(17);
  for (const auto& h : history) {
    out << h.iteration << ',' << h.loss << ',' << h.classification << ',' << h.regression << ','
        << h.accuracy << '\n';
  }
  out.precision(old);
}

namespace {

// Flat optimizer state, one slot per tensor in for_each_tensor order.
class Optimizer {
 public:
  explicit Optimizer(const TrainConfig& c) : config_(c) {}

  void step(ModelParameters& params, const ModelParameters& grad, double lr) {
    ++t_;
    std::vector<Eigen::Map<const Eigen::VectorXd>> g;
    for_each_tensor(grad, [&](std::string_view, const auto& tensor) {
      g.emplace_back(tensor.data(), tensor.size());
    });
    std::size_t slot = 0;
    for_each_tensor(params, [&](std::string_view name, auto& tensor) {
      Eigen::Map<Eigen::VectorXd> w(tensor.data(), tensor.size());
      const auto& gi = g[slot];
      if (name == "M" && !params.head.answers.trainable) {
        ++slot;
        return;
      }
      if (config_.optimizer == OptimizerKind::kSgd) {
        w -= lr * gi;
      } else {
        if (m_.size() <= slot) {
          m_.push_back(Vector::Zero(w.size()));
          u_.push_back(Vector::Zero(w.size()));
        }
        auto& m = m_[slot];
        auto& u = u_[slot];
        m = config_.beta1 * m + (1.0 - config_.beta1) * gi;
        u = (config_.beta2 * u).cwiseMax(gi.cwiseAbs());
        const double step = lr / (1.0 - std::pow(config_.beta1, static_cast<double>(t_)));
        w.array() -= step * m.array() / (u.array() + config_.epsilon);
      }
      ++slot;
    });
  }

 private:
  const TrainConfig& config_;
  std::size_t t_ = 0;
  std::vector<Vector> m_;
  std::vector<Vector> u_;
};

}  // namespace

TrainResult train(std::span<const Instance> data, const TrainConfig& config,
                  ModelParameters initial) {
  config.validate();
  require(!data.empty(), ErrorCode::kInvalidArgument, "empty training set");
  initial.validate();
  TrainResult result{std::move(initial), {}};
  auto& params = result.params;
  params.head.answers.trainable = config.m_trainable;
  params.head.normalize_projection = config.normalize_projection;
  const auto objective = config.objective();

  Rng rng = make_rng(config.seed, "batches");
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::size_t cursor = order.size();
  Optimizer optimizer(config);

  std::vector<Instance> batch;
  HistoryRecord window;
  std::size_t window_iters = 0;
  std::size_t window_seen = 0;
  for (std::size_t it = 0; it < config.iterations; ++it) {
    batch.clear();
    while (batch.size() < std::min(config.batch_size, data.size())) {
      if (cursor == order.size()) {
        for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[uniform_index(rng, i)]);
        cursor = 0;
      }
      batch.push_back(data[order[cursor++]]);
    }
    auto bw = batch_backward(batch, params, objective);
    if (!std::isfinite(bw.loss.total)) {
      fail(ErrorCode::kNumeric, "non-finite loss at iteration " + std::to_string(it) +
                                    " (L_c=" + std::to_string(bw.loss.classification) +
                                    ", L_p=" + std::to_string(bw.loss.regression) + ")");
    }
    optimizer.step(params, bw.grad, config.learning_rate(it));

    window.loss += bw.loss.total;
    window.classification += bw.loss.classification;
    window.regression += bw.loss.regression;
    window.accuracy += static_cast<double>(bw.correct);
    window_seen += batch.size();
    ++window_iters;
    if ((it + 1) % config.log_every == 0 || it + 1 == config.iterations) {
      const double k = static_cast<double>(window_iters);
      result.history.push_back({it + 1, window.loss / k, window.classification / k,
                                window.regression / k,
                                window.accuracy / static_cast<double>(window_seen)});
      window = {};
      window_iters = 0;
      window_seen = 0;
    }
  }
  return result;
}

std::vector<PredictionRecord> evaluate(const ModelParameters& params,
                                       std::span<const Instance> data, double lambda,
                                       Metric metric) {
  params.validate();
  check_prediction_lambda(params.head, lambda);
  const auto m = resolve(params);
  std::vector<PredictionRecord> out;
  out.reserve(data.size());
  for (const auto& in : data) {
    for (auto a : in.answers) {
      require(static_cast<Eigen::Index>(a) < params.head.num_answers(), ErrorCode::kVocabMismatch,
              "instance answer outside the model's answer set");
    }
    auto act = forward(in, m, metric);
    PredictionRecord r;
    r.question_id = in.question_id;
    r.predicted = predict(act.head.scores, act.head.dist, lambda);
    r.scores = std::move(act.head.scores);
    r.distances = std::move(act.head.dist);
    r.lambda = lambda;
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<std::size_t> classify(const ModelParameters& params, std::span<const Instance> data) {
  params.validate();
  const Matrix qw = params.question_layer.effective_weight();
  const Matrix iw = params.image_layer.effective_weight();
  const Matrix w1 = params.head.classifier_hidden.effective_weight();
  std::vector<std::size_t> out;
  out.reserve(data.size());
  for (const auto& in : data) {
    const Vector q_in = mean_embedding(in.tokens, params.token_embeddings);
    const Vector q = (qw * q_in + params.question_layer.bias).cwiseMax(0.0);
    const Vector v = (iw * in.image + params.image_layer.bias).cwiseMax(0.0);
    const Vector h = (w1 * q.cwiseProduct(v) + params.head.classifier_hidden.bias).cwiseMax(0.0);
    const Vector y = params.head.classifier_out.weight * h + params.head.classifier_out.bias;
    std::size_t best = 0;
    for (Eigen::Index i = 1; i < y.size(); ++i) {
      if (y[i] > y[static_cast<Eigen::Index>(best)]) best = static_cast<std::size_t>(i);
    }
    out.push_back(best);
  }
  return out;
}

double accuracy_of(std::span<const PredictionRecord> records, std::span<const Instance> data) {
  require(records.size() == data.size(), ErrorCode::kInvalidArgument,
          "prediction/dataset size mismatch");
  if (records.empty()) return 0.0;
  std::size_t correct = 0;
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (hits(records[i].predicted, data[i])) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(records.size());
}

}  // namespace semvqa
