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

#include "core/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string_view>

#include "core/rng.hpp"

namespace semvqa {
namespace {

using Real = long double;
using MatL = Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic>;
using VecL = std::vector<Real>;

// Named long double copies of every tensor; vectors are stored as n x 1.
struct TensorSet {
  std::vector<std::string> names;
  std::vector<MatL> values;

  const MatL* find(std::string_view name) const {
    for (std::size_t i = 0; i < names.size(); ++i) {
      if (names[i] == name) return &values[i];
    }
    return nullptr;
  }
  const MatL& at(std::string_view name) const {
    const MatL* m = find(name);
    require(m != nullptr, ErrorCode::kInvalidArgument, "gradcheck: missing tensor " + std::string(name));
    return *m;
  }
};

template <class Params>
TensorSet to_long_double(const Params& params) {
  TensorSet t;
  for_each_tensor(params, [&](std::string_view name, const auto& tensor) {
    MatL m(tensor.rows(), tensor.cols());
    for (Eigen::Index r = 0; r < tensor.rows(); ++r) {
      for (Eigen::Index c = 0; c < tensor.cols(); ++c) m(r, c) = static_cast<Real>(tensor(r, c));
    }
    t.names.emplace_back(name);
    t.values.push_back(std::move(m));
  });
  return t;
}

template <class Params>
std::vector<Matrix> flatten_grads(const Params& grad) {
  std::vector<Matrix> out;
  for_each_tensor(grad, [&](std::string_view, const auto& tensor) { out.emplace_back(tensor); });
  return out;
}

struct Kink {
  Real distance = std::numeric_limits<Real>::infinity();
  void see(Real v) { distance = std::min(distance, std::fabs(v)); }
};

// Row-wise weight normalization when a gain tensor is present.
MatL effective(const MatL& w, const MatL* gain) {
  if (gain == nullptr) return w;
  MatL out = w;
  for (Eigen::Index i = 0; i < w.rows(); ++i) {
    Real n = 0;
    for (Eigen::Index j = 0; j < w.cols(); ++j) n += w(i, j) * w(i, j);
    n = std::sqrt(n);
    for (Eigen::Index j = 0; j < w.cols(); ++j) out(i, j) = n > 0 ? (*gain)(i, 0) * w(i, j) / n : 0;
  }
  return out;
}

VecL affine(const MatL& w, const MatL& b, const VecL& in) {
  VecL out(static_cast<std::size_t>(w.rows()));
  for (Eigen::Index i = 0; i < w.rows(); ++i) {
    Real s = b(i, 0);
    for (Eigen::Index j = 0; j < w.cols(); ++j) s += w(i, j) * in[static_cast<std::size_t>(j)];
    out[static_cast<std::size_t>(i)] = s;
  }
  return out;
}

VecL relu_layer(const TensorSet& t, std::string_view w, std::string_view b, std::string_view g,
                const VecL& in, Kink* kink) {
  const MatL weff = effective(t.at(w), t.find(g));
  VecL pre = affine(weff, t.at(b), in);
  for (auto& v : pre) {
    if (kink) kink->see(v);
    v = v > 0 ? v : 0;
  }
  return pre;
}

Real softplus(Real z) { return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

Real ref_classification(const VecL& y, const VecL& gt) {
  Real s = 0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    // -log sigmoid(y) = softplus(-y); -log(1 - sigmoid(y)) = softplus(y)
    s += gt[i] * softplus(-y[i]) + (1 - gt[i]) * softplus(y[i]);
  }
  return s;
}

Real ref_regression(const VecL& d, const VecL& gt, Real margin, Kink* kink) {
  Real s = 0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (gt[i] == 1) {
      s += d[i];
    } else {
      if (kink) kink->see(d[i] - margin);
      s += std::max<Real>(0, margin - d[i]);
    }
  }
  return s;
}

VecL ref_distances(const VecL& p, const MatL& m, Metric metric, Kink* kink) {
  VecL d(static_cast<std::size_t>(m.rows()));
  Real pn = 0;
  for (Real v : p) pn += v * v;
  pn = std::sqrt(pn);
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Real dot = 0, diff = 0, mn = 0;
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      const Real pj = p[static_cast<std::size_t>(j)];
      dot += pj * m(i, j);
      diff += (pj - m(i, j)) * (pj - m(i, j));
      mn += m(i, j) * m(i, j);
    }
    mn = std::sqrt(mn);
    Real& out = d[static_cast<std::size_t>(i)];
    switch (metric) {
      case Metric::kEuclidean:
        out = std::sqrt(diff);
        if (kink) kink->see(out);
        break;
      case Metric::kDot:
        out = -dot;
        break;
      case Metric::kCosine:
        if (kink) {
          kink->see(pn);
          kink->see(mn);
        }
        out = (pn == 0 || mn == 0) ? 0 : -dot / (pn * mn);
        break;
    }
  }
  return d;
}

Real ref_head(const VecL& x, const VecL& gt, const TensorSet& t, const Objective& obj,
              bool normalize, Kink* kink) {
  const Real lambda = obj.lambda;
  Kink* cls_kink = lambda > 0 ? kink : nullptr;
  Kink* reg_kink = lambda < 1 ? kink : nullptr;

  const VecL h = relu_layer(t, "W1", "b1", "W1_g", x, cls_kink);
  const VecL y = affine(t.at("W2"), t.at("b2"), h);

  const VecL hp = relu_layer(t, "V1", "c1", "V1_g", x, reg_kink);
  VecL p = affine(t.at("V2"), t.at("c2"), hp);
  if (normalize) {
    Real n = 0;
    for (Real v : p) n += v * v;
    n = std::sqrt(n);
    if (reg_kink) reg_kink->see(n);
    if (n > 0) {
      for (Real& v : p) v /= n;
    }
  }
  const VecL d = ref_distances(p, t.at("M"), obj.metric, reg_kink);
  const Real lc = ref_classification(y, gt);
  const Real lp = ref_regression(d, gt, static_cast<Real>(obj.margin), reg_kink);
  return lambda * lc + (1 - lambda) * lp;
}

Real ref_model(std::span<const Instance> batch, const TensorSet& t, const Objective& obj,
               bool normalize, Kink* kink) {
  const MatL& table = t.at("token_embeddings");
  Real total = 0;
  for (const auto& inst : batch) {
    VecL e(static_cast<std::size_t>(table.cols()), 0);
    for (auto tok : inst.tokens) {
      for (Eigen::Index j = 0; j < table.cols(); ++j) {
        e[static_cast<std::size_t>(j)] += table(static_cast<Eigen::Index>(tok), j);
      }
    }
    for (Real& v : e) v /= static_cast<Real>(inst.tokens.size());
    VecL f(static_cast<std::size_t>(inst.image.size()));
    for (std::size_t j = 0; j < f.size(); ++j) f[j] = inst.image[static_cast<Eigen::Index>(j)];
    const VecL q = relu_layer(t, "Q_W", "Q_b", "Q_g", e, kink);
    const VecL v = relu_layer(t, "I_W", "I_b", "I_g", f, kink);
    VecL x(q.size());
    for (std::size_t j = 0; j < x.size(); ++j) x[j] = q[j] * v[j];
    const auto a = static_cast<std::size_t>(t.at("M").rows());
    VecL gt(a, 0);
    for (auto ans : inst.answers) gt[ans] = 1;
    total += ref_head(x, gt, t, obj, normalize, kink);
  }
  return total / static_cast<Real>(batch.size());
}

VecL to_vec(const Vector& v) { return VecL(v.data(), v.data() + v.size()); }

double rel_error(double a, double n, double floor) {
  return std::fabs(a - n) / std::max({std::fabs(a), std::fabs(n), floor});
}

// Central differences of `loss` over every component of `tensors` (and of
// `input` when given), compared against `analytic` in the same order.
template <class Loss>
GradCheckResult compare(TensorSet& tensors, const std::vector<Matrix>& analytic, VecL* input,
                        const Vector* input_grad, const std::vector<bool>& skip, Loss&& loss,
                        double step, double floor) {
  GradCheckResult out;
  const Real h = static_cast<Real>(step);
  auto record = [&](double a, Real n, const std::string& name, Eigen::Index r, Eigen::Index c) {
    const double e = rel_error(a, static_cast<double>(n), floor);
    if (e > out.max_error || out.worst.empty()) {
      if (e >= out.max_error) {
        out.max_error = e;
        out.worst = name + "[" + std::to_string(r) + "," + std::to_string(c) + "]";
      }
    }
  };
  for (std::size_t k = 0; k < tensors.values.size(); ++k) {
    if (skip[k]) continue;
    MatL& m = tensors.values[k];
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      for (Eigen::Index c = 0; c < m.cols(); ++c) {
        const Real saved = m(r, c);
        m(r, c) = saved + h;
        const Real up = loss();
        m(r, c) = saved - h;
        const Real down = loss();
        m(r, c) = saved;
        record(analytic[k](r, c), (up - down) / (2 * h), tensors.names[k], r, c);
      }
    }
  }
  if (input != nullptr) {
    for (std::size_t j = 0; j < input->size(); ++j) {
      const Real saved = (*input)[j];
      (*input)[j] = saved + h;
      const Real up = loss();
      (*input)[j] = saved - h;
      const Real down = loss();
      (*input)[j] = saved;
      record((*input_grad)[static_cast<Eigen::Index>(j)], (up - down) / (2 * h), "x",
             static_cast<Eigen::Index>(j), 0);
    }
  }
  return out;
}

}  // namespace

long double reference_head_loss(const Vector& x, const Vector& gt, const HeadParameters& params,
                                const Objective& objective) {
  params.validate();
  return ref_head(to_vec(x), to_vec(gt), to_long_double(params), objective,
                  params.normalize_projection, nullptr);
}

long double reference_model_loss(std::span<const Instance> batch, const ModelParameters& params,
                                 const Objective& objective) {
  params.validate();
  require(!batch.empty(), ErrorCode::kInvalidArgument, "empty batch");
  return ref_model(batch, to_long_double(params), objective, params.head.normalize_projection,
                   nullptr);
}

GradCheckResult check_head_gradients(const Vector& x, const Vector& gt, const HeadParameters& params,
                                     const Objective& objective, double step, double floor) {
  const HeadBackward b = backward(x, gt, params, objective);
  TensorSet t = to_long_double(params);
  std::vector<bool> skip(t.names.size(), false);
  for (std::size_t k = 0; k < t.names.size(); ++k) {
    skip[k] = t.names[k] == "M" && !params.answers.trainable;
  }
  VecL xl = to_vec(x);
  const VecL gl = to_vec(gt);
  const bool norm = params.normalize_projection;
  Kink kink;
  ref_head(xl, gl, t, objective, norm, &kink);
  auto out = compare(t, flatten_grads(b.grad), &xl, &b.input, skip,
                     [&] { return ref_head(xl, gl, t, objective, norm, nullptr); }, step, floor);
  out.kink_distance = static_cast<double>(kink.distance);
  return out;
}

GradCheckResult check_model_gradients(std::span<const Instance> batch, const ModelParameters& params,
                                      const Objective& objective, double step, double floor) {
  const BatchBackward b = batch_backward(batch, params, objective);
  TensorSet t = to_long_double(params);
  std::vector<bool> skip(t.names.size(), false);
  for (std::size_t k = 0; k < t.names.size(); ++k) {
    skip[k] = t.names[k] == "M" && !params.head.answers.trainable;
  }
  const bool norm = params.head.normalize_projection;
  Kink kink;
  ref_model(batch, t, objective, norm, &kink);
  auto out = compare(t, flatten_grads(b.grad), nullptr, nullptr, skip,
                     [&] { return ref_model(batch, t, objective, norm, nullptr); }, step, floor);
  out.kink_distance = static_cast<double>(kink.distance);
  return out;
}

namespace {

struct Sampler {
  Rng rng;
  std::uniform_real_distribution<double> unit{-1.0, 1.0};

  std::size_t dim(std::size_t lo, std::size_t hi) { return lo + uniform_index(rng, hi - lo + 1); }
  double uniform(double lo, double hi) { return lo + (hi - lo) * (unit(rng) + 1.0) / 2.0; }
  Matrix matrix(std::size_t r, std::size_t c) {
    Matrix m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = unit(rng);
    return m;
  }
  Vector vector(std::size_t n, double scale = 1.0) {
    Vector v(static_cast<Eigen::Index>(n));
    for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = scale * unit(rng);
    return v;
  }
  Vector gains(std::size_t n) {
    Vector v(static_cast<Eigen::Index>(n));
    for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = uniform(0.5, 1.5);
    return v;
  }
  Vector ground_truth(std::size_t a) {
    Vector g = Vector::Zero(static_cast<Eigen::Index>(a));
    for (Eigen::Index i = 0; i < g.size(); ++i) g[i] = uniform(0.0, 1.0) < 0.3 ? 1.0 : 0.0;
    return g;
  }
  NonlinearLayer nonlinear(std::size_t in, std::size_t out, bool wn) {
    NonlinearLayer l{matrix(out, in), vector(out, 0.5), Vector()};
    if (wn) l.gain = gains(out);
    return l;
  }
  HeadParameters head(std::size_t d) {
    const std::size_t h = dim(1, 8), a = dim(2, 8), p = dim(1, 8);
    const bool wn = uniform(0.0, 1.0) < 0.5;
    HeadParameters hp;
    hp.classifier_hidden = nonlinear(d, h, wn);
    hp.classifier_out = {matrix(a, h), vector(a, 0.5)};
    hp.projection_hidden = nonlinear(d, h, wn);
    hp.projection_out = {matrix(p, h), vector(p, 0.5)};
    hp.answers.rows = matrix(a, p);
    hp.answers.trainable = true;
    hp.normalize_projection = uniform(0.0, 1.0) < 0.5;
    return hp;
  }
};

constexpr std::size_t kMaxRedraws = 10000;

}  // namespace

GradCheckReport run_gradient_suite(const GradCheckOptions& o) {
  require(o.instances > 0 && o.step > 0.0 && o.floor > 0.0, ErrorCode::kInvalidArgument,
          "gradcheck: instances, step and floor must be positive");
  Sampler s{make_rng(o.seed, "gradcheck")};
  GradCheckReport report;
  auto note = [&](std::string scope, Metric metric, double lambda, std::size_t i,
                  const GradCheckResult& r, double tol, double& max_err) {
    max_err = std::max(max_err, r.max_error);
    if (r.max_error > tol) report.failures.push_back({std::move(scope), metric, lambda, i, r.max_error, r.worst});
  };

  for (Metric metric : o.metrics) {
    for (double lambda : o.lambdas) {
      const Objective obj{lambda, 1.0, metric};
      obj.validate();
      for (std::size_t i = 0; i < o.instances; ++i) {
        // Loss terms alone: d/dy of the classification loss and d/dd of the
        // hinge, then the combination weights.
        {
          const std::size_t a = s.dim(2, 8);
          const Vector gt = s.ground_truth(a);
          const Vector y = s.vector(a, 3.0);
          Vector d;
          std::size_t tries = 0;
          do {
            d = s.vector(a, 2.0);
            if (metric == Metric::kEuclidean) d = d.cwiseAbs();
            ++tries;
          } while (((d.array() - obj.margin).abs().minCoeff() < o.kink_guard) && tries < kMaxRedraws);
          const LossTerm lc = classification_loss(y, gt);
          const LossTerm lp = regression_loss(d, gt, obj.margin);
          GradCheckResult r;
          const VecL gl = to_vec(gt);
          const Real h = static_cast<Real>(o.step);
          for (std::size_t j = 0; j < a; ++j) {
            VecL yl = to_vec(y), dl = to_vec(d);
            yl[j] += h;
            const Real c_up = ref_classification(yl, gl);
            yl[j] -= 2 * h;
            const Real c_down = ref_classification(yl, gl);
            dl[j] += h;
            const Real r_up = ref_regression(dl, gl, obj.margin, nullptr);
            dl[j] -= 2 * h;
            const Real r_down = ref_regression(dl, gl, obj.margin, nullptr);
            const auto ji = static_cast<Eigen::Index>(j);
            const double ec = rel_error(lc.grad[ji], static_cast<double>((c_up - c_down) / (2 * h)), o.floor);
            const double er = rel_error(lp.grad[ji], static_cast<double>((r_up - r_down) / (2 * h)), o.floor);
            if (ec > r.max_error) r = {ec, "dLc/dy[" + std::to_string(j) + "]", 0.0};
            if (er > r.max_error) r = {er, "dLp/dd[" + std::to_string(j) + "]", 0.0};
          }
          const double lv = combined_loss(lc.value, lp.value, lambda);
          const double dc = combined_loss(lc.value + 1.0, lp.value, lambda) - lv;
          const double dr = combined_loss(lc.value, lp.value + 1.0, lambda) - lv;
          const double el = std::max(rel_error(dc, lambda, o.floor), rel_error(dr, 1.0 - lambda, o.floor));
          if (el > r.max_error) r = {el, "dL/dLc,dL/dLp", 0.0};
          ++report.loss_cases;
          note("loss", metric, lambda, i, r, o.head_tolerance, report.max_loss_error);
        }

        // Head.
        {
          GradCheckResult r;
          std::size_t tries = 0;
          while (true) {
            const std::size_t d = s.dim(1, 8);
            HeadParameters hp = s.head(d);
            const Vector x = s.vector(d);
            const Vector gt = s.ground_truth(static_cast<std::size_t>(hp.num_answers()));
            r = check_head_gradients(x, gt, hp, obj, o.step, o.floor);
            if (r.kink_distance >= o.kink_guard) break;
            ++report.redrawn;
            require(++tries < kMaxRedraws, ErrorCode::kNumeric, "gradcheck: cannot avoid kinks");
          }
          ++report.head_cases;
          note("head", metric, lambda, i, r, o.head_tolerance, report.max_head_error);
        }

        // Whole model.
        {
          GradCheckResult r;
          std::size_t tries = 0;
          while (true) {
            const std::size_t t = s.dim(2, 6), e = s.dim(1, 5), f = s.dim(1, 6), d = s.dim(1, 8);
            const bool wn = s.uniform(0.0, 1.0) < 0.5;
            ModelParameters mp;
            mp.token_embeddings = s.matrix(t, e);
            mp.question_layer = s.nonlinear(e, d, wn);
            mp.image_layer = s.nonlinear(f, d, wn);
            mp.head = s.head(d);
            std::vector<Instance> batch(s.dim(1, 3));
            for (auto& inst : batch) {
              inst.tokens.resize(s.dim(1, 4));
              for (auto& tok : inst.tokens) tok = uniform_index(s.rng, t);
              inst.image = s.vector(f);
              const Vector gt = s.ground_truth(static_cast<std::size_t>(mp.head.num_answers()));
              for (Eigen::Index k = 0; k < gt.size(); ++k) {
                if (gt[k] == 1.0) inst.answers.push_back(static_cast<std::size_t>(k));
              }
            }
            r = check_model_gradients(batch, mp, obj, o.step, o.floor);
            if (r.kink_distance >= o.kink_guard) break;
            ++report.redrawn;
            require(++tries < kMaxRedraws, ErrorCode::kNumeric, "gradcheck: cannot avoid kinks");
          }
          ++report.model_cases;
          note("model", metric, lambda, i, r, o.model_tolerance, report.max_model_error);
        }
      }
    }
  }
  return report;
}

}  // namespace semvqa
