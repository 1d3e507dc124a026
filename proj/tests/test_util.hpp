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

// Helpers shared by the unit tests: seeded generators for matrices and
// parameter sets, and error-code assertions.

#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "core/common.hpp"
#include "core/head.hpp"
#include "core/model.hpp"
#include "core/rng.hpp"

namespace semvqa::testing {

inline Matrix random_matrix(Rng& rng, Eigen::Index rows, Eigen::Index cols, double scale = 1.0) {
  std::normal_distribution<double> n(0.0, scale);
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = n(rng);
  return m;
}

inline Vector random_vector(Rng& rng, Eigen::Index size, double scale = 1.0) {
  return random_matrix(rng, size, 1, scale).col(0);
}

inline std::size_t uniform_in(Rng& rng, std::size_t lo, std::size_t hi) {
  return lo + uniform_index(rng, hi - lo + 1);
}

inline double uniform_real(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline NonlinearLayer random_layer(Rng& rng, Eigen::Index out, Eigen::Index in, bool wn) {
  NonlinearLayer l{random_matrix(rng, out, in, 0.7), random_vector(rng, out, 0.2), {}};
  if (wn) l.gain = random_vector(rng, out, 0.5).array().abs() + 0.5;
  return l;
}

inline HeadParameters random_head(Rng& rng, Eigen::Index d, Eigen::Index h, Eigen::Index a,
                                  Eigen::Index p, bool wn = false, bool normalize = false) {
  HeadParameters hp;
  hp.classifier_hidden = random_layer(rng, h, d, wn);
  hp.classifier_out = {random_matrix(rng, a, h, 0.7), random_vector(rng, a, 0.2)};
  hp.projection_hidden = random_layer(rng, h, d, wn);
  hp.projection_out = {random_matrix(rng, p, h, 0.7), random_vector(rng, p, 0.2)};
  hp.answers.rows = random_matrix(rng, a, p);
  hp.normalize_projection = normalize;
  return hp;
}

inline ModelParameters random_model(Rng& rng, Eigen::Index t, Eigen::Index e, Eigen::Index f,
                                    Eigen::Index d, Eigen::Index h, Eigen::Index a, Eigen::Index p,
                                    bool wn = false) {
  ModelParameters mp;
  mp.token_embeddings = random_matrix(rng, t, e);
  mp.question_layer = random_layer(rng, d, e, wn);
  mp.image_layer = random_layer(rng, d, f, wn);
  mp.head = random_head(rng, d, h, a, p, wn);
  return mp;
}

inline Instance random_instance(Rng& rng, Eigen::Index t, Eigen::Index f, Eigen::Index a) {
  Instance in;
  in.question_id = "q" + std::to_string(rng() % 100000);
  const std::size_t n_tokens = uniform_in(rng, 1, 4);
  for (std::size_t i = 0; i < n_tokens; ++i) in.tokens.push_back(uniform_index(rng, t));
  in.image = random_vector(rng, f);
  in.answers.push_back(uniform_index(rng, a));
  return in;
}

template <class F>
ErrorCode error_code_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return static_cast<ErrorCode>(0);
}

inline Matrix rows_of(std::initializer_list<std::initializer_list<double>> rows) {
  const auto r = static_cast<Eigen::Index>(rows.size());
  const auto c = static_cast<Eigen::Index>(rows.begin()->size());
  Matrix m(r, c);
  Eigen::Index i = 0;
  for (const auto& row : rows) {
    Eigen::Index j = 0;
    for (double v : row) m(i, j++) = v;
    ++i;
  }
  return m;
}

inline Vector vec(std::initializer_list<double> values) {
  Vector v(static_cast<Eigen::Index>(values.size()));
  Eigen::Index i = 0;
  for (double x : values) v(i++) = x;
  return v;
}

}  // namespace semvqa::testing
