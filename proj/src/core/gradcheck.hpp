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

#include "core/head.hpp"
#include "core/model.hpp"

namespace semvqa {

// Finite-difference verification of the analytic gradients. The numeric side
// runs an independent straight-line forward pass in long double, so it
// shares no code with the production forward/backward.

struct GradCheckResult {
  double max_error = 0.0;  // max over components of |a - n| / max(|a|, |n|, floor)
  std::string worst;       // "tensor[index]" of the worst component
  double kink_distance = 0.0;  // closest approach to a relu/hinge/norm kink
};

long double reference_head_loss(const Vector& x, const Vector& ground_truth,
                                const HeadParameters& params, const Objective& objective);
long double reference_model_loss(std::span<const Instance> batch, const ModelParameters& params,
                                 const Objective& objective);

// Compares backward() against central differences of reference_head_loss for
// every head tensor and for the input x.
GradCheckResult check_head_gradients(const Vector& x, const Vector& ground_truth,
                                     const HeadParameters& params, const Objective& objective,
                                     double step = 1e-6, double floor = 1e-6);
// Same for batch_backward() over every model tensor.
GradCheckResult check_model_gradients(std::span<const Instance> batch,
                                      const ModelParameters& params, const Objective& objective,
                                      double step = 1e-6, double floor = 1e-6);

struct GradCheckOptions {
  std::size_t instances = 100;  // per (metric, lambda) pair
  std::uint64_t seed = 1;
  double step = 1e-6;
  double floor = 1e-6;
  double head_tolerance = 1e-5;
  double model_tolerance = 1e-4;
  double kink_guard = 1e-4;  // instances closer than this to a kink are redrawn
  std::vector<double> lambdas = {0.0, 0.25, 0.5, 1.0};
  std::vector<Metric> metrics = {Metric::kEuclidean, Metric::kDot, Metric::kCosine};
};

struct GradCheckFailure {
  std::string scope;  // "loss", "head" or "model"
  Metric metric = Metric::kEuclidean;
  double lambda = 0.0;
  std::size_t instance = 0;
  double error = 0.0;
  std::string worst;
};

struct GradCheckReport {
  std::size_t loss_cases = 0;
  std::size_t head_cases = 0;
  std::size_t model_cases = 0;
  std::size_t redrawn = 0;
  double max_loss_error = 0.0;
  double max_head_error = 0.0;
  double max_model_error = 0.0;
  std::vector<GradCheckFailure> failures;

  bool passed() const { return failures.empty(); }
};

// Random small instances (every dimension <= 8) across metrics and lambdas,
// toggling weight normalization and projection normalization. Covers the
// loss terms alone (gradients with respect to y and d), the head and the
// whole model.
GradCheckReport run_gradient_suite(const GradCheckOptions& options);

}  // namespace semvqa
