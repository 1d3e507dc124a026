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

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "core/model.hpp"
#include "core/synth_data.hpp"

namespace semvqa {

using KeyValues = std::map<std::string, std::string>;

// Flat "key = value" lines. Blank lines and lines starting with '#' are
// skipped; surrounding whitespace is trimmed. Duplicate keys are a kParse
// error.
KeyValues parse_key_values(std::istream& in);
KeyValues load_key_values(const std::string& path);
void write_key_values(std::ostream& out, const KeyValues& values);

// Everything a CLI command may need, addressable by prefixed keys:
//   train.*  TrainConfig fields plus train.seeds
//   data.*   SynthConfig and the synthetic embedding spec
//   split.*  SplitSpec
//   paths.*  free-form file paths
//   eval.*   lambda, lambdas, label
struct ExperimentConfig {
  TrainConfig train;
  std::vector<std::uint64_t> seeds;  // empty: just train.seed
  SynthConfig data;
  SyntheticEmbeddingSpec embedding;
  SplitSpec split;
  std::map<std::string, std::string> paths;
  std::optional<double> eval_lambda;  // empty: train.lambda
  std::vector<double> sweep_lambdas = {0.0, 0.25, 0.5, 0.75, 1.0};
  std::string label;

  // Unknown keys are kInvalidArgument, malformed values kParse.
  void set(std::string_view key, std::string_view value);
  std::string get(std::string_view key) const;
  void apply(const KeyValues& values);
  // Every known key with its current value; paths.* only when set.
  KeyValues to_key_values() const;

  // Seeds for multi-seed commands; throws on duplicates.
  std::vector<std::uint64_t> seed_list() const;
  double lambda_for_eval() const { return eval_lambda.value_or(train.lambda); }
  void validate() const;
};

// train.* keys alone, unprefixed; used for checkpoint metadata.
KeyValues train_config_keys(const TrainConfig& config);
TrainConfig train_config_from_keys(const KeyValues& values);

}  // namespace semvqa
