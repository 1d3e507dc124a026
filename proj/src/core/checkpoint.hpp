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
#include <string>
#include <vector>

#include "core/config.hpp"
#include "core/embedding_store.hpp"
#include "core/head.hpp"
#include "core/model.hpp"

namespace semvqa {

struct NamedTensor {
  std::string name;
  std::vector<std::uint64_t> dims;  // rank 1 or 2
  std::vector<double> values;       // row-major
};

// "SVQACKPT", u32 version, u32 metadata count, (key, value) strings,
// u32 tensor count, then per tensor: name, u32 rank, u64 dims, f64 values.
// Integers and floats are little-endian; strings are u32-length-prefixed.
struct Checkpoint {
  static constexpr std::uint32_t kVersion = 1;
  std::map<std::string, std::string> metadata;
  std::vector<NamedTensor> tensors;

  const NamedTensor* find(std::string_view name) const;
};

void write_checkpoint(std::ostream& out, const Checkpoint& ckpt);
Checkpoint read_checkpoint(std::istream& in);
void save_checkpoint(const std::string& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::string& path);

// Head container: the named head tensors plus lambda, margin, metric,
// normalize flag and seed, and M's scheme, trainability and seed.
Checkpoint head_checkpoint(const HeadParameters& params, const Objective& objective,
                           std::uint64_t seed);
struct HeadState {
  HeadParameters params;
  Objective objective;
  std::uint64_t seed = 0;
};
HeadState head_from_checkpoint(const Checkpoint& ckpt);

// A trained model with everything evaluation needs.
struct ModelState {
  ModelParameters params;
  TrainConfig config;
  Vocabulary tokens;
  Vocabulary answers;  // rows of M, in order
};

Checkpoint model_checkpoint(const ModelState& state);
ModelState model_from_checkpoint(const Checkpoint& ckpt);
void save_model(const std::string& path, const ModelState& state);
ModelState load_model(const std::string& path);

}  // namespace semvqa
