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
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "core/embedding_store.hpp"
#include "core/rng.hpp"

namespace semvqa {

// Attribute inventories of the synthetic world. Every word must be unique
// across all lists; question_form() relies on that.
struct Inventory {
  std::vector<std::string> colors = {"red", "green", "blue", "yellow", "purple", "orange"};
  std::vector<std::string> shapes = {"circle", "square", "triangle", "star"};
  std::vector<std::string> sizes = {"small", "large"};
  std::vector<std::string> rows = {"top", "middle", "bottom"};
  std::vector<std::string> cols = {"left", "center", "right"};
  std::vector<std::string> numbers = {"one", "two", "three", "four"};

  std::size_t num_cells() const { return rows.size() * cols.size(); }
  // presence + shape + color + size one-hots per cell
  std::size_t block_size() const { return 1 + shapes.size() + colors.size() + sizes.size(); }
  std::size_t feature_dim() const { return num_cells() * block_size(); }
  void validate() const;
};

struct SceneObject {
  std::size_t shape = 0;
  std::size_t color = 0;
  std::size_t size = 0;
  std::size_t cell = 0;  // row-major grid index
};

struct Scene {
  std::vector<SceneObject> objects;
  std::uint64_t seed = 0;  // drives the feature noise
};

enum class QuestionType { kQuery, kVerify, kChoose, kLogical };

std::string_view to_string(QuestionType t);
QuestionType parse_question_type(std::string_view s);

enum class Template {
  kQueryColor,     // what color is the <shape> ?
  kQueryShape,     // what shape is the <color> thing ?
  kQuerySize,      // what size is the <shape> ?
  kQueryObject,    // what is at the <row> <col> ?          -> "<color> <shape>"
  kQueryPosition,  // where is the <color> <shape> ?        -> "<row> <col>"
  kQueryCount,     // how many things are there ?
  kVerifyColor,    // is there a <color> thing ?
  kVerifyShape,    // is there a <shape> ?
  kChooseColor,    // is the <shape> <c1> or <c2> ?
  kChooseShape,    // is the <color> thing a <s1> or a <s2> ?
  kLogicalOr,      // is there a <color> thing or a <shape> ?
  kLogicalAnd,     // is there a <color> thing and a <shape> ?
};

std::span<const Template> all_templates();
std::string_view to_string(Template t);
Template parse_template(std::string_view s);

struct SynthConfig {
  Inventory inventory;
  std::size_t min_objects = 1;
  std::size_t max_objects = 4;
  double noise = 0.05;
  std::size_t num_questions = 2500;
  std::size_t questions_per_scene = 3;
  std::vector<Template> templates{all_templates().begin(), all_templates().end()};
  std::uint64_t seed = 1;

  void validate() const;
};

struct QAInstance {
  std::string question_id;
  QuestionType qtype = QuestionType::kQuery;
  std::optional<std::string> entailed_by;
  std::vector<std::string> tokens;
  std::vector<std::string> answers;
  std::vector<double> features;
  // In-memory only; recomputable from the tokens.
  std::vector<std::string> candidates;  // choose questions: the two options named
};

Scene generate_scene(const SynthConfig& config, Rng& rng);

// Concatenated per-cell blocks [presence, shape one-hot, color one-hot, size
// one-hot] plus N(0, noise) per component drawn from the scene's own seed.
std::vector<double> render_features(const Scene& scene, const Inventory& inventory, double noise);

// Instances for every requested template that applies to the scene, in the
// order given; query templates append an entailed verify instance right
// after their source. Question ids are "<id_prefix>-<n>".
std::vector<QAInstance> generate_questions(const Scene& scene, const SynthConfig& config,
                                           std::span<const Template> templates, Rng& rng,
                                           std::string_view id_prefix);

struct Benchmark {
  std::vector<Scene> scenes;
  std::vector<QAInstance> instances;
  std::vector<std::size_t> scene_of;  // instance -> scene index
};

// Scenes are drawn until exactly config.num_questions instances exist; each
// scene contributes questions_per_scene randomly chosen applicable templates.
Benchmark generate_benchmark(const SynthConfig& config);

// Canonical answer list: yes, no, colors, shapes, sizes, numbers,
// "<color> <shape>" pairs, "<row> <col>" pairs.
Vocabulary answer_vocabulary(const Inventory& inventory);
// Every token a template can emit, sorted.
Vocabulary token_vocabulary(const Inventory& inventory);

// Word vectors with built-in relational structure: each word is
// a * u_category + b * r_word, where u_category is shared by every word of a
// category (colors, shapes, ...) and r_word is word-specific.
struct SyntheticEmbeddingSpec {
  std::size_t dimension = 16;
  double category_weight = 1.5;
  double word_weight = 1.5;
  std::uint64_t seed = 7;
};
EmbeddingTable synthetic_embeddings(const Inventory& inventory, const SyntheticEmbeddingSpec& spec);

// Question form used for plausibility and distribution grouping: tokens with
// inventory words replaced by their category placeholder, e.g.
// "what color is the <shape> ?".
std::string question_form(std::span<const std::string> tokens, const Inventory& inventory);

struct SplitSpec {
  enum class Mode { kStandard, kOov };
  Mode mode = Mode::kStandard;
  double train_fraction = 0.8;  // of instances (standard) or of answers (oov)
  std::uint64_t seed = 1;
  std::size_t min_count = 5;    // oov eligibility bounds on per-answer counts
  std::size_t max_count = 200;

  void validate() const;
};

struct Split {
  std::vector<QAInstance> train;
  std::vector<QAInstance> test;
  std::vector<std::string> train_answers;  // oov only: the disjoint answer sets
  std::vector<std::string> test_answers;
};

// Standard: seeded partition of entailment groups (a source question with
// the questions it entails) so that pairs never straddle the split.
// Oov: answers whose instance counts fall within [min_count, max_count] are
// partitioned into two disjoint sets and each instance follows its answers;
// instances with ineligible answers are dropped. Entailment links whose
// source lands elsewhere are cleared.
Split split(std::span<const QAInstance> instances, const SplitSpec& spec);

// question_id \t qtype \t entailed_by|- \t tokens \t answers \t features
void write_dataset(std::ostream& out, std::span<const QAInstance> instances);
std::vector<QAInstance> read_dataset(std::istream& in);
void save_dataset(const std::string& path, std::span<const QAInstance> instances);
std::vector<QAInstance> load_dataset(const std::string& path);

}  // namespace semvqa
