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
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "core/common.hpp"

namespace semvqa {

// Word -> vector table read from whitespace-separated text files in the
// GloVe distribution layout. Insertion order is preserved so that tables
// round-trip through the text format unchanged.
class EmbeddingTable {
 public:
  EmbeddingTable() = default;
  explicit EmbeddingTable(std::size_t dimension) : dimension_(dimension) {}

  void insert(std::string word, std::vector<double> values);

  std::size_t dimension() const { return dimension_; }
  std::size_t size() const { return words_.size(); }
  bool empty() const { return words_.empty(); }

  // nullptr when the word is absent.
  const std::vector<double>* find(std::string_view word) const;
  const std::vector<std::string>& words() const { return words_; }
  const std::vector<double>& vector_at(std::size_t i) const { return vectors_[i]; }

  friend bool operator==(const EmbeddingTable& a, const EmbeddingTable& b) {
    return a.dimension_ == b.dimension_ && a.words_ == b.words_ &&
           a.vectors_ == b.vectors_;
  }

 private:
  std::size_t dimension_ = 0;
  std::vector<std::string> words_;
  std::vector<std::vector<double>> vectors_;
  std::unordered_map<std::string, std::size_t> index_;
};

EmbeddingTable parse_embedding_file(std::istream& in);
EmbeddingTable load_embedding_file(const std::string& path);
void write_embedding_file(std::ostream& out, const EmbeddingTable& table);
void save_embedding_file(const std::string& path, const EmbeddingTable& table);

// Ordered list of unique strings (answers or question tokens) with an
// inverse index.
class Vocabulary {
 public:
  Vocabulary() = default;
  explicit Vocabulary(std::vector<std::string> answers);

  std::size_t size() const { return answers_.size(); }
  bool empty() const { return answers_.empty(); }
  const std::string& at(std::size_t i) const { return answers_.at(i); }
  std::optional<std::size_t> find(std::string_view answer) const;
  const std::vector<std::string>& answers() const { return answers_; }

  friend bool operator==(const Vocabulary& a, const Vocabulary& b) {
    return a.answers_ == b.answers_;
  }

 private:
  std::vector<std::string> answers_;
  std::unordered_map<std::string, std::size_t> index_;
};

using AnswerVocabulary = Vocabulary;

// One entry per non-empty line; line order defines indices.
AnswerVocabulary read_vocabulary(std::istream& in);
AnswerVocabulary load_vocabulary(const std::string& path);
void write_vocabulary(std::ostream& out, const AnswerVocabulary& vocab);
void save_vocabulary(const std::string& path, const AnswerVocabulary& vocab);

enum class InitScheme : std::uint32_t { kGlove = 0, kRandom = 1, kShuffledGlove = 2 };

std::string_view to_string(InitScheme scheme);
InitScheme parse_init_scheme(std::string_view name);

struct AnswerMatrix {
  Matrix rows;  // A x P
  InitScheme scheme = InitScheme::kGlove;
  bool trainable = true;
  std::uint64_t seed = 0;

  std::size_t num_answers() const { return static_cast<std::size_t>(rows.rows()); }
  std::size_t dimension() const { return static_cast<std::size_t>(rows.cols()); }
};

// Splits on ASCII whitespace and lowercases each token.
std::vector<std::string> answer_words(std::string_view answer);

// kGlove: bag-of-words mean, unknown words count as zero vectors.
// kRandom: i.i.d. normal(0, 1/sqrt(P)) rows; P = random_dim, or the table
//   dimension when random_dim is 0.
// kShuffledGlove: the kGlove matrix passed through shuffle_rows(seed).
AnswerMatrix build_answer_matrix(const AnswerVocabulary& vocab,
                                 const EmbeddingTable& table,
                                 InitScheme scheme, std::uint64_t seed,
                                 std::size_t random_dim = 0);

AnswerMatrix shuffle_rows(const AnswerMatrix& m, std::uint64_t seed);

// Rescales every non-zero row to unit L2 norm.
AnswerMatrix normalize_rows(AnswerMatrix m);

struct Neighbor {
  std::size_t index;
  double distance;
};

// k nearest rows by Euclidean distance, excluding row_index itself,
// ascending by distance and then by index.
std::vector<Neighbor> nearest_neighbors(const AnswerMatrix& m,
                                        std::size_t row_index, std::size_t k);

// Binary layout: "ANSMAT1", u64 A, u64 P, u32 scheme, u64 seed, then A*P
// little-endian f64 values row-major.
void write_answer_matrix(std::ostream& out, const AnswerMatrix& m);
AnswerMatrix read_answer_matrix(std::istream& in);
void save_answer_matrix(const std::string& path, const AnswerMatrix& m);
AnswerMatrix load_answer_matrix(const std::string& path);

}  // namespace semvqa
