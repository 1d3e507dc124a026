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

#include "core/embedding_store.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>

#include "core/binary_io.hpp"
#include "core/rng.hpp"

namespace semvqa {
namespace {

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '\f' || c == '\v'; }

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && is_space(line[i])) ++i;
    std::size_t j = i;
    while (j < line.size() && !is_space(line[j])) ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

double parse_component(std::string_view tok, std::size_t line_no) {
  double v = 0.0;
  const char* first = tok.data();
  const char* last = tok.data() + tok.size();
  if (!tok.empty() && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || !std::isfinite(v)) {
    fail(ErrorCode::kParse, "line " + std::to_string(line_no) +
                                ": non-numeric component '" + std::string(tok) + "'");
  }
  return v;
}

std::string lowercase(std::string_view s) {
  std::string out(s);
  for (char& c : out) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return out;
}

std::ifstream open_in(const std::string& path, std::ios::openmode mode = std::ios::in) {
  std::ifstream in(path, mode);
  if (!in) fail(ErrorCode::kIo, "cannot open '" + path + "' for reading");
  return in;
}

std::ofstream open_out(const std::string& path, std::ios::openmode mode = std::ios::out) {
  std::ofstream out(path, mode | std::ios::trunc);
  if (!out) fail(ErrorCode::kIo, "cannot open '" + path + "' for writing");
  return out;
}

}  // namespace

void EmbeddingTable::insert(std::string word, std::vector<double> values) {
  require(!word.empty(), ErrorCode::kInvalidArgument, "empty word");
  if (dimension_ == 0) dimension_ = values.size();
  require(dimension_ > 0, ErrorCode::kInvalidArgument, "zero-dimensional embedding");
  if (values.size() != dimension_) {
    fail(ErrorCode::kParse, "dimension mismatch for '" + word + "': expected " +
                                std::to_string(dimension_) + ", got " +
                                std::to_string(values.size()));
  }
  for (double v : values) {
    require(std::isfinite(v), ErrorCode::kParse, "non-finite component for '" + word + "'");
  }
  if (index_.count(word) != 0) fail(ErrorCode::kParse, "duplicate word '" + word + "'");
  index_.emplace(word, words_.size());
  words_.push_back(std::move(word));
  vectors_.push_back(std::move(values));
}

const std::vector<double>* EmbeddingTable::find(std::string_view word) const {
  auto it = index_.find(std::string(word));
  return it == index_.end() ? nullptr : &vectors_[it->second];
}

EmbeddingTable parse_embedding_file(std::istream& in) {
  EmbeddingTable table;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto toks = split_ws(line);
    if (toks.empty()) continue;
    if (toks.size() < 2) {
      fail(ErrorCode::kParse, "line " + std::to_string(line_no) + ": word without components");
    }
    std::vector<double> values;
    values.reserve(toks.size() - 1);
    for (std::size_t i = 1; i < toks.size(); ++i) values.push_back(parse_component(toks[i], line_no));
    if (table.dimension() != 0 && values.size() != table.dimension()) {
      fail(ErrorCode::kParse, "line " + std::to_string(line_no) + ": dimension mismatch (expected " +
                                  std::to_string(table.dimension()) + ", got " +
                                  std::to_string(values.size()) + ")");
    }
    table.insert(std::string(toks[0]), std::move(values));
  }
  if (table.empty()) fail(ErrorCode::kParse, "empty embedding source");
  return table;
}

EmbeddingTable load_embedding_file(const std::string& path) {
  auto in = open_in(path);
  return parse_embedding_file(in);
}

void write_embedding_file(std::ostream& out, const EmbeddingTable& table) {
  char buf[64];
  for (std::size_t i = 0; i < table.size(); ++i) {
    out << table.words()[i];
    for (double v : table.vector_at(i)) {
      auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
      out << ' ' << std::string_view(buf, static_cast<std::size_t>(ptr - buf));
    }
    out << '\n';
  }
}

void save_embedding_file(const std::string& path, const EmbeddingTable& table) {
  auto out = open_out(path);
  write_embedding_file(out, table);
  if (!out) fail(ErrorCode::kIo, "write failed for '" + path + "'");
}

Vocabulary::Vocabulary(std::vector<std::string> answers)
    : answers_(std::move(answers)) {
  for (std::size_t i = 0; i < answers_.size(); ++i) {
    require(!answers_[i].empty(), ErrorCode::kInvalidArgument, "empty answer string");
    if (!index_.emplace(answers_[i], i).second) {
      fail(ErrorCode::kInvalidArgument, "duplicate answer '" + answers_[i] + "'");
    }
  }
}

std::optional<std::size_t> Vocabulary::find(std::string_view answer) const {
  auto it = index_.find(std::string(answer));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

AnswerVocabulary read_vocabulary(std::istream& in) {
  std::vector<std::string> answers;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    answers.push_back(line);
  }
  return AnswerVocabulary(std::move(answers));
}

AnswerVocabulary load_vocabulary(const std::string& path) {
  auto in = open_in(path);
  return read_vocabulary(in);
}

void write_vocabulary(std::ostream& out, const AnswerVocabulary& vocab) {
  for (const auto& a : vocab.answers()) out << a << '\n';
}

void save_vocabulary(const std::string& path, const AnswerVocabulary& vocab) {
  auto out = open_out(path);
  write_vocabulary(out, vocab);
  if (!out) fail(ErrorCode::kIo, "write failed for '" + path + "'");
}

std::string_view to_string(InitScheme scheme) {
  switch (scheme) {
    case InitScheme::kGlove: return "glove";
    case InitScheme::kRandom: return "random";
    case InitScheme::kShuffledGlove: return "shuffled-glove";
  }
  return "unknown";
}

InitScheme parse_init_scheme(std::string_view name) {
  if (name == "glove") return InitScheme::kGlove;
  if (name == "random") return InitScheme::kRandom;
  if (name == "shuffled-glove" || name == "shuffled") return InitScheme::kShuffledGlove;
  fail(ErrorCode::kInvalidArgument, "unknown init scheme '" + std::string(name) + "'");
}

std::vector<std::string> answer_words(std::string_view answer) {
  std::vector<std::string> out;
  for (auto tok : split_ws(answer)) out.push_back(lowercase(tok));
  return out;
}

AnswerMatrix build_answer_matrix(const AnswerVocabulary& vocab, const EmbeddingTable& table,
                                 InitScheme scheme, std::uint64_t seed,
                                 std::size_t random_dim) {
  require(!vocab.empty(), ErrorCode::kInvalidArgument, "empty answer vocabulary");
  AnswerMatrix m;
  m.seed = seed;
  m.scheme = scheme;
  const std::size_t a = vocab.size();

  if (scheme == InitScheme::kRandom) {
    const std::size_t p = random_dim != 0 ? random_dim : table.dimension();
    require(p > 0, ErrorCode::kInvalidArgument, "zero answer-space dimension");
    Rng rng = make_rng(seed, "answer_matrix.random");
    std::normal_distribution<double> normal(0.0, 1.0 / std::sqrt(static_cast<double>(p)));
    m.rows.resize(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(p));
    for (Eigen::Index i = 0; i < m.rows.rows(); ++i) {
      for (Eigen::Index j = 0; j < m.rows.cols(); ++j) m.rows(i, j) = normal(rng);
    }
    return m;
  }

  const std::size_t p = table.dimension();
  require(p > 0, ErrorCode::kInvalidArgument, "zero answer-space dimension");
  m.rows = Matrix::Zero(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(p));
  for (std::size_t i = 0; i < a; ++i) {
    const auto words = answer_words(vocab.at(i));
    if (words.empty()) continue;
    for (const auto& w : words) {
      if (const auto* v = table.find(w)) {
        for (std::size_t j = 0; j < p; ++j) m.rows(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) += (*v)[j];
      }
    }
    m.rows.row(static_cast<Eigen::Index>(i)) /= static_cast<double>(words.size());
  }
  if (scheme == InitScheme::kShuffledGlove) return shuffle_rows(m, seed);
  return m;
}

AnswerMatrix shuffle_rows(const AnswerMatrix& m, std::uint64_t seed) {
  require(m.rows.rows() > 0, ErrorCode::kInvalidArgument, "cannot shuffle an empty matrix");
  std::vector<Eigen::Index> perm(static_cast<std::size_t>(m.rows.rows()));
  std::iota(perm.begin(), perm.end(), Eigen::Index{0});
  Rng rng = make_rng(seed, "answer_matrix.shuffle");
  // Fisher-Yates with our own index draw; std::shuffle's algorithm is
  // implementation-defined.
  for (std::size_t i = perm.size(); i > 1; --i) {
    std::swap(perm[i - 1], perm[uniform_index(rng, i)]);
  }
  AnswerMatrix out = m;
  for (std::size_t i = 0; i < perm.size(); ++i) {
    out.rows.row(static_cast<Eigen::Index>(i)) = m.rows.row(perm[i]);
  }
  out.scheme = InitScheme::kShuffledGlove;
  out.seed = seed;
  return out;
}

AnswerMatrix normalize_rows(AnswerMatrix m) {
  for (Eigen::Index i = 0; i < m.rows.rows(); ++i) {
    const double n = m.rows.row(i).norm();
    if (n > 0.0) m.rows.row(i) /= n;
  }
  return m;
}

std::vector<Neighbor> nearest_neighbors(const AnswerMatrix& m, std::size_t row_index,
                                        std::size_t k) {
  const std::size_t a = m.num_answers();
  require(row_index < a, ErrorCode::kOutOfRange, "row index out of range");
  require(k >= 1 && k < a, ErrorCode::kOutOfRange, "k must satisfy 1 <= k < A");
  std::vector<Neighbor> all;
  all.reserve(a - 1);
  const auto query = m.rows.row(static_cast<Eigen::Index>(row_index));
  for (std::size_t i = 0; i < a; ++i) {
    if (i == row_index) continue;
    all.push_back({i, (m.rows.row(static_cast<Eigen::Index>(i)) - query).norm()});
  }
  auto less = [](const Neighbor& x, const Neighbor& y) {
    return x.distance < y.distance || (x.distance == y.distance && x.index < y.index);
  };
  std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(k), all.end(), less);
  all.resize(k);
  return all;
}

namespace {
constexpr char kMatrixMagic[] = "ANSMAT1";
}

void write_answer_matrix(std::ostream& out, const AnswerMatrix& m) {
  out.write(kMatrixMagic, 7);
  binary::write_uint<std::uint64_t>(out, m.num_answers());
  binary::write_uint<std::uint64_t>(out, m.dimension());
  binary::write_uint<std::uint32_t>(out, static_cast<std::uint32_t>(m.scheme));
  binary::write_uint<std::uint64_t>(out, m.seed);
  for (Eigen::Index i = 0; i < m.rows.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.rows.cols(); ++j) binary::write_f64(out, m.rows(i, j));
  }
}

AnswerMatrix read_answer_matrix(std::istream& in) {
  char magic[7] = {};
  in.read(magic, 7);
  if (!in || std::string_view(magic, 7) != std::string_view(kMatrixMagic, 7)) {
    fail(ErrorCode::kParse, "not an answer matrix file (bad magic)");
  }
  const auto a = binary::read_uint<std::uint64_t>(in);
  const auto p = binary::read_uint<std::uint64_t>(in);
  const auto scheme = binary::read_uint<std::uint32_t>(in);
  require(scheme <= 2, ErrorCode::kParse, "unknown scheme code");
  require(a < (1u << 28) && p < (1u << 20), ErrorCode::kParse, "answer matrix header out of range");
  AnswerMatrix m;
  m.scheme = static_cast<InitScheme>(scheme);
  m.seed = binary::read_uint<std::uint64_t>(in);
  m.rows.resize(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(p));
  for (Eigen::Index i = 0; i < m.rows.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.rows.cols(); ++j) {
      m.rows(i, j) = binary::read_f64(in);
      require(std::isfinite(m.rows(i, j)), ErrorCode::kParse, "non-finite answer matrix entry");
    }
  }
  return m;
}

void save_answer_matrix(const std::string& path, const AnswerMatrix& m) {
  auto out = open_out(path, std::ios::binary);
  write_answer_matrix(out, m);
  if (!out) fail(ErrorCode::kIo, "write failed for '" + path + "'");
}

AnswerMatrix load_answer_matrix(const std::string& path) {
  auto in = open_in(path, std::ios::binary);
  return read_answer_matrix(in);
}

}  // namespace semvqa
