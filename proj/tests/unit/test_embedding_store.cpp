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

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "core/embedding_store.hpp"
#include "test_util.hpp"

using namespace semvqa;
using namespace semvqa::testing;

namespace {

EmbeddingTable parse(const std::string& text) {
  std::istringstream in(text);
  return parse_embedding_file(in);
}

std::vector<std::vector<double>> sorted_rows(const Matrix& m) {
  std::vector<std::vector<double>> rows;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    std::vector<double> r;
    for (Eigen::Index j = 0; j < m.cols(); ++j) r.push_back(m(i, j));
    rows.push_back(std::move(r));
  }
  std::sort(rows.begin(), rows.end());
  return rows;
}

// All pairwise distances from `row`, sorted by (distance, index).
std::vector<Neighbor> exhaustive_neighbors(const Matrix& m, std::size_t row, std::size_t k) {
  std::vector<Neighbor> all;
  for (Eigen::Index j = 0; j < m.rows(); ++j) {
    if (static_cast<std::size_t>(j) == row) continue;
    double s = 0.0;
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      const double diff = m(static_cast<Eigen::Index>(row), c) - m(j, c);
      s += diff * diff;
    }
    all.push_back({static_cast<std::size_t>(j), std::sqrt(s)});
  }
  std::sort(all.begin(), all.end(), [](const Neighbor& a, const Neighbor& b) {
    return a.distance != b.distance ? a.distance < b.distance : a.index < b.index;
  });
  all.resize(k);
  return all;
}

}  // namespace

TEST_CASE("parser reads one record per line") {
  const auto t = parse("cat 0.1 -0.2 0.3\n");
  CHECK(t.dimension() == 3);
  REQUIRE(t.find("cat") != nullptr);
  CHECK(*t.find("cat") == std::vector<double>{0.1, -0.2, 0.3});
  CHECK(t.find("dog") == nullptr);
}

TEST_CASE("parser accepts CRLF and rejects malformed input") {
  const auto t = parse("a 1 2\r\nb 3 4\r\n");
  CHECK(t.size() == 2);
  CHECK(*t.find("b") == std::vector<double>{3, 4});
  CHECK(error_code_of([] { parse("a 1 2\nb 3 4 5\n"); }) == ErrorCode::kParse);
  CHECK(error_code_of([] { parse(""); }) == ErrorCode::kParse);
  CHECK(error_code_of([] { parse("a 1 x\n"); }) == ErrorCode::kParse);
  CHECK(error_code_of([] { parse("a\n"); }) == ErrorCode::kParse);
  CHECK(error_code_of([] { parse("a 1\na 2\n"); }) == ErrorCode::kParse);
}

TEST_CASE("parser round-trips random tables") {
  Rng rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t dim = uniform_in(rng, 1, 6);
    EmbeddingTable t(dim);
    const std::size_t n = uniform_in(rng, 1, 20);
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<double> v;
      for (std::size_t k = 0; k < dim; ++k) v.push_back(uniform_real(rng, -5, 5));
      t.insert("w" + std::to_string(i) + "_" + std::to_string(rng() % 1000), std::move(v));
    }
    std::ostringstream out;
    write_embedding_file(out, t);
    CHECK(parse(out.str()) == t);
  }
}

TEST_CASE("bag-of-words answer rows") {
  EmbeddingTable t(3);
  t.insert("red", {0.4, -1.0, 2.0});
  t.insert("light", {0.1, 0.2, -0.3});
  t.insert("blue", {0.5, -0.1, 0.7});
  const Vocabulary vocab({"red", "light blue", "zxqw", "Light  BLUE"});
  const auto m = build_answer_matrix(vocab, t, InitScheme::kGlove, 0);
  REQUIRE(m.num_answers() == 4);
  CHECK(m.rows(0, 0) == 0.4);
  CHECK(m.rows(0, 1) == -1.0);
  CHECK(m.rows(0, 2) == 2.0);
  // Hand averaging, component by component; frozen: (0.3, 0.05, 0.2).
  const double frozen[] = {0.3, 0.05, 0.2};
  for (int k = 0; k < 3; ++k) {
    const double hand = ((*t.find("light"))[k] + (*t.find("blue"))[k]) / 2.0;
    CHECK(m.rows(1, k) == doctest::Approx(hand).epsilon(1e-15));
    CHECK(m.rows(1, k) == doctest::Approx(frozen[k]).epsilon(1e-12));
    CHECK(m.rows(3, k) == m.rows(1, k));
    CHECK(m.rows(2, k) == 0.0);
  }
}

TEST_CASE("unknown words count as zero vectors in the average") {
  EmbeddingTable t(2);
  t.insert("red", {2.0, 4.0});
  const auto m = build_answer_matrix(Vocabulary({"red zxqw"}), t, InitScheme::kGlove, 0);
  CHECK(m.rows(0, 0) == 1.0);
  CHECK(m.rows(0, 1) == 2.0);
}

TEST_CASE("glove scheme ignores the seed") {
  Rng rng(3);
  EmbeddingTable t(4);
  std::vector<std::string> words;
  for (int i = 0; i < 10; ++i) {
    words.push_back("w" + std::to_string(i));
    auto v = random_vector(rng, 4);
    t.insert(words.back(), {v.data(), v.data() + 4});
  }
  const Vocabulary vocab(words);
  CHECK(build_answer_matrix(vocab, t, InitScheme::kGlove, 1).rows ==
        build_answer_matrix(vocab, t, InitScheme::kGlove, 999).rows);
}

TEST_CASE("shuffle_rows permutes rows deterministically") {
  Rng rng(5);
  for (int trial = 0; trial < 30; ++trial) {
    AnswerMatrix m;
    m.rows = random_matrix(rng, static_cast<Eigen::Index>(uniform_in(rng, 1, 12)), 3);
    const std::uint64_t seed = rng();
    const auto a = shuffle_rows(m, seed);
    const auto b = shuffle_rows(m, seed);
    CHECK(a.rows == b.rows);
    CHECK(sorted_rows(a.rows) == sorted_rows(m.rows));
    if (m.rows.rows() == 1) CHECK(a.rows == m.rows);
  }
}

TEST_CASE("shuffled-glove is the glove matrix with permuted rows") {
  EmbeddingTable t(2);
  for (int i = 0; i < 8; ++i) t.insert("w" + std::to_string(i), {double(i), double(i * i)});
  Vocabulary vocab({"w0", "w1", "w2", "w3", "w4", "w5", "w6", "w7"});
  const auto glove = build_answer_matrix(vocab, t, InitScheme::kGlove, 9);
  const auto shuffled = build_answer_matrix(vocab, t, InitScheme::kShuffledGlove, 9);
  CHECK(shuffled.rows == shuffle_rows(glove, 9).rows);
  CHECK(sorted_rows(shuffled.rows) == sorted_rows(glove.rows));
  CHECK(shuffled.rows != glove.rows);
}

TEST_CASE("random scheme is centred with the documented scale") {
  EmbeddingTable t(25);
  t.insert("x", std::vector<double>(25, 1.0));
  std::vector<std::string> answers;
  for (int i = 0; i < 400; ++i) answers.push_back("a" + std::to_string(i));
  const auto m = build_answer_matrix(Vocabulary(answers), t, InitScheme::kRandom, 17);
  const double n = static_cast<double>(m.rows.size());
  REQUIRE(n >= 1e4);
  const double sigma = 1.0 / std::sqrt(25.0);
  CHECK(std::abs(m.rows.mean()) <= 5.0 * sigma / std::sqrt(n));
  const double var = (m.rows.array() - m.rows.mean()).square().sum() / (n - 1);
  CHECK(std::sqrt(var) == doctest::Approx(sigma).epsilon(0.05));
}

TEST_CASE("nearest neighbors: symmetric rows and tie-break") {
  AnswerMatrix m;
  m.rows = Matrix::Identity(3, 3);
  const auto nn = nearest_neighbors(m, 0, 2);
  REQUIRE(nn.size() == 2);
  CHECK(nn[0].index == 1);
  CHECK(nn[1].index == 2);
  CHECK(nn[0].distance == doctest::Approx(std::sqrt(2.0)));
  CHECK(nn[1].distance == doctest::Approx(std::sqrt(2.0)));

  m.rows = rows_of({{1, 2}, {5, 5}, {1, 2}});
  const auto dup = nearest_neighbors(m, 0, 1);
  CHECK(dup[0].index == 2);
  CHECK(dup[0].distance == 0.0);
}

TEST_CASE("nearest neighbors: frozen fixture") {
  AnswerMatrix m;
  m.rows = rows_of({{0, 0}, {1, 0}, {0, 2}, {3, 1}, {-1, -1}});
  const auto nn = nearest_neighbors(m, 0, 3);
  REQUIRE(nn.size() == 3);
  CHECK(nn[0].index == 1);
  CHECK(nn[1].index == 4);
  CHECK(nn[2].index == 2);
  CHECK(nn[1].distance == doctest::Approx(1.4142135623730951));
}

TEST_CASE("nearest neighbors agree with exhaustive search") {
  Rng rng(21);
  for (int trial = 0; trial < 200; ++trial) {
    AnswerMatrix m;
    const auto a = static_cast<Eigen::Index>(uniform_in(rng, 2, 50));
    m.rows = random_matrix(rng, a, static_cast<Eigen::Index>(uniform_in(rng, 1, 5)));
    if (trial % 4 == 0) m.rows.row(a - 1) = m.rows.row(0);  // force exact ties
    const std::size_t row = uniform_index(rng, static_cast<std::size_t>(a));
    const std::size_t k = uniform_in(rng, 1, static_cast<std::size_t>(a - 1));
    const auto got = nearest_neighbors(m, row, k);
    const auto want = exhaustive_neighbors(m.rows, row, k);
    REQUIRE(got.size() == want.size());
    for (std::size_t i = 0; i < k; ++i) {
      CHECK(got[i].index == want[i].index);
      CHECK(got[i].distance == doctest::Approx(want[i].distance).epsilon(1e-12));
    }
  }
}

TEST_CASE("nearest neighbors rejects bad arguments") {
  AnswerMatrix m;
  m.rows = Matrix::Zero(3, 2);
  CHECK(error_code_of([&] { nearest_neighbors(m, 3, 1); }) == ErrorCode::kOutOfRange);
  CHECK(error_code_of([&] { nearest_neighbors(m, 0, 3); }) == ErrorCode::kOutOfRange);
  CHECK(error_code_of([&] { nearest_neighbors(m, 0, 0); }) == ErrorCode::kOutOfRange);
}

TEST_CASE("normalize_rows leaves zero rows alone") {
  AnswerMatrix m;
  m.rows = rows_of({{3, 4}, {0, 0}});
  const auto n = normalize_rows(m);
  CHECK(n.rows(0, 0) == doctest::Approx(0.6));
  CHECK(n.rows(0, 1) == doctest::Approx(0.8));
  CHECK(n.rows(1, 0) == 0.0);
}

TEST_CASE("vocabulary files and answer matrices round-trip") {
  const Vocabulary v({"yes", "no", "red circle"});
  std::ostringstream out;
  write_vocabulary(out, v);
  std::istringstream in(out.str());
  CHECK(read_vocabulary(in) == v);
  CHECK(v.find("red circle") == std::optional<std::size_t>(2));
  CHECK_FALSE(v.find("blue").has_value());
  CHECK(error_code_of([] { Vocabulary({"a", "a"}); }) == ErrorCode::kInvalidArgument);

  Rng rng(2);
  AnswerMatrix m;
  m.rows = random_matrix(rng, 4, 3);
  m.scheme = InitScheme::kShuffledGlove;
  m.seed = 77;
  std::ostringstream bin;
  write_answer_matrix(bin, m);
  CHECK(bin.str().rfind("ANSMAT1", 0) == 0);
  std::istringstream bin_in(bin.str());
  const auto back = read_answer_matrix(bin_in);
  CHECK(back.rows == m.rows);
  CHECK(back.scheme == m.scheme);
  CHECK(back.seed == 77);

  std::istringstream truncated(bin.str().substr(0, bin.str().size() - 3));
  CHECK(error_code_of([&] { read_answer_matrix(truncated); }) == ErrorCode::kParse);
  std::istringstream junk("NOTAMAT");
  CHECK(error_code_of([&] { read_answer_matrix(junk); }) == ErrorCode::kParse);
}
