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

// Drives the semvqa executable end to end in a scratch directory.
#include <doctest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;

namespace {

const fs::path kScratch = fs::temp_directory_path() / ("semvqa_cli_" + std::to_string(::getpid()));

// Small enough that every command finishes in well under a second.
const std::string kSmall =
    " --set data.num_questions=300 --set train.iterations=30 --set train.batch_size=16"
    " --set train.warmup_iters=5 --set train.lr_decay_steps=20 --set train.log_every=10"
    " --set train.fused_dim=16 --set train.hidden_dim=8 --set train.embed_dim=8";

struct Run {
  int code = -1;
  std::string out;
};

Run semvqa(const fs::path& dir, const std::string& args) {
  const fs::path log = kScratch / "stdout.txt";
  const std::string cmd = std::string(SEMVQA_CLI_PATH) + " -q --out-dir " + dir.string() + kSmall +
                          " " + args + " > " + log.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  Run r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  std::ifstream in(log);
  r.out.assign(std::istreambuf_iterator<char>(in), {});
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE_MESSAGE(in.good(), p.string());
  return {std::istreambuf_iterator<char>(in), {}};
}

std::vector<std::string> lines(const fs::path& p) {
  std::istringstream in(slurp(p));
  std::vector<std::string> out;
  for (std::string l; std::getline(in, l);)
    if (!l.empty()) out.push_back(l);
  return out;
}

std::size_t count_files(const fs::path& dir, const std::string& suffix) {
  std::size_t n = 0;
  for (const auto& e : fs::directory_iterator(dir)) {
    const auto name = e.path().filename().string();
    if (name.size() >= suffix.size() && name.compare(name.size() - suffix.size(), suffix.size(), suffix) == 0) ++n;
  }
  return n;
}

std::map<std::string, std::string> report_values(const fs::path& p) {
  std::map<std::string, std::string> kv;
  for (const auto& l : lines(p)) {
    const auto eq = l.find('=');
    if (eq != std::string::npos) kv[l.substr(0, eq)] = l.substr(eq + 1);
  }
  return kv;
}

#define RUN_OK(dir, args)                       \
  do {                                          \
    const std::string a_ = (args);              \
    const auto r_ = semvqa(dir, a_);            \
    REQUIRE_MESSAGE(r_.code == 0, (a_ + "\n" + r_.out)); \
  } while (0)

struct Scratch {
  Scratch() { fs::create_directories(kScratch); }
  ~Scratch() { fs::remove_all(kScratch); }
};
const Scratch scratch_guard;

}  // namespace

TEST_CASE("gen-data is deterministic and honors the count and oov flags") {
  const auto a = kScratch / "gen_a", b = kScratch / "gen_b", c = kScratch / "gen_c";
  RUN_OK(a, "--seed 7 gen-data");
  RUN_OK(b, "--seed 7 gen-data");
  for (const char* f : {"all.tsv", "train.tsv", "test.tsv", "answers.txt", "tokens.txt", "embeddings.txt", "config.txt"}) {
    CHECK_MESSAGE(slurp(a / f) == slurp(b / f), f);
  }
  CHECK(lines(a / "all.tsv").size() == 300);
  RUN_OK(c, "gen-data --num-questions 123");
  CHECK(lines(c / "all.tsv").size() == 123);

  const auto o = kScratch / "gen_oov";
  RUN_OK(o, "--set split.min_count=2 gen-data --oov");
  const auto tr = lines(o / "train_answers.txt"), te = lines(o / "test_answers.txt");
  CHECK(!tr.empty());
  CHECK(!te.empty());
  const std::set<std::string> train_set(tr.begin(), tr.end());
  for (const auto& a2 : te) CHECK(train_set.count(a2) == 0);
}

TEST_CASE("train, eval, ensembles and reports") {
  const auto d = kScratch / "pipeline";
  RUN_OK(d, "gen-data");
  const std::string cfg = "--config " + (d / "config.txt").string() + " ";

  RUN_OK(d, cfg + "train --lambda 1 --seeds 1,2,3,4,5");
  for (int s = 1; s <= 5; ++s) CHECK(fs::exists(d / ("baseline-s" + std::to_string(s) + ".ckpt")));
  CHECK(count_files(d, ".ckpt") == 5);
  CHECK(count_files(d, ".history.csv") == 5);

  // Rerunning overwrites with identical bytes.
  const auto before = slurp(d / "baseline-s3.ckpt");
  RUN_OK(d, cfg + "train --lambda 1 --seeds 3");
  CHECK(slurp(d / "baseline-s3.ckpt") == before);

  RUN_OK(d, cfg + "eval --lambda 1 --label baseline --seeds 1,2,3,4,5");
  CHECK(count_files(d, ".report.txt") == 6);
  CHECK(fs::exists(d / "baseline-ensemble.report.txt"));
  CHECK(fs::exists(d / "baseline-ensemble.report.json"));

  // An ensemble of one checkpoint twice scores exactly like the checkpoint.
  const auto dup = kScratch / "dup";
  RUN_OK(dup, "--set paths.test=" + (d / "test.tsv").string() + " --set paths.all=" + (d / "all.tsv").string() +
                  " " + cfg + "eval --label twin --checkpoints " + (d / "baseline-s2.ckpt").string() + "," +
                  (d / "baseline-s2.ckpt").string());
  auto single = report_values(d / "baseline-s2.report.txt");
  auto twin = report_values(dup / "twin-ensemble.report.txt");
  single.erase("label");
  twin.erase("label");
  CHECK(single == twin);

  // report: passthrough for one file, recomputed means for several.
  const auto one = semvqa(d, "report " + (d / "baseline-s1.report.txt").string());
  REQUIRE(one.code == 0);
  CHECK(one.out.find("baseline-s1") != std::string::npos);
  CHECK(one.out.find("mean") == std::string::npos);
  const auto acc1 = report_values(d / "baseline-s1.report.txt").at("accuracy");
  CHECK(one.out.find(acc1.substr(0, 5)) != std::string::npos);

  std::string paths;
  double sum = 0.0;
  for (int s = 1; s <= 3; ++s) {
    const auto p = d / ("baseline-s" + std::to_string(s) + ".report.txt");
    paths += " " + p.string();
    sum += std::stod(report_values(p).at("accuracy"));
  }
  const auto three = semvqa(d, "report" + paths);
  REQUIRE(three.code == 0);
  std::istringstream rows(three.out);
  std::string mean_row;
  for (std::string l; std::getline(rows, l);)
    if (l.rfind("mean", 0) == 0) mean_row = l;
  REQUIRE(!mean_row.empty());
  std::istringstream fields(mean_row);
  std::string label, lambda, count, accuracy;
  fields >> label >> lambda >> count >> accuracy;
  CHECK(std::stod(accuracy) == doctest::Approx(sum / 3.0).epsilon(1e-3));
}

TEST_CASE("sweep-lambda emits one row per lambda") {
  const auto d = kScratch / "sweep";
  RUN_OK(d, "gen-data");
  const std::string cfg = "--config " + (d / "config.txt").string() + " ";
  RUN_OK(d, cfg + "sweep-lambda --seeds 1,2");
  auto rows = lines(d / "sweep.csv");
  REQUIRE(rows.size() == 6);
  CHECK(rows[0] == "lambda,mean,sd,runs");
  for (std::size_t i = 1; i < rows.size(); ++i) {
    double lambda = 0, mean = -1, sd = -1;
    int runs = 0;
    REQUIRE(std::sscanf(rows[i].c_str(), "%lf,%lf,%lf,%d", &lambda, &mean, &sd, &runs) == 4);
    CHECK(mean >= 0.0);
    CHECK(mean <= 1.0);
    CHECK(sd >= 0.0);
    CHECK(runs == 2);
  }
  RUN_OK(d, cfg + "sweep-lambda --lambdas 0,1");
  rows = lines(d / "sweep.csv");
  REQUIRE(rows.size() == 3);
  CHECK(rows[1].rfind("0,", 0) == 0);
  CHECK(rows[2].rfind("1,", 0) == 0);
}

TEST_CASE("oov-eval") {
  const auto d = kScratch / "oov";
  RUN_OK(d, "--set split.min_count=2 gen-data --oov");
  const std::string cfg = "--config " + (d / "config.txt").string() + " ";
  RUN_OK(d, cfg + "train --lambda 0 --m-trainable false --seeds 1");
  const auto r = semvqa(d, cfg + "oov-eval --seeds 1 --label lambda0-glove");
  REQUIRE_MESSAGE(r.code == 0, r.out);
  const auto novel = lines(d / "test_answers.txt").size();
  char chance[32];
  std::snprintf(chance, sizeof chance, "%.4f", 1.0 / static_cast<double>(novel));
  CHECK_MESSAGE(r.out.find(chance) != std::string::npos, r.out);
  CHECK(fs::exists(d / "lambda0-glove-s1-oov.report.txt"));
  const auto bad = semvqa(d, cfg + "oov-eval --seeds 1 --label lambda0-glove --lambda 0.5");
  CHECK(bad.code == 1);
}

TEST_CASE("errors and the gradient check") {
  const auto d = kScratch / "errors";
  const auto r = semvqa(d, "--set train.nonsense=1 gen-data");
  CHECK(r.code == 1);
  CHECK(r.out.find("error") != std::string::npos);
  CHECK(semvqa(d, "eval --checkpoints /nonexistent.ckpt").code == 1);
  CHECK(semvqa(d, "report").code != 0);
  const auto g = semvqa(d, "check-grads --instances 2");
  CHECK_MESSAGE(g.code == 0, g.out);
}
