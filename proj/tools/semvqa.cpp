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

// semvqa command-line tool. Talks to the library only through the C API.

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "semvqa/semvqa.h"

namespace fs = std::filesystem;

namespace {

struct CommandError : std::runtime_error {
  CommandError(semvqa_status s, const std::string& what) : std::runtime_error(what), status(s) {}
  semvqa_status status;
};

void check(semvqa_status s) {
  if (s != SEMVQA_OK) throw CommandError(s, semvqa_last_error());
}

template <class T, void (*Destroy)(T*)>
struct Deleter {
  void operator()(T* p) const { Destroy(p); }
};

using Config = std::unique_ptr<semvqa_config, Deleter<semvqa_config, semvqa_config_destroy>>;
using Embeddings =
    std::unique_ptr<semvqa_embeddings, Deleter<semvqa_embeddings, semvqa_embeddings_destroy>>;
using Vocab = std::unique_ptr<semvqa_vocab, Deleter<semvqa_vocab, semvqa_vocab_destroy>>;
using Dataset = std::unique_ptr<semvqa_dataset, Deleter<semvqa_dataset, semvqa_dataset_destroy>>;
using Model = std::unique_ptr<semvqa_model, Deleter<semvqa_model, semvqa_model_destroy>>;
using History = std::unique_ptr<semvqa_history, Deleter<semvqa_history, semvqa_history_destroy>>;
using Predictions =
    std::unique_ptr<semvqa_predictions, Deleter<semvqa_predictions, semvqa_predictions_destroy>>;
using Report = std::unique_ptr<semvqa_report, Deleter<semvqa_report, semvqa_report_destroy>>;

// Takes ownership of whatever a C API constructor wrote.
template <class Ptr, class F>
Ptr make(F&& f) {
  typename Ptr::pointer raw = nullptr;
  check(f(&raw));
  return Ptr(raw);
}

template <class F>
std::string read_string(F&& f) {
  std::size_t n = 0;
  check(f(nullptr, 0, &n));
  std::string s(n + 1, '\0');
  check(f(s.data(), s.size(), &n));
  s.resize(n);
  return s;
}

struct Globals {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_dir;
  bool quiet = false;
  std::vector<std::string> sets;
  std::map<std::string, std::string> mirrored;  // flag-provided keys
};

class Context {
 public:
  explicit Context(const Globals& g) : quiet_(g.quiet) {
    cfg_ = make<Config>([](semvqa_config** o) { return semvqa_config_create(o); });
    if (!g.config_path.empty()) check(semvqa_config_load(cfg_.get(), g.config_path.c_str()));
    for (const auto& kv : g.sets) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) {
        throw CommandError(SEMVQA_ERR_INVALID_ARGUMENT, "--set expects key=value, got '" + kv + "'");
      }
      set(kv.substr(0, eq), kv.substr(eq + 1));
    }
    for (const auto& [k, v] : g.mirrored) set(k, v);
    if (g.seed) {
      const auto s = std::to_string(*g.seed);
      for (const char* key : {"train.seed", "data.seed", "split.seed"}) set(key, s);
    }
    check(semvqa_config_validate(cfg_.get()));

    if (!g.out_dir.empty()) {
      out_dir_ = g.out_dir;
    } else if (auto p = path_key("out_dir")) {
      out_dir_ = *p;
    } else if (const char* env = std::getenv("SEMVQA_OUT_DIR"); env && *env) {
      out_dir_ = env;
    } else {
      out_dir_ = "semvqa-out";
    }
  }

  semvqa_config* config() const { return cfg_.get(); }
  bool quiet() const { return quiet_; }

  void set(const std::string& key, const std::string& value) {
    check(semvqa_config_set(cfg_.get(), key.c_str(), value.c_str()));
  }
  std::string get(const std::string& key) const {
    return read_string([&](char* b, std::size_t c, std::size_t* n) {
      return semvqa_config_get(cfg_.get(), key.c_str(), b, c, n);
    });
  }
  std::optional<std::string> path_key(const std::string& name) const {
    std::size_t n = 0;
    const std::string key = "paths." + name;
    if (semvqa_config_get(cfg_.get(), key.c_str(), nullptr, 0, &n) != SEMVQA_OK) return std::nullopt;
    return get(key);
  }
  // paths.<name> when configured, else <out_dir>/<fallback>.
  std::string path(const std::string& name, const std::string& fallback) const {
    if (auto p = path_key(name)) return *p;
    return (out_dir_ / fallback).string();
  }
  fs::path out(const std::string& file) const { return out_dir_ / file; }
  void ensure_out_dir() const {
    std::error_code ec;
    fs::create_directories(out_dir_, ec);
    if (ec) {
      throw CommandError(SEMVQA_ERR_IO, "cannot create output directory '" + out_dir_.string() +
                                            "': " + ec.message());
    }
  }

  std::vector<std::uint64_t> seeds() const {
    std::size_t n = 0;
    check(semvqa_config_seed_count(cfg_.get(), &n));
    std::vector<std::uint64_t> out(n);
    for (std::size_t i = 0; i < n; ++i) check(semvqa_config_seed_at(cfg_.get(), i, &out[i]));
    return out;
  }

  double number(const std::string& key) const { return std::stod(get(key)); }

  // eval.label, or "baseline" at lambda 1, or lambda<l>-<scheme>.
  std::string label() const {
    if (auto l = get("eval.label"); !l.empty()) return l;
    const double lambda = number("train.lambda");
    if (lambda == 1.0) return "baseline";
    return "lambda" + get("train.lambda") + "-" + get("train.m_scheme");
  }

  void info(const std::string& line) const {
    if (!quiet_) std::cout << line << '\n';
  }

 private:
  Config cfg_;
  fs::path out_dir_;
  bool quiet_ = false;
};

std::string fixed(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

Dataset load_dataset(const std::string& path) {
  return make<Dataset>([&](semvqa_dataset** o) { return semvqa_dataset_load(path.c_str(), o); });
}
Vocab load_vocab(const std::string& path) {
  return make<Vocab>([&](semvqa_vocab** o) { return semvqa_vocab_load(path.c_str(), o); });
}
Embeddings load_embeddings(const std::string& path) {
  return make<Embeddings>([&](semvqa_embeddings** o) { return semvqa_embeddings_load(path.c_str(), o); });
}
Model load_model(const std::string& path) {
  return make<Model>([&](semvqa_model** o) { return semvqa_model_load(path.c_str(), o); });
}
std::size_t dataset_size(const semvqa_dataset* d) {
  std::size_t n = 0;
  check(semvqa_dataset_size(d, &n));
  return n;
}
std::size_t vocab_size(const semvqa_vocab* v) {
  std::size_t n = 0;
  check(semvqa_vocab_size(v, &n));
  return n;
}
std::string vocab_at(const semvqa_vocab* v, std::size_t i) {
  return read_string([&](char* b, std::size_t c, std::size_t* n) { return semvqa_vocab_at(v, i, b, c, n); });
}
double report_value(const semvqa_report* r, const char* key) {
  double v = 0.0;
  check(semvqa_report_value(r, key, &v));
  return v;
}
std::string model_get(const semvqa_model* m, const char* key) {
  return read_string([&](char* b, std::size_t c, std::size_t* n) { return semvqa_model_get(m, key, b, c, n); });
}
std::string table_of(const std::vector<const semvqa_report*>& reports) {
  return read_string([&](char* b, std::size_t c, std::size_t* n) {
    return semvqa_report_table(reports.data(), reports.size(), b, c, n);
  });
}

// The answer vocabulary a run trains against: paths.answers when set, the
// training half of an oov split, or the full benchmark vocabulary.
std::string training_answers_path(const Context& ctx) {
  if (auto p = ctx.path_key("answers")) return *p;
  if (ctx.get("split.mode") == "oov") return ctx.out("train_answers.txt").string();
  return ctx.out("answers.txt").string();
}

std::vector<std::string> checkpoint_paths(const Context& ctx) {
  if (auto p = ctx.path_key("checkpoints")) {
    std::vector<std::string> out;
    std::stringstream ss(*p);
    for (std::string item; std::getline(ss, item, ',');) {
      if (!item.empty()) out.push_back(item);
    }
    return out;
  }
  std::vector<std::string> out;
  for (auto seed : ctx.seeds()) {
    out.push_back(ctx.out(ctx.label() + "-s" + std::to_string(seed) + ".ckpt").string());
  }
  return out;
}

std::string ensemble_name(const Context& ctx, const std::vector<std::string>& paths) {
  if (ctx.path_key("checkpoints") && ctx.get("eval.label").empty()) return fs::path(paths.front()).stem().string() + "-ensemble";
  return ctx.label() + "-ensemble";
}

std::string sci(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

std::optional<Dataset> reference_dataset(const Context& ctx) {
  const auto path = ctx.path("train", "train.tsv");
  if (!fs::exists(path)) return std::nullopt;
  return load_dataset(path);
}

Report write_report(const Context& ctx, const semvqa_predictions* preds, const semvqa_dataset* data,
                    const semvqa_dataset* reference, const semvqa_vocab* answers,
                    const std::string& name, double lambda) {
  auto report = make<Report>([&](semvqa_report** o) {
    return semvqa_report_compute(preds, data, reference, ctx.config(), answers, name.c_str(), lambda, o);
  });
  check(semvqa_predictions_save(preds, ctx.out(name + ".predictions.tsv").c_str()));
  check(semvqa_report_save(report.get(), ctx.out(name + ".report.txt").c_str(),
                           ctx.out(name + ".report.json").c_str()));
  return report;
}

// ---- commands

int cmd_gen_data(const Context& ctx) {
  ctx.ensure_out_dir();
  auto cfg = ctx.config();
  auto all = make<Dataset>([&](semvqa_dataset** o) { return semvqa_dataset_generate(cfg, o); });
  semvqa_dataset *train_raw = nullptr, *test_raw = nullptr;
  semvqa_vocab *tra_raw = nullptr, *tea_raw = nullptr;
  check(semvqa_dataset_split(all.get(), cfg, &train_raw, &test_raw, &tra_raw, &tea_raw));
  Dataset train(train_raw), test(test_raw);
  Vocab train_answers(tra_raw), test_answers(tea_raw);
  auto answers = make<Vocab>([&](semvqa_vocab** o) { return semvqa_vocab_answers(cfg, o); });
  auto tokens = make<Vocab>([&](semvqa_vocab** o) { return semvqa_vocab_tokens(cfg, o); });
  auto emb = make<Embeddings>([&](semvqa_embeddings** o) { return semvqa_embeddings_synthetic(cfg, o); });

  check(semvqa_dataset_save(all.get(), ctx.out("all.tsv").c_str()));
  check(semvqa_dataset_save(train.get(), ctx.path("train", "train.tsv").c_str()));
  check(semvqa_dataset_save(test.get(), ctx.path("test", "test.tsv").c_str()));
  check(semvqa_vocab_save(answers.get(), ctx.out("answers.txt").c_str()));
  check(semvqa_vocab_save(tokens.get(), ctx.path("tokens", "tokens.txt").c_str()));
  check(semvqa_embeddings_save(emb.get(), ctx.path("embeddings", "embeddings.txt").c_str()));
  const bool oov = ctx.get("split.mode") == "oov";
  if (oov) {
    check(semvqa_vocab_save(train_answers.get(), ctx.out("train_answers.txt").c_str()));
    check(semvqa_vocab_save(test_answers.get(), ctx.out("test_answers.txt").c_str()));
  }
  check(semvqa_config_save(cfg, ctx.out("config.txt").c_str()));

  ctx.info("questions " + std::to_string(dataset_size(all.get())) + "  train " +
           std::to_string(dataset_size(train.get())) + "  test " +
           std::to_string(dataset_size(test.get())) + "  answers " +
           std::to_string(vocab_size(answers.get())));
  if (oov) {
    ctx.info("oov answers  train " + std::to_string(vocab_size(train_answers.get())) + "  test " +
             std::to_string(vocab_size(test_answers.get())));
  }
  return 0;
}

int cmd_train(const Context& ctx) {
  ctx.ensure_out_dir();
  auto train = load_dataset(ctx.path("train", "train.tsv"));
  auto tokens = load_vocab(ctx.path("tokens", "tokens.txt"));
  auto answers = load_vocab(training_answers_path(ctx));
  auto emb = load_embeddings(ctx.path("embeddings", "embeddings.txt"));
  const auto label = ctx.label();
  for (auto seed : ctx.seeds()) {
    semvqa_model* m = nullptr;
    semvqa_history* h = nullptr;
    check(semvqa_model_train(ctx.config(), seed, train.get(), tokens.get(), answers.get(), emb.get(),
                             &m, &h));
    Model model(m);
    History history(h);
    const auto stem = label + "-s" + std::to_string(seed);
    check(semvqa_model_save(model.get(), ctx.out(stem + ".ckpt").c_str()));
    check(semvqa_history_save(history.get(), ctx.out(stem + ".history.csv").c_str()));
    std::size_t n = 0;
    check(semvqa_history_size(history.get(), &n));
    std::string line = stem + ".ckpt";
    if (n > 0) {
      semvqa_history_record last{};
      check(semvqa_history_at(history.get(), n - 1, &last));
      line += "  iteration " + std::to_string(last.iteration) + "  loss " + fixed(last.loss) +
              "  batch accuracy " + fixed(last.accuracy);
    }
    ctx.info(line);
  }
  return 0;
}

int cmd_eval(const Context& ctx) {
  ctx.ensure_out_dir();
  auto data = load_dataset(ctx.path("test", "test.tsv"));
  auto reference = reference_dataset(ctx);
  const auto paths = checkpoint_paths(ctx);
  std::vector<Model> models;
  for (const auto& p : paths) models.push_back(load_model(p));
  const std::string eval_lambda = ctx.get("eval.lambda");

  std::vector<Report> reports;
  for (std::size_t i = 0; i < models.size(); ++i) {
    const double lambda =
        eval_lambda.empty() ? std::stod(model_get(models[i].get(), "lambda")) : std::stod(eval_lambda);
    auto preds = make<Predictions>([&](semvqa_predictions** o) {
      return semvqa_evaluate(models[i].get(), data.get(), lambda, o);
    });
    auto answers = make<Vocab>([&](semvqa_vocab** o) { return semvqa_model_answers(models[i].get(), o); });
    reports.push_back(write_report(ctx, preds.get(), data.get(),
                                   reference ? reference->get() : nullptr, answers.get(),
                                   fs::path(paths[i]).stem().string(), lambda));
  }
  if (models.size() > 1) {
    const double lambda =
        eval_lambda.empty() ? std::stod(model_get(models[0].get(), "lambda")) : std::stod(eval_lambda);
    std::vector<const semvqa_model*> members;
    for (const auto& m : models) members.push_back(m.get());
    auto preds = make<Predictions>([&](semvqa_predictions** o) {
      return semvqa_evaluate_ensemble(members.data(), members.size(), data.get(), lambda, o);
    });
    auto answers = make<Vocab>([&](semvqa_vocab** o) { return semvqa_model_answers(models[0].get(), o); });
    reports.push_back(write_report(ctx, preds.get(), data.get(),
                                   reference ? reference->get() : nullptr, answers.get(),
                                   ensemble_name(ctx, paths), lambda));
  }
  std::vector<const semvqa_report*> rs;
  for (const auto& r : reports) rs.push_back(r.get());
  std::cout << table_of(rs);
  return 0;
}

double mean_of(const std::vector<double>& xs) {
  double s = 0.0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

double sd_of(const std::vector<double>& xs) {
  if (xs.size() < 2) return 0.0;
  const double m = mean_of(xs);
  double s = 0.0;
  for (double x : xs) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(xs.size() - 1));
}

int cmd_sweep_lambda(Context& ctx) {
  ctx.ensure_out_dir();
  auto train = load_dataset(ctx.path("train", "train.tsv"));
  auto test = load_dataset(ctx.path("test", "test.tsv"));
  auto tokens = load_vocab(ctx.path("tokens", "tokens.txt"));
  auto answers = load_vocab(training_answers_path(ctx));
  auto emb = load_embeddings(ctx.path("embeddings", "embeddings.txt"));
  auto run_cfg = make<Config>([&](semvqa_config** o) { return semvqa_config_clone(ctx.config(), o); });

  std::vector<double> lambdas;
  {
    std::stringstream ss(ctx.get("eval.lambdas"));
    for (std::string item; std::getline(ss, item, ',');) lambdas.push_back(std::stod(item));
  }
  std::ostringstream csv;
  csv << "lambda,mean,sd,runs\n";
  std::cout << "lambda    mean      sd  runs\n";
  for (double lambda : lambdas) {
    char lam[32];
    std::snprintf(lam, sizeof lam, "%.17g", lambda);
    check(semvqa_config_set(run_cfg.get(), "train.lambda", lam));
    std::vector<double> acc;
    for (auto seed : ctx.seeds()) {
      semvqa_model* m = nullptr;
      check(semvqa_model_train(run_cfg.get(), seed, train.get(), tokens.get(), answers.get(), emb.get(),
                               &m, nullptr));
      Model model(m);
      auto preds = make<Predictions>([&](semvqa_predictions** o) {
        return semvqa_evaluate(model.get(), test.get(), lambda, o);
      });
      auto report = make<Report>([&](semvqa_report** o) {
        return semvqa_report_compute(preds.get(), test.get(), train.get(), run_cfg.get(), answers.get(),
                                     "", lambda, o);
      });
      acc.push_back(report_value(report.get(), "accuracy"));
    }
    const double mean = mean_of(acc), sd = sd_of(acc);
    csv << lam << ',' << fixed(mean, 6) << ',' << fixed(sd, 6) << ',' << acc.size() << '\n';
    std::printf("%-6s  %.4f  %.4f  %4zu\n", lam, mean, sd, acc.size());
  }
  const auto path = ctx.out("sweep.csv");
  std::ofstream out(path, std::ios::trunc);
  out << csv.str();
  if (!out) throw CommandError(SEMVQA_ERR_IO, "cannot write '" + path.string() + "'");
  return 0;
}

int cmd_oov_eval(const Context& ctx) {
  if (const auto l = ctx.get("eval.lambda"); !l.empty() && std::stod(l) != 0.0) {
    throw CommandError(SEMVQA_ERR_INVALID_ARGUMENT,
                       "oov-eval predicts with lambda = 0 only; got eval.lambda = " + l);
  }
  ctx.ensure_out_dir();
  auto data = load_dataset(ctx.path("test", "test.tsv"));
  auto novel = load_vocab(ctx.path("novel_answers", "test_answers.txt"));
  auto emb = load_embeddings(ctx.path("embeddings", "embeddings.txt"));
  const auto n_novel = vocab_size(novel.get());
  const double chance = 1.0 / static_cast<double>(n_novel);

  std::vector<Report> reports;
  for (const auto& path : checkpoint_paths(ctx)) {
    auto trained = load_model(path);
    auto swapped = make<Model>([&](semvqa_model** o) {
      return semvqa_model_swap_answers(trained.get(), novel.get(), emb.get(), o);
    });
    auto preds = make<Predictions>([&](semvqa_predictions** o) {
      return semvqa_evaluate(swapped.get(), data.get(), 0.0, o);
    });
    auto report = write_report(ctx, preds.get(), data.get(), nullptr, novel.get(),
                               fs::path(path).stem().string() + "-oov", 0.0);
    ctx.info(fs::path(path).stem().string() + "  oov accuracy " +
             fixed(report_value(report.get(), "accuracy")) + "  chance " + fixed(chance) +
             "  novel answers " + std::to_string(n_novel));
    if (!ctx.quiet()) {
      for (std::size_t i = 0; i < n_novel; ++i) {
        const auto a = vocab_at(novel.get(), i);
        double r = 0.0;
        const std::string key = "recall." + a;
        if (semvqa_report_value(report.get(), key.c_str(), &r) == SEMVQA_OK) {
          std::cout << "  recall " << a << "  " << fixed(r) << '\n';
        }
      }
    }
    reports.push_back(std::move(report));
  }
  std::vector<const semvqa_report*> rs;
  for (const auto& r : reports) rs.push_back(r.get());
  std::cout << table_of(rs);
  std::cout << "chance " << fixed(chance) << '\n';
  return 0;
}

int cmd_report(const Context& ctx, const std::vector<std::string>& inputs, const std::string& output) {
  std::vector<Report> reports;
  for (const auto& p : inputs) {
    reports.push_back(make<Report>([&](semvqa_report** o) { return semvqa_report_load(p.c_str(), o); }));
  }
  std::vector<const semvqa_report*> rs;
  for (const auto& r : reports) rs.push_back(r.get());
  const auto table = table_of(rs);
  std::cout << table;
  if (!output.empty()) {
    std::ofstream out(output, std::ios::trunc);
    out << table;
    if (!out) throw CommandError(SEMVQA_ERR_IO, "cannot write '" + output + "'");
  }
  (void)ctx;
  return 0;
}

int cmd_check_grads(const Context& ctx, std::size_t instances, std::uint64_t seed) {
  semvqa_gradcheck_summary s{};
  check(semvqa_gradcheck_run(instances, seed, &s));
  ctx.info("loss cases " + std::to_string(s.loss_cases) + "  max error " + sci(s.max_loss_error));
  ctx.info("head cases " + std::to_string(s.head_cases) + "  max error " + sci(s.max_head_error));
  ctx.info("model cases " + std::to_string(s.model_cases) + "  max error " +
           sci(s.max_model_error));
  ctx.info("redrawn near kinks " + std::to_string(s.redrawn));
  if (!s.passed) {
    std::cerr << "gradient check FAILED: " << s.failures << " mismatches; first: " << semvqa_last_error()
              << '\n';
    return 1;
  }
  std::cout << "gradient check passed\n";
  return 0;
}

// --name VALUE stored under `key`, applied after the config file.
void mirror(CLI::App* app, Globals& g, const std::string& flag, const std::string& key,
            const std::string& help) {
  app->add_option_function<std::string>(
      flag, [&g, key](const std::string& v) { g.mirrored[key] = v; }, help + " [" + key + "]");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dual-objective VQA answer heads on a synthetic benchmark"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--config", g.config_path, "key = value experiment file")->check(CLI::ExistingFile);
  app.add_option("--seed", g.seed, "master seed for data, split and training");
  app.add_option("--out-dir", g.out_dir, "output directory (default $SEMVQA_OUT_DIR or ./semvqa-out)");
  app.add_flag("--quiet,-q", g.quiet, "print results only");
  app.add_option("--set", g.sets, "override any config key: --set train.lambda=0.5");

  auto* gen = app.add_subcommand("gen-data", "generate the synthetic benchmark, vocabularies and embeddings");
  mirror(gen, g, "--num-questions", "data.num_questions", "questions to generate");
  mirror(gen, g, "--noise", "data.noise", "feature noise standard deviation");
  mirror(gen, g, "--split", "split.mode", "standard or oov");
  gen->add_flag_callback("--oov", [&g] { g.mirrored["split.mode"] = "oov"; },
                         "disjoint train and test answers [split.mode]");

  auto add_train_flags = [&](CLI::App* cmd) {
    mirror(cmd, g, "--lambda", "train.lambda", "loss weight of the classifier");
    mirror(cmd, g, "--margin", "train.margin", "hinge margin");
    mirror(cmd, g, "--metric", "train.metric", "euclidean, dot or cosine");
    mirror(cmd, g, "--iterations", "train.iterations", "optimizer steps");
    mirror(cmd, g, "--batch-size", "train.batch_size", "instances per step");
    mirror(cmd, g, "--lr", "train.base_lr", "base learning rate");
    mirror(cmd, g, "--optimizer", "train.optimizer", "adamax or sgd");
    mirror(cmd, g, "--scheme", "train.m_scheme", "glove, random or shuffled-glove");
    mirror(cmd, g, "--m-trainable", "train.m_trainable", "fine-tune the answer matrix");
    mirror(cmd, g, "--seeds", "train.seeds", "comma-separated seeds, one model each");
    mirror(cmd, g, "--label", "eval.label", "run label used in file names");
  };
  auto* train = app.add_subcommand("train", "train one model per seed");
  add_train_flags(train);

  auto* eval = app.add_subcommand("eval", "evaluate checkpoints, plus their ensemble when several");
  mirror(eval, g, "--checkpoints", "paths.checkpoints", "comma-separated checkpoint files");
  mirror(eval, g, "--lambda", "eval.lambda", "prediction lambda (default: the training lambda)");
  mirror(eval, g, "--seeds", "train.seeds", "seeds whose checkpoints to evaluate");
  mirror(eval, g, "--label", "eval.label", "label of the checkpoints to evaluate");
  mirror(eval, g, "--test", "paths.test", "dataset to evaluate on");

  auto* sweep = app.add_subcommand("sweep-lambda", "train and evaluate across loss weights");
  add_train_flags(sweep);
  sweep->remove_option(sweep->get_option("--lambda"));
  mirror(sweep, g, "--lambdas", "eval.lambdas", "comma-separated lambda values");

  auto* oov = app.add_subcommand("oov-eval", "swap in unseen answers and predict at lambda 0");
  mirror(oov, g, "--checkpoints", "paths.checkpoints", "comma-separated checkpoint files");
  mirror(oov, g, "--novel-answers", "paths.novel_answers", "vocabulary of unseen answers");
  mirror(oov, g, "--lambda", "eval.lambda", "must be 0");
  mirror(oov, g, "--seeds", "train.seeds", "seeds whose checkpoints to evaluate");
  mirror(oov, g, "--label", "eval.label", "label of the checkpoints to evaluate");

  auto* report = app.add_subcommand("report", "tabulate metric reports");
  std::vector<std::string> report_inputs;
  std::string report_output;
  report->add_option("reports", report_inputs, "report .txt files")->required()->check(CLI::ExistingFile);
  report->add_option("--output,-o", report_output, "also write the table here");

  auto* grads = app.add_subcommand("check-grads", "finite-difference gradient suite");
  std::size_t grad_instances = 100;
  std::uint64_t grad_seed = 1;
  grads->add_option("--instances", grad_instances, "random instances per metric and lambda");
  grads->add_option("--grad-seed", grad_seed, "seed of the random instances");

  CLI11_PARSE(app, argc, argv);

  try {
    Context ctx(g);
    if (*gen) return cmd_gen_data(ctx);
    if (*train) return cmd_train(ctx);
    if (*eval) return cmd_eval(ctx);
    if (*sweep) return cmd_sweep_lambda(ctx);
    if (*oov) return cmd_oov_eval(ctx);
    if (*report) return cmd_report(ctx, report_inputs, report_output);
    if (*grads) return cmd_check_grads(ctx, grad_instances, grad_seed);
  } catch (const CommandError& e) {
    std::cerr << "error (" << semvqa_status_name(e.status) << "): " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
