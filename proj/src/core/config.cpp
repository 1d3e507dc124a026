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

#include "core/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <istream>
#include <ostream>
#include <set>

namespace semvqa {
namespace {

std::string_view trim(std::string_view s) {
  const auto ws = " \t\r\n";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  return s.substr(b, s.find_last_not_of(ws) - b + 1);
}

[[noreturn]] void bad_value(std::string_view key, std::string_view value, std::string_view what) {
  fail(ErrorCode::kParse, "bad value '" + std::string(value) + "' for " + std::string(key) +
                              ": expected " + std::string(what));
}

double to_double(std::string_view key, std::string_view v) {
  double out = 0.0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (v.empty() || ec != std::errc() || ptr != v.data() + v.size() || !std::isfinite(out)) {
    bad_value(key, v, "a finite number");
  }
  return out;
}

template <class U>
U to_unsigned(std::string_view key, std::string_view v) {
  U out = 0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (v.empty() || ec != std::errc() || ptr != v.data() + v.size()) {
    bad_value(key, v, "a non-negative integer");
  }
  return out;
}

bool to_bool(std::string_view key, std::string_view v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  bad_value(key, v, "true or false");
}

std::vector<std::string> to_list(std::string_view v) {
  std::vector<std::string> out;
  if (trim(v).empty()) return out;
  std::size_t start = 0;
  while (true) {
    const auto pos = v.find(',', start);
    out.emplace_back(trim(v.substr(start, pos == std::string_view::npos ? v.npos : pos - start)));
    if (pos == std::string_view::npos) return out;
    start = pos + 1;
  }
}

std::string fmt(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

std::string fmt(bool v) { return v ? "true" : "false"; }

template <class T>
std::string join(const std::vector<T>& xs) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) out += ',';
    if constexpr (std::is_same_v<T, std::string>) {
      out += xs[i];
    } else if constexpr (std::is_floating_point_v<T>) {
      out += fmt(xs[i]);
    } else {
      out += std::to_string(xs[i]);
    }
  }
  return out;
}

template <class U>
std::vector<U> to_unsigned_list(std::string_view key, std::string_view v) {
  std::vector<U> out;
  for (const auto& item : to_list(v)) out.push_back(to_unsigned<U>(key, item));
  return out;
}

template <class Target>
struct Field {
  std::string name;
  std::function<std::string(const Target&)> get;
  std::function<void(Target&, std::string_view)> set;
};

#define SEMVQA_FIELD(T, NAME, GET, SET)                                            \
  Field<T> {                                                                       \
    NAME, [](const T& c) -> std::string { return GET; },                           \
        [](T& c, std::string_view v) { [[maybe_unused]] const std::string_view k = NAME; SET; } \
  }

const std::vector<Field<TrainConfig>>& train_fields() {
  using T = TrainConfig;
  static const std::vector<Field<T>> fields = {
      SEMVQA_FIELD(T, "lambda", fmt(c.lambda), c.lambda = to_double(k, v)),
      SEMVQA_FIELD(T, "margin", fmt(c.margin), c.margin = to_double(k, v)),
      SEMVQA_FIELD(T, "metric", std::string(to_string(c.metric)), c.metric = parse_metric(v)),
      SEMVQA_FIELD(T, "iterations", std::to_string(c.iterations),
                   c.iterations = to_unsigned<std::size_t>(k, v)),
      SEMVQA_FIELD(T, "batch_size", std::to_string(c.batch_size),
                   c.batch_size = to_unsigned<std::size_t>(k, v)),
      SEMVQA_FIELD(T, "base_lr", fmt(c.base_lr), c.base_lr = to_double(k, v)),
      SEMVQA_FIELD(T, "warmup_iters", std::to_string(c.warmup_iters),
                   c.warmup_iters = to_unsigned<std::size_t>(k, v)),
      SEMVQA_FIELD(T, "warmup_start_factor", fmt(c.warmup_start_factor),
                   c.warmup_start_factor = to_double(k, v)),
      SEMVQA_FIELD(T, "lr_decay_steps", join(c.lr_decay_steps),
                   c.lr_decay_steps = to_unsigned_list<std::size_t>(k, v)),
      SEMVQA_FIELD(T, "decay_factor", fmt(c.decay_factor), c.decay_factor = to_double(k, v)),
      SEMVQA_FIELD(T, "optimizer", std::string(to_string(c.optimizer)),
                   c.optimizer = parse_optimizer(v)),
      SEMVQA_FIELD(T, "beta1", fmt(c.beta1), c.beta1 = to_double(k, v)),
      SEMVQA_FIELD(T, "beta2", fmt(c.beta2), c.beta2 = to_double(k, v)),
      SEMVQA_FIELD(T, "epsilon", fmt(c.epsilon), c.epsilon = to_double(k, v)),
      SEMVQA_FIELD(T, "seed", std::to_string(c.seed), c.seed = to_unsigned<std::uint64_t>(k, v)),
      SEMVQA_FIELD(T, "normalize_projection", fmt(c.normalize_projection),
                   c.normalize_projection = to_bool(k, v)),
      SEMVQA_FIELD(T, "m_scheme", std::string(to_string(c.m_scheme)),
                   c.m_scheme = parse_init_scheme(v)),
      SEMVQA_FIELD(T, "m_trainable", fmt(c.m_trainable), c.m_trainable = to_bool(k, v)),
      SEMVQA_FIELD(T, "weight_norm", fmt(c.weight_norm), c.weight_norm = to_bool(k, v)),
      SEMVQA_FIELD(T, "embed_dim", std::to_string(c.embed_dim),
                   c.embed_dim = to_unsigned<std::size_t>(k, v)),
      SEMVQA_FIELD(T, "fused_dim", std::to_string(c.fused_dim),
                   c.fused_dim = to_unsigned<std::size_t>(k, v)),
      SEMVQA_FIELD(T, "hidden_dim", std::to_string(c.hidden_dim),
                   c.hidden_dim = to_unsigned<std::size_t>(k, v)),
      SEMVQA_FIELD(T, "log_every", std::to_string(c.log_every),
                   c.log_every = to_unsigned<std::size_t>(k, v)),
  };
  return fields;
}

std::vector<Template> to_templates(std::string_view v) {
  std::vector<Template> out;
  for (const auto& item : to_list(v)) out.push_back(parse_template(item));
  return out;
}

std::string join_templates(const std::vector<Template>& ts) {
  std::vector<std::string> names;
  for (auto t : ts) names.emplace_back(to_string(t));
  return join(names);
}

std::string_view to_string(SplitSpec::Mode m) {
  return m == SplitSpec::Mode::kOov ? "oov" : "standard";
}

SplitSpec::Mode parse_split_mode(std::string_view v) {
  if (v == "standard") return SplitSpec::Mode::kStandard;
  if (v == "oov") return SplitSpec::Mode::kOov;
  fail(ErrorCode::kParse, "unknown split mode '" + std::string(v) + "'");
}

const std::vector<Field<ExperimentConfig>>& experiment_fields() {
  using T = ExperimentConfig;
  static const std::vector<Field<T>> fields = [] {
    std::vector<Field<T>> f;
    for (const auto& tf : train_fields()) {
      f.push_back({"train." + tf.name, [g = tf.get](const T& c) { return g(c.train); },
                   [s = tf.set](T& c, std::string_view v) { s(c.train, v); }});
    }
    f.push_back(SEMVQA_FIELD(T, "train.seeds", join(c.seeds),
                             c.seeds = to_unsigned_list<std::uint64_t>(k, v)));
    f.push_back(SEMVQA_FIELD(T, "data.colors", join(c.data.inventory.colors),
                             c.data.inventory.colors = to_list(v)));
    f.push_back(SEMVQA_FIELD(T, "data.shapes", join(c.data.inventory.shapes),
                             c.data.inventory.shapes = to_list(v)));
    f.push_back(SEMVQA_FIELD(T, "data.sizes", join(c.data.inventory.sizes),
                             c.data.inventory.sizes = to_list(v)));
    f.push_back(SEMVQA_FIELD(T, "data.rows", join(c.data.inventory.rows),
                             c.data.inventory.rows = to_list(v)));
    f.push_back(SEMVQA_FIELD(T, "data.cols", join(c.data.inventory.cols),
                             c.data.inventory.cols = to_list(v)));
    f.push_back(SEMVQA_FIELD(T, "data.numbers", join(c.data.inventory.numbers),
                             c.data.inventory.numbers = to_list(v)));
    f.push_back(SEMVQA_FIELD(T, "data.min_objects", std::to_string(c.data.min_objects),
                             c.data.min_objects = to_unsigned<std::size_t>(k, v)));
    f.push_back(SEMVQA_FIELD(T, "data.max_objects", std::to_string(c.data.max_objects),
                             c.data.max_objects = to_unsigned<std::size_t>(k, v)));
    f.push_back(SEMVQA_FIELD(T, "data.noise", fmt(c.data.noise), c.data.noise = to_double(k, v)));
    f.push_back(SEMVQA_FIELD(T, "data.num_questions", std::to_string(c.data.num_questions),
                             c.data.num_questions = to_unsigned<std::size_t>(k, v)));
    f.push_back(SEMVQA_FIELD(T, "data.questions_per_scene",
                             std::to_string(c.data.questions_per_scene),
                             c.data.questions_per_scene = to_unsigned<std::size_t>(k, v)));
    f.push_back(SEMVQA_FIELD(T, "data.templates", join_templates(c.data.templates),
                             c.data.templates = to_templates(v)));
    f.push_back(SEMVQA_FIELD(T, "data.seed", std::to_string(c.data.seed),
                             c.data.seed = to_unsigned<std::uint64_t>(k, v)));
    f.push_back(SEMVQA_FIELD(T, "data.embedding_dim", std::to_string(c.embedding.dimension),
                             c.embedding.dimension = to_unsigned<std::size_t>(k, v)));
    f.push_back(SEMVQA_FIELD(T, "data.embedding_category_weight",
                             fmt(c.embedding.category_weight),
                             c.embedding.category_weight = to_double(k, v)));
    f.push_back(SEMVQA_FIELD(T, "data.embedding_word_weight", fmt(c.embedding.word_weight),
                             c.embedding.word_weight = to_double(k, v)));
    f.push_back(SEMVQA_FIELD(T, "data.embedding_seed", std::to_string(c.embedding.seed),
                             c.embedding.seed = to_unsigned<std::uint64_t>(k, v)));
    f.push_back(SEMVQA_FIELD(T, "split.mode", std::string(to_string(c.split.mode)),
                             c.split.mode = parse_split_mode(v)));
    f.push_back(SEMVQA_FIELD(T, "split.train_fraction", fmt(c.split.train_fraction),
                             c.split.train_fraction = to_double(k, v)));
    f.push_back(SEMVQA_FIELD(T, "split.seed", std::to_string(c.split.seed),
                             c.split.seed = to_unsigned<std::uint64_t>(k, v)));
    f.push_back(SEMVQA_FIELD(T, "split.min_count", std::to_string(c.split.min_count),
                             c.split.min_count = to_unsigned<std::size_t>(k, v)));
    f.push_back(SEMVQA_FIELD(T, "split.max_count", std::to_string(c.split.max_count),
                             c.split.max_count = to_unsigned<std::size_t>(k, v)));
    f.push_back(SEMVQA_FIELD(T, "eval.lambda",
                             c.eval_lambda ? fmt(*c.eval_lambda) : std::string(),
                             c.eval_lambda = trim(v).empty()
                                                 ? std::nullopt
                                                 : std::optional<double>(to_double(k, v))));
    f.push_back(SEMVQA_FIELD(T, "eval.lambdas", join(c.sweep_lambdas), {
      c.sweep_lambdas.clear();
      for (const auto& item : to_list(v)) c.sweep_lambdas.push_back(to_double(k, item));
    }));
    f.push_back(SEMVQA_FIELD(T, "eval.label", c.label, c.label = std::string(v)));
    return f;
  }();
  return fields;
}

#undef SEMVQA_FIELD

template <class T>
const Field<T>* find_field(const std::vector<Field<T>>& fields, std::string_view key) {
  for (const auto& f : fields) {
    if (f.name == key) return &f;
  }
  return nullptr;
}

}  // namespace

KeyValues parse_key_values(std::istream& in) {
  KeyValues out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto eq = t.find('=');
    const std::string where = "config line " + std::to_string(line_no);
    if (eq == std::string_view::npos) fail(ErrorCode::kParse, where + ": expected key = value");
    const std::string key(trim(t.substr(0, eq)));
    if (key.empty()) fail(ErrorCode::kParse, where + ": empty key");
    if (!out.emplace(key, std::string(trim(t.substr(eq + 1)))).second) {
      fail(ErrorCode::kParse, where + ": duplicate key '" + key + "'");
    }
  }
  return out;
}

KeyValues load_key_values(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::kIo, "cannot open '" + path + "' for reading");
  return parse_key_values(in);
}

void write_key_values(std::ostream& out, const KeyValues& values) {
  for (const auto& [k, v] : values) out << k << " = " << v << '\n';
}

void ExperimentConfig::set(std::string_view key, std::string_view value) {
  value = trim(value);
  if (key.starts_with("paths.") && key.size() > 6) {
    paths[std::string(key.substr(6))] = std::string(value);
    return;
  }
  const auto* f = find_field(experiment_fields(), key);
  require(f != nullptr, ErrorCode::kInvalidArgument, "unknown config key '" + std::string(key) + "'");
  f->set(*this, value);
}

std::string ExperimentConfig::get(std::string_view key) const {
  if (key.starts_with("paths.") && key.size() > 6) {
    auto it = paths.find(std::string(key.substr(6)));
    require(it != paths.end(), ErrorCode::kInvalidArgument,
            "path '" + std::string(key) + "' is not set");
    return it->second;
  }
  const auto* f = find_field(experiment_fields(), key);
  require(f != nullptr, ErrorCode::kInvalidArgument, "unknown config key '" + std::string(key) + "'");
  return f->get(*this);
}

void ExperimentConfig::apply(const KeyValues& values) {
  for (const auto& [k, v] : values) set(k, v);
}

KeyValues ExperimentConfig::to_key_values() const {
  KeyValues out;
  for (const auto& f : experiment_fields()) out[f.name] = f.get(*this);
  for (const auto& [k, v] : paths) out["paths." + k] = v;
  return out;
}

std::vector<std::uint64_t> ExperimentConfig::seed_list() const {
  if (seeds.empty()) return {train.seed};
  std::set<std::uint64_t> seen;
  for (auto s : seeds) {
    require(seen.insert(s).second, ErrorCode::kInvalidArgument,
            "duplicate seed " + std::to_string(s) + " in train.seeds");
  }
  return seeds;
}

void ExperimentConfig::validate() const {
  train.validate();
  data.validate();
  split.validate();
  seed_list();
  require(embedding.dimension > 0, ErrorCode::kInvalidArgument, "embedding dimension must be positive");
  if (eval_lambda) {
    require(*eval_lambda >= 0.0 && *eval_lambda <= 1.0, ErrorCode::kInvalidArgument,
            "eval.lambda must lie in [0, 1]");
  }
  for (double l : sweep_lambdas) {
    require(l >= 0.0 && l <= 1.0, ErrorCode::kInvalidArgument, "eval.lambdas must lie in [0, 1]");
  }
}

KeyValues train_config_keys(const TrainConfig& config) {
  KeyValues out;
  for (const auto& f : train_fields()) out[f.name] = f.get(config);
  return out;
}

TrainConfig train_config_from_keys(const KeyValues& values) {
  TrainConfig c;
  for (const auto& [k, v] : values) {
    const auto* f = find_field(train_fields(), k);
    require(f != nullptr, ErrorCode::kInvalidArgument, "unknown training key '" + k + "'");
    f->set(c, v);
  }
  return c;
}

}  // namespace semvqa
