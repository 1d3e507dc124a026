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

#include "core/checkpoint.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "core/binary_io.hpp"

namespace semvqa {
namespace {

constexpr char kMagic[8] = {'S', 'V', 'Q', 'A', 'C', 'K', 'P', 'T'};
constexpr std::uint64_t kMaxValues = std::uint64_t{1} << 28;
constexpr std::uint32_t kMaxEntries = 1u << 16;

NamedTensor to_tensor(std::string_view name, const Matrix& m) {
  NamedTensor t{std::string(name), {static_cast<std::uint64_t>(m.rows()), static_cast<std::uint64_t>(m.cols())}, {}};
  t.values.reserve(static_cast<std::size_t>(m.size()));
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) t.values.push_back(m(r, c));
  }
  return t;
}

NamedTensor to_tensor(std::string_view name, const Vector& v) {
  return {std::string(name), {static_cast<std::uint64_t>(v.size())},
          std::vector<double>(v.data(), v.data() + v.size())};
}

void from_tensor(const NamedTensor& t, Matrix& m) {
  require(t.dims.size() == 2, ErrorCode::kParse, "tensor '" + t.name + "' must have rank 2");
  m.resize(static_cast<Eigen::Index>(t.dims[0]), static_cast<Eigen::Index>(t.dims[1]));
  std::size_t i = 0;
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = t.values[i++];
  }
}

void from_tensor(const NamedTensor& t, Vector& v) {
  require(t.dims.size() == 1, ErrorCode::kParse, "tensor '" + t.name + "' must have rank 1");
  v = Eigen::Map<const Vector>(t.values.data(), static_cast<Eigen::Index>(t.values.size()));
}

// Fills every tensor `for_each_tensor` visits from the checkpoint. Layers
// are weight-normalized exactly when their gain tensor is present.
template <class Params>
void read_tensors(const Checkpoint& ckpt, Params& params) {
  std::set<std::string> used;
  for_each_tensor(params, [&](std::string_view name, auto& tensor) {
    const NamedTensor* t = ckpt.find(name);
    require(t != nullptr, ErrorCode::kParse, "checkpoint is missing tensor '" + std::string(name) + "'");
    from_tensor(*t, tensor);
    used.insert(std::string(name));
  });
  for (const auto& t : ckpt.tensors) {
    require(used.count(t.name) > 0, ErrorCode::kParse, "unexpected tensor '" + t.name + "' in checkpoint");
  }
}

void mark_gain(const Checkpoint& ckpt, std::string_view name, NonlinearLayer& layer) {
  if (ckpt.find(name)) layer.gain = Vector::Zero(1);
}

const std::string& meta(const Checkpoint& ckpt, const std::string& key) {
  auto it = ckpt.metadata.find(key);
  require(it != ckpt.metadata.end(), ErrorCode::kParse, "checkpoint metadata lacks '" + key + "'");
  return it->second;
}

std::string fmt(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

double meta_double(const Checkpoint& ckpt, const std::string& key) {
  const auto& s = meta(ckpt, key);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  require(ec == std::errc() && ptr == s.data() + s.size() && std::isfinite(v), ErrorCode::kParse,
          "checkpoint metadata '" + key + "' is not a number");
  return v;
}

std::uint64_t meta_u64(const Checkpoint& ckpt, const std::string& key) {
  const auto& s = meta(ckpt, key);
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  require(ec == std::errc() && ptr == s.data() + s.size(), ErrorCode::kParse,
          "checkpoint metadata '" + key + "' is not an integer");
  return v;
}

bool meta_bool(const Checkpoint& ckpt, const std::string& key) {
  const auto& s = meta(ckpt, key);
  require(s == "true" || s == "false", ErrorCode::kParse,
          "checkpoint metadata '" + key + "' is not a boolean");
  return s == "true";
}

std::string join_lines(const Vocabulary& v) {
  std::string out;
  for (const auto& a : v.answers()) out += a + '\n';
  return out;
}

Vocabulary split_lines(const std::string& s) {
  std::istringstream in(s);
  return read_vocabulary(in);
}

void put_answer_meta(Checkpoint& ckpt, const AnswerMatrix& m) {
  ckpt.metadata["m_scheme"] = std::string(to_string(m.scheme));
  ckpt.metadata["m_trainable"] = m.trainable ? "true" : "false";
  ckpt.metadata["m_seed"] = std::to_string(m.seed);
}

void get_answer_meta(const Checkpoint& ckpt, AnswerMatrix& m) {
  m.scheme = parse_init_scheme(meta(ckpt, "m_scheme"));
  m.trainable = meta_bool(ckpt, "m_trainable");
  m.seed = meta_u64(ckpt, "m_seed");
}

void require_kind(const Checkpoint& ckpt, std::string_view kind) {
  require(meta(ckpt, "kind") == kind, ErrorCode::kParse,
          "checkpoint holds a " + meta(ckpt, "kind") + ", expected a " + std::string(kind));
}

}  // namespace

const NamedTensor* Checkpoint::find(std::string_view name) const {
  for (const auto& t : tensors) {
    if (t.name == name) return &t;
  }
  return nullptr;
}

void write_checkpoint(std::ostream& out, const Checkpoint& ckpt) {
  out.write(kMagic, sizeof kMagic);
  binary::write_uint<std::uint32_t>(out, Checkpoint::kVersion);
  binary::write_uint<std::uint32_t>(out, static_cast<std::uint32_t>(ckpt.metadata.size()));
  for (const auto& [k, v] : ckpt.metadata) {
    binary::write_string(out, k);
    binary::write_string(out, v);
  }
  binary::write_uint<std::uint32_t>(out, static_cast<std::uint32_t>(ckpt.tensors.size()));
  for (const auto& t : ckpt.tensors) {
    std::uint64_t n = 1;
    for (auto d : t.dims) n *= d;
    require(n == t.values.size(), ErrorCode::kShapeMismatch,
            "tensor '" + t.name + "' dims do not match its value count");
    binary::write_string(out, t.name);
    binary::write_uint<std::uint32_t>(out, static_cast<std::uint32_t>(t.dims.size()));
    for (auto d : t.dims) binary::write_uint<std::uint64_t>(out, d);
    for (double v : t.values) binary::write_f64(out, v);
  }
}

Checkpoint read_checkpoint(std::istream& in) {
  char magic[sizeof kMagic];
  in.read(magic, sizeof magic);
  require(in && std::equal(magic, magic + sizeof magic, kMagic), ErrorCode::kParse,
          "not a checkpoint (bad magic)");
  const auto version = binary::read_uint<std::uint32_t>(in);
  require(version == Checkpoint::kVersion, ErrorCode::kParse,
          "unsupported checkpoint version " + std::to_string(version));
  Checkpoint ckpt;
  const auto n_meta = binary::read_uint<std::uint32_t>(in);
  require(n_meta <= kMaxEntries, ErrorCode::kParse, "metadata count out of range");
  for (std::uint32_t i = 0; i < n_meta; ++i) {
    auto key = binary::read_string(in);
    auto value = binary::read_string(in);
    require(ckpt.metadata.emplace(std::move(key), std::move(value)).second, ErrorCode::kParse,
            "duplicate metadata key in checkpoint");
  }
  const auto n_tensors = binary::read_uint<std::uint32_t>(in);
  require(n_tensors <= kMaxEntries, ErrorCode::kParse, "tensor count out of range");
  for (std::uint32_t i = 0; i < n_tensors; ++i) {
    NamedTensor t;
    t.name = binary::read_string(in, 1024);
    require(ckpt.find(t.name) == nullptr, ErrorCode::kParse, "duplicate tensor '" + t.name + "'");
    const auto rank = binary::read_uint<std::uint32_t>(in);
    require(rank == 1 || rank == 2, ErrorCode::kParse, "tensor '" + t.name + "' has unsupported rank");
    std::uint64_t n = 1;
    for (std::uint32_t r = 0; r < rank; ++r) {
      const auto d = binary::read_uint<std::uint64_t>(in);
      require(d <= kMaxValues && n * std::max<std::uint64_t>(d, 1) <= kMaxValues, ErrorCode::kParse,
              "tensor '" + t.name + "' is too large");
      t.dims.push_back(d);
      n *= d;
    }
    t.values.resize(static_cast<std::size_t>(n));
    for (auto& v : t.values) {
      v = binary::read_f64(in);
      require(std::isfinite(v), ErrorCode::kParse, "tensor '" + t.name + "' holds a non-finite value");
    }
    ckpt.tensors.push_back(std::move(t));
  }
  return ckpt;
}

void save_checkpoint(const std::string& path, const Checkpoint& ckpt) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::kIo, "cannot open '" + path + "' for writing");
  write_checkpoint(out, ckpt);
  out.flush();
  if (!out) fail(ErrorCode::kIo, "write failed for '" + path + "'");
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kIo, "cannot open '" + path + "' for reading");
  return read_checkpoint(in);
}

Checkpoint head_checkpoint(const HeadParameters& params, const Objective& objective,
                           std::uint64_t seed) {
  params.validate();
  Checkpoint ckpt;
  ckpt.metadata["kind"] = "head";
  ckpt.metadata["lambda"] = fmt(objective.lambda);
  ckpt.metadata["margin"] = fmt(objective.margin);
  ckpt.metadata["metric"] = std::to_string(static_cast<std::uint32_t>(objective.metric));
  ckpt.metadata["normalize_projection"] = params.normalize_projection ? "true" : "false";
  ckpt.metadata["seed"] = std::to_string(seed);
  put_answer_meta(ckpt, params.answers);
  for_each_tensor(params, [&](std::string_view name, const auto& t) {
    ckpt.tensors.push_back(to_tensor(name, t));
  });
  return ckpt;
}

HeadState head_from_checkpoint(const Checkpoint& ckpt) {
  require_kind(ckpt, "head");
  HeadState s;
  s.objective.lambda = meta_double(ckpt, "lambda");
  s.objective.margin = meta_double(ckpt, "margin");
  const auto metric = meta_u64(ckpt, "metric");
  require(metric <= 2, ErrorCode::kParse, "unknown metric code in checkpoint");
  s.objective.metric = static_cast<Metric>(metric);
  s.objective.validate();
  s.seed = meta_u64(ckpt, "seed");
  s.params.normalize_projection = meta_bool(ckpt, "normalize_projection");
  get_answer_meta(ckpt, s.params.answers);
  mark_gain(ckpt, "W1_g", s.params.classifier_hidden);
  mark_gain(ckpt, "V1_g", s.params.projection_hidden);
  read_tensors(ckpt, s.params);
  s.params.validate();
  return s;
}

Checkpoint model_checkpoint(const ModelState& state) {
  state.params.validate();
  require_shape(static_cast<std::size_t>(state.params.num_tokens()) == state.tokens.size(),
                "token vocabulary size != embedding rows");
  require_shape(static_cast<std::size_t>(state.params.head.num_answers()) == state.answers.size(),
                "answer vocabulary size != rows of M");
  Checkpoint ckpt;
  ckpt.metadata["kind"] = "model";
  for (const auto& [k, v] : train_config_keys(state.config)) ckpt.metadata["train." + k] = v;
  ckpt.metadata["tokens"] = join_lines(state.tokens);
  ckpt.metadata["answers"] = join_lines(state.answers);
  put_answer_meta(ckpt, state.params.head.answers);
  for_each_tensor(state.params, [&](std::string_view name, const auto& t) {
    ckpt.tensors.push_back(to_tensor(name, t));
  });
  return ckpt;
}

ModelState model_from_checkpoint(const Checkpoint& ckpt) {
  require_kind(ckpt, "model");
  ModelState s;
  KeyValues train;
  for (const auto& [k, v] : ckpt.metadata) {
    if (k.starts_with("train.")) train[k.substr(6)] = v;
  }
  s.config = train_config_from_keys(train);
  s.config.validate();
  s.tokens = split_lines(meta(ckpt, "tokens"));
  s.answers = split_lines(meta(ckpt, "answers"));
  get_answer_meta(ckpt, s.params.head.answers);
  s.params.head.normalize_projection = s.config.normalize_projection;
  mark_gain(ckpt, "Q_g", s.params.question_layer);
  mark_gain(ckpt, "I_g", s.params.image_layer);
  mark_gain(ckpt, "W1_g", s.params.head.classifier_hidden);
  mark_gain(ckpt, "V1_g", s.params.head.projection_hidden);
  read_tensors(ckpt, s.params);
  s.params.validate();
  require_shape(static_cast<std::size_t>(s.params.num_tokens()) == s.tokens.size(),
                "checkpoint token vocabulary does not match its embedding table");
  require_shape(static_cast<std::size_t>(s.params.head.num_answers()) == s.answers.size(),
                "checkpoint answer vocabulary does not match M");
  return s;
}

void save_model(const std::string& path, const ModelState& state) {
  save_checkpoint(path, model_checkpoint(state));
}

ModelState load_model(const std::string& path) { return model_from_checkpoint(load_checkpoint(path)); }

}  // namespace semvqa
