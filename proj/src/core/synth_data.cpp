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

#include "core/synth_data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>
#include <random>
#include <set>
#include <unordered_map>
#include <unordered_set>

namespace semvqa {
namespace {

constexpr std::array<Template, 12> kTemplates = {
    Template::kQueryColor,  Template::kQueryShape,  Template::kQuerySize,
    Template::kQueryObject, Template::kQueryPosition, Template::kQueryCount,
    Template::kVerifyColor, Template::kVerifyShape, Template::kChooseColor,
    Template::kChooseShape, Template::kLogicalOr,   Template::kLogicalAnd,
};

std::vector<std::string> split_on(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.emplace_back(s.substr(start, pos == std::string_view::npos ? s.npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

double round6(double v) { return std::round(v * 1e6) / 1e6; }

bool coin(Rng& rng) { return (rng() >> 11) & 1u; }

template <class T>
const T& pick(Rng& rng, const std::vector<T>& v) {
  return v[uniform_index(rng, v.size())];
}

std::size_t pick_other(Rng& rng, std::size_t n, std::size_t avoid) {
  std::size_t k = uniform_index(rng, n - 1);
  return k >= avoid ? k + 1 : k;
}

// Scene lookups shared by the templates.
struct SceneIndex {
  const Scene& scene;
  const Inventory& inv;

  std::size_t count_shape(std::size_t s) const {
    return static_cast<std::size_t>(std::count_if(scene.objects.begin(), scene.objects.end(),
                                                  [&](const SceneObject& o) { return o.shape == s; }));
  }
  std::size_t count_color(std::size_t c) const {
    return static_cast<std::size_t>(std::count_if(scene.objects.begin(), scene.objects.end(),
                                                  [&](const SceneObject& o) { return o.color == c; }));
  }
  std::vector<std::size_t> unique_shapes() const {
    std::vector<std::size_t> out;
    for (std::size_t s = 0; s < inv.shapes.size(); ++s) {
      if (count_shape(s) == 1) out.push_back(s);
    }
    return out;
  }
  std::vector<std::size_t> unique_colors() const {
    std::vector<std::size_t> out;
    for (std::size_t c = 0; c < inv.colors.size(); ++c) {
      if (count_color(c) == 1) out.push_back(c);
    }
    return out;
  }
  // Objects whose (color, shape) pair is unique in the scene.
  std::vector<std::size_t> unique_pairs() const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < scene.objects.size(); ++i) {
      const auto& o = scene.objects[i];
      const auto n = std::count_if(scene.objects.begin(), scene.objects.end(), [&](const SceneObject& x) {
        return x.color == o.color && x.shape == o.shape;
      });
      if (n == 1) out.push_back(i);
    }
    return out;
  }
  const SceneObject& with_shape(std::size_t s) const {
    return *std::find_if(scene.objects.begin(), scene.objects.end(),
                         [&](const SceneObject& o) { return o.shape == s; });
  }
  const SceneObject& with_color(std::size_t c) const {
    return *std::find_if(scene.objects.begin(), scene.objects.end(),
                         [&](const SceneObject& o) { return o.color == c; });
  }
  std::vector<std::size_t> present_colors(bool present) const {
    std::vector<std::size_t> out;
    for (std::size_t c = 0; c < inv.colors.size(); ++c) {
      if ((count_color(c) > 0) == present) out.push_back(c);
    }
    return out;
  }
  std::vector<std::size_t> present_shapes(bool present) const {
    std::vector<std::size_t> out;
    for (std::size_t s = 0; s < inv.shapes.size(); ++s) {
      if ((count_shape(s) > 0) == present) out.push_back(s);
    }
    return out;
  }
};

// Draws present/absent with equal odds when both exist.
std::size_t pick_balanced(Rng& rng, const std::vector<std::size_t>& present,
                          const std::vector<std::size_t>& absent) {
  const bool want_present = coin(rng);
  if ((want_present && !present.empty()) || absent.empty()) return pick(rng, present);
  return pick(rng, absent);
}

bool applicable(Template t, const SceneIndex& idx) {
  switch (t) {
    case Template::kQueryColor:
    case Template::kQuerySize:
    case Template::kChooseColor:
      return !idx.unique_shapes().empty();
    case Template::kQueryShape:
    case Template::kChooseShape:
      return !idx.unique_colors().empty();
    case Template::kQueryObject:
      return !idx.scene.objects.empty();
    case Template::kQueryPosition:
      return !idx.unique_pairs().empty();
    case Template::kQueryCount:
      return !idx.scene.objects.empty() && idx.scene.objects.size() <= idx.inv.numbers.size();
    case Template::kVerifyColor:
    case Template::kVerifyShape:
    case Template::kLogicalOr:
    case Template::kLogicalAnd:
      return true;
  }
  return false;
}

std::vector<std::string> words(std::string_view text) { return split_on(text, ' '); }

std::vector<std::string> concat(std::initializer_list<std::vector<std::string>> parts) {
  std::vector<std::string> out;
  for (const auto& p : parts) out.insert(out.end(), p.begin(), p.end());
  return out;
}

std::string yes_no(bool b) { return b ? "yes" : "no"; }

}  // namespace

void Inventory::validate() const {
  require(!colors.empty() && !shapes.empty() && !sizes.empty() && !rows.empty() && !cols.empty() &&
              !numbers.empty(),
          ErrorCode::kInvalidArgument, "attribute inventories must be non-empty");
  require(colors.size() >= 2 && shapes.size() >= 2 && sizes.size() >= 2 && rows.size() >= 2,
          ErrorCode::kInvalidArgument, "inventories need at least two values for distractors");
  std::set<std::string> seen;
  for (const auto* list : {&colors, &shapes, &sizes, &rows, &cols, &numbers}) {
    for (const auto& w : *list) {
      require(!w.empty() && w.find_first_of(" \t,") == std::string::npos,
              ErrorCode::kInvalidArgument, "inventory words must be single tokens");
      require(seen.insert(w).second, ErrorCode::kInvalidArgument,
              "inventory word '" + w + "' appears twice");
    }
  }
}

void SynthConfig::validate() const {
  inventory.validate();
  require(min_objects >= 1 && min_objects <= max_objects, ErrorCode::kInvalidArgument,
          "object count bounds must satisfy 1 <= min <= max");
  require(max_objects <= inventory.num_cells(), ErrorCode::kInvalidArgument,
          "more objects than grid cells");
  require(noise >= 0.0 && std::isfinite(noise), ErrorCode::kInvalidArgument, "noise must be >= 0");
  require(questions_per_scene >= 1, ErrorCode::kInvalidArgument, "questions_per_scene must be >= 1");
  require(!templates.empty(), ErrorCode::kInvalidArgument, "no templates enabled");
}

std::string_view to_string(QuestionType t) {
  switch (t) {
    case QuestionType::kQuery: return "query";
    case QuestionType::kVerify: return "verify";
    case QuestionType::kChoose: return "choose";
    case QuestionType::kLogical: return "logical";
  }
  return "unknown";
}

QuestionType parse_question_type(std::string_view s) {
  if (s == "query") return QuestionType::kQuery;
  if (s == "verify") return QuestionType::kVerify;
  if (s == "choose") return QuestionType::kChoose;
  if (s == "logical") return QuestionType::kLogical;
  fail(ErrorCode::kParse, "unknown question type '" + std::string(s) + "'");
}

std::span<const Template> all_templates() { return kTemplates; }

std::string_view to_string(Template t) {
  switch (t) {
    case Template::kQueryColor: return "query_color";
    case Template::kQueryShape: return "query_shape";
    case Template::kQuerySize: return "query_size";
    case Template::kQueryObject: return "query_object";
    case Template::kQueryPosition: return "query_position";
    case Template::kQueryCount: return "query_count";
    case Template::kVerifyColor: return "verify_color";
    case Template::kVerifyShape: return "verify_shape";
    case Template::kChooseColor: return "choose_color";
    case Template::kChooseShape: return "choose_shape";
    case Template::kLogicalOr: return "logical_or";
    case Template::kLogicalAnd: return "logical_and";
  }
  return "unknown";
}

Template parse_template(std::string_view s) {
  for (auto t : kTemplates) {
    if (to_string(t) == s) return t;
  }
  fail(ErrorCode::kInvalidArgument, "unknown template '" + std::string(s) + "'");
}

Scene generate_scene(const SynthConfig& config, Rng& rng) {
  const auto& inv = config.inventory;
  Scene scene;
  const std::size_t n =
      config.min_objects + uniform_index(rng, config.max_objects - config.min_objects + 1);
  std::vector<std::size_t> cells(inv.num_cells());
  std::iota(cells.begin(), cells.end(), std::size_t{0});
  for (std::size_t i = 0; i < n; ++i) {
    std::swap(cells[i], cells[i + uniform_index(rng, cells.size() - i)]);
    SceneObject o;
    o.cell = cells[i];
    o.shape = uniform_index(rng, inv.shapes.size());
    o.color = uniform_index(rng, inv.colors.size());
    o.size = uniform_index(rng, inv.sizes.size());
    scene.objects.push_back(o);
  }
  scene.seed = rng();
  return scene;
}

std::vector<double> render_features(const Scene& scene, const Inventory& inv, double noise) {
  const std::size_t block = inv.block_size();
  std::vector<double> f(inv.feature_dim(), 0.0);
  for (const auto& o : scene.objects) {
    require(o.cell < inv.num_cells(), ErrorCode::kInvalidArgument, "object outside the grid");
    const std::size_t base = o.cell * block;
    f[base] = 1.0;
    f[base + 1 + o.shape] = 1.0;
    f[base + 1 + inv.shapes.size() + o.color] = 1.0;
    f[base + 1 + inv.shapes.size() + inv.colors.size() + o.size] = 1.0;
  }
  if (noise > 0.0) {
    Rng rng = make_rng(scene.seed, "render");
    std::normal_distribution<double> normal(0.0, noise);
    for (double& v : f) v = round6(v + normal(rng));
  }
  return f;
}

std::vector<QAInstance> generate_questions(const Scene& scene, const SynthConfig& config,
                                           std::span<const Template> templates, Rng& rng,
                                           std::string_view id_prefix) {
  const auto& inv = config.inventory;
  const SceneIndex idx{scene, inv};
  const auto features = render_features(scene, inv, config.noise);
  std::vector<QAInstance> out;
  std::size_t counter = 0;
  auto cell_words = [&](std::size_t cell) {
    return std::vector<std::string>{inv.rows[cell / inv.cols.size()], inv.cols[cell % inv.cols.size()]};
  };

  auto emit = [&](QuestionType qtype, std::vector<std::string> tokens,
                  std::vector<std::string> answers,
                  std::optional<std::string> source = std::nullopt) -> const std::string& {
    QAInstance q;
    q.question_id = std::string(id_prefix) + "-" + std::to_string(counter++);
    q.qtype = qtype;
    q.entailed_by = std::move(source);
    q.tokens = std::move(tokens);
    q.answers = std::move(answers);
    q.features = features;
    out.push_back(std::move(q));
    return out.back().question_id;
  };

  for (auto t : templates) {
    if (!applicable(t, idx)) continue;
    switch (t) {
      case Template::kQueryColor: {
        const auto s = pick(rng, idx.unique_shapes());
        const auto& o = idx.with_shape(s);
        const std::string src = emit(QuestionType::kQuery,
                                     concat({words("what color is the"), {inv.shapes[s], "?"}}),
                                     {inv.colors[o.color]});
        const auto c = coin(rng) ? o.color : pick_other(rng, inv.colors.size(), o.color);
        emit(QuestionType::kVerify, concat({words("is the"), {inv.shapes[s], inv.colors[c], "?"}}),
             {yes_no(c == o.color)}, src);
        break;
      }
      case Template::kQueryShape: {
        const auto c = pick(rng, idx.unique_colors());
        const auto& o = idx.with_color(c);
        const std::string src =
            emit(QuestionType::kQuery,
                 concat({words("what shape is the"), {inv.colors[c], "thing", "?"}}),
                 {inv.shapes[o.shape]});
        const auto s = coin(rng) ? o.shape : pick_other(rng, inv.shapes.size(), o.shape);
        emit(QuestionType::kVerify,
             concat({words("is the"), {inv.colors[c], "thing", "a", inv.shapes[s], "?"}}),
             {yes_no(s == o.shape)}, src);
        break;
      }
      case Template::kQuerySize: {
        const auto s = pick(rng, idx.unique_shapes());
        const auto& o = idx.with_shape(s);
        const std::string src = emit(QuestionType::kQuery,
                                     concat({words("what size is the"), {inv.shapes[s], "?"}}),
                                     {inv.sizes[o.size]});
        const auto z = coin(rng) ? o.size : pick_other(rng, inv.sizes.size(), o.size);
        emit(QuestionType::kVerify, concat({words("is the"), {inv.shapes[s], inv.sizes[z], "?"}}),
             {yes_no(z == o.size)}, src);
        break;
      }
      case Template::kQueryObject: {
        const auto& o = pick(rng, scene.objects);
        const auto at = cell_words(o.cell);
        const std::string src = emit(QuestionType::kQuery, concat({words("what is at the"), at, {"?"}}),
                                     {inv.colors[o.color] + " " + inv.shapes[o.shape]});
        const auto c = coin(rng) ? o.color : pick_other(rng, inv.colors.size(), o.color);
        emit(QuestionType::kVerify, concat({words("is the thing at the"), at, {inv.colors[c], "?"}}),
             {yes_no(c == o.color)}, src);
        break;
      }
      case Template::kQueryPosition: {
        const auto& o = scene.objects[pick(rng, idx.unique_pairs())];
        const auto r = o.cell / inv.cols.size();
        const std::string src =
            emit(QuestionType::kQuery,
                 concat({words("where is the"), {inv.colors[o.color], inv.shapes[o.shape], "?"}}),
                 {inv.rows[r] + " " + inv.cols[o.cell % inv.cols.size()]});
        const auto r2 = coin(rng) ? r : pick_other(rng, inv.rows.size(), r);
        emit(QuestionType::kVerify,
             concat({words("is the"),
                     {inv.colors[o.color], inv.shapes[o.shape], "in", "the", inv.rows[r2], "row", "?"}}),
             {yes_no(r2 == r)}, src);
        break;
      }
      case Template::kQueryCount:
        emit(QuestionType::kQuery, words("how many things are there ?"),
             {inv.numbers[scene.objects.size() - 1]});
        break;
      case Template::kVerifyColor: {
        const auto c = pick_balanced(rng, idx.present_colors(true), idx.present_colors(false));
        emit(QuestionType::kVerify, concat({words("is there a"), {inv.colors[c], "thing", "?"}}),
             {yes_no(idx.count_color(c) > 0)});
        break;
      }
      case Template::kVerifyShape: {
        const auto s = pick_balanced(rng, idx.present_shapes(true), idx.present_shapes(false));
        emit(QuestionType::kVerify, concat({words("is there a"), {inv.shapes[s], "?"}}),
             {yes_no(idx.count_shape(s) > 0)});
        break;
      }
      case Template::kChooseColor: {
        const auto s = pick(rng, idx.unique_shapes());
        const auto truth = idx.with_shape(s).color;
        const auto other = pick_other(rng, inv.colors.size(), truth);
        auto a = truth, b = other;
        if (coin(rng)) std::swap(a, b);
        emit(QuestionType::kChoose,
             concat({words("is the"), {inv.shapes[s], inv.colors[a], "or", inv.colors[b], "?"}}),
             {inv.colors[truth]});
        out.back().candidates = {inv.colors[a], inv.colors[b]};
        break;
      }
      case Template::kChooseShape: {
        const auto c = pick(rng, idx.unique_colors());
        const auto truth = idx.with_color(c).shape;
        const auto other = pick_other(rng, inv.shapes.size(), truth);
        auto a = truth, b = other;
        if (coin(rng)) std::swap(a, b);
        emit(QuestionType::kChoose,
             concat({words("is the"),
                     {inv.colors[c], "thing", "a", inv.shapes[a], "or", "a", inv.shapes[b], "?"}}),
             {inv.shapes[truth]});
        out.back().candidates = {inv.shapes[a], inv.shapes[b]};
        break;
      }
      case Template::kLogicalOr:
      case Template::kLogicalAnd: {
        const auto c = pick_balanced(rng, idx.present_colors(true), idx.present_colors(false));
        const auto s = pick_balanced(rng, idx.present_shapes(true), idx.present_shapes(false));
        const bool has_c = idx.count_color(c) > 0;
        const bool has_s = idx.count_shape(s) > 0;
        const bool is_or = t == Template::kLogicalOr;
        emit(QuestionType::kLogical,
             concat({words("is there a"),
                     {inv.colors[c], "thing", is_or ? "or" : "and", "a", inv.shapes[s], "?"}}),
             {yes_no(is_or ? (has_c || has_s) : (has_c && has_s))});
        break;
      }
    }
  }
  return out;
}

Benchmark generate_benchmark(const SynthConfig& config) {
  config.validate();
  Rng rng = make_rng(config.seed, "scenes");
  Benchmark b;
  std::vector<Template> candidates;
  while (b.instances.size() < config.num_questions) {
    Scene scene = generate_scene(config, rng);
    const SceneIndex idx{scene, config.inventory};
    candidates.clear();
    for (auto t : config.templates) {
      if (applicable(t, idx)) candidates.push_back(t);
    }
    const std::size_t k = std::min(config.questions_per_scene, candidates.size());
    for (std::size_t i = 0; i < k; ++i) {
      std::swap(candidates[i], candidates[i + uniform_index(rng, candidates.size() - i)]);
    }
    candidates.resize(k);
    char prefix[32];
    std::snprintf(prefix, sizeof prefix, "s%05zu", b.scenes.size());
    auto qs = generate_questions(scene, config, candidates, rng, prefix);
    for (auto& q : qs) {
      if (b.instances.size() == config.num_questions) break;
      b.instances.push_back(std::move(q));
      b.scene_of.push_back(b.scenes.size());
    }
    b.scenes.push_back(std::move(scene));
  }
  return b;
}

Vocabulary answer_vocabulary(const Inventory& inv) {
  std::vector<std::string> a = {"yes", "no"};
  for (const auto* list : {&inv.colors, &inv.shapes, &inv.sizes, &inv.numbers}) {
    a.insert(a.end(), list->begin(), list->end());
  }
  for (const auto& c : inv.colors) {
    for (const auto& s : inv.shapes) a.push_back(c + " " + s);
  }
  for (const auto& r : inv.rows) {
    for (const auto& c : inv.cols) a.push_back(r + " " + c);
  }
  return Vocabulary(std::move(a));
}

Vocabulary token_vocabulary(const Inventory& inv) {
  std::set<std::string> t = {"?", "what", "color", "shape", "size", "is", "the", "thing", "a",
                             "at", "where", "how", "many", "things", "are", "there", "or",
                             "and", "in", "row"};
  for (const auto* list : {&inv.colors, &inv.shapes, &inv.sizes, &inv.rows, &inv.cols}) {
    t.insert(list->begin(), list->end());
  }
  return Vocabulary(std::vector<std::string>(t.begin(), t.end()));
}

EmbeddingTable synthetic_embeddings(const Inventory& inv, const SyntheticEmbeddingSpec& spec) {
  const std::vector<const std::vector<std::string>*> categories = {
      &inv.colors, &inv.shapes, &inv.sizes, &inv.numbers, &inv.rows, &inv.cols};
  const std::vector<std::string> polar = {"yes", "no"};
  const std::size_t n_cat = categories.size() + 1;
  require(spec.dimension >= n_cat, ErrorCode::kInvalidArgument,
          "synthetic embedding dimension must be >= number of categories");
  Rng rng = make_rng(spec.seed, "synthetic_embeddings");
  std::normal_distribution<double> normal(0.0, 1.0);
  const auto p = static_cast<Eigen::Index>(spec.dimension);

  // Orthonormal category directions (Gram-Schmidt on Gaussian draws).
  std::vector<Vector> basis;
  while (basis.size() < n_cat) {
    Vector u(p);
    for (Eigen::Index i = 0; i < p; ++i) u[i] = normal(rng);
    for (const auto& b : basis) u -= u.dot(b) * b;
    const double n = u.norm();
    if (n > 1e-6) basis.push_back(u / n);
  }

  EmbeddingTable table(spec.dimension);
  auto add_category = [&](const std::vector<std::string>& ws, const Vector& dir) {
    for (const auto& w : ws) {
      std::vector<double> v(spec.dimension);
      for (std::size_t i = 0; i < spec.dimension; ++i) {
        const double r = normal(rng) / std::sqrt(static_cast<double>(spec.dimension));
        v[i] = round6(spec.category_weight * dir[static_cast<Eigen::Index>(i)] + spec.word_weight * r);
      }
      table.insert(w, std::move(v));
    }
  };
  add_category(polar, basis[0]);
  for (std::size_t c = 0; c < categories.size(); ++c) add_category(*categories[c], basis[c + 1]);
  return table;
}

std::string question_form(std::span<const std::string> tokens, const Inventory& inv) {
  std::string out;
  auto in = [](const std::vector<std::string>& v, const std::string& w) {
    return std::find(v.begin(), v.end(), w) != v.end();
  };
  for (const auto& t : tokens) {
    if (!out.empty()) out += ' ';
    if (in(inv.colors, t)) out += "<color>";
    else if (in(inv.shapes, t)) out += "<shape>";
    else if (in(inv.sizes, t)) out += "<size>";
    else if (in(inv.rows, t)) out += "<row>";
    else if (in(inv.cols, t)) out += "<col>";
    else if (in(inv.numbers, t)) out += "<number>";
    else out += t;
  }
  return out;
}

void SplitSpec::validate() const {
  require(train_fraction > 0.0 && train_fraction < 1.0, ErrorCode::kInvalidArgument,
          "train fraction must lie in (0, 1)");
  require(min_count <= max_count, ErrorCode::kInvalidArgument, "min_count > max_count");
}

namespace {

void clear_dangling_links(std::vector<QAInstance>& side) {
  std::unordered_set<std::string> ids;
  for (const auto& q : side) ids.insert(q.question_id);
  for (auto& q : side) {
    if (q.entailed_by && !ids.count(*q.entailed_by)) q.entailed_by.reset();
  }
}

}  // namespace

Split split(std::span<const QAInstance> instances, const SplitSpec& spec) {
  spec.validate();
  require(!instances.empty(), ErrorCode::kInvalidArgument, "cannot split an empty dataset");
  Split out;
  Rng rng = make_rng(spec.seed, "split");

  if (spec.mode == SplitSpec::Mode::kStandard) {
    // Union entailment chains into groups keyed by their root question.
    std::unordered_map<std::string, std::size_t> pos;
    for (std::size_t i = 0; i < instances.size(); ++i) {
      require(pos.emplace(instances[i].question_id, i).second, ErrorCode::kInvalidArgument,
              "duplicate question id '" + instances[i].question_id + "'");
    }
    std::vector<std::size_t> parent(instances.size());
    std::iota(parent.begin(), parent.end(), std::size_t{0});
    auto root = [&](std::size_t i) {
      while (parent[i] != i) i = parent[i] = parent[parent[i]];
      return i;
    };
    for (std::size_t i = 0; i < instances.size(); ++i) {
      if (!instances[i].entailed_by) continue;
      auto it = pos.find(*instances[i].entailed_by);
      if (it != pos.end()) parent[root(i)] = root(it->second);
    }
    std::map<std::size_t, std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < instances.size(); ++i) groups[root(i)].push_back(i);
    std::vector<const std::vector<std::size_t>*> order;
    for (const auto& [r, g] : groups) order.push_back(&g);
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[uniform_index(rng, i)]);

    const auto target = static_cast<std::size_t>(
        std::llround(spec.train_fraction * static_cast<double>(instances.size())));
    std::vector<bool> in_train(instances.size(), false);
    std::size_t n_train = 0;
    for (const auto* g : order) {
      if (n_train + g->size() <= target) {
        for (auto i : *g) in_train[i] = true;
        n_train += g->size();
      }
    }
    for (std::size_t i = 0; i < instances.size(); ++i) {
      (in_train[i] ? out.train : out.test).push_back(instances[i]);
    }
    if (out.train.empty() || out.test.empty()) {
      fail(ErrorCode::kInfeasible, "standard split produced an empty side");
    }
    return out;
  }

  std::map<std::string, std::size_t> counts;
  for (const auto& q : instances) {
    for (const auto& a : std::set<std::string>(q.answers.begin(), q.answers.end())) ++counts[a];
  }
  std::vector<std::string> eligible;
  for (const auto& [a, n] : counts) {
    if (n >= spec.min_count && n <= spec.max_count) eligible.push_back(a);
  }
  if (eligible.size() < 2) {
    fail(ErrorCode::kInfeasible, "oov split needs at least two answers with counts in [" +
                                     std::to_string(spec.min_count) + ", " +
                                     std::to_string(spec.max_count) + "], found " +
                                     std::to_string(eligible.size()));
  }
  for (std::size_t i = eligible.size(); i > 1; --i) std::swap(eligible[i - 1], eligible[uniform_index(rng, i)]);
  auto n_train = static_cast<std::size_t>(
      std::llround(spec.train_fraction * static_cast<double>(eligible.size())));
  n_train = std::clamp<std::size_t>(n_train, 1, eligible.size() - 1);
  const std::set<std::string> train_side(eligible.begin(), eligible.begin() + static_cast<std::ptrdiff_t>(n_train));
  const std::set<std::string> test_side(eligible.begin() + static_cast<std::ptrdiff_t>(n_train), eligible.end());

  for (const auto& q : instances) {
    const bool all_train = std::all_of(q.answers.begin(), q.answers.end(),
                                       [&](const std::string& a) { return train_side.count(a) > 0; });
    const bool all_test = std::all_of(q.answers.begin(), q.answers.end(),
                                      [&](const std::string& a) { return test_side.count(a) > 0; });
    if (all_train) out.train.push_back(q);
    else if (all_test) out.test.push_back(q);
  }
  if (out.train.empty() || out.test.empty()) {
    fail(ErrorCode::kInfeasible, "oov split produced an empty side");
  }
  clear_dangling_links(out.train);
  clear_dangling_links(out.test);
  out.train_answers.assign(train_side.begin(), train_side.end());
  out.test_answers.assign(test_side.begin(), test_side.end());
  return out;
}

void write_dataset(std::ostream& out, std::span<const QAInstance> instances) {
  char buf[64];
  for (const auto& q : instances) {
    out << q.question_id << '\t' << to_string(q.qtype) << '\t'
        << (q.entailed_by ? *q.entailed_by : std::string("-")) << '\t';
    for (std::size_t i = 0; i < q.tokens.size(); ++i) out << (i ? " " : "") << q.tokens[i];
    out << '\t';
    for (std::size_t i = 0; i < q.answers.size(); ++i) out << (i ? "," : "") << q.answers[i];
    out << '\t';
    for (std::size_t i = 0; i < q.features.size(); ++i) {
      auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, q.features[i]);
      out << (i ? "," : "") << std::string_view(buf, static_cast<std::size_t>(ptr - buf));
    }
    out << '\n';
  }
}

std::vector<QAInstance> read_dataset(std::istream& in) {
  std::vector<QAInstance> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split_on(line, '\t');
    const auto where = "dataset line " + std::to_string(line_no) + ": ";
    if (fields.size() != 6) fail(ErrorCode::kParse, where + "expected 6 tab-separated fields");
    QAInstance q;
    q.question_id = fields[0];
    require(!q.question_id.empty(), ErrorCode::kParse, where + "empty question id");
    q.qtype = parse_question_type(fields[1]);
    if (fields[2] != "-") q.entailed_by = fields[2];
    q.tokens = split_on(fields[3], ' ');
    q.tokens.erase(std::remove(q.tokens.begin(), q.tokens.end(), std::string()), q.tokens.end());
    require(!q.tokens.empty(), ErrorCode::kParse, where + "empty question");
    q.answers = split_on(fields[4], ',');
    for (const auto& a : q.answers) require(!a.empty(), ErrorCode::kParse, where + "empty answer");
    if (!fields[5].empty()) {
      for (const auto& tok : split_on(fields[5], ',')) {
        double v = 0.0;
        auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
        if (ec != std::errc() || ptr != tok.data() + tok.size() || !std::isfinite(v)) {
          fail(ErrorCode::kParse, where + "bad feature value '" + tok + "'");
        }
        q.features.push_back(v);
      }
    }
    out.push_back(std::move(q));
  }
  return out;
}

void save_dataset(const std::string& path, std::span<const QAInstance> instances) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) fail(ErrorCode::kIo, "cannot open '" + path + "' for writing");
  write_dataset(out, instances);
  if (!out) fail(ErrorCode::kIo, "write failed for '" + path + "'");
}

std::vector<QAInstance> load_dataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::kIo, "cannot open '" + path + "' for reading");
  return read_dataset(in);
}

}  // namespace semvqa
