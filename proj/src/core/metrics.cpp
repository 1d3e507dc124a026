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

#include "core/metrics.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <unordered_map>

#include <nlohmann/json.hpp>

namespace semvqa {
namespace {

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

double parse_double(std::string_view s, const std::string& where) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) {
    fail(ErrorCode::kParse, where + ": bad number '" + std::string(s) + "'");
  }
  return v;
}

std::vector<std::string_view> split_view(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(s.substr(start, pos == std::string_view::npos ? s.npos : pos - start));
    if (pos == std::string_view::npos) return out;
    start = pos + 1;
  }
}

void write_vector(std::ostream& out, const std::vector<double>& v) {
  for (std::size_t i = 0; i < v.size(); ++i) out << (i ? "," : "") << format_double(v[i]);
}

std::vector<double> read_vector(std::string_view field, const std::string& where) {
  std::vector<double> out;
  if (field.empty()) return out;
  for (auto tok : split_view(field, ',')) out.push_back(parse_double(tok, where));
  return out;
}

// Ground truth by id, with the missing-id check every metric shares.
class TruthIndex {
 public:
  explicit TruthIndex(std::span<const Truth> truths) {
    for (const auto& t : truths) {
      require(by_id_.emplace(t.question_id, &t).second, ErrorCode::kInvalidArgument,
              "duplicate ground truth for question '" + t.question_id + "'");
    }
  }
  const Truth& at(const std::string& id) const {
    auto it = by_id_.find(id);
    require(it != by_id_.end(), ErrorCode::kInvalidArgument,
            "no ground truth for question '" + id + "'");
    return *it->second;
  }
  const Truth* find(const std::string& id) const {
    auto it = by_id_.find(id);
    return it == by_id_.end() ? nullptr : it->second;
  }

 private:
  std::unordered_map<std::string, const Truth*> by_id_;
};

bool correct(const std::string& answer, const Truth& t) {
  return std::find(t.answers.begin(), t.answers.end(), answer) != t.answers.end();
}

double ratio(std::size_t num, std::size_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace

void write_predictions(std::ostream& out, std::span<const PredictionEntry> entries) {
  for (const auto& e : entries) {
    require(e.question_id.find_first_of("\t\n") == std::string::npos &&
                e.answer.find_first_of("\t\n") == std::string::npos,
            ErrorCode::kInvalidArgument, "prediction fields may not contain tabs or newlines");
    out << e.question_id << '\t' << e.answer << '\t' << format_double(e.lambda) << '\t';
    write_vector(out, e.scores);
    out << '\t';
    write_vector(out, e.distances);
    out << '\n';
  }
}

std::vector<PredictionEntry> read_predictions(std::istream& in) {
  std::vector<PredictionEntry> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::string where = "predictions line " + std::to_string(line_no);
    const auto f = split_view(line, '\t');
    if (f.size() < 3 || f.size() > 5) fail(ErrorCode::kParse, where + ": expected 3 to 5 fields");
    PredictionEntry e;
    e.question_id = std::string(f[0]);
    e.answer = std::string(f[1]);
    require(!e.question_id.empty() && !e.answer.empty(), ErrorCode::kParse,
            where + ": empty question id or answer");
    e.lambda = parse_double(f[2], where);
    if (f.size() > 3) e.scores = read_vector(f[3], where);
    if (f.size() > 4) e.distances = read_vector(f[4], where);
    out.push_back(std::move(e));
  }
  return out;
}

void save_predictions(const std::string& path, std::span<const PredictionEntry> entries) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) fail(ErrorCode::kIo, "cannot open '" + path + "' for writing");
  write_predictions(out, entries);
  if (!out) fail(ErrorCode::kIo, "write failed for '" + path + "'");
}

std::vector<PredictionEntry> load_predictions(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::kIo, "cannot open '" + path + "' for reading");
  return read_predictions(in);
}

std::vector<Truth> truths_from(std::span<const QAInstance> instances, const Inventory& inventory) {
  std::vector<Truth> out;
  out.reserve(instances.size());
  for (const auto& q : instances) {
    out.push_back({q.question_id, std::string(to_string(q.qtype)), q.answers, q.entailed_by,
                   question_form(q.tokens, inventory)});
  }
  return out;
}

std::vector<Prediction> predictions_from(std::span<const PredictionEntry> entries) {
  std::vector<Prediction> out;
  out.reserve(entries.size());
  for (const auto& e : entries) out.push_back({e.question_id, e.answer});
  return out;
}

double accuracy(std::span<const Prediction> preds, std::span<const Truth> truths) {
  const TruthIndex index(truths);
  std::size_t hits = 0;
  for (const auto& p : preds) hits += correct(p.answer, index.at(p.question_id)) ? 1 : 0;
  return ratio(hits, preds.size());
}

std::map<std::string, double> per_type_accuracy(std::span<const Prediction> preds,
                                                std::span<const Truth> truths) {
  const TruthIndex index(truths);
  std::map<std::string, std::pair<std::size_t, std::size_t>> tally;
  for (const auto& p : preds) {
    const Truth& t = index.at(p.question_id);
    auto& [hits, total] = tally[t.qtype];
    hits += correct(p.answer, t) ? 1 : 0;
    ++total;
  }
  std::map<std::string, double> out;
  for (const auto& [type, ht] : tally) out[type] = ratio(ht.first, ht.second);
  return out;
}

std::optional<double> answer_recall(std::span<const Prediction> preds, std::span<const Truth> truths,
                                    const std::string& answer,
                                    const std::set<std::string>& vocabulary) {
  require(vocabulary.count(answer) > 0, ErrorCode::kInvalidArgument,
          "answer '" + answer + "' is not in the vocabulary");
  const TruthIndex index(truths);
  std::size_t hits = 0, total = 0;
  for (const auto& p : preds) {
    const Truth& t = index.at(p.question_id);
    if (!correct(answer, t)) continue;
    ++total;
    hits += correct(p.answer, t) ? 1 : 0;
  }
  if (total == 0) return std::nullopt;
  return ratio(hits, total);
}

std::map<std::string, double> answer_recall_map(std::span<const Prediction> preds,
                                                std::span<const Truth> truths,
                                                const std::set<std::string>& vocabulary) {
  const TruthIndex index(truths);
  std::map<std::string, std::pair<std::size_t, std::size_t>> tally;
  for (const auto& p : preds) {
    const Truth& t = index.at(p.question_id);
    const bool hit = correct(p.answer, t);
    for (const auto& a : std::set<std::string>(t.answers.begin(), t.answers.end())) {
      if (!vocabulary.count(a)) continue;
      auto& [hits, total] = tally[a];
      ++total;
      hits += hit ? 1 : 0;
    }
  }
  std::map<std::string, double> out;
  for (const auto& [a, ht] : tally) out[a] = ratio(ht.first, ht.second);
  return out;
}

ConsistencyResult consistency(std::span<const Prediction> preds, std::span<const Truth> truths) {
  const TruthIndex index(truths);
  std::unordered_map<std::string, const Prediction*> pred_of;
  for (const auto& p : preds) {
    index.at(p.question_id);
    require(pred_of.emplace(p.question_id, &p).second, ErrorCode::kInvalidArgument,
            "duplicate prediction for question '" + p.question_id + "'");
  }
  ConsistencyResult r;
  for (const auto& p : preds) {
    const Truth& t = index.at(p.question_id);
    if (!t.entailed_by) continue;
    const Truth* src = index.find(*t.entailed_by);
    auto sp = pred_of.find(*t.entailed_by);
    require(src != nullptr && sp != pred_of.end(), ErrorCode::kInvalidArgument,
            "question '" + t.question_id + "' is entailed by '" + *t.entailed_by +
                "', which has no ground truth or prediction");
    if (!correct(sp->second->answer, *src)) continue;
    ++r.eligible;
    r.agreeing += correct(p.answer, t) ? 1 : 0;
  }
  r.rate = r.eligible == 0 ? 1.0 : ratio(r.agreeing, r.eligible);
  return r;
}

ScopeMap default_scope_map(const Inventory& inv, const Vocabulary& answers) {
  ScopeMap scope;
  scope["verify"] = {"yes", "no"};
  scope["logical"] = {"yes", "no"};
  auto& choose = scope["choose"];
  for (const auto* list : {&inv.colors, &inv.shapes, &inv.sizes}) choose.insert(list->begin(), list->end());
  auto& query = scope["query"];
  for (const auto& a : answers.answers()) {
    if (a != "yes" && a != "no") query.insert(a);
  }
  return scope;
}

double validity(std::span<const Prediction> preds, std::span<const Truth> truths,
                const ScopeMap& scope) {
  const TruthIndex index(truths);
  std::size_t valid = 0;
  for (const auto& p : preds) {
    const Truth& t = index.at(p.question_id);
    auto it = scope.find(t.qtype);
    require(it != scope.end(), ErrorCode::kInvalidArgument,
            "scope map has no entry for question type '" + t.qtype + "'");
    valid += it->second.count(p.answer) ? 1 : 0;
  }
  return ratio(valid, preds.size());
}

CooccurrenceTable build_cooccurrence(std::span<const Truth> truths) {
  CooccurrenceTable table;
  for (const auto& t : truths) table[t.group].insert(t.answers.begin(), t.answers.end());
  return table;
}

double plausibility(std::span<const Prediction> preds, std::span<const Truth> truths,
                    const CooccurrenceTable& table) {
  const TruthIndex index(truths);
  std::size_t plausible = 0;
  for (const auto& p : preds) {
    const Truth& t = index.at(p.question_id);
    auto it = table.find(t.group);
    require(it != table.end(), ErrorCode::kInvalidArgument,
            "co-occurrence table has no entry for question form '" + t.group + "'");
    plausible += it->second.count(p.answer) ? 1 : 0;
  }
  return ratio(plausible, preds.size());
}

double distribution(std::span<const Prediction> preds, std::span<const Truth> truths) {
  require(!preds.empty(), ErrorCode::kInvalidArgument, "distribution of an empty prediction set");
  const TruthIndex index(truths);
  struct Group {
    std::map<std::string, double> predicted, truth;
    std::size_t n = 0;
  };
  std::map<std::string, Group> groups;
  for (const auto& p : preds) {
    const Truth& t = index.at(p.question_id);
    require(!t.answers.empty(), ErrorCode::kInvalidArgument,
            "question '" + t.question_id + "' has no ground-truth answer");
    auto& g = groups[t.group];
    g.predicted[p.answer] += 1.0;
    g.truth[t.answers.front()] += 1.0;
    ++g.n;
  }
  double weighted = 0.0;
  for (auto& [name, g] : groups) {
    const double n = static_cast<double>(g.n);
    std::set<std::string> support;
    for (const auto& [a, c] : g.predicted) support.insert(a);
    for (const auto& [a, c] : g.truth) support.insert(a);
    double score = 0.0;
    for (const auto& a : support) {
      const double pi = g.predicted.count(a) ? g.predicted[a] / n : 0.0;
      const double qi = g.truth.count(a) ? g.truth[a] / n : 0.0;
      if (pi + qi > 0.0) score += (pi - qi) * (pi - qi) / (pi + qi);
    }
    weighted += n * 0.5 * score;
  }
  return weighted / static_cast<double>(preds.size());
}

MetricReport compute_report(std::span<const Prediction> preds, std::span<const Truth> truths,
                            const ScopeMap& scope, const CooccurrenceTable& table,
                            const std::set<std::string>& vocabulary) {
  require(!preds.empty(), ErrorCode::kInvalidArgument, "no predictions to score");
  const TruthIndex index(truths);
  MetricReport r;
  r.count = preds.size();
  r.accuracy = accuracy(preds, truths);
  r.per_type_accuracy = per_type_accuracy(preds, truths);
  for (const auto& p : preds) ++r.per_type_count[index.at(p.question_id).qtype];
  r.answer_recall = answer_recall_map(preds, truths, vocabulary);
  r.validity = validity(preds, truths, scope);
  r.plausibility = plausibility(preds, truths, table);
  r.distribution = distribution(preds, truths);
  const auto c = consistency(preds, truths);
  r.consistency = c.rate;
  r.consistency_pairs = c.eligible;
  return r;
}

void write_report_text(std::ostream& out, const MetricReport& r) {
  out << "label=" << r.label << '\n'
      << "lambda=" << format_double(r.lambda) << '\n'
      << "count=" << r.count << '\n'
      << "accuracy=" << format_double(r.accuracy) << '\n'
      << "validity=" << format_double(r.validity) << '\n'
      << "plausibility=" << format_double(r.plausibility) << '\n'
      << "distribution=" << format_double(r.distribution) << '\n'
      << "consistency=" << format_double(r.consistency) << '\n'
      << "consistency_pairs=" << r.consistency_pairs << '\n';
  for (const auto& [t, v] : r.per_type_accuracy) out << "accuracy." << t << '=' << format_double(v) << '\n';
  for (const auto& [t, n] : r.per_type_count) out << "count." << t << '=' << n << '\n';
  for (const auto& [a, v] : r.answer_recall) out << "recall." << a << '=' << format_double(v) << '\n';
}

MetricReport read_report_text(std::istream& in) {
  MetricReport r;
  std::string line;
  std::size_t line_no = 0;
  std::set<std::string> seen;
  auto to_size = [](const std::string& v, const std::string& where) {
    std::size_t n = 0;
    auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), n);
    if (ec != std::errc() || ptr != v.data() + v.size()) fail(ErrorCode::kParse, where + ": bad count '" + v + "'");
    return n;
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    const std::string where = "report line " + std::to_string(line_no);
    const auto eq = line.find('=');
    if (eq == std::string::npos || eq == 0) fail(ErrorCode::kParse, where + ": expected key=value");
    const std::string key = line.substr(0, eq);
    const std::string value = line.substr(eq + 1);
    require(seen.insert(key).second, ErrorCode::kParse, where + ": duplicate key '" + key + "'");
    if (key == "label") r.label = value;
    else if (key == "lambda") r.lambda = parse_double(value, where);
    else if (key == "count") r.count = to_size(value, where);
    else if (key == "accuracy") r.accuracy = parse_double(value, where);
    else if (key == "validity") r.validity = parse_double(value, where);
    else if (key == "plausibility") r.plausibility = parse_double(value, where);
    else if (key == "distribution") r.distribution = parse_double(value, where);
    else if (key == "consistency") r.consistency = parse_double(value, where);
    else if (key == "consistency_pairs") r.consistency_pairs = to_size(value, where);
    else if (key.starts_with("accuracy.")) r.per_type_accuracy[key.substr(9)] = parse_double(value, where);
    else if (key.starts_with("count.")) r.per_type_count[key.substr(6)] = to_size(value, where);
    else if (key.starts_with("recall.")) r.answer_recall[key.substr(7)] = parse_double(value, where);
    else fail(ErrorCode::kParse, where + ": unknown key '" + key + "'");
  }
  require(seen.count("accuracy") > 0 && seen.count("count") > 0, ErrorCode::kParse,
          "report is missing accuracy or count");
  return r;
}

std::string report_json(const MetricReport& r) {
  nlohmann::ordered_json j;
  j["label"] = r.label;
  j["lambda"] = r.lambda;
  j["count"] = r.count;
  j["accuracy"] = r.accuracy;
  j["per_type_accuracy"] = r.per_type_accuracy;
  j["per_type_count"] = r.per_type_count;
  j["answer_recall"] = r.answer_recall;
  j["validity"] = r.validity;
  j["plausibility"] = r.plausibility;
  j["distribution"] = r.distribution;
  j["consistency"] = r.consistency;
  j["consistency_pairs"] = r.consistency_pairs;
  return j.dump(2);
}

}  // namespace semvqa
