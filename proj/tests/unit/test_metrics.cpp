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

#include <cmath>
#include <sstream>

#include <nlohmann/json.hpp>

#include "core/metrics.hpp"
#include "metric_reference.hpp"
#include "test_util.hpp"

using namespace semvqa;
using namespace semvqa::testing;

namespace {

Truth truth(std::string id, std::string type, std::vector<std::string> answers,
            std::string group = "g", std::optional<std::string> source = std::nullopt) {
  return {std::move(id), std::move(type), std::move(answers), std::move(source), std::move(group)};
}

}  // namespace

TEST_CASE("accuracy") {
  const std::vector<Truth> t{truth("a", "query", {"red"}), truth("b", "query", {"blue"}),
                             truth("c", "verify", {"yes"}), truth("d", "verify", {"no", "yes"})};
  CHECK(accuracy(std::vector<Prediction>{{"a", "red"}, {"b", "blue"}, {"c", "yes"}, {"d", "yes"}}, t) == 1.0);
  CHECK(accuracy(std::vector<Prediction>{{"a", "no"}, {"b", "no"}, {"c", "no"}, {"d", "red"}}, t) == 0.0);
  CHECK(accuracy(std::vector<Prediction>{{"a", "red"}, {"b", "red"}, {"c", "yes"}, {"d", "no"}}, t) == 0.75);
  CHECK(error_code_of([&] { accuracy(std::vector<Prediction>{{"zz", "red"}}, t); }) ==
        ErrorCode::kInvalidArgument);
  const std::vector<Truth> dup{truth("a", "query", {"red"}), truth("a", "query", {"red"})};
  CHECK(error_code_of([&] { accuracy(std::vector<Prediction>{{"a", "red"}}, dup); }) ==
        ErrorCode::kInvalidArgument);
}

TEST_CASE("per-type accuracy") {
  const std::vector<Truth> one{truth("a", "query", {"red"}), truth("b", "query", {"blue"})};
  const std::vector<Prediction> p1{{"a", "red"}, {"b", "red"}};
  const auto m1 = per_type_accuracy(p1, one);
  REQUIRE(m1.size() == 1);
  CHECK(m1.at("query") == accuracy(p1, one));

  const std::vector<Truth> two{truth("a", "query", {"red"}), truth("b", "verify", {"yes"})};
  const auto m2 = per_type_accuracy(std::vector<Prediction>{{"a", "red"}, {"b", "no"}}, two);
  CHECK(m2.at("query") == 1.0);
  CHECK(m2.at("verify") == 0.0);

  // Ten records: query 3/4, verify 2/3, choose 1/2, logical 0/1.
  std::vector<Truth> ten;
  std::vector<Prediction> pt;
  const char* types[] = {"query", "query", "query", "query", "verify", "verify", "verify",
                         "choose", "choose", "logical"};
  const bool right[] = {true, true, true, false, true, false, true, false, true, false};
  for (int i = 0; i < 10; ++i) {
    ten.push_back(truth("q" + std::to_string(i), types[i], {"x"}));
    pt.push_back({"q" + std::to_string(i), right[i] ? "x" : "y"});
  }
  const auto m = per_type_accuracy(pt, ten);
  CHECK(m.at("query") == 0.75);
  CHECK(m.at("verify") == doctest::Approx(2.0 / 3.0));
  CHECK(m.at("choose") == 0.5);
  CHECK(m.at("logical") == 0.0);
}

TEST_CASE("answer recall") {
  const std::set<std::string> vocab{"red", "blue", "green"};
  const std::vector<Truth> t{truth("a", "query", {"red"}), truth("b", "query", {"red"}),
                             truth("c", "query", {"red", "blue"}), truth("d", "query", {"red"})};
  const std::vector<Prediction> p{{"a", "red"}, {"b", "blue"}, {"c", "blue"}, {"d", "green"}};
  CHECK(answer_recall(p, t, "red", vocab) == 0.5);
  CHECK_FALSE(answer_recall(p, t, "green", vocab).has_value());
  CHECK(answer_recall(p, t, "blue", vocab) == 1.0);
  CHECK(error_code_of([&] { answer_recall(p, t, "mauve", vocab); }) == ErrorCode::kInvalidArgument);
  const auto map = answer_recall_map(p, t, vocab);
  CHECK(map.size() == 2);
  CHECK(map.at("red") == 0.5);
}

TEST_CASE("consistency") {
  // Six pairs: sources right for pairs 0, 2, 4; of those, entailed right for 0 and 4.
  std::vector<Truth> t;
  std::vector<Prediction> p;
  const bool src_right[] = {true, false, true, false, true, false};
  const bool ent_right[] = {true, true, false, false, true, true};
  for (int i = 0; i < 6; ++i) {
    const auto s = "s" + std::to_string(i), e = "e" + std::to_string(i);
    t.push_back(truth(s, "query", {"red"}));
    t.push_back(truth(e, "verify", {"yes"}, "g", s));
    p.push_back({s, src_right[i] ? "red" : "blue"});
    p.push_back({e, ent_right[i] ? "yes" : "no"});
  }
  const auto r = consistency(p, t);
  CHECK(r.eligible == 3);
  CHECK(r.agreeing == 2);
  CHECK(r.rate == doctest::Approx(2.0 / 3.0));

  CHECK(consistency(std::vector<Prediction>{{"s0", "red"}}, t).rate == 1.0);
  const std::vector<Prediction> dangling{{"e0", "yes"}};
  CHECK(error_code_of([&] { consistency(dangling, t); }) == ErrorCode::kInvalidArgument);
}

TEST_CASE("validity") {
  Inventory inv;
  const auto scope = default_scope_map(inv, answer_vocabulary(inv));
  const std::vector<Truth> t{truth("a", "verify", {"yes"}), truth("b", "verify", {"no"}),
                             truth("c", "choose", {"red"}), truth("d", "query", {"two"})};
  CHECK(validity(std::vector<Prediction>{{"a", "yes"}}, t, scope) == 1.0);
  CHECK(validity(std::vector<Prediction>{{"a", "red"}}, t, scope) == 0.0);
  CHECK(validity(std::vector<Prediction>{{"a", "no"}, {"b", "red"}, {"c", "circle"}, {"d", "yes"}}, t,
                 scope) == 0.5);
  const std::vector<Truth> odd{truth("x", "compare", {"yes"})};
  CHECK(error_code_of([&] { validity(std::vector<Prediction>{{"x", "yes"}}, odd, scope); }) ==
        ErrorCode::kInvalidArgument);
}

TEST_CASE("plausibility") {
  const std::vector<Truth> t{truth("a", "query", {"red"}, "color of <shape>"),
                             truth("b", "query", {"blue"}, "color of <shape>"),
                             truth("c", "query", {"circle"}, "shape of <color>")};
  const auto table = build_cooccurrence(t);
  CHECK(plausibility(std::vector<Prediction>{{"a", "red"}, {"b", "blue"}, {"c", "circle"}}, t, table) == 1.0);
  CHECK(plausibility(std::vector<Prediction>{{"c", "red"}}, t, table) == 0.0);
  CHECK(plausibility(std::vector<Prediction>{{"a", "blue"}, {"b", "circle"}, {"c", "circle"}, {"a", "green"}}, t,
                     table) == 0.5);
  CHECK(error_code_of([&] { plausibility(std::vector<Prediction>{{"a", "red"}}, t, CooccurrenceTable{}); }) ==
        ErrorCode::kInvalidArgument);
}

TEST_CASE("distribution") {
  std::vector<Truth> t{truth("a", "query", {"red"}), truth("b", "query", {"blue"})};
  CHECK(distribution(std::vector<Prediction>{{"a", "blue"}, {"b", "red"}}, t) == 0.0);
  const std::vector<Truth> one{truth("a", "query", {"blue"})};
  CHECK(distribution(std::vector<Prediction>{{"a", "red"}}, one) == 1.0);
  CHECK(error_code_of([&] { distribution(std::vector<Prediction>{}, one); }) ==
        ErrorCode::kInvalidArgument);

  // Two groups; frozen value 11/36 from the high-precision oracle.
  t = {truth("a1", "query", {"red"}, "A"), truth("a2", "query", {"blue"}, "A"),
       truth("a3", "query", {"blue"}, "A"), truth("a4", "query", {"blue"}, "A"),
       truth("b1", "verify", {"yes"}, "B"), truth("b2", "verify", {"yes"}, "B")};
  const std::vector<Prediction> p{{"a1", "red"}, {"a2", "red"}, {"a3", "blue"},
                                  {"a4", "green"}, {"b1", "yes"}, {"b2", "no"}};
  CHECK(distribution(p, t) == doctest::Approx(0.3055555555555556).epsilon(1e-15));
}

TEST_CASE("all-correct fixture") {
  Rng rng(1);
  for (int trial = 0; trial < 100; ++trial) {
    auto f = random_metric_fixture(rng);
    for (auto& p : f.preds) {
      for (const auto& t : f.truths)
        if (t.question_id == p.question_id) p.answer = t.answers[0];
    }
    CHECK(accuracy(f.preds, f.truths) == 1.0);
    CHECK(consistency(f.preds, f.truths).rate == 1.0);
    CHECK(distribution(f.preds, f.truths) == 0.0);
  }
}

TEST_CASE("metrics agree with brute-force references") {
  Rng rng(2);
  for (int trial = 0; trial < 1000; ++trial) {
    auto f = random_metric_fixture(rng);
    const auto table = build_cooccurrence(f.truths);
    CHECK(accuracy(f.preds, f.truths) == doctest::Approx(ref::accuracy(f)).epsilon(1e-12));
    const auto pt = per_type_accuracy(f.preds, f.truths);
    const auto pt_ref = ref::per_type(f);
    REQUIRE(pt.size() == pt_ref.size());
    for (const auto& [k, v] : pt_ref) CHECK(pt.at(k) == doctest::Approx(v).epsilon(1e-12));
    for (const auto& a : f.vocabulary) {
      const auto r = answer_recall(f.preds, f.truths, a, f.vocabulary);
      const auto rr = ref::recall(f, a);
      REQUIRE(r.has_value() == rr.has_value());
      if (r) CHECK(*r == doctest::Approx(*rr).epsilon(1e-12));
    }
    CHECK(consistency(f.preds, f.truths).rate == doctest::Approx(ref::consistency(f)).epsilon(1e-12));
    CHECK(validity(f.preds, f.truths, f.scope) == doctest::Approx(ref::validity(f)).epsilon(1e-12));
    CHECK(plausibility(f.preds, f.truths, table) == doctest::Approx(ref::plausibility(f)).epsilon(1e-12));
    const double d = distribution(f.preds, f.truths);
    CHECK(d == doctest::Approx(ref::distribution(f)).epsilon(1e-12));
    CHECK(d >= 0.0);
    CHECK(d <= 1.0 + 1e-12);

    const auto rep = compute_report(f.preds, f.truths, f.scope, table, f.vocabulary);
    for (double v : {rep.accuracy, rep.validity, rep.plausibility, rep.consistency}) {
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
    }
    // Permuting the records changes nothing.
    auto shuffled = f;
    std::reverse(shuffled.preds.begin(), shuffled.preds.end());
    std::reverse(shuffled.truths.begin(), shuffled.truths.end());
    const auto rep2 = compute_report(shuffled.preds, shuffled.truths, f.scope, table, f.vocabulary);
    CHECK(rep2.accuracy == rep.accuracy);
    CHECK(rep2.per_type_accuracy == rep.per_type_accuracy);
    CHECK(rep2.answer_recall == rep.answer_recall);
    CHECK(rep2.validity == rep.validity);
    CHECK(rep2.plausibility == rep.plausibility);
    CHECK(rep2.distribution == doctest::Approx(rep.distribution).epsilon(1e-14));
    CHECK(rep2.consistency == rep.consistency);
  }
}

TEST_CASE("report text and JSON") {
  Rng rng(3);
  auto f = random_metric_fixture(rng);
  auto rep = compute_report(f.preds, f.truths, f.scope, build_cooccurrence(f.truths), f.vocabulary);
  rep.label = "lambda0.5-glove";
  rep.lambda = 0.5;
  std::stringstream s;
  write_report_text(s, rep);
  const auto back = read_report_text(s);
  CHECK(back.label == rep.label);
  CHECK(back.lambda == rep.lambda);
  CHECK(back.count == rep.count);
  CHECK(back.accuracy == rep.accuracy);
  CHECK(back.validity == rep.validity);
  CHECK(back.plausibility == rep.plausibility);
  CHECK(back.distribution == rep.distribution);
  CHECK(back.consistency == rep.consistency);
  CHECK(back.consistency_pairs == rep.consistency_pairs);
  CHECK(back.per_type_accuracy == rep.per_type_accuracy);
  CHECK(back.per_type_count == rep.per_type_count);
  CHECK(back.answer_recall == rep.answer_recall);

  const auto j = nlohmann::json::parse(report_json(rep));
  CHECK(j.at("accuracy").get<double>() == rep.accuracy);
  CHECK(j.at("label").get<std::string>() == rep.label);

  std::istringstream dup("count=1\naccuracy=0.5\naccuracy=0.5\n");
  CHECK(error_code_of([&] { read_report_text(dup); }) == ErrorCode::kParse);
  std::istringstream unknown("count=1\naccuracy=0.5\nspeed=3\n");
  CHECK(error_code_of([&] { read_report_text(unknown); }) == ErrorCode::kParse);
}

TEST_CASE("prediction files") {
  std::vector<PredictionEntry> e{{"q1", "red", 0.5, {0.1, -2.5e-7}, {1.0, 3.0}},
                                 {"q2", "top left", 1.0, {}, {}}};
  std::stringstream s;
  write_predictions(s, e);
  const auto back = read_predictions(s);
  REQUIRE(back.size() == 2);
  CHECK(back[0].question_id == "q1");
  CHECK(back[0].scores == e[0].scores);
  CHECK(back[0].distances == e[0].distances);
  CHECK(back[1].answer == "top left");
  CHECK(back[1].lambda == 1.0);
  CHECK(back[1].scores.empty());
  std::istringstream bad("q1\tred\n");
  CHECK(error_code_of([&] { read_predictions(bad); }) == ErrorCode::kParse);
  std::istringstream badnum("q1\tred\tx\n");
  CHECK(error_code_of([&] { read_predictions(badnum); }) == ErrorCode::kParse);
}

TEST_CASE("truths from a generated benchmark") {
  SynthConfig c;
  c.num_questions = 100;
  const auto b = generate_benchmark(c);
  const auto t = truths_from(b.instances, c.inventory);
  REQUIRE(t.size() == 100);
  for (std::size_t i = 0; i < t.size(); ++i) {
    CHECK(t[i].group == question_form(b.instances[i].tokens, c.inventory));
    CHECK(t[i].answers == b.instances[i].answers);
  }
}
