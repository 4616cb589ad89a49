#include <doctest.h>

#include <cmath>
#include <random>

#include "civl/error.hpp"
#include "civl/rules.hpp"
#include "civl/serialize.hpp"
#include "oracles.hpp"
#include "test_support.hpp"

using namespace civl;
using civl::testing::make_dataset;

namespace {

DncOptions unit_coverage() {
  DncOptions o;
  o.min_coverage = 1;
  return o;
}

constexpr std::size_t kPetalLength = 2, kPetalWidth = 3;

IntervalRule rule(std::size_t attr, double lo, double hi, std::string label, std::size_t it = 1) {
  IntervalRule r;
  r.conditions = {{attr, lo, hi}};
  r.label = std::move(label);
  r.iteration = it;
  return r;
}

std::size_t correct(const DecisionList& dl, const Dataset& d) {
  std::size_t n = 0;
  for (std::size_t i = 0; i < d.size(); ++i) n += dl.classify(d.row(i)) == std::optional<std::string>(d.label(i));
  return n;
}

}  // namespace

TEST_CASE("petal.width Virginica rule on normalized Iris") {
  const Dataset pair = civl::testing::iris_pair_normalized();
  const auto rules = discover_pure_intervals(pair, kPetalWidth, 1);
  const IntervalRule* v = nullptr;
  for (const auto& r : rules)
    if (r.label == "Virginica" && r.conditions[0].hi == 1.0) v = &r;
  REQUIRE(v);
  CHECK(v->conditions[0].lo == doctest::Approx(0.75).epsilon(0.005));
  CHECK(v->coverage == 34);
  CHECK(v->class_share == doctest::Approx(0.68));
  CHECK(v->dataset_share == doctest::Approx(0.34));
  // direct enumeration
  std::size_t n = 0, wrong = 0;
  for (std::size_t i = 0; i < pair.size(); ++i)
    if (pair.at(i, kPetalWidth) >= v->conditions[0].lo) (pair.label(i) == "Virginica" ? n : wrong) += 1;
  CHECK(n == 34);
  CHECK(wrong == 0);
}

TEST_CASE("raw petal length above 5.1 is pure Virginica") {
  const Dataset raw = civl::testing::iris_raw();
  std::size_t virg = 0, vers = 0;
  for (std::size_t i = 0; i < raw.size(); ++i)
    if (raw.at(i, kPetalLength) > 5.1) {
      virg += raw.label(i) == "Virginica";
      vers += raw.label(i) == "Versicolor";
    }
  CHECK(vers == 0);
  CHECK(virg == 34);
  // the discovered top run on petal length is the same region
  const auto rules = discover_pure_intervals(raw, kPetalLength, 1);
  REQUIRE_FALSE(rules.empty());
  CHECK(rules.back().label == "Virginica");
  CHECK(rules.back().conditions[0].lo == 5.2);
  CHECK(rules.back().coverage == 34);
}

TEST_CASE("single-class data gives one spanning rule") {
  const Dataset d = make_dataset({"x"}, {{3}, {1}, {2}, {2}}, {"A", "A", "A", "A"});
  const auto r = discover_pure_intervals(d, 0, 1);
  REQUIRE(r.size() == 1);
  CHECK(r[0].conditions[0] == AttributeRange{0, 1, 3});
  CHECK(r[0].coverage == 4);
  CHECK(r[0].class_share == 1.0);
  CHECK_THROWS_AS(discover_pure_intervals(d, 0, 0), Error);
  CHECK_THROWS_AS(discover_pure_intervals(d, 1, 1), Error);
}

TEST_CASE("a value shared across classes breaks a run") {
  const Dataset d = make_dataset({"x"}, {{1}, {2}, {3}, {3}, {4}, {5}}, {"A", "A", "A", "B", "A", "A"});
  const auto r = discover_pure_intervals(d, 0, 1);
  REQUIRE(r.size() == 2);
  CHECK(r[0].conditions[0] == AttributeRange{0, 1, 2});
  CHECK(r[1].conditions[0] == AttributeRange{0, 4, 5});
  CHECK(discover_pure_intervals(d, 0, 3).empty());
}

TEST_CASE("pure intervals match exhaustive enumeration on random data") {
  std::mt19937_64 g(31);
  for (int trial = 0; trial < 60; ++trial) {
    const Dataset d = civl::testing::random_dataset(g, 5 + g() % 120, 2 + g() % 2, 2 + g() % 4);
    for (std::size_t a = 0; a < d.dim(); ++a)
      for (std::size_t mc : {1u, 3u}) {
        const auto got = discover_pure_intervals(d, a, mc);
        const auto want = civl::testing::brute_pure_intervals(d, a, mc);
        REQUIRE(got.size() == want.size());
        for (std::size_t k = 0; k < got.size(); ++k) {
          CHECK(got[k].conditions[0].lo == want[k].lo);
          CHECK(got[k].conditions[0].hi == want[k].hi);
          CHECK(got[k].label == want[k].label);
          CHECK(got[k].coverage == want[k].covered.size());
          CHECK(covered_cases(got[k], d) == want[k].covered);
        }
      }
  }
}

TEST_CASE("dnc_run equals the greedy oracle on random data") {
  std::mt19937_64 g(77);
  for (int trial = 0; trial < 40; ++trial) {
    const Dataset d = civl::testing::random_dataset(g, 10 + g() % 100, 2 + g() % 2, 2 + g() % 3);
    const std::size_t mc = 1 + g() % 4;
    DncOptions opt;
    opt.min_coverage = mc;
    const auto got = dnc_run(d, opt);
    const auto want = civl::testing::greedy_dnc_oracle(d, mc);
    CHECK(civl::testing::as_oracle_rules(got.list) == want.rules);
    CHECK(got.leftovers == want.leftovers);
    CHECK(got.list.fallback.label == want.fallback);
  }
}

TEST_CASE("dnc_run on a 40-case planted-band set matches the oracle") {
  std::vector<std::vector<double>> rows;
  std::vector<std::string> labels;
  for (int i = 0; i < 40; ++i) {
    const bool a = i < 20;
    // bands: A low on x0, B high on x0; a shared middle band resolved by x1
    const double x0 = a ? (i < 12 ? i * 0.1 : 2.0 + (i % 4) * 0.1) : (i < 32 ? 5.0 + i * 0.1 : 2.0 + (i % 4) * 0.1);
    const double x1 = a ? 1.0 + (i % 3) : 6.0 + (i % 3);
    rows.push_back({x0, x1});
    labels.push_back(a ? "A" : "B");
  }
  const Dataset d = make_dataset({"x0", "x1"}, rows, labels);
  DncOptions opt;
  opt.min_coverage = 3;
  const auto got = dnc_run(d, opt);
  const auto want = civl::testing::greedy_dnc_oracle(d, 3);
  CHECK(civl::testing::as_oracle_rules(got.list) == want.rules);
  CHECK(got.leftovers.empty());
  CHECK(correct(got.list, d) == 40);
}

TEST_CASE("dnc_run classifies all of Iris with unit coverage") {
  const Dataset d = civl::testing::iris_normalized();
  DncOptions opt;
  opt.min_coverage = 1;
  const auto res = dnc_run(d, opt);
  CHECK(res.leftovers.empty());
  CHECK(correct(res.list, d) == 150);
  // every iteration shrinks the remaining set and every rule is pure on its snapshot
  std::set<CaseId> remaining(d.case_ids().begin(), d.case_ids().end());
  for (std::size_t it = 1; it <= res.list.iterations(); ++it) {
    const Dataset snap = select_ids(d, remaining);
    std::set<CaseId> removed;
    for (const auto& r : res.list.rules) {
      if (r.iteration != it) continue;
      const auto cov = covered_cases(r, snap);
      CHECK(cov.size() == r.coverage);
      for (CaseId id : cov) CHECK(d.label(*d.index_of(id)) == r.label);
      removed.insert(cov.begin(), cov.end());
    }
    CHECK_FALSE(removed.empty());
    for (CaseId id : removed) remaining.erase(id);
  }
  CHECK(remaining.empty());
}

TEST_CASE("dnc_run on the two-class task with the default coverage") {
  const Dataset pair = civl::testing::iris_pair_normalized();
  CHECK(default_min_coverage(pair) == 3);
  const auto res = dnc_run(pair);
  CHECK(res.min_coverage == 3);
  CHECK(res.list.fallback.kind == FallbackKind::majority_class);
  const auto want = civl::testing::greedy_dnc_oracle(pair, 3);
  CHECK(civl::testing::as_oracle_rules(res.list) == want.rules);
  CHECK(res.leftovers == want.leftovers);
  // covered cases are classified correctly; only leftovers may go wrong
  std::size_t wrong = 0;
  for (std::size_t i = 0; i < pair.size(); ++i)
    wrong += res.list.classify(pair.row(i)) != std::optional<std::string>(pair.label(i));
  CHECK(wrong <= res.leftovers.size());
}

TEST_CASE("identical cases across classes give an immediate fallback") {
  const Dataset d = make_dataset({"x", "y"}, {{1, 1}, {1, 1}, {1, 1}}, {"A", "B", "B"});
  const auto res = dnc_run(d, unit_coverage());
  CHECK(res.list.rules.empty());
  CHECK(res.leftovers.size() == 3);
  CHECK(res.list.fallback == Fallback{FallbackKind::majority_class, "B"});
  CHECK(res.list.classify(std::vector<double>{9, 9}) == std::optional<std::string>("B"));
}

TEST_CASE("default min coverage is 5% of the smallest class, at least 3") {
  std::vector<std::vector<double>> rows(260, std::vector<double>{0});
  std::vector<std::string> labels(260, "A");
  for (std::size_t i = 0; i < 101; ++i) labels[i] = "B";
  CHECK(default_min_coverage(make_dataset({"x"}, rows, labels)) == 6);  // ceil(5.05)
  CHECK(default_min_coverage(civl::testing::iris_raw()) == 3);
}

TEST_CASE("dnc hooks choose rules and purity is enforced") {
  const Dataset pair = civl::testing::iris_pair_normalized();
  std::size_t calls = 0;
  DncOptions opt;
  opt.hook = [&](std::size_t it, const Dataset& remaining, const std::vector<IntervalRule>& cands) {
    ++calls;
    CHECK(it == calls);
    CHECK(remaining.size() <= 100);
    std::vector<IntervalRule> keep;
    if (!cands.empty()) keep.push_back(cands.front());
    if (it == 2) keep.clear();
    return keep;
  };
  const auto res = dnc_run(pair, opt);
  CHECK(calls == 2);
  CHECK(res.list.rules.size() == 1);
  CHECK(res.list.fallback.kind == FallbackKind::abstain);

  DncOptions merge = opt;
  merge.fallback = Fallback{FallbackKind::user_merge, "Versicolor"};
  calls = 0;
  CHECK(dnc_run(pair, merge).list.fallback.kind == FallbackKind::user_merge);

  DncOptions impure;
  impure.hook = [](std::size_t, const Dataset&, const std::vector<IntervalRule>&) {
    return std::vector<IntervalRule>{rule(kPetalWidth, 0.0, 1.0, "Virginica")};
  };
  CHECK_THROWS_WITH_AS(dnc_run(pair, impure), doctest::Contains("violating case ids"), Error);
}

TEST_CASE("prune_redundant keeps one of two rules covering the same class") {
  const Dataset raw = civl::testing::iris_raw();
  std::vector<IntervalRule> setosa;
  for (std::size_t a : {kPetalLength, kPetalWidth})
    for (auto& r : discover_pure_intervals(raw, a, 1))
      if (r.label == "Setosa" && r.coverage == 50) setosa.push_back(r);
  REQUIRE(setosa.size() == 2);
  const auto kept = prune_redundant(setosa, raw);
  REQUIRE(kept.size() == 1);
  CHECK(kept[0].conditions[0].attribute == kPetalLength);  // tie broken by attribute index
}

TEST_CASE("prune_redundant on nested and disjoint rules") {
  const Dataset d = make_dataset({"x"}, {{1}, {2}, {3}, {4}, {5}, {6}}, {"A", "A", "A", "B", "B", "B"});
  auto a = rule(0, 1, 3, "A"), b = rule(0, 2, 3, "A"), c = rule(0, 4, 6, "B");
  a.coverage = 3, b.coverage = 2, c.coverage = 3;
  const auto nested = prune_redundant({b, a}, d);
  REQUIRE(nested.size() == 1);
  CHECK(nested[0] == a);
  CHECK(prune_redundant({a, c}, d).size() == 2);
}

TEST_CASE("prune_redundant preserves the covered union on random rule sets") {
  std::mt19937_64 g(4);
  for (int trial = 0; trial < 30; ++trial) {
    const Dataset d = civl::testing::random_dataset(g, 60, 2, 3);
    std::vector<IntervalRule> all;
    for (std::size_t a = 0; a < d.dim(); ++a)
      for (auto& r : discover_pure_intervals(d, a, 1)) all.push_back(r);
    std::set<CaseId> before, after;
    for (const auto& r : all)
      for (CaseId id : covered_cases(r, d)) before.insert(id);
    for (const auto& r : prune_redundant(all, d))
      for (CaseId id : covered_cases(r, d)) after.insert(id);
    CHECK(before == after);
  }
}

TEST_CASE("first-match semantics skip later rules") {
  DecisionList dl;
  dl.attributes = {"x"};
  dl.rules = {rule(0, 0, 5, "A", 1), rule(0, 3, 9, "B", 2)};
  dl.fallback = {FallbackKind::abstain, ""};
  CHECK(dl.classify(std::vector<double>{4}) == std::optional<std::string>("A"));
  CHECK(dl.classify(std::vector<double>{7}) == std::optional<std::string>("B"));
  CHECK_FALSE(dl.classify(std::vector<double>{10}));
  CHECK(dl.first_match(std::vector<double>{4}) == std::optional<std::size_t>(0));
  CHECK(dl.iterations() == 2);
}

TEST_CASE("decision list JSON round-trip classifies identically") {
  const Dataset d = civl::testing::iris_normalized();
  const auto res = dnc_run(d);
  const Json j = res.list;
  CHECK(j.at("semantics") == kDecisionListSemantics);
  const auto back = Json::parse(dump(j)).get<DecisionList>();
  CHECK(back == res.list);
  for (std::size_t i = 0; i < d.size(); ++i) CHECK(back.classify(d.row(i)) == res.list.classify(d.row(i)));
  CHECK(recount_coverage(back, d) == [&] {
    std::vector<std::size_t> v;
    for (const auto& r : res.list.rules) v.push_back(r.coverage);
    return v;
  }());

  Json bad = j;
  bad["semantics"] = "any-match/1";
  CHECK_THROWS(bad.get<DecisionList>());
  Json unordered = j;
  if (unordered["rules"].size() >= 2 && res.list.iterations() >= 2) {
    unordered["rules"][0]["iteration"] = res.list.iterations() + 1;
    CHECK_THROWS(unordered.get<DecisionList>());
  }
}

TEST_CASE("rendered rules follow the Int/R notation") {
  const Dataset pair = civl::testing::iris_pair_normalized();
  const auto res = dnc_run(pair);
  const std::string text = render_rules(res.list);
  CHECK(text.rfind("Iteration 1\n  Int11(x) := ", 0) == 0);
  CHECK(text.find("R11: If Int11(x) = true then L = ") != std::string::npos);
  CHECK(text.find("Iteration 2 (only when no earlier rule matched)") != std::string::npos);
  CHECK(text.find("Otherwise: L = ") != std::string::npos);
  CHECK(text.find("of class") != std::string::npos);
}

TEST_CASE("generalized DT mirrors the decision list") {
  DecisionList one;
  one.attributes = {"x", "y"};
  one.rules = {rule(0, 0, 1, "A"), rule(0, 2, 3, "B"), rule(1, 5, 6, "C")};
  one.fallback = {FallbackKind::majority_class, "A"};
  const auto t = to_generalized_dt(one);
  CHECK(t.depth() == 1);
  CHECK(t.levels[0].leaves.size() == 3);
  CHECK(t.render().find("+- else") != std::string::npos);

  DecisionList empty;
  empty.fallback = {FallbackKind::majority_class, "Z"};
  const auto e = to_generalized_dt(empty);
  CHECK(e.depth() == 0);
  CHECK(e.render() == "root\n+- Z (majority_class)\n");
  CHECK(e.classify(std::vector<double>{}) == std::optional<std::string>("Z"));

  const Dataset d = civl::testing::iris_normalized();
  const auto dl = dnc_run(d).list;
  const auto dt = to_generalized_dt(dl);
  CHECK(dt.depth() == dl.iterations());
  for (std::size_t i = 0; i < d.size(); ++i) CHECK(dt.classify(d.row(i)) == dl.classify(d.row(i)));
  std::mt19937_64 g(3);
  std::uniform_real_distribution<double> u(-0.2, 1.2);
  for (int i = 0; i < 2000; ++i) {
    std::vector<double> x = {u(g), u(g), u(g), u(g)};
    CHECK(dt.classify(x) == dl.classify(x));
  }
}

TEST_CASE("monotonic chain holds for Setosa only in raw Iris") {
  const std::vector<std::size_t> order = {0, 1, 2, 3};
  const auto raw = test_monotonic_chain(civl::testing::iris_raw(), order);
  CHECK(raw.at("Setosa").satisfied == 50);
  CHECK(raw.at("Setosa").total == 50);
  CHECK(raw.at("Versicolor").satisfied + raw.at("Virginica").satisfied == 0);
  const auto norm = test_monotonic_chain(civl::testing::iris_normalized(), order);
  CHECK(norm.at("Setosa").satisfied < 50);
  CHECK(norm.at("Setosa").satisfied == 0);

  const Dataset one = make_dataset({"a", "b"}, {{2, 1}}, {"X"});
  CHECK(test_monotonic_chain(one, std::vector<std::size_t>{0, 1}).at("X").satisfied == 1);
  CHECK_THROWS_AS(test_monotonic_chain(one, std::vector<std::size_t>{0}), Error);
}

TEST_CASE("classify_monotonic is strict") {
  const MonotonicRule r{{0, 1, 2, 3}, "Setosa"};
  CHECK(classify_monotonic(r, std::vector<double>{5.1, 3.5, 1.4, 0.2}) == std::optional<std::string>("Setosa"));
  CHECK_FALSE(classify_monotonic(r, std::vector<double>{5.1, 3.5, 3.5, 0.2}));
  CHECK_FALSE(classify_monotonic(r, std::vector<double>{0, 0, 0, 0}));
  CHECK(render_monotonic_rule(r, std::vector<std::string>{"SL", "SW", "PL", "PW"}).find("SL(x) > SW(x) > PL(x) > PW(x)") !=
        std::string::npos);
}

TEST_CASE("monotonic classification is invariant under a common increasing transform") {
  const MonotonicRule r{{0, 1, 2, 3}, "Setosa"};
  const Dataset d = civl::testing::iris_raw();
  const std::vector<double (*)(double)> transforms = {
      [](double v) { return std::exp(v); }, [](double v) { return v * v * v; },
      [](double v) { return 2 * v + 1; }, [](double v) { return std::log1p(v); }};
  for (auto t : transforms)
    for (std::size_t i = 0; i < d.size(); ++i) {
      std::vector<double> x(d.row(i).begin(), d.row(i).end()), y = x;
      for (auto& v : y) v = t(v);
      CHECK(classify_monotonic(r, x) == classify_monotonic(r, y));
    }
}

TEST_CASE("slope rule thresholds come from reference extrema") {
  const Dataset d = make_dataset({"x1", "x2"}, {{3, 0}, {2.5, 0}, {2, 0}, {1, 0}, {0.5, 0}, {0, 0}},
                                 {"green", "green", "green", "blue", "blue", "blue"});
  const std::vector<SlopeTermSpec> t = {{0, 1, SlopeDirection::ge}};
  const auto rep = evaluate_slope_rules(d, "green", "blue", t);
  REQUIRE(rep.rule.terms.size() == 1);
  CHECK(rep.rule.terms[0].threshold == 2.0);
  CHECK(rep.inferred_fired == 3);
  CHECK(rep.false_fires == 0);
  CHECK(rep.coverage == 1.0);
  CHECK(rep.accuracy == 1.0);
  CHECK_THROWS_AS(evaluate_slope_rules(d, "red", "blue", t), Error);

  const auto vac = evaluate_slope_rules(d, "green", "blue", std::vector<SlopeTermSpec>{});
  CHECK(vac.rule.degenerate);
  CHECK(vac.inferred_fired == 3);
  CHECK(vac.false_fires == 3);
}

TEST_CASE("two-term slope rule on Versicolor and Virginica") {
  const Dataset d = civl::testing::iris_raw();
  const std::vector<SlopeTermSpec> t = {{0, 1, SlopeDirection::ge}, {1, 2, SlopeDirection::le}};
  const auto rep = evaluate_slope_rules(d, "Versicolor", "Virginica", t);
  double min01 = INFINITY, max12 = -INFINITY;
  for (std::size_t i = 0; i < d.size(); ++i)
    if (d.label(i) == "Versicolor") {
      min01 = std::min(min01, d.at(i, 0) - d.at(i, 1));
      max12 = std::max(max12, d.at(i, 1) - d.at(i, 2));
    }
  CHECK(rep.rule.terms[0].threshold == min01);
  CHECK(rep.rule.terms[1].threshold == max12);
  std::size_t fired = 0, vers_fired = 0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    const bool f = d.at(i, 0) - d.at(i, 1) < min01 && d.at(i, 1) - d.at(i, 2) > max12;
    if (d.label(i) == "Virginica") fired += f;
    if (d.label(i) == "Versicolor") vers_fired += f;
  }
  CHECK(rep.inferred_fired == fired);
  CHECK(rep.false_fires == vers_fired);
  CHECK(rep.false_fires == 0);
  CHECK(rep.accuracy == doctest::Approx((50.0 + static_cast<double>(fired)) / 100.0));
  MESSAGE("two-term slope rule fires on " << fired << " of 50 Virginica cases");
  CHECK_FALSE(render_slope_rule(rep.rule, d.attributes()).empty());
}

TEST_CASE("boosted dispatch uses the closed interval on F1's score") {
  const LinearScorer f1{{1, 0}, 0.5, "U", "B", Provenance::trained};
  const LinearScorer f2{{0, 1}, 0.5, "U", "B", Provenance::trained};
  const OverlapInterval iv{0.45, 0.6, 3, 2, false, false};
  const auto m = compose_boosted(f1, f2, iv);
  CHECK(m.parameter_count() == 6);
  CHECK(m.routes_to_f2(std::vector<double>{0.45, 0}));
  CHECK(m.routes_to_f2(std::vector<double>{0.6, 0}));
  CHECK_FALSE(m.routes_to_f2(std::vector<double>{std::nextafter(0.6, 1.0), 0}));

  // six-case toy: the second attribute separates the two overlap cases
  const Dataset d = make_dataset({"score", "fix"},
                                 {{0.9, 0}, {0.7, 0}, {0.6, 0}, {0.45, 1}, {0.3, 0}, {0.1, 0}},
                                 {"U", "U", "B", "U", "B", "B"});
  std::size_t f1_ok = 0, ok = 0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    f1_ok += f1.classify(d.row(i)) == d.label(i);
    ok += predict_boosted(m, d.row(i)) == d.label(i);
  }
  CHECK(f1_ok == 4);
  CHECK(ok == 6);
  CHECK(predict_boosted(m, d) == d.labels());
}

TEST_CASE("empty interval makes the boosted model equal to F1") {
  const LinearScorer f1{{1, 0}, 0.5, "U", "B", Provenance::trained};
  const LinearScorer f2{{0, 1, 2}, 0.5, "P", "Q", Provenance::trained};
  const auto m = compose_boosted(f1, f2, OverlapInterval{});
  CHECK(m.f2_ignored);
  CHECK(m.parameter_count() == 3);
  std::mt19937_64 g(1);
  std::uniform_real_distribution<double> u(0, 1);
  for (int i = 0; i < 100; ++i) {
    std::vector<double> x = {u(g), u(g)};
    CHECK(m.predict(x) == f1.classify(x));
  }
  const OverlapInterval iv{0.4, 0.6, std::nullopt, std::nullopt, false, false};
  CHECK_THROWS_AS(compose_boosted(f1, f2, iv), Error);
}

TEST_CASE("Iris boosted model is perfect with 10 parameters") {
  const Dataset pair = civl::testing::iris_pair_normalized();
  const auto f1 = train_fisher(pair, "Versicolor", "Virginica");
  const auto s = score_dataset(f1, pair);
  const auto iv = compute_overlap_interval(s, pair.labels(), f1.cut());
  const auto mis = find_misclassified(s, pair.labels(), f1.cut());
  std::set<CaseId> in;
  for (std::size_t i = 0; i < s.size(); ++i)
    if (iv.contains(s.scores[i])) in.insert(s.case_ids[i]);
  const auto f2 = train_weighted_overlap(select_ids(pair, in), {mis.begin(), mis.end()}, {}, "Versicolor",
                                         "Virginica", f1.coefficients)
                      .scorer;
  const auto m = compose_boosted(f1, f2, iv);
  CHECK(m.parameter_count() == 10);
  const auto pred = predict_boosted(m, pair);
  std::size_t errors = 0;
  for (std::size_t i = 0; i < pair.size(); ++i) {
    errors += pred[i] != pair.label(i);
    // dispatch agrees with the routed scorer, case by case
    const auto x = pair.row(i);
    CHECK(pred[i] == (iv.contains(f1.score(x)) ? f2.classify(x) : f1.classify(x)));
  }
  CHECK(errors == 0);
  const Json j = m;
  CHECK(Json::parse(j.dump()).get<BoostedModel>() == m);
}
