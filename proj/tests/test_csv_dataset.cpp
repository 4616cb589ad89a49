#include <doctest.h>

#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "civl/csv.hpp"
#include "civl/error.hpp"
#include "test_support.hpp"

using namespace civl;
using civl::testing::iris_path;
using civl::testing::iris_raw;
using civl::testing::make_dataset;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

std::string error_of(const std::string& text, const std::string& label = "class") {
  std::istringstream in(text);
  try {
    load_csv(in, label);
  } catch (const Error& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST_CASE("csv reader handles quotes, CRLF, blank lines and leading comments") {
  std::istringstream in("# provenance\r\n\"a,1\",b\r\n\"x \"\"q\"\"\",2\r\n\r\nlast,\"multi\nline\"\n");
  const auto recs = csv::read(in);
  REQUIRE(recs.size() == 3);
  CHECK(recs[0].fields == std::vector<std::string>{"a,1", "b"});
  CHECK(recs[1].fields == std::vector<std::string>{"x \"q\"", "2"});
  CHECK(recs[2].fields[1] == "multi\nline");
  CHECK(csv::escape("plain") == "plain");
  CHECK(csv::escape("a,b") == "\"a,b\"");
  CHECK(csv::escape("say \"hi\"") == "\"say \"\"hi\"\"\"");
}

TEST_CASE("format_double round-trips and parse_double rejects junk") {
  std::mt19937_64 g(5);
  std::uniform_real_distribution<double> u(-1e6, 1e6);
  for (int i = 0; i < 1000; ++i) {
    const double v = u(g);
    double back = 0;
    REQUIRE(csv::parse_double(csv::format_double(v), back));
    CHECK(back == v);
  }
  double x = 0;
  CHECK(csv::parse_double(" 4.5 ", x));
  CHECK(x == 4.5);
  CHECK_FALSE(csv::parse_double("abc", x));
  CHECK_FALSE(csv::parse_double("1.5x", x));
  CHECK_FALSE(csv::parse_double("inf", x));
  CHECK_FALSE(csv::parse_double("nan", x));
  CHECK_FALSE(csv::parse_double("", x));
}

TEST_CASE("iris loads with 150 cases, 4 attributes and 3 classes") {
  const Dataset d = iris_raw();
  CHECK(d.size() == 150);
  CHECK(d.dim() == 4);
  CHECK(d.attributes() ==
        std::vector<std::string>{"sepal.length", "sepal.width", "petal.length", "petal.width"});
  CHECK(d.classes() == std::vector<std::string>{"Setosa", "Versicolor", "Virginica"});
  for (const auto& c : d.classes()) CHECK(d.count_label(c) == 50);
  CHECK(d.case_id(0) == 0);
  CHECK(d.case_id(149) == 149);
  CHECK(d.at(0, 0) == 5.1);
  CHECK(d.at(0, 3) == 0.2);
}

TEST_CASE("header-only csv gives an empty dataset") {
  std::istringstream in("x,y,class\n");
  const Dataset d = load_csv(in, "class");
  CHECK(d.size() == 0);
  CHECK(d.dim() == 2);
}

TEST_CASE("csv errors name the row and column") {
  std::string text = "x,y,class\n";
  for (int r = 1; r <= 6; ++r) text += std::to_string(r) + ",1,A\n";
  text += "abc,1,A\n";
  const auto msg = error_of(text);
  CHECK(msg.find("row 7") != std::string::npos);
  CHECK(msg.find("'x'") != std::string::npos);

  CHECK(error_of("").find("missing header") != std::string::npos);
  CHECK(error_of("x,y\n1,2\n").find("label column 'class' not found") != std::string::npos);
  const auto ragged = error_of("x,y,class\n1,2,A\n1,A\n");
  CHECK(ragged.find("row 2") != std::string::npos);
  CHECK(ragged.find("2 fields, expected 3") != std::string::npos);
  CHECK(error_of("x,class\n1,\n").find("missing class label") != std::string::npos);
  CHECK(error_of("x,class\n1e999,A\n").find("finite") != std::string::npos);
}

TEST_CASE("write_csv reproduces the source file byte for byte") {
  const Dataset d = iris_raw();
  std::ostringstream out;
  write_csv(out, d);
  CHECK(out.str() == slurp(iris_path()));
}

TEST_CASE("write_csv keeps the label column position and quoting") {
  std::istringstream in("class,\"w,1\",z\nA,1.50,2\n\"B,x\",3,4e0\n");
  const Dataset d = load_csv(in, "class");
  std::ostringstream out;
  write_csv(out, d);
  CHECK(out.str() == "class,\"w,1\",z\nA,1.50,2\n\"B,x\",3,4e0\n");
}

TEST_CASE("minmax_normalize maps every attribute to [0,1] with full-data bounds") {
  const Dataset raw = iris_raw();
  const Dataset n = minmax_normalize(raw);
  REQUIRE(n.norm_meta());
  for (std::size_t a = 0; a < n.dim(); ++a) {
    const auto col = n.column(a);
    CHECK(*std::min_element(col.begin(), col.end()) == 0.0);
    CHECK(*std::max_element(col.begin(), col.end()) == 1.0);
  }
  CHECK(n.case_ids() == raw.case_ids());
}

TEST_CASE("normalizing the Versicolor/Virginica cases yields the scored-table petal.width values") {
  const Dataset pair =
      minmax_normalize(select_classes(iris_raw(), std::vector<std::string>{"Versicolor", "Virginica"}));
  const auto pw = pair.column(3);
  for (double target : {0.2, 0.3333, 0.4667}) {
    const bool found = std::any_of(pw.begin(), pw.end(), [&](double v) { return std::abs(v - target) < 5e-5; });
    CHECK(found);
  }
}

TEST_CASE("normalization of an attribute already spanning [0,1] is the identity") {
  const Dataset d = make_dataset({"a"}, {{0.0}, {0.25}, {1.0}}, {"A", "B", "A"});
  CHECK(minmax_normalize(d).column(0) == d.column(0));
}

TEST_CASE("constant attribute normalizes to zero and is flagged") {
  const Dataset d = make_dataset({"c", "v"}, {{5, 1}, {5, 2}, {5, 3}}, {"A", "A", "B"});
  const Dataset n = minmax_normalize(d);
  CHECK(n.column(0) == std::vector<double>{0, 0, 0});
  CHECK((*n.norm_meta())[0].constant);
  CHECK_FALSE((*n.norm_meta())[1].constant);
  CHECK(denormalize(n).column(0) == std::vector<double>{5, 5, 5});
}

TEST_CASE("denormalize round-trips raw iris within 1e-9 relative") {
  const Dataset raw = iris_raw();
  const Dataset back = denormalize(minmax_normalize(raw));
  for (std::size_t i = 0; i < raw.size(); ++i)
    for (std::size_t a = 0; a < raw.dim(); ++a)
      CHECK(std::abs(back.at(i, a) - raw.at(i, a)) <= 1e-9 * std::abs(raw.at(i, a)));
  CHECK_THROWS_AS(denormalize(raw), Error);
  CHECK_THROWS_AS(minmax_normalize(make_dataset({"a"}, {}, {})), Error);
}

TEST_CASE("engineer_features appends columns and leaves originals bit-identical") {
  const Dataset d = iris_raw();
  const std::vector<FeatureExpr> exprs = {
      FeatureExpr::difference(2, 3),
      FeatureExpr::weighted_sum({0, 1}, {0.0, 0.0}),
      FeatureExpr::forward_difference({0, 1, 2, 3}),
      FeatureExpr::backward_difference({0, 1}),
      FeatureExpr::slope(0, 2),
      FeatureExpr::trigonometric(TrigFunction::cos, 1),
  };
  const Dataset e = engineer_features(d, exprs);
  REQUIRE(e.dim() == 4 + 1 + 1 + 3 + 1 + 1 + 1);
  CHECK(e.attributes()[4] == "diff(petal.length,petal.width)");
  CHECK(e.attributes()[5] == "wsum(0*sepal.length,0*sepal.width)");
  CHECK(e.attributes()[6] == "fdiff(sepal.length,sepal.width)");
  CHECK(e.attributes()[9] == "bdiff(sepal.width,sepal.length)");
  CHECK(e.attributes()[10] == "slope(sepal.length,petal.length)");
  CHECK(e.attributes()[11] == "cos(sepal.width)");
  CHECK(feature_names(d, exprs[2]).size() == 3);

  for (std::size_t i = 0; i < d.size(); ++i) {
    for (std::size_t a = 0; a < 4; ++a) CHECK(e.at(i, a) == d.at(i, a));
    CHECK(e.at(i, 4) == d.at(i, 2) - d.at(i, 3));
    CHECK(e.at(i, 5) == 0.0);
  }
  // forward differences against hand arithmetic on 5 random cases
  std::mt19937 g(11);
  for (int k = 0; k < 5; ++k) {
    const std::size_t i = g() % d.size();
    for (std::size_t j = 0; j < 3; ++j) CHECK(e.at(i, 6 + j) == doctest::Approx(d.at(i, j) - d.at(i, j + 1)));
    CHECK(e.at(i, 9) == doctest::Approx(d.at(i, 1) - d.at(i, 0)));
    CHECK(e.at(i, 10) == doctest::Approx(d.at(i, 2) - d.at(i, 0)));
    CHECK(e.at(i, 11) == doctest::Approx(std::cos(d.at(i, 1))));
  }
  CHECK_THROWS_AS(engineer_features(d, std::vector{FeatureExpr::difference(0, 9)}), Error);
  CHECK_THROWS_AS(engineer_features(d, std::vector{FeatureExpr::weighted_sum({0, 1}, {1.0})}), Error);
}

TEST_CASE("engineered columns on normalized data carry their own bounds") {
  const Dataset n = civl::testing::iris_normalized();
  const Dataset e = engineer_features(n, std::vector{FeatureExpr::difference(2, 3)});
  REQUIRE(e.norm_meta());
  CHECK(e.norm_meta()->size() == 5);
  const auto col = e.column(4);
  CHECK(*std::min_element(col.begin(), col.end()) == 0.0);
  CHECK(*std::max_element(col.begin(), col.end()) == 1.0);
  for (std::size_t i = 0; i < n.size(); ++i)
    for (std::size_t a = 0; a < 4; ++a) CHECK(e.at(i, a) == n.at(i, a));
}

TEST_CASE("pearson agrees with a long double two-pass oracle") {
  std::mt19937_64 g(3);
  std::normal_distribution<double> nd;
  for (int t = 0; t < 20; ++t) {
    std::vector<double> x(40), y(40);
    for (int i = 0; i < 40; ++i) {
      x[i] = nd(g);
      y[i] = 0.5 * x[i] + nd(g);
    }
    long double mx = 0, my = 0;
    for (int i = 0; i < 40; ++i) mx += x[i], my += y[i];
    mx /= 40, my /= 40;
    long double sxy = 0, sxx = 0, syy = 0;
    for (int i = 0; i < 40; ++i) {
      sxy += (x[i] - mx) * (y[i] - my);
      sxx += (x[i] - mx) * (x[i] - mx);
      syy += (y[i] - my) * (y[i] - my);
    }
    CHECK(pearson(x, y) == doctest::Approx(static_cast<double>(sxy / std::sqrt(sxx * syy))).epsilon(1e-12));
  }
  CHECK(pearson(std::vector<double>{1, 1, 1}, std::vector<double>{1, 2, 3}) == 0.0);
}

TEST_CASE("correlation sort keeps correlated attributes adjacent") {
  const Dataset d = iris_raw();
  const auto order = sort_attributes_by_correlation(d);
  REQUIRE(order.size() == 4);
  auto pos = [&](std::size_t a) { return std::find(order.begin(), order.end(), a) - order.begin(); };
  CHECK(std::abs(pos(2) - pos(3)) == 1);

  const Dataset twin = make_dataset({"u", "noise", "v"}, {{1, 5, 2}, {2, 1, 4}, {3, 4, 6}, {4, 2, 8}},
                                    {"A", "A", "B", "B"});
  const auto o2 = sort_attributes_by_correlation(twin);
  auto p2 = [&](std::size_t a) { return std::find(o2.begin(), o2.end(), a) - o2.begin(); };
  CHECK(std::abs(p2(0) - p2(2)) == 1);

  CHECK(sort_attributes_by_correlation(make_dataset({"only"}, {{1}, {2}}, {"A", "B"})) ==
        std::vector<std::size_t>{0});
  CHECK_THROWS_AS(sort_attributes_by_correlation(make_dataset({"a", "b"}, {{1, 2}}, {"A"})), Error);
}

TEST_CASE("remove_covered preserves ids, is idempotent and commutes") {
  const Dataset d = iris_raw();
  std::set<CaseId> setosa;
  for (std::size_t i = 0; i < d.size(); ++i)
    if (d.label(i) == "Setosa") setosa.insert(d.case_id(i));
  const Dataset rest = remove_covered(d, setosa);
  CHECK(rest.size() == 100);
  CHECK(rest.classes() == std::vector<std::string>{"Versicolor", "Virginica"});
  CHECK(rest.case_id(0) == 50);
  CHECK(remove_covered(d, {}) == d);

  std::set<CaseId> all(d.case_ids().begin(), d.case_ids().end());
  const Dataset none = remove_covered(d, all);
  CHECK(none.size() == 0);
  CHECK(none.attributes() == d.attributes());

  const std::set<CaseId> a = {1, 2, 3}, b = {70, 80};
  CHECK(remove_covered(remove_covered(d, a), b) == remove_covered(remove_covered(d, b), a));
  CHECK_THROWS_AS(remove_covered(rest, a), Error);  // already removed ids are unknown
  CHECK_THROWS_AS(remove_covered(d, {999}), Error);
}
