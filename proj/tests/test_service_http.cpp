#include <doctest.h>

#include <httplib.h>

#include <atomic>
#include <cstdlib>
#include <thread>

#include "civl/service.hpp"
#include "test_support.hpp"

using namespace civl;

namespace {

struct Running {
  Service svc;
  int port = -1;
  std::thread th;

  Running() {
    port = svc.bind("127.0.0.1", 0);
    REQUIRE(port > 0);
    th = std::thread([this] { svc.serve(); });
  }
  ~Running() {
    svc.stop();
    th.join();
  }
  httplib::Client client() const {
    httplib::Client c("127.0.0.1", port);
    c.set_connection_timeout(5);
    c.set_read_timeout(30);
    return c;
  }
};

Json body(const httplib::Result& r) { return Json::parse(r->body); }

std::string create_iris(httplib::Client& c, bool normalize = true) {
  const Json req{{"data", civl::testing::iris_path()}, {"label", "variety"}, {"normalize", normalize}, {"seed", 1}};
  auto r = c.Post("/session", req.dump(), "application/json");
  REQUIRE(r);
  REQUIRE(r->status == 201);
  return body(r).at("id").get<std::string>();
}

httplib::Result act(httplib::Client& c, const std::string& id, const Json& a) {
  return c.Post("/session/" + id + "/action", a.dump(), "application/json");
}

}  // namespace

TEST_CASE("session lifecycle over HTTP") {
  Running srv;
  auto c = srv.client();
  const std::string id = create_iris(c);

  auto st = c.Get("/session/" + id + "/state");
  REQUIRE(st);
  CHECK(st->status == 200);
  CHECK(st->get_header_value("X-Revision") == "0");
  CHECK(body(st).at("remaining_count") == 150);
  CHECK(body(st).at("normalized") == true);

  const Json rect{{"type", "mark_rectangle"},
                  {"label", "Virginica"},
                  {"revision", 0},
                  {"ranges", Json::array({Json{{"attribute", "petal.width"}, {"lo", 0.75}, {"hi", 1.0}}})}};
  auto r = act(c, id, rect);
  REQUIRE(r);
  CHECK(r->status == 200);
  CHECK(r->get_header_value("X-Revision") == "1");
  CHECK(body(r).at("removed_count") == 34);

  // the same write again carries a stale revision
  auto stale = act(c, id, rect);
  CHECK(stale->status == 409);
  CHECK(body(stale).at("current_revision") == 1);
  CHECK(body(stale).at("revision") == 1);

  Json impure = rect;
  impure.erase("revision");
  impure["ranges"][0]["lo"] = 0.4;
  auto bad = act(c, id, impure);
  CHECK(bad->status == 422);
  CHECK_FALSE(body(bad).at("violating_case_ids").empty());
  CHECK(body(bad).contains("error"));

  auto malformed = c.Post("/session/" + id + "/action", "{not json", "application/json");
  CHECK(malformed->status == 400);

  auto log = c.Get("/session/" + id + "/log");
  CHECK(log->status == 200);
  CHECK(std::count(log->body.begin(), log->body.end(), '\n') == 1);

  auto ex = c.Get("/session/" + id + "/export");
  CHECK(ex->status == 200);
  CHECK(body(ex).at("rules_text").get<std::string>().find("L = Virginica") != std::string::npos);
  CHECK(body(ex).at("decision_list").at("semantics") == "first-match/1");
}

TEST_CASE("scores and overlap endpoints") {
  Running srv;
  auto c = srv.client();
  const std::string id = create_iris(c);
  CHECK(c.Get("/session/" + id + "/scores")->status == 404);
  auto r = act(c, id, Json{{"type", "set_scorer"}, {"train", {{"top", "Versicolor"}, {"bottom", "Virginica"}}}});
  REQUIRE(r->status == 200);
  auto sc = c.Get("/session/" + id + "/scores");
  CHECK(sc->status == 200);
  CHECK(body(sc).at("rows").size() == 100);
  CHECK(body(sc).at("order_desc").size() == 100);
  auto ov = c.Get("/session/" + id + "/overlap");
  CHECK(ov->status == 200);
  const Json o = body(ov);
  CHECK(o.at("scorer_identity") == body(sc).at("scorer_identity"));
  CHECK(o.at("hyperblock").at("role") == "overlap_area");
  CHECK(o.at("envelope").at("strips").size() == 3);
}

TEST_CASE("data endpoint serves raw and normalized values") {
  Running srv;
  auto c = srv.client();
  const std::string id = create_iris(c, false);
  auto raw = c.Get("/session/" + id + "/data?normalized=false");
  auto norm = c.Get("/session/" + id + "/data?normalized=true");
  CHECK(body(raw).at("rows")[0].at("values")[0] == 5.1);
  CHECK(body(norm).at("rows")[0].at("values")[0].get<double>() < 1.0);
  CHECK(c.Get("/session/" + id + "/data?normalized=maybe")->status == 400);
}

TEST_CASE("request errors") {
  Running srv;
  auto c = srv.client();
  CHECK(c.Get("/session/nope/state")->status == 404);
  CHECK(c.Post("/session", "[", "application/json")->status == 400);
  CHECK(c.Post("/session", Json{{"label", "variety"}}.dump(), "application/json")->status == 400);
  CHECK(c.Post("/session", Json{{"csv", "a,b\n1,x\n"}, {"label", "b"}}.dump(), "application/json")->status == 201);
  CHECK(c.Post("/session", Json{{"data", "/nonexistent.csv"}, {"label", "b"}}.dump(), "application/json")->status == 400);
  const Json two{{"data", civl::testing::iris_path()}, {"label", "variety"}, {"classes", {"Versicolor", "Virginica"}}};
  auto r = c.Post("/session", two.dump(), "application/json");
  CHECK(body(r).at("case_count") == 100);
}

TEST_CASE("concurrent sessions and writers keep revisions consistent") {
  Running srv;
  std::vector<std::string> ids;
  {
    auto c = srv.client();
    for (int i = 0; i < 4; ++i) ids.push_back(create_iris(c));
  }
  std::atomic<int> ok{0}, conflicts{0};
  std::vector<std::thread> ts;
  for (int w = 0; w < 8; ++w)
    ts.emplace_back([&, w] {
      auto c = srv.client();
      const std::string& id = ids[static_cast<std::size_t>(w) % ids.size()];
      for (int k = 0; k < 5; ++k) {
        auto st = c.Get("/session/" + id + "/state");
        const auto rev = body(st).at("revision").get<std::uint64_t>();
        auto r = act(c, id, Json{{"type", "hide_class"}, {"label", "Setosa"}, {"hidden", k % 2 == 0}, {"revision", rev}});
        if (r->status == 200) ++ok;
        else if (r->status == 409) ++conflicts;
      }
    });
  for (auto& t : ts) t.join();
  CHECK(ok + conflicts == 40);
  auto c = srv.client();
  std::uint64_t total = 0;
  for (const auto& id : ids) total += body(c.Get("/session/" + id + "/state")).at("revision").get<std::uint64_t>();
  // every accepted write bumped exactly one revision
  CHECK(total == static_cast<std::uint64_t>(ok.load()));
}

TEST_CASE("port comes from the environment") {
  ::setenv("OVERLAP_BOOST_PORT", "9123", 1);
  CHECK(port_from_env() == 9123);
  ::setenv("OVERLAP_BOOST_PORT", "junk", 1);
  CHECK(port_from_env(8080) == 8080);
  ::unsetenv("OVERLAP_BOOST_PORT");
  CHECK(port_from_env(1234) == 1234);
}
