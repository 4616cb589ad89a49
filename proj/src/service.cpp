#include "civl/service.hpp"

#include <httplib.h>

#include <cstdlib>
#include <sstream>

namespace civl {

namespace {

void send_json(httplib::Response& res, int status, const Json& body) {
  res.status = status;
  if (body.contains("revision")) res.set_header("X-Revision", std::to_string(body.at("revision").get<std::uint64_t>()));
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, const std::string& message,
                const Json& detail = Json::object(), std::optional<std::uint64_t> revision = std::nullopt) {
  Json body = detail.is_object() ? detail : Json::object();
  body["error"] = message;
  if (revision) body["revision"] = *revision;
  send_json(res, status, body);
}

// Bounds are taken over the whole file so that a class subset keeps the full-data scale.
Dataset load_session_data(const Json& req, std::vector<NormRange>& bounds) {
  if (!req.contains("label") || !req.at("label").is_string()) throw Error("request needs 'label'");
  const std::string label = req.at("label").get<std::string>();
  Dataset d;
  if (req.contains("csv")) {
    std::istringstream in(req.at("csv").get<std::string>());
    d = load_csv(in, label);
  } else if (req.contains("data")) {
    d = load_csv_file(req.at("data").get<std::string>(), label);
  } else {
    throw Error("request needs 'data' (path) or 'csv' (text)");
  }
  if (!d.empty()) bounds = minmax_bounds(d);
  if (req.contains("classes")) d = select_classes(d, req.at("classes").get<std::vector<std::string>>());
  if (d.empty()) throw Error("no cases left after class selection");
  return d;
}

}  // namespace

int port_from_env(int fallback) {
  const char* v = std::getenv("OVERLAP_BOOST_PORT");
  if (!v || !*v) return fallback;
  char* end = nullptr;
  const long p = std::strtol(v, &end, 10);
  if (*end != '\0' || p < 0 || p > 65535) return fallback;
  return static_cast<int>(p);
}

Service::Service() : server_(std::make_unique<httplib::Server>()) { routes(); }

Service::~Service() { stop(); }

int Service::bind(const std::string& host, int port) {
  if (port == 0) return server_->bind_to_any_port(host);
  return server_->bind_to_port(host, port) ? port : -1;
}

bool Service::serve() { return server_->listen_after_bind(); }

void Service::stop() {
  if (server_) server_->stop();
}

void Service::routes() {
  auto& srv = *server_;

  srv.Post("/session", [this](const httplib::Request& req, httplib::Response& res) {
    try {
      const Json body = Json::parse(req.body);
      SessionConfig cfg;
      cfg.normalize = body.value("normalize", false);
      cfg.seed = body.value("seed", std::uint64_t{0});
      Dataset d = load_session_data(body, cfg.norm_bounds);
      const std::string id = store_.create(std::move(d), cfg);
      auto e = store_.find(id);
      std::shared_lock lock(e->mutex);
      send_json(res, 201, e->session.state_json());
    } catch (const Json::exception& ex) {
      send_error(res, 400, std::string("malformed request: ") + ex.what());
    } catch (const std::exception& ex) {
      send_error(res, 400, ex.what());
    }
  });

  // Read endpoints share a lock so they observe one consistent revision.
  auto reader = [this](auto fn) {
    return [this, fn](const httplib::Request& req, httplib::Response& res) {
      auto e = store_.find(req.matches[1]);
      if (!e) return send_error(res, 404, "unknown session '" + std::string(req.matches[1]) + "'");
      std::shared_lock lock(e->mutex);
      try {
        send_json(res, 200, fn(e->session, req));
      } catch (const ActionError& ex) {
        send_error(res, ex.status(), ex.what(), ex.detail(), e->session.revision());
      } catch (const std::exception& ex) {
        send_error(res, 400, ex.what(), Json::object(), e->session.revision());
      }
    };
  };

  srv.Get(R"(/session/([^/]+)/state)", reader([](const Session& s, const httplib::Request&) {
            return s.state_json();
          }));
  srv.Get(R"(/session/([^/]+)/data)", reader([](const Session& s, const httplib::Request& req) {
            bool norm = s.config().normalize;
            if (req.has_param("normalized")) {
              const auto v = req.get_param_value("normalized");
              if (v == "true" || v == "1") norm = true;
              else if (v == "false" || v == "0") norm = false;
              else throw ActionError(400, "normalized must be true or false");
            }
            return s.data_json(norm);
          }));
  srv.Get(R"(/session/([^/]+)/scores)", reader([](const Session& s, const httplib::Request&) {
            return s.scores_json();
          }));
  srv.Get(R"(/session/([^/]+)/overlap)", reader([](const Session& s, const httplib::Request&) {
            return s.overlap_json();
          }));
  srv.Get(R"(/session/([^/]+)/export)", reader([](const Session& s, const httplib::Request&) {
            return s.export_json();
          }));
  srv.Get(R"(/session/([^/]+)/log)", [this](const httplib::Request& req, httplib::Response& res) {
    auto e = store_.find(req.matches[1]);
    if (!e) return send_error(res, 404, "unknown session '" + std::string(req.matches[1]) + "'");
    std::shared_lock lock(e->mutex);
    res.set_header("X-Revision", std::to_string(e->session.revision()));
    res.set_content(e->session.action_log(), "application/x-ndjson");
  });

  srv.Post(R"(/session/([^/]+)/action)", [this](const httplib::Request& req, httplib::Response& res) {
    auto e = store_.find(req.matches[1]);
    if (!e) return send_error(res, 404, "unknown session '" + std::string(req.matches[1]) + "'");
    std::unique_lock lock(e->mutex);
    Json action;
    try {
      action = Json::parse(req.body);
    } catch (const Json::exception& ex) {
      return send_error(res, 400, std::string("malformed JSON: ") + ex.what(), Json::object(),
                        e->session.revision());
    }
    try {
      auto r = e->session.apply(action);
      send_json(res, 200, r.diff);
    } catch (const ActionError& ex) {
      send_error(res, ex.status(), ex.what(), ex.detail(), e->session.revision());
    } catch (const std::exception& ex) {
      send_error(res, 400, ex.what(), Json::object(), e->session.revision());
    }
  });
}

}  // namespace civl
