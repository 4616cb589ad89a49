#pragma once

#include <memory>
#include <string>

#include "civl/session.hpp"

namespace httplib {
class Server;
}

namespace civl {

/// HTTP+JSON front of SessionStore.
///
///   POST /session                      {"data": path | "csv": text, "label", "classes"?, "normalize"?, "seed"?}
///   GET  /session/{id}/state
///   GET  /session/{id}/data?normalized=true|false
///   POST /session/{id}/action          action object, optional "revision"
///   GET  /session/{id}/scores
///   GET  /session/{id}/overlap
///   GET  /session/{id}/export
///   GET  /session/{id}/log             NDJSON action log
///
/// Every session response carries "revision" in the body and an X-Revision header.
class Service {
 public:
  Service();
  ~Service();
  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  /// Binds to host:port (port 0 picks a free one); returns the bound port or -1.
  int bind(const std::string& host, int port);
  /// Blocks serving requests until stop().
  bool serve();
  void stop();

  SessionStore& store() { return store_; }

 private:
  void routes();

  SessionStore store_;
  std::unique_ptr<httplib::Server> server_;
};

/// OVERLAP_BOOST_PORT, or `fallback` when unset or invalid.
int port_from_env(int fallback = 8080);

}  // namespace civl
