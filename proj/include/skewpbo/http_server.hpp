#pragma once

#include <memory>
#include <string>

#include "skewpbo/error.hpp"
#include "skewpbo/service.hpp"

namespace skewpbo {

/// Status code sent for each error kind.
int http_status(ErrorKind kind) noexcept;

/// JSON routes over a SessionManager:
///   GET  /health
///   GET  /sessions                      {"sessions": [id, ...]}
///   POST /sessions                      SessionConfig body, 201 with the snapshot
///   POST /sessions/import               {"events": [...]} from a snapshot
///   GET  /sessions/{id}                 snapshot
///   POST /sessions/{id}/next            open duel
///   POST /sessions/{id}/answer          {"outcome": "candidate" | "reference" | "nonvalid"}
///   GET  /sessions/{id}/summary         ?grid=N or ?points=x,y;x,y
///   POST /sessions/{id}/summary         {"grid": N} or {"points": [[...]]}
/// Errors come back as {"error": kind, "message": text}.
class PboServer {
 public:
  explicit PboServer(SessionManager& manager);
  ~PboServer();
  PboServer(const PboServer&) = delete;
  PboServer& operator=(const PboServer&) = delete;

  /// Blocks until stop().
  bool listen(const std::string& host, int port);
  /// Returns the chosen port, or -1.
  int bind_to_any_port(const std::string& host);
  bool listen_after_bind();
  void wait_until_ready() const;
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace skewpbo
