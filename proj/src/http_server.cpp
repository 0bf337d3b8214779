#include "skewpbo/http_server.hpp"

#include <charconv>

#include "httplib.h"

namespace skewpbo {

namespace {

Eigen::MatrixXd default_grid(const Box& bounds) {
  if (bounds.dim() == 1) return box_grid(bounds, 101);
  if (bounds.dim() == 2) return box_grid(bounds, 21);
  throw Error(ErrorKind::InvalidArgument, "summary needs explicit points above two dimensions");
}

std::size_t parse_count(const std::string& text) {
  std::size_t n = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), n);
  if (ec != std::errc() || ptr != text.data() + text.size())
    throw Error(ErrorKind::InvalidArgument, "grid must be a non-negative integer");
  return n;
}

/// "x,y;x,y" with one row per point.
Eigen::MatrixXd parse_points(const std::string& text, Eigen::Index dim) {
  std::vector<std::vector<double>> rows;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t end = text.find(';', start);
    if (end == std::string::npos) end = text.size();
    std::vector<double> row;
    std::size_t pos = start;
    while (pos < end) {
      std::size_t comma = text.find(',', pos);
      if (comma == std::string::npos || comma > end) comma = end;
      double v = 0.0;
      const auto [ptr, ec] = std::from_chars(text.data() + pos, text.data() + comma, v);
      if (ec != std::errc() || ptr != text.data() + comma)
        throw Error(ErrorKind::InvalidArgument, "cannot parse points '" + text + "'");
      row.push_back(v);
      pos = comma + 1;
    }
    if (!row.empty()) rows.push_back(std::move(row));
    start = end + 1;
  }
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), dim);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (static_cast<Eigen::Index>(rows[i].size()) != dim)
      throw Error(ErrorKind::InvalidArgument, "query points have the wrong dimension");
    for (Eigen::Index k = 0; k < dim; ++k) out(static_cast<Eigen::Index>(i), k) = rows[i][static_cast<std::size_t>(k)];
  }
  return out;
}

Json parse_body(const httplib::Request& req) {
  if (req.body.empty()) return Json::object();
  try {
    return Json::parse(req.body);
  } catch (const Json::exception& e) {
    throw Error(ErrorKind::InvalidArgument, std::string("request body is not JSON: ") + e.what());
  }
}

void send(httplib::Response& res, const Json& body, int status = 200) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

}  // namespace

int http_status(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::NotFound:
    case ErrorKind::UnknownBenchmark:
      return 404;
    case ErrorKind::PendingProposalExists:
    case ErrorKind::NoPendingProposal:
      return 409;
    case ErrorKind::InvalidConfig:
    case ErrorKind::InvalidArgument:
    case ErrorKind::NonValidNotEnabled:
    case ErrorKind::DimensionMismatch:
    case ErrorKind::OutOfBounds:
      return 400;
    default:
      return 500;
  }
}

struct PboServer::Impl {
  SessionManager& manager;
  httplib::Server server;

  explicit Impl(SessionManager& m) : manager(m) { routes(); }

  template <class F>
  static httplib::Server::Handler guarded(F f) {
    return [f](const httplib::Request& req, httplib::Response& res) {
      try {
        f(req, res);
      } catch (const Error& e) {
        send(res, Json{{"error", std::string(to_string(e.kind()))}, {"message", e.what()}}, http_status(e.kind()));
      } catch (const Json::exception& e) {
        send(res, Json{{"error", "InvalidArgument"}, {"message", e.what()}}, 400);
      } catch (const std::exception& e) {
        send(res, Json{{"error", "Internal"}, {"message", e.what()}}, 500);
      }
    };
  }

  void routes() {
    server.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                                {"Access-Control-Allow-Headers", "Content-Type"},
                                {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"}});
    server.Options(R"(.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });

    server.Get("/health", guarded([](const httplib::Request&, httplib::Response& res) {
                 send(res, Json{{"status", "ok"}});
               }));

    server.Get("/sessions", guarded([this](const httplib::Request&, httplib::Response& res) {
                 send(res, Json{{"sessions", manager.list()}});
               }));

    server.Post("/sessions", guarded([this](const httplib::Request& req, httplib::Response& res) {
                  const std::string id = manager.create(session_config_from_json(parse_body(req)));
                  send(res, manager.snapshot(id), 201);
                }));

    server.Post("/sessions/import", guarded([this](const httplib::Request& req, httplib::Response& res) {
                  const Json body = parse_body(req);
                  if (!body.contains("events") || !body.at("events").is_array())
                    throw Error(ErrorKind::InvalidArgument, "import needs an events array");
                  const std::string id = manager.import_events(body.at("events").get<std::vector<Json>>());
                  send(res, manager.snapshot(id), 201);
                }));

    server.Get("/sessions/:id", guarded([this](const httplib::Request& req, httplib::Response& res) {
                 send(res, manager.snapshot(req.path_params.at("id")));
               }));

    server.Post("/sessions/:id/next", guarded([this](const httplib::Request& req, httplib::Response& res) {
                  const std::string& id = req.path_params.at("id");
                  const PendingDuel duel = manager.next_duel(id);
                  Json body = to_json(duel);
                  body["session"] = id;
                  send(res, body);
                }));

    server.Post("/sessions/:id/answer", guarded([this](const httplib::Request& req, httplib::Response& res) {
                  const std::string& id = req.path_params.at("id");
                  const Json body = parse_body(req);
                  if (!body.contains("outcome")) throw Error(ErrorKind::InvalidArgument, "answer needs an outcome");
                  const AnswerResult r = manager.answer(id, parse_duel_outcome(body.at("outcome").get<std::string>()));
                  send(res, Json{{"session", id},
                                 {"outcome", std::string(to_string(r.outcome))},
                                 {"reference", to_json(r.reference)},
                                 {"answers", r.answers}});
                }));

    server.Get("/sessions/:id/summary", guarded([this](const httplib::Request& req, httplib::Response& res) {
                 const std::string& id = req.path_params.at("id");
                 const Box bounds = manager.bounds(id);
                 Eigen::MatrixXd query;
                 if (req.has_param("points")) query = parse_points(req.get_param_value("points"), bounds.dim());
                 else if (req.has_param("grid")) query = box_grid(bounds, parse_count(req.get_param_value("grid")));
                 else query = default_grid(bounds);
                 send(res, to_json(manager.summary(id, query)));
               }));

    server.Post("/sessions/:id/summary", guarded([this](const httplib::Request& req, httplib::Response& res) {
                  const std::string& id = req.path_params.at("id");
                  const Box bounds = manager.bounds(id);
                  const Json body = parse_body(req);
                  Eigen::MatrixXd query;
                  if (body.contains("points")) query = matrix_from_json(body.at("points"), bounds.dim());
                  else if (body.contains("grid")) query = box_grid(bounds, body.at("grid").get<std::size_t>());
                  else query = default_grid(bounds);
                  send(res, to_json(manager.summary(id, query)));
                }));
  }
};

PboServer::PboServer(SessionManager& manager) : impl_(std::make_unique<Impl>(manager)) {}
PboServer::~PboServer() { stop(); }

bool PboServer::listen(const std::string& host, int port) { return impl_->server.listen(host, port); }
int PboServer::bind_to_any_port(const std::string& host) { return impl_->server.bind_to_any_port(host); }
bool PboServer::listen_after_bind() { return impl_->server.listen_after_bind(); }
void PboServer::wait_until_ready() const { impl_->server.wait_until_ready(); }
void PboServer::stop() { impl_->server.stop(); }

}  // namespace skewpbo
