#include "stratos/http.hpp"

#include <atomic>
#include <thread>

#include <httplib.h>

#include "stratos/dot.hpp"
#include "stratos/json_io.hpp"
#include "stratos/stitch.hpp"

namespace stratos {

namespace {

int status_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::SchemaError:
      return 400;
    case ErrorCode::NotFound:
    case ErrorCode::UnknownDescription:
    case ErrorCode::UnknownConverter:
      return 404;
    case ErrorCode::VocabularyConflict:
      return 409;
    default:
      return 422;
  }
}

void reply_json(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(canonical_dump(body, 2) + "\n", "application/json");
}

void reply_error(httplib::Response& res, const Error& e) {
  json body{{"error", to_string(e.code())}, {"message", e.what()}};
  if (!e.report().empty()) body["report"] = report_to_json(e.report());
  reply_json(res, status_for(e.code()), body);
}

/// Wraps a handler so malformed input surfaces as a structured error
/// instead of tearing the process down.
template <typename Fn>
httplib::Server::Handler guarded(Fn fn) {
  return [fn](const httplib::Request& req, httplib::Response& res) {
    try {
      fn(req, res);
    } catch (const Error& e) {
      reply_error(res, e);
    } catch (const std::exception& e) {
      reply_json(res, 500, json{{"error", "Internal"}, {"message", e.what()}});
    }
  };
}

GraphDescription parse_query(const json& doc,
                             const ConceptVocabulary& vocab) {
  GraphDescription q = description_from_json(doc);
  ValidationReport report;
  for (size_t i = 0; i < q.stack.layers.size(); ++i)
    for (auto& v : validate_graph(q.stack.layers[i], vocab)) {
      v.detail = "layer " + std::to_string(i) + ": " + v.detail;
      report.push_back(std::move(v));
    }
  for (auto& v : validate_stack(q.stack)) report.push_back(std::move(v));
  if (!report.empty())
    throw Error(ErrorCode::ValidationError, "query rejected", report);
  return q;
}

}  // namespace

struct HttpGateway::Impl {
  Registry& registry;
  GatewayConfig config;
  httplib::Server server;
  std::thread worker;
  std::atomic<int> boundPort{0};

  Impl(Registry& reg, GatewayConfig cfg)
      : registry(reg), config(std::move(cfg)) {
    bind_routes();
  }

  MatchParams request_params(const json& body) const {
    if (body.contains("params")) return params_from_json(body.at("params"), config.params);
    return config.params;
  }

  void bind_routes() {
    server.Post("/services", guarded([this](const httplib::Request& req,
                                            httplib::Response& res) {
      std::string id = registry.ingest_service(parse_json(req.body), config.params);
      reply_json(res, 201, json{{"id", id}});
    }));

    server.Post("/converters", guarded([this](const httplib::Request& req,
                                              httplib::Response& res) {
      auto ids = registry.ingest_converter(parse_json(req.body));
      reply_json(res, 201, json{{"ids", ids}});
    }));

    server.Put("/vocabulary", guarded([this](const httplib::Request& req,
                                             httplib::Response& res) {
      registry.ingest_vocabulary(parse_json(req.body), config.params);
      reply_json(res, 200, json{{"ok", true}});
    }));

    server.Get("/services", guarded([this](const httplib::Request& req,
                                           httplib::Response& res) {
      std::string label =
          req.has_param("label") ? req.get_param_value("label") : "";
      reply_json(res, 200, json{{"services", registry.list(label)}});
    }));

    server.Get(R"(/services/([^/]+))", guarded([this](const httplib::Request& req,
                                                      httplib::Response& res) {
      GraphDescription desc = registry.get(req.matches[1]);
      json body = description_to_json(desc);
      body["id"] = desc.id;
      reply_json(res, 200, body);
    }));

    server.Post("/match", guarded([this](const httplib::Request& req,
                                         httplib::Response& res) {
      json body = parse_json(req.body);
      if (!body.is_object() || !body.contains("query"))
        throw Error(ErrorCode::SchemaError, "body must carry a \"query\" document");
      auto snap = registry.view();
      MatchParams params = request_params(body);
      GraphDescription q = parse_query(body.at("query"), snap->vocab);
      int topK = body.value("topK", 10);
      bool parallel = body.value("parallel", false);
      auto results = rank_services(q.stack, snap->descriptions, snap->vocab,
                                   params, snap->catalog, topK, parallel);
      reply_json(res, 200, results_to_json(results));
    }));

    server.Post("/stitch", guarded([this](const httplib::Request& req,
                                          httplib::Response& res) {
      json body = parse_json(req.body);
      if (!body.is_object() || !body.contains("query"))
        throw Error(ErrorCode::SchemaError, "body must carry a \"query\" document");
      auto snap = registry.view();
      MatchParams params = request_params(body);
      GraphDescription q = parse_query(body.at("query"), snap->vocab);
      StitchPlan plan = compose(q.stack, snap->descriptions, snap->vocab,
                                snap->catalog, params);
      reply_json(res, 200, plan_to_json(plan));
    }));

    // The plan document travels in the body (POST) or in the `plan` query
    // parameter (GET).
    auto render = guarded([this](const httplib::Request& req,
                                 httplib::Response& res) {
      std::string format =
          req.has_param("format") ? req.get_param_value("format") : "dot";
      if (format != "dot")
        throw Error(ErrorCode::SchemaError, "unsupported format " + format);
      std::string text =
          req.has_param("plan") ? req.get_param_value("plan") : req.body;
      auto snap = registry.view();
      StitchPlan plan = plan_from_json(parse_json(text), snap->catalog);
      res.status = 200;
      res.set_content(export_dot(plan, snap->descriptions),
                      "text/vnd.graphviz");
    });
    server.Post("/plans/render", render);
    server.Get("/plans/render", render);
  }
};

HttpGateway::HttpGateway(Registry& registry, GatewayConfig config)
    : impl_(std::make_unique<Impl>(registry, std::move(config))) {}

HttpGateway::~HttpGateway() { stop(); }

int HttpGateway::start() {
  int port = impl_->config.port;
  if (port == 0)
    port = impl_->server.bind_to_any_port(impl_->config.host);
  else if (!impl_->server.bind_to_port(impl_->config.host, port))
    throw Error(ErrorCode::PersistenceError,
                "cannot bind " + impl_->config.host + ":" + std::to_string(port));
  impl_->boundPort = port;
  impl_->worker = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
  return port;
}

void HttpGateway::stop() {
  if (!impl_) return;
  impl_->server.stop();
  if (impl_->worker.joinable()) impl_->worker.join();
}

bool HttpGateway::serve_blocking() {
  return impl_->server.listen(impl_->config.host, impl_->config.port);
}

}  // namespace stratos
