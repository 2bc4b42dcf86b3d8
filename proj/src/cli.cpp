#include "stratos/cli.hpp"

#include <cstdlib>
#include <filesystem>

#include <CLI11.hpp>

#include "stratos/dot.hpp"
#include "stratos/http.hpp"
#include "stratos/json_io.hpp"
#include "stratos/registry.hpp"
#include "stratos/stitch.hpp"

namespace stratos {

namespace {

GraphDescription load_query(const std::string& path,
                            const ConceptVocabulary& vocab) {
  GraphDescription q = description_from_json(load_json_file(path));
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

MatchParams load_params(const std::string& path) {
  if (path.empty()) return MatchParams{};
  return params_from_json(load_json_file(path));
}

void emit(std::ostream& out, const json& j) {
  out << canonical_dump(j, 2) << "\n";
}

}  // namespace

int cli_dispatch(const std::vector<std::string>& args, std::ostream& out,
                 std::ostream& err) {
  CLI::App app{"stratified service graph registry, matcher, and stitcher"};
  app.require_subcommand(1);

  std::string store;
  if (const char* env = std::getenv("STRATOS_STORE")) store = env;
  app.add_option("--store", store,
                 "snapshot file backing the registry (env STRATOS_STORE)");

  std::string file, paramsFile, serviceId, label, subject;
  int topK = 10;
  bool parallel = false;

  auto* ingest = app.add_subcommand("ingest", "register a service description");
  ingest->add_option("file", file)->required();

  auto* ingestConv =
      app.add_subcommand("ingest-converter", "register format converters");
  ingestConv->add_option("file", file)->required();

  auto* vocab = app.add_subcommand("vocab", "replace the concept vocabulary");
  vocab->add_option("file", file)->required();

  auto* match = app.add_subcommand("match", "rank services against a query");
  match->add_option("query", file)->required();
  match->add_option("--top", topK, "result count cap");
  match->add_option("--params", paramsFile, "matching parameter overrides");
  match->add_flag("--parallel", parallel, "evaluate candidates concurrently");

  auto* stitchCmd =
      app.add_subcommand("stitch", "compose a plan covering the query");
  stitchCmd->add_option("query", file)->required();
  stitchCmd->add_option("--params", paramsFile);

  auto* explain = app.add_subcommand(
      "explain", "per-layer-pair score breakdown against one service");
  explain->add_option("query", file)->required();
  explain->add_option("service", serviceId)->required();
  explain->add_option("--params", paramsFile);

  auto* exportDot =
      app.add_subcommand("export-dot", "render a description id or plan file");
  exportDot->add_option("subject", subject)->required();

  auto* listCmd = app.add_subcommand("list", "list registered descriptions");
  listCmd->add_option("--label", label, "restrict to one concept label");

  auto* getCmd = app.add_subcommand("get", "fetch one description");
  getCmd->add_option("id", serviceId)->required();

  auto* removeCmd = app.add_subcommand("remove", "delete one description");
  removeCmd->add_option("id", serviceId)->required();

  auto* atomCmd = app.add_subcommand("atomicity", "report ATOMIC or COMPOSITE");
  atomCmd->add_option("id", serviceId)->required();

  auto* snapCmd = app.add_subcommand("snapshot", "write the registry to a file");
  snapCmd->add_option("path", file)->required();

  auto* loadCmd = app.add_subcommand("load", "replace the registry from a file");
  loadCmd->add_option("path", file)->required();

  std::string host = "127.0.0.1", configFile;
  int port = 8080;
  auto* serveCmd = app.add_subcommand("serve", "run the HTTP gateway");
  serveCmd->add_option("--host", host);
  serveCmd->add_option("--port", port);
  serveCmd->add_option("--config", configFile, "gateway config document");

  std::vector<const char*> argv{"stratosctl"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e, out, err);
    return code == 0 ? 0 : 1;
  }

  try {
    Registry reg;
    if (!store.empty() && std::filesystem::exists(store))
      reg.load_snapshot(store);
    bool mutated = false;

    if (*ingest) {
      std::string id = reg.ingest_service(load_json_file(file));
      mutated = true;
      emit(out, json{{"id", id}});
    } else if (*ingestConv) {
      auto ids = reg.ingest_converter(load_json_file(file));
      mutated = true;
      emit(out, json{{"ids", ids}});
    } else if (*vocab) {
      reg.ingest_vocabulary(load_json_file(file));
      mutated = true;
      emit(out, json{{"ok", true}, {"version", reg.view()->version}});
    } else if (*match) {
      auto snap = reg.view();
      if (snap->descriptions.empty())
        throw Error(ErrorCode::EmptyRegistry, "no descriptions registered");
      MatchParams params = load_params(paramsFile);
      GraphDescription q = load_query(file, snap->vocab);
      auto results = rank_services(q.stack, snap->descriptions, snap->vocab,
                                   params, snap->catalog, topK, parallel);
      emit(out, results_to_json(results));
    } else if (*stitchCmd) {
      auto snap = reg.view();
      if (snap->descriptions.empty())
        throw Error(ErrorCode::EmptyRegistry, "no descriptions registered");
      MatchParams params = load_params(paramsFile);
      GraphDescription q = load_query(file, snap->vocab);
      StitchPlan plan = compose(q.stack, snap->descriptions, snap->vocab,
                                snap->catalog, params);
      emit(out, plan_to_json(plan));
    } else if (*explain) {
      auto snap = reg.view();
      MatchParams params = load_params(paramsFile);
      GraphDescription q = load_query(file, snap->vocab);
      GraphDescription svc = reg.get(serviceId);
      json breakdowns = json::array();
      for (const auto& r : stratified_match(q.stack, svc.stack, svc.id,
                                            snap->vocab, params,
                                            snap->catalog)) {
        auto bd = score_breakdown(r.mapping, q.stack.layers[r.queryLayer],
                                  svc.stack.layers[r.serviceLayer], snap->vocab,
                                  params, snap->catalog);
        json entry = result_to_json(r);
        entry["breakdown"] = json{{"label", bd.labelComponent},
                                  {"topology", bd.topoComponent},
                                  {"format", bd.formatComponent}};
        breakdowns.push_back(std::move(entry));
      }
      emit(out, breakdowns);
    } else if (*exportDot) {
      auto snap = reg.view();
      if (snap->descriptions.count(subject)) {
        out << export_dot(snap->descriptions.at(subject));
      } else if (std::filesystem::exists(subject)) {
        StitchPlan plan = plan_from_json(load_json_file(subject), snap->catalog);
        out << export_dot(plan, snap->descriptions);
      } else {
        throw Error(ErrorCode::NotFound, subject);
      }
    } else if (*listCmd) {
      emit(out, json{{"services", reg.list(label)}});
    } else if (*getCmd) {
      GraphDescription desc = reg.get(serviceId);
      json body = description_to_json(desc);
      body["id"] = desc.id;
      emit(out, body);
    } else if (*removeCmd) {
      reg.remove(serviceId);
      mutated = true;
      emit(out, json{{"removed", serviceId}});
    } else if (*atomCmd) {
      emit(out, json{{"id", serviceId},
                     {"atomicity", reg.atomicity(serviceId) == Atomicity::Atomic
                                       ? "ATOMIC"
                                       : "COMPOSITE"}});
    } else if (*snapCmd) {
      reg.save_snapshot(file);
      emit(out, json{{"ok", true}, {"path", file}});
    } else if (*loadCmd) {
      reg.load_snapshot(file);
      mutated = true;
      emit(out, json{{"ok", true}, {"version", reg.view()->version}});
    } else if (*serveCmd) {
      GatewayConfig cfg;
      if (!configFile.empty()) {
        json c = load_json_file(configFile);
        host = c.value("host", host);
        port = c.value("port", port);
        if (c.contains("params")) cfg.params = params_from_json(c.at("params"));
        if (c.contains("vocabulary"))
          reg.ingest_vocabulary(load_json_file(c.at("vocabulary")), cfg.params);
        if (c.contains("converters"))
          reg.ingest_converter(load_json_file(c.at("converters")));
        if (c.contains("services"))
          for (const auto& path : c.at("services"))
            reg.ingest_service(load_json_file(path.get<std::string>()),
                               cfg.params);
      }
      cfg.host = host;
      cfg.port = port;
      HttpGateway gateway(reg, cfg);
      err << "listening on " << host << ":" << port << "\n";
      gateway.serve_blocking();
    }

    if (mutated && !store.empty()) reg.save_snapshot(store);
    return 0;
  } catch (const Error& e) {
    err << e.what() << "\n";
    for (const auto& v : e.report())
      err << "  " << v.code << " " << v.subject
          << (v.detail.empty() ? "" : ": " + v.detail) << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace stratos
