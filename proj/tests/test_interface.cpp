#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <sstream>

#include <httplib.h>

#include "oracles.hpp"
#include "stratos/cli.hpp"
#include "stratos/http.hpp"

using namespace stratos;

namespace {

struct CliResult {
  int code = 0;
  std::string out;
  std::string err;
};

CliResult run(std::vector<std::string> args) {
  std::ostringstream out, err;
  CliResult r;
  r.code = cli_dispatch(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

/// Store-backed CLI session seeded with the fixture corpus.
struct Session {
  std::string store = "iface_store_test.json";
  std::string fig3a, fig3b, fig3c;

  Session() {
    std::remove(store.c_str());
    auto id_of = [](const CliResult& r) {
      return json::parse(r.out).at("id").get<std::string>();
    };
    REQUIRE(run({"--store", store, "vocab", oracle::fixture("vocabulary.json")})
                .code == 0);
    REQUIRE(run({"--store", store, "ingest-converter",
                 oracle::fixture("converters.json")})
                .code == 0);
    auto a = run({"--store", store, "ingest", oracle::fixture("fig3a.json")});
    auto b = run({"--store", store, "ingest", oracle::fixture("fig3b.json")});
    auto c = run({"--store", store, "ingest", oracle::fixture("fig3c.json")});
    REQUIRE(a.code == 0);
    REQUIRE(b.code == 0);
    REQUIRE(c.code == 0);
    fig3a = id_of(a);
    fig3b = id_of(b);
    fig3c = id_of(c);
  }
  ~Session() { std::remove(store.c_str()); }

  CliResult cli(std::vector<std::string> args) {
    args.insert(args.begin(), {"--store", store});
    return run(std::move(args));
  }
};

size_t count_of(const std::string& text, const std::string& needle) {
  size_t n = 0;
  for (size_t pos = text.find(needle); pos != std::string::npos;
       pos = text.find(needle, pos + needle.size()))
    ++n;
  return n;
}

}  // namespace

TEST_CASE("argument errors and the empty registry are user errors") {
  CHECK(run({}).code == 1);
  CHECK(run({"no-such-command"}).code == 1);
  CHECK(run({"--help"}).code == 0);
  CHECK(run({"ingest"}).code == 1);  // missing file argument

  auto r = run({"match", oracle::fixture("fig5a.query.json")});
  CHECK(r.code == 1);
  CHECK(r.out.empty());
  CHECK(r.err.find("registered") != std::string::npos);

  auto missing = run({"match", "no-such-query.json"});
  CHECK(missing.code == 1);
}

TEST_CASE("store-backed CLI workflow") {
  Session s;

  auto listed = s.cli({"list"});
  REQUIRE(listed.code == 0);
  CHECK(json::parse(listed.out).at("services").size() == 3);
  auto byLabel = s.cli({"list", "--label", "engine-comparator"});
  CHECK(json::parse(byLabel.out).at("services") == json::array({s.fig3b}));

  auto got = s.cli({"get", s.fig3b});
  REQUIRE(got.code == 0);
  json desc = json::parse(got.out);
  CHECK(desc.at("id") == s.fig3b);
  CHECK(desc.at("label") == "engine-comparator");
  CHECK(s.cli({"get", "svc-missing"}).code == 1);

  SUBCASE("match output is ranked and deterministic") {
    auto m1 = s.cli({"match", oracle::fixture("fig5a.query.json")});
    REQUIRE(m1.code == 0);
    json results = json::parse(m1.out);
    REQUIRE(results.size() == 3);
    CHECK(results[0].at("service") == s.fig3b);
    CHECK(results[0].at("penalizedScore") == doctest::Approx(1.0));
    CHECK(results[1].at("service") == s.fig3c);
    CHECK(results[2].at("service") == s.fig3a);
    auto m2 = s.cli({"match", oracle::fixture("fig5a.query.json")});
    CHECK(m2.out == m1.out);

    auto top1 = s.cli({"match", oracle::fixture("fig5a.query.json"), "--top", "1"});
    CHECK(json::parse(top1.out).size() == 1);
    auto par = s.cli(
        {"match", oracle::fixture("fig5a.query.json"), "--parallel"});
    CHECK(par.out == m1.out);
  }
  SUBCASE("stitch reproduces the golden plan") {
    auto st = s.cli({"stitch", oracle::fixture("fig5b.query.json")});
    REQUIRE(st.code == 0);
    CHECK(json::parse(st.out) == oracle::fixture_json("fig6.plan.json"));
  }
  SUBCASE("explain decomposes every reported score") {
    auto ex = s.cli(
        {"explain", oracle::fixture("fig5a.query.json"), s.fig3a});
    REQUIRE(ex.code == 0);
    json entries = json::parse(ex.out);
    REQUIRE(!entries.empty());
    for (const auto& e : entries) {
      double recombined = 0.5 * e.at("breakdown").at("label").get<double>() +
                          0.3 * e.at("breakdown").at("topology").get<double>() +
                          0.2 * e.at("breakdown").at("format").get<double>();
      CHECK(e.at("score").get<double>() == doctest::Approx(recombined));
    }
  }
  SUBCASE("atomicity flips across separate invocations via the store") {
    CHECK(json::parse(s.cli({"atomicity", s.fig3a}).out).at("atomicity") ==
          "ATOMIC");
    auto rdg = s.cli({"ingest", oracle::fixture("rdg.json")});
    REQUIRE(rdg.code == 0);
    CHECK(json::parse(s.cli({"atomicity", s.fig3a}).out).at("atomicity") ==
          "COMPOSITE");
    std::string rdgId = json::parse(rdg.out).at("id");
    CHECK(s.cli({"remove", rdgId}).code == 0);
    CHECK(json::parse(s.cli({"atomicity", s.fig3a}).out).at("atomicity") ==
          "ATOMIC");
  }
  SUBCASE("snapshot and load round-trip through explicit files") {
    std::string copy = "iface_snapshot_copy.json";
    std::remove(copy.c_str());
    CHECK(s.cli({"snapshot", copy}).code == 0);
    std::string store2 = "iface_store2.json";
    std::remove(store2.c_str());
    CHECK(run({"--store", store2, "load", copy}).code == 0);
    auto listed2 = run({"--store", store2, "list"});
    CHECK(json::parse(listed2.out).at("services").size() == 3);
    std::remove(copy.c_str());
    std::remove(store2.c_str());
  }
  SUBCASE("the STRATOS_STORE environment variable selects the store") {
    setenv("STRATOS_STORE", s.store.c_str(), 1);
    auto listed2 = run({"list"});
    unsetenv("STRATOS_STORE");
    CHECK(json::parse(listed2.out).at("services").size() == 3);
  }
  SUBCASE("export-dot renders registered descriptions") {
    auto dot = s.cli({"export-dot", s.fig3a});
    REQUIRE(dot.code == 0);
    CHECK(dot.out.rfind("digraph", 0) == 0);
    // Base layer of the layered service draws three activity ovals.
    size_t baseOvals = 0;
    std::istringstream lines(dot.out);
    std::string line;
    while (std::getline(lines, line))
      if (line.find("\"L2.") != std::string::npos &&
          line.find("shape=oval") != std::string::npos)
        ++baseOvals;
    CHECK(baseOvals == 3);
    CHECK(count_of(dot.out, "cluster_layer") == 3);
    CHECK(s.cli({"export-dot", "neither-id-nor-file"}).code == 1);
  }
}

TEST_CASE("HTTP gateway mirrors the CLI and maps errors to statuses") {
  Session s;
  Registry reg;
  reg.load_snapshot(s.store);
  GatewayConfig cfg;
  cfg.port = 0;
  HttpGateway gateway(reg, cfg);
  int port = gateway.start();
  REQUIRE(port > 0);
  httplib::Client client("127.0.0.1", port);

  json fig5a = oracle::fixture_json("fig5a.query.json");
  json fig5b = oracle::fixture_json("fig5b.query.json");

  SUBCASE("match and stitch agree with the CLI byte for byte") {
    auto cliMatch = s.cli({"match", oracle::fixture("fig5a.query.json")});
    auto res = client.Post("/match", json{{"query", fig5a}}.dump(),
                           "application/json");
    REQUIRE(res);
    CHECK(res->status == 200);
    CHECK(res->body == cliMatch.out);

    auto cliStitch = s.cli({"stitch", oracle::fixture("fig5b.query.json")});
    auto st = client.Post("/stitch", json{{"query", fig5b}}.dump(),
                          "application/json");
    REQUIRE(st);
    CHECK(st->status == 200);
    CHECK(st->body == cliStitch.out);

    auto top = client.Post(
        "/match", json{{"query", fig5a}, {"topK", 1}}.dump(), "application/json");
    CHECK(json::parse(top->body).size() == 1);
  }
  SUBCASE("service listing and retrieval") {
    auto all = client.Get("/services");
    REQUIRE(all);
    CHECK(all->status == 200);
    CHECK(json::parse(all->body).at("services").size() == 3);

    auto filtered = client.Get("/services?label=engine-comparator");
    CHECK(json::parse(filtered->body).at("services") == json::array({s.fig3b}));

    auto one = client.Get(("/services/" + s.fig3b).c_str());
    CHECK(one->status == 200);
    CHECK(json::parse(one->body).at("id") == s.fig3b);

    auto missing = client.Get("/services/svc-missing");
    CHECK(missing->status == 404);
    CHECK(json::parse(missing->body).at("error") == "NotFound");
  }
  SUBCASE("ingestion statuses") {
    auto created = client.Post("/services",
                               canonical_dump(oracle::fixture_json("rdg.json")),
                               "application/json");
    REQUIRE(created);
    CHECK(created->status == 201);
    CHECK(json::parse(created->body).at("id").get<std::string>().rfind(
              "svc-", 0) == 0);

    json unknownField = oracle::fixture_json("rdg.json");
    unknownField["surprise"] = true;
    auto schema = client.Post("/services", unknownField.dump(),
                              "application/json");
    CHECK(schema->status == 400);
    CHECK(json::parse(schema->body).at("error") == "SchemaError");

    json broken = oracle::fixture_json("fig3b.json");
    broken["parentMaps"][1].erase("a_bqe");
    auto invalid = client.Post("/services", broken.dump(), "application/json");
    CHECK(invalid->status == 422);
    json body = json::parse(invalid->body);
    CHECK(body.at("error") == "ValidationError");
    bool sawTotal = false;
    for (const auto& v : body.at("report"))
      sawTotal |= v.at("code") == "PARENT_TOTAL";
    CHECK(sawTotal);

    auto conv = client.Post(
        "/converters",
        json{{"id", "csv-echo"}, {"from", "csv"}, {"to", "csv"}}.dump(),
        "application/json");
    CHECK(conv->status == 422);

    json prunedVocab = oracle::fixture_json("vocabulary.json");
    json kept = json::array();
    for (const auto& l : prunedVocab["labels"])
      if (l != "wilcoxon-ranker") kept.push_back(l);
    prunedVocab["labels"] = kept;
    json taxo = json::array();
    for (const auto& e : prunedVocab["taxonomy"])
      if (e[0] != "wilcoxon-ranker" && e[1] != "wilcoxon-ranker")
        taxo.push_back(e);
    prunedVocab["taxonomy"] = taxo;
    auto conflict =
        client.Put("/vocabulary", prunedVocab.dump(), "application/json");
    CHECK(conflict->status == 409);
    CHECK(json::parse(conflict->body).at("error") == "VocabularyConflict");
  }
  SUBCASE("malformed requests get structured errors, not crashes") {
    auto garbage = client.Post("/match", "{nope", "application/json");
    REQUIRE(garbage);
    CHECK(garbage->status == 400);
    auto noQuery = client.Post("/match", R"({"x": 1})", "application/json");
    CHECK(noQuery->status == 400);
    // The server keeps serving afterwards.
    auto alive = client.Get("/services");
    REQUIRE(alive);
    CHECK(alive->status == 200);
  }
  SUBCASE("plan rendering matches export-dot") {
    auto cliDot = s.cli({"export-dot", oracle::fixture("fig6.plan.json")});
    REQUIRE(cliDot.code == 0);
    std::string planText = canonical_dump(oracle::fixture_json("fig6.plan.json"));

    auto posted = client.Post("/plans/render?format=dot", planText,
                              "application/json");
    REQUIRE(posted);
    CHECK(posted->status == 200);
    CHECK(posted->body == cliDot.out);

    httplib::Params params{{"plan", planText}};
    auto fetched = client.Get("/plans/render", params, httplib::Headers{});
    REQUIRE(fetched);
    CHECK(fetched->status == 200);
    CHECK(fetched->body == cliDot.out);

    auto badFormat = client.Post("/plans/render?format=svg", planText,
                                 "application/json");
    CHECK(badFormat->status == 400);
  }

  gateway.stop();
}
