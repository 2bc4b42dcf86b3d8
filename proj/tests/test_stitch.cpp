#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "oracles.hpp"
#include "stratos/dot.hpp"
#include "stratos/stitch.hpp"

using namespace stratos;

namespace {

DataNode data(const std::string& id, const std::string& fmt,
              std::vector<std::string> sem) {
  DataNode d;
  d.id = id;
  d.format = fmt;
  d.semantics = std::move(sem);
  return d;
}

ActivityNode act(const std::string& id, const std::string& label) {
  ActivityNode a;
  a.id = id;
  a.label = label;
  return a;
}

struct ComposeSetup {
  Registry reg;
  oracle::FixtureIds ids;
  GraphDescription query;
  std::shared_ptr<const RegistrySnapshot> snap;

  ComposeSetup() {
    ids = oracle::load_fixture_registry(reg);
    query = description_from_json(oracle::fixture_json("fig5b.query.json"));
    snap = reg.view();
  }
};

/// Two tiny services plus a query that chains them: P produces what C
/// consumes, with configurable entry format on the consumer side.
struct PipelineSetup {
  ConceptVocabulary vocab;
  std::map<std::string, GraphDescription> services;
  LayerStack query;

  explicit PipelineSetup(const std::string& consumerFormat = "csv") {
    for (const char* l : {"producer", "consumer", "stuff", "pipeline",
                          "csv-to-xml", "xml-to-rdf"})
      vocab.add_label(l);
    for (const char* f : {"csv", "xml", "rdf"}) vocab.add_format(f);

    GraphDescription p;
    p.id = "svc-a";
    p.label = "producer";
    ServiceGraph pg;
    pg.data["p_in"] = data("p_in", "csv", {"stuff"});
    pg.data["p_out"] = data("p_out", "csv", {"stuff"});
    pg.activities["p_a"] = act("p_a", "producer");
    pg.dataflow = {{"p_in", "p_a"}, {"p_a", "p_out"}};
    pg.canonicalize();
    p.stack.layers = {pg};
    services["svc-a"] = p;

    GraphDescription c;
    c.id = "svc-b";
    c.label = "consumer";
    ServiceGraph cg;
    cg.data["c_in"] = data("c_in", consumerFormat, {"stuff"});
    cg.data["c_out"] = data("c_out", "csv", {"stuff"});
    cg.activities["c_a"] = act("c_a", "consumer");
    cg.dataflow = {{"c_in", "c_a"}, {"c_a", "c_out"}};
    cg.canonicalize();
    c.stack.layers = {cg};
    services["svc-b"] = c;

    ServiceGraph q;
    q.data["q_in"] = data("q_in", "csv", {"stuff"});
    q.data["q_mid"] = data("q_mid", "csv", {"stuff"});
    q.data["q_out"] = data("q_out", "csv", {"stuff"});
    q.activities["q_a1"] = act("q_a1", "producer");
    q.activities["q_a2"] = act("q_a2", "consumer");
    q.dataflow = {
        {"q_in", "q_a1"}, {"q_a1", "q_mid"}, {"q_mid", "q_a2"}, {"q_a2", "q_out"}};
    q.canonicalize();
    query.layers = {q};
  }
};

}  // namespace

TEST_CASE("fragment selection covers the composite query with three cuts") {
  ComposeSetup cs;
  const ServiceGraph& q = cs.query.base();

  std::vector<MatchResult> all;
  for (const auto& [id, desc] : cs.snap->descriptions)
    for (auto& r : stratified_match(cs.query.stack, desc.stack, id, cs.snap->vocab,
                                    MatchParams{}, cs.snap->catalog))
      if (r.queryLayer == 0) all.push_back(std::move(r));
  std::sort(all.begin(), all.end(), result_order);

  auto fragments = select_fragments(q, all, cs.snap->descriptions,
                                    cs.snap->vocab, MatchParams{});
  REQUIRE(fragments.size() == 3);
  std::map<std::string, std::string> coveredBy;
  for (const auto& f : fragments)
    for (const auto& id : f.coveredQueryNodes) coveredBy[id] = f.serviceId;
  CHECK(coveredBy.at("a_exec") == cs.ids.fig3a);
  CHECK(coveredBy.at("a_rank") == cs.ids.fig3b);
  CHECK(coveredBy.at("a_chk") == cs.ids.fig3c);
  // The executor fragment keeps the mapped activity's full data neighborhood.
  CHECK(fragments[0].nodeSet ==
        std::set<std::string>{"a_aqe", "d_endpoints", "d_perf", "d_queries",
                              "d_random"});
}

TEST_CASE("an unmatchable activity raises IncompleteCover with the residual") {
  ComposeSetup cs;
  ServiceGraph q;
  q.data["d_x"] = data("d_x", "csv", {"ranking"});
  q.activities["a_odd"] = act("a_odd", "benchmark-input");
  q.dataflow = {{"d_x", "a_odd"}};
  LayerStack stack;
  stack.layers = {q};
  try {
    compose(stack, cs.snap->descriptions, cs.snap->vocab, cs.snap->catalog,
            MatchParams{});
    FAIL("expected IncompleteCover");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::IncompleteCover);
    REQUIRE(e.report().size() == 1);
    CHECK(e.report()[0].code == "UNCOVERED");
    CHECK(e.report()[0].subject == "a_odd");
  }
}

TEST_CASE("composition reproduces the golden plan byte for byte") {
  ComposeSetup cs;
  StitchPlan plan = compose(cs.query.stack, cs.snap->descriptions,
                            cs.snap->vocab, cs.snap->catalog, MatchParams{});
  json golden = oracle::fixture_json("fig6.plan.json");
  CHECK(canonical_dump(plan_to_json(plan), 2) == canonical_dump(golden, 2));

  SUBCASE("plan JSON round-trips through the parser") {
    StitchPlan again = plan_from_json(golden, cs.snap->catalog);
    CHECK(plan_to_json(again) == golden);
    CHECK(validate_plan(again, cs.query.base()).empty());
  }
  SUBCASE("repeat composition is deterministic") {
    StitchPlan again = compose(cs.query.stack, cs.snap->descriptions,
                               cs.snap->vocab, cs.snap->catalog, MatchParams{});
    CHECK(plan_to_json(again) == plan_to_json(plan));
  }
}

TEST_CASE("plan validation flags broken plans") {
  ComposeSetup cs;
  const ServiceGraph& q = cs.query.base();
  StitchPlan good = compose(cs.query.stack, cs.snap->descriptions,
                            cs.snap->vocab, cs.snap->catalog, MatchParams{});
  CHECK(validate_plan(good, q).empty());

  auto has_code = [](const ValidationReport& r, const std::string& code) {
    for (const auto& v : r)
      if (v.code == code) return true;
    return false;
  };

  SUBCASE("unbound query input") {
    StitchPlan p = good;
    p.inputBinding.erase("d_tq");
    CHECK(has_code(validate_plan(p, q), "INPUT_UNBOUND"));
  }
  SUBCASE("unbound query output") {
    StitchPlan p = good;
    p.outputBinding.clear();
    CHECK(has_code(validate_plan(p, q), "OUTPUT_UNBOUND"));
  }
  SUBCASE("chain dropped over unequal formats") {
    StitchPlan p = good;
    REQUIRE(!p.links.empty());
    p.links[0].chain.clear();  // relational -> rdf needs its converter
    CHECK(has_code(validate_plan(p, q), "CHAIN_COMPOSE"));
  }
  SUBCASE("chain that does not compose") {
    StitchPlan p = good;
    std::swap(p.links[0].chain, p.links[1].chain);
    CHECK(has_code(validate_plan(p, q), "CHAIN_COMPOSE"));
  }
  SUBCASE("unknown link port") {
    StitchPlan p = good;
    p.links[0].fromPort = "d_nope";
    CHECK(has_code(validate_plan(p, q), "LINK_PORT"));
  }
  SUBCASE("cyclic fragment graph") {
    StitchPlan p = good;
    GlueLink back;
    back.fromFragment = 1;
    back.fromPort = "d_ranking";
    back.toFragment = 0;
    back.toPort = "d_queries";
    p.links.push_back(back);
    CHECK(has_code(validate_plan(p, q), "PLAN_CYCLE"));
  }
}

TEST_CASE("materialized composite is valid and traceable") {
  ComposeSetup cs;
  StitchPlan plan = compose(cs.query.stack, cs.snap->descriptions,
                            cs.snap->vocab, cs.snap->catalog, MatchParams{});
  GraphDescription composite =
      materialize(plan, cs.snap->descriptions, cs.snap->vocab, MatchParams{},
                  "composite-service");
  CHECK(composite.label == "composite-service");
  REQUIRE(!composite.stack.layers.empty());
  for (const auto& layer : composite.stack.layers)
    CHECK(validate_graph(layer, cs.snap->vocab).empty());
  CHECK(validate_stack(composite.stack).empty());

  const ServiceGraph& base = composite.base();
  // Three mapped activities plus one converter per golden link.
  CHECK(base.activities.size() == 6);
  std::multiset<std::string> convLabels;
  for (const auto& [id, a] : base.activities)
    if (id.rfind("conv", 0) == 0) convLabels.insert(a.label);
  CHECK(convLabels == std::multiset<std::string>{"relational-to-csv",
                                                 "relational-to-rdf",
                                                 "xml-to-csv"});

  // Provenance names the source service of every fragment node and tags
  // converter activities.
  CHECK(composite.provenance.at("f0.a_aqe") == cs.ids.fig3a);
  CHECK(composite.provenance.at("f1.a_wrx") == cs.ids.fig3b);
  CHECK(composite.provenance.at("f2.a_kwc") == cs.ids.fig3c);
  for (const auto& [node, src] : composite.provenance)
    if (node.rfind("conv", 0) == 0)
      CHECK(src.rfind("converter:", 0) == 0);

  SUBCASE("the composite answers the original query in full") {
    auto services = cs.snap->descriptions;
    composite.id = "svc-composite";
    services["svc-composite"] = composite;
    auto ranked = rank_services(cs.query.stack, services, cs.snap->vocab,
                                MatchParams{}, cs.snap->catalog, 10);
    REQUIRE(!ranked.empty());
    CHECK(ranked[0].serviceId == "svc-composite");
    CHECK(ranked[0].coverage == doctest::Approx(1.0));
    CHECK(ranked[0].score >= 0.6);
    CHECK(ranked[0].score == doctest::Approx(0.5 + 0.3 * 3.0 / 7.0 + 0.2));
  }
}

TEST_CASE("equal formats glue with an empty chain and merge on splice") {
  PipelineSetup ps;  // consumer takes csv directly
  StitchPlan plan =
      compose(ps.query, ps.services, ps.vocab, {}, MatchParams{});
  REQUIRE(plan.fragments.size() == 2);
  REQUIRE(plan.links.size() == 1);
  CHECK(plan.links[0].chain.empty());
  CHECK(plan.inputBinding.at("q_in") == PortRef{0, "p_in"});
  CHECK(plan.outputBinding.at("q_out") == PortRef{1, "c_out"});

  GraphDescription composite =
      materialize(plan, ps.services, ps.vocab, MatchParams{}, "pipeline");
  const ServiceGraph& base = composite.base();
  CHECK(base.activities.size() == 2);  // no converter activities
  CHECK(base.data.size() == 3);        // c_in merged into p_out
  CHECK(!base.has_node("f1.c_in"));
  CHECK(base.has_dataflow_edge("f0.p_out", "f1.c_a"));
}

TEST_CASE("a two-converter chain adds two activities on splice") {
  PipelineSetup ps("rdf");  // producer emits csv, consumer wants rdf
  std::vector<Converter> catalog{{"csv-to-xml", "csv", "xml", 1.0, ""},
                                 {"xml-to-rdf", "xml", "rdf", 1.0, ""}};
  StitchPlan plan =
      compose(ps.query, ps.services, ps.vocab, catalog, MatchParams{});
  REQUIRE(plan.links.size() == 1);
  REQUIRE(plan.links[0].chain.size() == 2);
  CHECK(plan.links[0].chain[0].id == "csv-to-xml");
  CHECK(plan.links[0].chain[1].id == "xml-to-rdf");

  GraphDescription composite =
      materialize(plan, ps.services, ps.vocab, MatchParams{}, "pipeline");
  const ServiceGraph& base = composite.base();
  CHECK(base.activities.size() == 4);  // two service steps, two converters
  CHECK(base.data.size() == 5);        // plus one intermediate data node
  CHECK(validate_graph(base, ps.vocab).empty());

  SUBCASE("no catalog, no conversion path") {
    CHECK_THROWS_AS(
        compose(ps.query, ps.services, ps.vocab, {}, MatchParams{}), Error);
    try {
      compose(ps.query, ps.services, ps.vocab, {}, MatchParams{});
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::NoConversionPath);
    }
  }
}

TEST_CASE("plan DOT edge count matches the plan contents") {
  ComposeSetup cs;
  StitchPlan plan = compose(cs.query.stack, cs.snap->descriptions,
                            cs.snap->vocab, cs.snap->catalog, MatchParams{});
  std::string dot = export_dot(plan, cs.snap->descriptions);

  size_t internal = 0;
  for (const auto& f : plan.fragments) {
    const ServiceGraph& s =
        cs.snap->descriptions.at(f.serviceId).stack.layers[f.serviceLayer];
    for (const auto& e : s.dataflow)
      if (f.nodeSet.count(e.from) && f.nodeSet.count(e.to)) ++internal;
    for (const auto& r : s.relatedness)
      if (f.nodeSet.count(r.first) && f.nodeSet.count(r.second)) ++internal;
  }
  size_t arrows = 0;
  for (size_t pos = dot.find("->"); pos != std::string::npos;
       pos = dot.find("->", pos + 2))
    ++arrows;
  CHECK(arrows == internal + plan.links.size());
  // Converter links are labeled with their chain.
  CHECK(dot.find("relational-to-rdf") != std::string::npos);
}
