// End-to-end acceptance checks over the bundled fixture corpus. Each
// criterion prints one PASS/FAIL line; the exit code is the failure count.

#include <cstdio>
#include <functional>
#include <iostream>
#include <sstream>

#include <httplib.h>

#include "oracles.hpp"
#include "stratos/cli.hpp"
#include "stratos/dot.hpp"
#include "stratos/http.hpp"
#include "stratos/stitch.hpp"

using namespace stratos;

namespace {

struct Corpus {
  Registry reg;
  oracle::FixtureIds ids;
  std::shared_ptr<const RegistrySnapshot> snap;
  GraphDescription query5a, query5b;

  Corpus() {
    ids = oracle::load_fixture_registry(reg);
    snap = reg.view();
    query5a = description_from_json(oracle::fixture_json("fig5a.query.json"));
    query5b = description_from_json(oracle::fixture_json("fig5b.query.json"));
  }
};

bool criterion1(Corpus& c) {
  MatchParams p;
  const auto& fig3a = c.snap->descriptions.at(c.ids.fig3a);
  const auto& fig3b = c.snap->descriptions.at(c.ids.fig3b);

  // (a) Comparing the abstract query layer against the layered service's
  // equally abstract layer scores below the acceptance threshold.
  auto vs3a = stratified_match(c.query5a.stack, fig3a.stack, c.ids.fig3a,
                               c.snap->vocab, p, c.snap->catalog);
  for (const auto& r : vs3a)
    if (r.queryLayer == 0 && r.serviceLayer == 0 &&
        r.penalizedScore >= p.acceptThreshold)
      return false;

  // (b) The refined query layer partially matches the service's base layer
  // through the query-executor concept.
  bool partial = false;
  for (const auto& r : vs3a)
    if (r.queryLayer == 1 && r.serviceLayer == 2) {
      auto it = r.mapping.pairs.find("a_exec");
      if (it != r.mapping.pairs.end() && it->second == "a_aqe") partial = true;
    }
  if (!partial) return false;

  // (c) The aligned service is accepted at layer pairs (0,0) and (1,1).
  auto vs3b = stratified_match(c.query5a.stack, fig3b.stack, c.ids.fig3b,
                               c.snap->vocab, p, c.snap->catalog);
  bool at00 = false, at11 = false;
  for (const auto& r : vs3b) {
    if (r.penalizedScore < p.acceptThreshold) continue;
    if (r.queryLayer == 0 && r.serviceLayer == 0) at00 = true;
    if (r.queryLayer == 1 && r.serviceLayer == 1) at11 = true;
  }
  if (!at00 || !at11) return false;

  // (d) No single service fully covers the composite query, yet stitching
  // produces a complete, valid plan.
  for (const auto& [id, desc] : c.snap->descriptions)
    for (const auto& r : stratified_match(c.query5b.stack, desc.stack, id,
                                          c.snap->vocab, p, c.snap->catalog))
      if (r.coverage >= 1.0) return false;
  StitchPlan plan = compose(c.query5b.stack, c.snap->descriptions,
                            c.snap->vocab, c.snap->catalog, p);
  return validate_plan(plan, c.query5b.base()).empty();
}

bool criterion2(Corpus& c) {
  MatchParams p;
  StitchPlan plan = compose(c.query5b.stack, c.snap->descriptions,
                            c.snap->vocab, c.snap->catalog, p);

  std::set<std::string> sources;
  for (const auto& f : plan.fragments) sources.insert(f.serviceId);
  if (sources != std::set<std::string>{c.ids.fig3a, c.ids.fig3b, c.ids.fig3c})
    return false;

  // The executor fragment's exit feeds the ranker fragment's entry through
  // the relational-to-csv converter.
  bool glued = false;
  for (const auto& l : plan.links) {
    if (plan.fragments[l.fromFragment].serviceId != c.ids.fig3a) continue;
    if (plan.fragments[l.toFragment].serviceId != c.ids.fig3b) continue;
    for (const auto& conv : l.chain)
      if (conv.id == "relational-to-csv") glued = true;
  }
  if (!glued) return false;

  GraphDescription composite = materialize(plan, c.snap->descriptions,
                                           c.snap->vocab, p, "composite-service");
  for (const auto& layer : composite.stack.layers)
    if (!validate_graph(layer, c.snap->vocab).empty()) return false;
  if (!validate_stack(composite.stack).empty()) return false;

  composite.id = "svc-roundtrip";
  std::map<std::string, GraphDescription> only{{composite.id, composite}};
  auto ranked = rank_services(c.query5b.stack, only, c.snap->vocab, p,
                              c.snap->catalog, 1);
  return !ranked.empty() && ranked[0].coverage >= 1.0 &&
         ranked[0].score >= p.acceptThreshold;
}

bool criterion3() {
  auto vocab = oracle::small_vocab();
  MatchParams exact;
  exact.exactMode = true;
  exact.layerPenalty = 0.0;
  exact.labelThreshold = 1.0;
  exact.acceptThreshold = 1.0;
  std::mt19937 rng(20240501);
  for (int iter = 0; iter < 100; ++iter) {
    ServiceGraph q = oracle::random_graph(rng, 5);
    ServiceGraph s = oracle::random_graph(rng, 8);
    auto expected = oracle::brute_force_embeddings(q, s, vocab);
    std::vector<std::map<std::string, std::string>> got;
    for (const auto& m : match_layer(q, s, vocab, exact)) got.push_back(m.pairs);
    std::sort(got.begin(), got.end());
    if (got != expected) return false;
  }
  return true;
}

bool criterion4() {
  std::mt19937 rng(20240502);
  for (int iter = 0; iter < 100; ++iter) {
    auto catalog = oracle::random_catalog(rng, 10);
    std::set<std::string> fmts{"fmt0"};
    for (const auto& conv : catalog) {
      fmts.insert(conv.fromFormat);
      fmts.insert(conv.toFormat);
    }
    for (const auto& from : fmts)
      for (const auto& to : fmts) {
        auto chain = converter_chain(from, to, catalog, 16);
        auto hops = oracle::fw_hops(from, to, catalog);
        bool reachable = hops.has_value() && *hops <= 16;
        if (reachable != chain.has_value()) return false;
        if (chain && static_cast<int>(chain->size()) != *hops) return false;
      }
  }
  return true;
}

bool criterion5(Corpus& c) {
  auto vocab = oracle::small_vocab();
  std::mt19937 rng(20240503);
  int done = 0;
  while (done < 200) {
    ServiceGraph g = oracle::random_graph(rng, 12);
    if (!validate_graph(g, vocab).empty()) continue;

    Partition p;
    std::set<std::string> covered;
    for (const auto& [id, a] : g.activities) {
      if (covered.count(id)) continue;
      std::set<std::string> block{id};
      covered.insert(id);
      std::string cur = id;
      while (rng() % 2 == 0) {
        std::vector<std::string> adj;
        for (const auto& d : g.dataflow_neighbors(cur))
          for (const auto& other : g.dataflow_neighbors(d))
            if (g.is_activity(other) && !covered.count(other))
              adj.push_back(other);
        if (adj.empty()) break;
        std::sort(adj.begin(), adj.end());
        cur = adj[rng() % adj.size()];
        block.insert(cur);
        covered.insert(cur);
      }
      p.blocks.push_back({block, std::nullopt});
    }

    QuotientResult qr = quotient(g, p, vocab);
    LayerStack stack;
    stack.layers = {qr.parent, g};
    stack.parentMaps = {qr.parentMap};
    if (!validate_stack(stack).empty()) return false;
    if (!oracle::quotient_edges_ok(g, qr.parent, qr.parentMap)) return false;
    ++done;
  }

  // Concept-driven summarization terminates with strictly shrinking layers.
  GraphDescription rdqe = description_from_json(oracle::fixture_json("rdqe.json"));
  rdqe.id = "rdqe-1";
  ConceptVocabulary fv = oracle::fixture_vocab();
  fv.index_description("rdqe-1", rdqe.label);
  std::map<std::string, GraphDescription> descs{{"rdqe-1", rdqe}};
  const auto& fig3a = c.snap->descriptions.at(c.ids.fig3a);
  LayerStack stack =
      auto_summarize(fig3a.base(), fv, descs, MatchParams{}, 4);
  if (stack.layers.size() < 2) return false;
  for (size_t i = 1; i < stack.layers.size(); ++i) {
    size_t upper = stack.layers[i - 1].data.size() +
                   stack.layers[i - 1].activities.size();
    size_t lower =
        stack.layers[i].data.size() + stack.layers[i].activities.size();
    if (upper >= lower) return false;
  }
  return validate_stack(stack).empty();
}

bool criterion6(Corpus& c) {
  MatchParams p;
  std::string first;
  for (int run = 0; run < 5; ++run) {
    auto ranked = rank_services(c.query5a.stack, c.snap->descriptions,
                                c.snap->vocab, p, c.snap->catalog, 10);
    auto plan = compose(c.query5b.stack, c.snap->descriptions, c.snap->vocab,
                        c.snap->catalog, p);
    std::string bytes = canonical_dump(results_to_json(ranked), 2) + "\n" +
                        canonical_dump(plan_to_json(plan), 2);
    if (run == 0) first = bytes;
    else if (bytes != first) return false;
  }
  auto parallel = rank_services(c.query5a.stack, c.snap->descriptions,
                                c.snap->vocab, p, c.snap->catalog, 10, true);
  if (canonical_dump(results_to_json(parallel), 2) + "\n" +
          canonical_dump(plan_to_json(compose(c.query5b.stack,
                                              c.snap->descriptions,
                                              c.snap->vocab, c.snap->catalog,
                                              p)),
                         2) !=
      first)
    return false;

  // CLI vs HTTP gateway parity on the same store.
  std::string store = "acceptance_store.json";
  std::remove(store.c_str());
  auto cli = [&](std::vector<std::string> args) {
    args.insert(args.begin(), {"--store", store});
    std::ostringstream out, err;
    int code = cli_dispatch(args, out, err);
    return std::pair<int, std::string>{code, out.str()};
  };
  bool ok =
      cli({"vocab", oracle::fixture("vocabulary.json")}).first == 0 &&
      cli({"ingest-converter", oracle::fixture("converters.json")}).first == 0 &&
      cli({"ingest", oracle::fixture("fig3a.json")}).first == 0 &&
      cli({"ingest", oracle::fixture("fig3b.json")}).first == 0 &&
      cli({"ingest", oracle::fixture("fig3c.json")}).first == 0;
  if (!ok) return false;
  auto cliMatch = cli({"match", oracle::fixture("fig5a.query.json")});
  auto cliStitch = cli({"stitch", oracle::fixture("fig5b.query.json")});

  Registry reg;
  reg.load_snapshot(store);
  std::remove(store.c_str());
  GatewayConfig cfg;
  cfg.port = 0;
  HttpGateway gateway(reg, cfg);
  int port = gateway.start();
  httplib::Client client("127.0.0.1", port);
  auto matched = client.Post(
      "/match",
      json{{"query", oracle::fixture_json("fig5a.query.json")}}.dump(),
      "application/json");
  auto stitched = client.Post(
      "/stitch",
      json{{"query", oracle::fixture_json("fig5b.query.json")}}.dump(),
      "application/json");
  gateway.stop();
  return matched && matched->status == 200 && matched->body == cliMatch.second &&
         stitched && stitched->status == 200 && stitched->body == cliStitch.second;
}

bool criterion7(Corpus& c) {
  auto observe = [&](Registry& reg) {
    auto snap = reg.view();
    json out;
    out["list"] = reg.list();
    for (const auto& id : reg.list()) {
      out["descriptions"][id] = description_to_json(reg.get(id));
      out["atomicity"][id] =
          reg.atomicity(id) == Atomicity::Atomic ? "ATOMIC" : "COMPOSITE";
    }
    out["match"] = results_to_json(
        rank_services(c.query5a.stack, snap->descriptions, snap->vocab,
                      MatchParams{}, snap->catalog, 10));
    out["stitch"] = plan_to_json(compose(c.query5b.stack, snap->descriptions,
                                         snap->vocab, snap->catalog,
                                         MatchParams{}));
    return canonical_dump(out, 2);
  };

  std::string path = "acceptance_snapshot.json";
  std::remove(path.c_str());
  std::string before = observe(c.reg);
  c.reg.save_snapshot(path);
  Registry loaded;
  loaded.load_snapshot(path);
  std::remove(path.c_str());
  return observe(loaded) == before;
}

}  // namespace

int main() {
  Corpus corpus;
  int failures = 0;
  auto check = [&](int n, const std::string& name, std::function<bool()> fn) {
    bool ok = false;
    std::string detail;
    try {
      ok = fn();
    } catch (const std::exception& e) {
      detail = std::string(" (") + e.what() + ")";
    }
    std::cout << (ok ? "PASS" : "FAIL") << " criterion " << n << ": " << name
              << detail << "\n";
    if (!ok) ++failures;
  };

  check(1, "fixture corpus reproduces the expected match outcomes",
        [&] { return criterion1(corpus); });
  check(2, "stitching bridges all three services and round-trips",
        [&] { return criterion2(corpus); });
  check(3, "exact matching equals brute-force subgraph isomorphism",
        [&] { return criterion3(); });
  check(4, "converter chains equal the shortest-path oracle",
        [&] { return criterion4(); });
  check(5, "quotients and summaries always satisfy the stack invariants",
        [&] { return criterion5(corpus); });
  check(6, "rank and stitch are deterministic across runs, modes, interfaces",
        [&] { return criterion6(corpus); });
  check(7, "snapshot round-trip preserves observable behavior",
        [&] { return criterion7(corpus); });

  return failures;
}
