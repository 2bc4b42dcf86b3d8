#include "stratos/stitch.hpp"

#include <algorithm>
#include <deque>
#include <tuple>

namespace stratos {

namespace {

const ServiceGraph& service_layer(
    const std::map<std::string, GraphDescription>& services,
    const std::string& serviceId, int layer) {
  auto it = services.find(serviceId);
  if (it == services.end())
    throw Error(ErrorCode::UnknownDescription, serviceId);
  const auto& layers = it->second.stack.layers;
  if (layer < 0 || layer >= static_cast<int>(layers.size()))
    throw Error(ErrorCode::UnknownDescription,
                serviceId + " layer " + std::to_string(layer));
  return layers[layer];
}

Fragment cut_fragment(const MatchResult& r, const ServiceGraph& q,
                      const ServiceGraph& s,
                      const std::set<std::string>& newlyCovered) {
  Fragment f;
  f.serviceId = r.serviceId;
  f.serviceLayer = r.serviceLayer;
  f.mapping = r.mapping;
  f.coveredQueryNodes = newlyCovered;
  for (const auto& [qn, sn] : r.mapping.pairs) {
    f.nodeSet.insert(sn);
    if (q.is_activity(qn))
      for (const auto& d : s.dataflow_neighbors(sn)) f.nodeSet.insert(d);
  }
  for (const auto& n : f.nodeSet) {
    if (!s.is_data(n)) continue;
    const DataNode& d = s.data.at(n);
    auto inside = [&](const std::set<std::string>& acts) {
      for (const auto& a : acts)
        if (f.nodeSet.count(a)) return true;
      return false;
    };
    PortDescriptor p{n, PortDescriptor::In, d.format, d.semantics};
    if (!inside(s.producers_of(n))) f.entryPorts.push_back(p);
    if (!inside(s.consumers_of(n))) {
      p.direction = PortDescriptor::Out;
      f.exitPorts.push_back(p);
    }
  }
  return f;
}

/// Query activity order by dataflow topology, ties by id.
std::map<std::string, int> topo_index(const ServiceGraph& q) {
  std::map<std::string, int> indeg;
  for (const auto& [id, d] : q.data) indeg[id] = 0;
  for (const auto& [id, a] : q.activities) indeg[id] = 0;
  for (const auto& e : q.dataflow) ++indeg[e.to];
  std::set<std::string> ready;
  for (const auto& [id, deg] : indeg)
    if (deg == 0) ready.insert(id);
  std::map<std::string, int> index;
  int next = 0;
  while (!ready.empty()) {
    std::string cur = *ready.begin();
    ready.erase(ready.begin());
    if (q.is_activity(cur)) index[cur] = next++;
    for (const auto& e : q.dataflow)
      if (e.from == cur && --indeg[e.to] == 0) ready.insert(e.to);
  }
  return index;
}

}  // namespace

std::vector<Fragment> select_fragments(
    const ServiceGraph& q, const std::vector<MatchResult>& results,
    const std::map<std::string, GraphDescription>& services,
    const ConceptVocabulary& vocab, const MatchParams& params) {
  (void)vocab;
  (void)params;
  std::set<std::string> uncovered;
  for (const auto& [id, a] : q.activities) uncovered.insert(id);

  std::vector<Fragment> fragments;
  while (!uncovered.empty()) {
    const MatchResult* best = nullptr;
    std::set<std::string> bestCover;
    for (const auto& r : results) {
      std::set<std::string> cover;
      for (const auto& [qn, sn] : r.mapping.pairs)
        if (uncovered.count(qn)) cover.insert(qn);
      if (cover.empty()) continue;
      bool better = false;
      if (!best) {
        better = true;
      } else if (cover.size() != bestCover.size()) {
        better = cover.size() > bestCover.size();
      } else if (r.penalizedScore != best->penalizedScore) {
        better = r.penalizedScore > best->penalizedScore;
      } else {
        better = std::tie(r.serviceId, r.queryLayer, r.serviceLayer) <
                 std::tie(best->serviceId, best->queryLayer, best->serviceLayer);
      }
      if (better) {
        best = &r;
        bestCover = std::move(cover);
      }
    }
    if (!best) {
      ValidationReport residual;
      for (const auto& id : uncovered)
        residual.push_back({"UNCOVERED", id, "no match covers this activity"});
      throw Error(ErrorCode::IncompleteCover,
                  "query activities left uncovered", residual);
    }
    const ServiceGraph& s =
        service_layer(services, best->serviceId, best->serviceLayer);
    fragments.push_back(cut_fragment(*best, q, s, bestCover));
    for (const auto& id : bestCover) uncovered.erase(id);
  }
  return fragments;
}

StitchPlan stitch(const ServiceGraph& q, const std::vector<Fragment>& fragments,
                  const std::vector<Converter>& catalog,
                  const ConceptVocabulary& vocab, const MatchParams& params) {
  StitchPlan plan;
  plan.fragments = fragments;

  auto topo = topo_index(q);
  // Fragment order: smallest topo index among covered query activities.
  std::vector<int> order(fragments.size());
  for (size_t i = 0; i < fragments.size(); ++i) {
    int best = 1 << 30;
    for (const auto& id : fragments[i].coveredQueryNodes) {
      auto it = topo.find(id);
      if (it != topo.end()) best = std::min(best, it->second);
    }
    order[i] = best;
  }
  std::vector<int> fragIdx(fragments.size());
  for (size_t i = 0; i < fragIdx.size(); ++i) fragIdx[i] = static_cast<int>(i);
  std::sort(fragIdx.begin(), fragIdx.end(),
            [&](int a, int b) { return std::tie(order[a], a) < std::tie(order[b], b); });

  std::map<std::string, int> fragOf;  // query activity -> fragment
  for (size_t i = 0; i < fragments.size(); ++i)
    for (const auto& id : fragments[i].coveredQueryNodes)
      fragOf[id] = static_cast<int>(i);

  std::set<PortRef> fedEntries;

  auto port_sim = [&](const PortDescriptor& a, const PortDescriptor& b) {
    return semantics_similarity(a.semantics, "", b.semantics, "", vocab);
  };
  auto best_entry = [&](int frag, const std::vector<std::string>& semantics,
                        const std::string& text)
      -> std::pair<const PortDescriptor*, double> {
    const PortDescriptor* best = nullptr;
    double bestSim = -1.0;
    for (const auto& p : plan.fragments[frag].entryPorts) {
      if (fedEntries.count({frag, p.dataNodeId})) continue;
      double sim = semantics_similarity(semantics, text, p.semantics, "", vocab);
      if (sim > bestSim || (sim == bestSim && best && p.dataNodeId < best->dataNodeId)) {
        best = &p;
        bestSim = sim;
      }
    }
    return {best, bestSim};
  };

  // 1. Bind query input ports to entry ports of consuming fragments.
  for (const auto& p : ports(q)) {
    if (p.direction != PortDescriptor::In) continue;
    const DataNode& qd = q.data.at(p.dataNodeId);
    const PortDescriptor* best = nullptr;
    double bestSim = -1.0;
    int bestFrag = -1;
    for (const auto& act : q.consumers_of(p.dataNodeId)) {
      auto it = fragOf.find(act);
      if (it == fragOf.end()) continue;
      auto [cand, sim] = best_entry(it->second, qd.semantics, qd.annotation);
      if (!cand) continue;
      if (sim > bestSim ||
          (sim == bestSim &&
           std::tie(it->second, cand->dataNodeId) <
               std::tie(bestFrag, best->dataNodeId))) {
        best = cand;
        bestSim = sim;
        bestFrag = it->second;
      }
    }
    if (!best || bestSim < params.semanticsThreshold)
      throw Error(ErrorCode::SemanticsMismatch,
                  "no entry port accepts query input " + p.dataNodeId);
    plan.inputBinding[p.dataNodeId] = {bestFrag, best->dataNodeId};
    fedEntries.insert({bestFrag, best->dataNodeId});
  }

  // 2. Links for producer/consumer fragment pairs along query dataflow.
  std::set<std::pair<int, int>> linked;
  std::vector<std::pair<int, int>> pairs;
  for (const auto& e1 : q.dataflow) {
    if (!q.is_activity(e1.from)) continue;  // activity -> data
    for (const auto& e2 : q.dataflow) {
      if (e2.from != e1.to || !q.is_activity(e2.to)) continue;
      auto fa = fragOf.find(e1.from);
      auto fb = fragOf.find(e2.to);
      if (fa == fragOf.end() || fb == fragOf.end()) continue;
      if (fa->second == fb->second) continue;
      if (linked.insert({fa->second, fb->second}).second)
        pairs.emplace_back(fa->second, fb->second);
    }
  }
  std::sort(pairs.begin(), pairs.end());

  auto add_link = [&](int fromFrag, const PortDescriptor& exit, int toFrag,
                      const PortDescriptor& entry) {
    auto chain = converter_chain(exit.format, entry.format, catalog,
                                 params.maxConverterLen);
    if (!chain)
      throw Error(ErrorCode::NoConversionPath,
                  exit.format + " -> " + entry.format + " for port " +
                      entry.dataNodeId);
    plan.links.push_back(
        {fromFrag, exit.dataNodeId, toFrag, entry.dataNodeId, *chain});
    fedEntries.insert({toFrag, entry.dataNodeId});
  };

  for (const auto& [fa, fb] : pairs) {
    const PortDescriptor* bestExit = nullptr;
    const PortDescriptor* bestEntry = nullptr;
    double bestSim = -1.0;
    for (const auto& exit : plan.fragments[fa].exitPorts) {
      auto [entry, sim] = best_entry(fb, exit.semantics, "");
      if (!entry) continue;
      if (sim > bestSim ||
          (sim == bestSim && bestExit &&
           std::tie(exit.dataNodeId, entry->dataNodeId) <
               std::tie(bestExit->dataNodeId, bestEntry->dataNodeId))) {
        bestExit = &exit;
        bestEntry = entry;
        bestSim = sim;
      }
    }
    if (!bestExit || bestSim < params.semanticsThreshold)
      throw Error(ErrorCode::SemanticsMismatch,
                  "no semantics-compatible port pair between fragments " +
                      std::to_string(fa) + " and " + std::to_string(fb));
    add_link(fa, *bestExit, fb, *bestEntry);
  }

  // 3. Feed remaining open entry ports from upstream exits when possible.
  std::map<int, int> rank;
  for (size_t i = 0; i < fragIdx.size(); ++i) rank[fragIdx[i]] = static_cast<int>(i);
  for (int fb : fragIdx) {
    for (const auto& entry : plan.fragments[fb].entryPorts) {
      if (fedEntries.count({fb, entry.dataNodeId})) continue;
      const PortDescriptor* bestExit = nullptr;
      int bestFrag = -1;
      double bestSim = -1.0;
      for (int fa : fragIdx) {
        if (rank[fa] >= rank[fb]) continue;
        for (const auto& exit : plan.fragments[fa].exitPorts) {
          double sim = port_sim(exit, entry);
          if (sim > bestSim ||
              (sim == bestSim && bestExit &&
               std::tie(fa, exit.dataNodeId) <
                   std::tie(bestFrag, bestExit->dataNodeId))) {
            bestExit = &exit;
            bestFrag = fa;
            bestSim = sim;
          }
        }
      }
      if (bestExit && bestSim >= params.semanticsThreshold)
        add_link(bestFrag, *bestExit, fb, entry);
      // An unfed entry stays open and becomes an input of the composite.
    }
  }

  // 4. Bind query output ports to exits of producing fragments.
  for (const auto& p : ports(q)) {
    if (p.direction != PortDescriptor::Out) continue;
    const DataNode& qd = q.data.at(p.dataNodeId);
    const PortDescriptor* best = nullptr;
    double bestSim = -1.0;
    int bestFrag = -1;
    for (const auto& act : q.producers_of(p.dataNodeId)) {
      auto it = fragOf.find(act);
      if (it == fragOf.end()) continue;
      for (const auto& exit : plan.fragments[it->second].exitPorts) {
        double sim =
            semantics_similarity(qd.semantics, qd.annotation, exit.semantics,
                                 "", vocab);
        if (sim > bestSim ||
            (sim == bestSim && best &&
             std::tie(it->second, exit.dataNodeId) <
                 std::tie(bestFrag, best->dataNodeId))) {
          best = &exit;
          bestSim = sim;
          bestFrag = it->second;
        }
      }
    }
    if (!best || bestSim < params.semanticsThreshold)
      throw Error(ErrorCode::SemanticsMismatch,
                  "no exit port produces query output " + p.dataNodeId);
    plan.outputBinding[p.dataNodeId] = {bestFrag, best->dataNodeId};
  }

  auto report = validate_plan(plan, q);
  for (const auto& v : report)
    if (v.code == "PLAN_CYCLE")
      throw Error(ErrorCode::AcyclicViolation, v.detail);
  return plan;
}

ValidationReport validate_plan(const StitchPlan& plan, const ServiceGraph& q) {
  ValidationReport report;
  auto flag = [&](const std::string& code, const std::string& subject,
                  const std::string& detail) {
    report.push_back({code, subject, detail});
  };

  // Acyclicity of the fragment/link graph.
  std::map<int, std::set<int>> succ;
  std::map<int, int> indeg;
  for (size_t i = 0; i < plan.fragments.size(); ++i)
    indeg[static_cast<int>(i)] = 0;
  for (const auto& l : plan.links)
    if (succ[l.fromFragment].insert(l.toFragment).second) ++indeg[l.toFragment];
  std::deque<int> ready;
  for (const auto& [i, d] : indeg)
    if (d == 0) ready.push_back(i);
  size_t visited = 0;
  while (!ready.empty()) {
    int cur = ready.front();
    ready.pop_front();
    ++visited;
    for (int nxt : succ[cur])
      if (--indeg[nxt] == 0) ready.push_back(nxt);
  }
  if (visited < plan.fragments.size())
    flag("PLAN_CYCLE", "", "fragment/link graph contains a cycle");

  for (const auto& p : ports(q)) {
    if (p.direction == PortDescriptor::In) {
      if (!plan.inputBinding.count(p.dataNodeId))
        flag("INPUT_UNBOUND", p.dataNodeId, "query input has no plan entry");
    } else if (!plan.outputBinding.count(p.dataNodeId)) {
      flag("OUTPUT_UNBOUND", p.dataNodeId, "query output has no plan exit");
    }
  }

  auto port_format = [&](int frag, const std::string& port, bool entry)
      -> std::optional<std::string> {
    if (frag < 0 || frag >= static_cast<int>(plan.fragments.size()))
      return std::nullopt;
    const auto& list = entry ? plan.fragments[frag].entryPorts
                             : plan.fragments[frag].exitPorts;
    for (const auto& p : list)
      if (p.dataNodeId == port) return p.format;
    return std::nullopt;
  };
  for (const auto& l : plan.links) {
    auto from = port_format(l.fromFragment, l.fromPort, false);
    auto to = port_format(l.toFragment, l.toPort, true);
    if (!from || !to) {
      flag("LINK_PORT", l.fromPort + "->" + l.toPort, "unknown link port");
      continue;
    }
    std::string cur = *from;
    for (const auto& c : l.chain) {
      if (normalize_token(c.fromFormat) != cur) {
        flag("CHAIN_COMPOSE", c.id, "chain does not compose format-to-format");
        break;
      }
      cur = normalize_token(c.toFormat);
    }
    if (cur != *to)
      flag("CHAIN_COMPOSE", l.fromPort + "->" + l.toPort,
           "chain ends at " + cur + ", entry expects " + *to);
    if (l.chain.empty() && *from != *to)
      flag("CHAIN_COMPOSE", l.fromPort + "->" + l.toPort,
           "empty chain over unequal formats");
  }
  return report;
}

StitchPlan compose(const LayerStack& qStack,
                   const std::map<std::string, GraphDescription>& services,
                   const ConceptVocabulary& vocab,
                   const std::vector<Converter>& catalog,
                   const MatchParams& params) {
  if (services.empty())
    throw Error(ErrorCode::EmptyRegistry, "no descriptions registered");
  if (qStack.layers.empty())
    throw Error(ErrorCode::SchemaError, "query has no layers");
  int baseLayer = static_cast<int>(qStack.layers.size()) - 1;

  std::vector<MatchResult> all;
  for (const auto& [id, desc] : services) {
    for (auto& r :
         stratified_match(qStack, desc.stack, id, vocab, params, catalog))
      if (r.queryLayer == baseLayer)  // fragments cover the base layer
        all.push_back(std::move(r));
  }
  std::sort(all.begin(), all.end(), result_order);

  const ServiceGraph& q = qStack.base();
  auto fragments = select_fragments(q, all, services, vocab, params);
  return stitch(q, fragments, catalog, vocab, params);
}

GraphDescription materialize(
    const StitchPlan& plan,
    const std::map<std::string, GraphDescription>& services,
    const ConceptVocabulary& vocab, const MatchParams& params,
    const std::string& label, int maxLayers) {
  ServiceGraph g;
  std::map<std::string, std::string> provenance;
  auto scoped = [](int frag, const std::string& id) {
    return "f" + std::to_string(frag) + "." + id;
  };

  for (size_t i = 0; i < plan.fragments.size(); ++i) {
    const Fragment& f = plan.fragments[i];
    const ServiceGraph& s = service_layer(services, f.serviceId, f.serviceLayer);
    for (const auto& n : f.nodeSet) {
      std::string nid = scoped(static_cast<int>(i), n);
      if (s.is_data(n)) {
        DataNode d = s.data.at(n);
        d.id = nid;
        g.data[nid] = std::move(d);
      } else {
        ActivityNode a = s.activities.at(n);
        a.id = nid;
        g.activities[nid] = std::move(a);
      }
      provenance[nid] = f.serviceId;
    }
    for (const auto& e : s.dataflow)
      if (f.nodeSet.count(e.from) && f.nodeSet.count(e.to))
        g.dataflow.push_back({scoped(static_cast<int>(i), e.from),
                              scoped(static_cast<int>(i), e.to)});
    for (const auto& r : s.relatedness)
      if (f.nodeSet.count(r.first) && f.nodeSet.count(r.second))
        g.relatedness.emplace_back(scoped(static_cast<int>(i), r.first),
                                   scoped(static_cast<int>(i), r.second));
  }

  // Splice glue links: an empty chain merges the entry node into the exit
  // node; a non-empty chain becomes converter activities with intermediate
  // data nodes, ending at the entry node.
  int convSeq = 0;
  for (const auto& l : plan.links) {
    std::string exitId = scoped(l.fromFragment, l.fromPort);
    std::string entryId = scoped(l.toFragment, l.toPort);
    if (l.chain.empty()) {
      for (auto& e : g.dataflow) {
        if (e.from == entryId) e.from = exitId;
        if (e.to == entryId) e.to = exitId;
      }
      for (auto& r : g.relatedness) {
        if (r.first == entryId) r.first = exitId;
        if (r.second == entryId) r.second = exitId;
      }
      g.data.erase(entryId);
      provenance.erase(entryId);
      continue;
    }
    std::string upstream = exitId;
    const DataNode& exitNode = g.data.at(exitId);
    for (size_t k = 0; k < l.chain.size(); ++k) {
      const Converter& conv = l.chain[k];
      std::string cid = "conv" + std::to_string(convSeq++);
      ActivityNode act;
      act.id = cid;
      act.label = normalize_token(conv.id);
      g.activities[cid] = act;
      provenance[cid] = "converter:" + conv.id;
      g.dataflow.push_back({upstream, cid});
      if (k + 1 == l.chain.size()) {
        g.dataflow.push_back({cid, entryId});
      } else {
        DataNode mid;
        mid.id = cid + ".out";
        mid.name = exitNode.name;
        mid.format = normalize_token(conv.toFormat);
        mid.semantics = exitNode.semantics;
        g.data[mid.id] = mid;
        provenance[mid.id] = "converter:" + conv.id;
        g.dataflow.push_back({cid, mid.id});
        upstream = mid.id;
      }
    }
  }
  g.canonicalize();

  auto report = validate_graph(g, vocab);
  if (!report.empty())
    throw Error(ErrorCode::ValidationError, "materialized graph invalid",
                report);

  GraphDescription desc;
  desc.label = normalize_token(label);
  desc.stack = auto_summarize(g, vocab, services, params, maxLayers);
  desc.provenance = std::move(provenance);
  return desc;
}

}  // namespace stratos
