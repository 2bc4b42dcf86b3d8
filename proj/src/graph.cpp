#include "stratos/graph.hpp"

#include <algorithm>
#include <deque>

namespace stratos {

bool ServiceGraph::has_dataflow_edge(const std::string& from,
                                     const std::string& to) const {
  return std::find(dataflow.begin(), dataflow.end(), DataflowEdge{from, to}) !=
         dataflow.end();
}

bool ServiceGraph::has_relatedness_edge(const std::string& a,
                                        const std::string& b) const {
  auto p = std::minmax(a, b);
  return std::find(relatedness.begin(), relatedness.end(),
                   std::make_pair(p.first, p.second)) != relatedness.end();
}

std::set<std::string> ServiceGraph::dataflow_neighbors(
    const std::string& id) const {
  std::set<std::string> out;
  for (const auto& e : dataflow) {
    if (e.from == id) out.insert(e.to);
    if (e.to == id) out.insert(e.from);
  }
  return out;
}

std::set<std::string> ServiceGraph::producers_of(
    const std::string& dataId) const {
  std::set<std::string> out;
  for (const auto& e : dataflow)
    if (e.to == dataId) out.insert(e.from);
  return out;
}

std::set<std::string> ServiceGraph::consumers_of(
    const std::string& dataId) const {
  std::set<std::string> out;
  for (const auto& e : dataflow)
    if (e.from == dataId) out.insert(e.to);
  return out;
}

void ServiceGraph::canonicalize() {
  std::sort(dataflow.begin(), dataflow.end());
  dataflow.erase(std::unique(dataflow.begin(), dataflow.end()),
                 dataflow.end());
  for (auto& r : relatedness)
    if (r.second < r.first) std::swap(r.first, r.second);
  std::sort(relatedness.begin(), relatedness.end());
  relatedness.erase(std::unique(relatedness.begin(), relatedness.end()),
                    relatedness.end());
  for (auto& [id, d] : data) std::sort(d.semantics.begin(), d.semantics.end());
}

std::vector<PortDescriptor> ports(const ServiceGraph& g) {
  std::vector<PortDescriptor> out;
  for (const auto& [id, d] : g.data) {
    bool produced = !g.producers_of(id).empty();
    bool consumed = !g.consumers_of(id).empty();
    if (produced && consumed) continue;  // interior
    PortDescriptor p;
    p.dataNodeId = id;
    p.direction = produced ? PortDescriptor::Out : PortDescriptor::In;
    p.format = d.format;
    p.semantics = d.semantics;
    out.push_back(std::move(p));
  }
  return out;
}

ValidationReport validate_graph(const ServiceGraph& g,
                                const ConceptVocabulary& vocab) {
  ValidationReport report;
  auto flag = [&](const std::string& code, const std::string& subject,
                  const std::string& detail) {
    report.push_back({code, subject, detail});
  };

  for (const auto& e : g.dataflow) {
    if (!g.has_node(e.from) || !g.has_node(e.to)) {
      flag("DANGLING_EDGE", e.from + "->" + e.to, "edge endpoint missing");
      continue;
    }
    bool fromData = g.is_data(e.from);
    bool toData = g.is_data(e.to);
    if (fromData == toData)
      flag("BIPARTITE", e.from + "->" + e.to,
           "dataflow edge must join a data node and an activity node");
  }
  for (const auto& [a, b] : g.relatedness) {
    if (!g.is_data(a) || !g.is_data(b))
      flag("RELATEDNESS_KIND", a + "--" + b,
           "relatedness edges join data nodes only");
  }

  // Dataflow acyclicity via Kahn's algorithm.
  std::map<std::string, int> indeg;
  for (const auto& [id, d] : g.data) indeg[id] = 0;
  for (const auto& [id, a] : g.activities) indeg[id] = 0;
  for (const auto& e : g.dataflow)
    if (g.has_node(e.to)) ++indeg[e.to];
  std::deque<std::string> ready;
  for (const auto& [id, deg] : indeg)
    if (deg == 0) ready.push_back(id);
  size_t visited = 0;
  while (!ready.empty()) {
    std::string cur = ready.front();
    ready.pop_front();
    ++visited;
    for (const auto& e : g.dataflow)
      if (e.from == cur && g.has_node(e.to) && --indeg[e.to] == 0)
        ready.push_back(e.to);
  }
  if (visited < indeg.size())
    flag("ACYCLIC", "", "dataflow subgraph contains a cycle");

  for (const auto& [id, act] : g.activities) {
    if (g.dataflow_neighbors(id).empty())
      flag("ISOLATED_ACTIVITY", id, "activity has no incident dataflow edge");
    if (!vocab.has_label(act.label))
      flag("UNKNOWN_LABEL", id, "label " + act.label + " not in vocabulary");
  }
  for (const auto& [id, d] : g.data) {
    if (!vocab.has_format(d.format) && d.format != kMixedFormat)
      flag("UNKNOWN_FORMAT", id, "format " + d.format + " not in vocabulary");
    for (const auto& s : d.semantics)
      if (!vocab.has_label(s))
        flag("UNKNOWN_LABEL", id, "semantics label " + s + " not in vocabulary");
    if (d.semantics.empty() && d.annotation.empty())
      flag("EMPTY_SEMANTICS", id,
           "data node needs semantics labels or a free-text annotation");
  }
  return report;
}

namespace {

bool connected_in(const ServiceGraph& g, const std::set<std::string>& nodes) {
  if (nodes.size() <= 1) return true;
  std::set<std::string> seen;
  std::deque<std::string> frontier{*nodes.begin()};
  seen.insert(*nodes.begin());
  auto visit = [&](const std::string& n) {
    if (!nodes.count(n) || seen.count(n)) return;
    seen.insert(n);
    frontier.push_back(n);
  };
  while (!frontier.empty()) {
    std::string cur = frontier.front();
    frontier.pop_front();
    for (const auto& n : g.dataflow_neighbors(cur)) {
      visit(n);
      // Two activities grouped under one parent stay connected through a
      // shared data node even when that node maps elsewhere.
      if (g.is_activity(cur) && g.is_data(n))
        for (const auto& other : g.dataflow_neighbors(n)) visit(other);
    }
  }
  return seen.size() == nodes.size();
}

}  // namespace

ValidationReport validate_stack(const LayerStack& stack) {
  ValidationReport report;
  auto flag = [&](const std::string& code, const std::string& subject,
                  const std::string& detail) {
    report.push_back({code, subject, detail});
  };

  if (stack.layers.empty()) {
    flag("EMPTY_STACK", "", "a layer stack needs at least one layer");
    return report;
  }
  if (stack.parentMaps.size() + 1 != stack.layers.size()) {
    flag("PARENT_MAP_COUNT", "",
         "expected one parent map per adjacent layer pair");
    return report;
  }

  for (size_t i = 1; i < stack.layers.size(); ++i) {
    const ServiceGraph& child = stack.layers[i];
    const ServiceGraph& parent = stack.layers[i - 1];
    const auto& pmap = stack.parentMaps[i - 1];
    std::string where = "layer " + std::to_string(i);

    // Totality and codomain.
    std::set<std::string> covered;
    auto check_total = [&](const std::string& id) {
      auto it = pmap.find(id);
      if (it == pmap.end()) {
        flag("PARENT_TOTAL", id, where + ": node has no parent");
        return;
      }
      if (!parent.has_node(it->second)) {
        flag("PARENT_RANGE", id,
             where + ": parent " + it->second + " not in layer " +
                 std::to_string(i - 1));
        return;
      }
      covered.insert(it->second);
    };
    for (const auto& [id, d] : child.data) check_total(id);
    for (const auto& [id, a] : child.activities) check_total(id);

    for (const auto& [id, d] : parent.data)
      if (!covered.count(id))
        flag("SURJECTIVE", id, where + ": parent data node has no preimage");
    for (const auto& [id, a] : parent.activities)
      if (!covered.count(id))
        flag("SURJECTIVE", id, where + ": parent activity has no preimage");

    // Preimages of parent activities must induce connected child subgraphs.
    std::map<std::string, std::set<std::string>> preimage;
    for (const auto& [cid, pid] : pmap)
      if (child.has_node(cid)) preimage[pid].insert(cid);
    for (const auto& [pid, act] : parent.activities) {
      auto it = preimage.find(pid);
      if (it == preimage.end()) continue;
      if (!connected_in(child, it->second))
        flag("CONNECTED_PREIMAGE", pid,
             where + ": preimage does not induce a connected subgraph");
    }

    // Quotient edge condition for dataflow edges crossing blocks.
    for (const auto& e : child.dataflow) {
      auto fa = pmap.find(e.from);
      auto fb = pmap.find(e.to);
      if (fa == pmap.end() || fb == pmap.end()) continue;
      if (fa->second == fb->second) continue;
      if (!parent.has_dataflow_edge(fa->second, fb->second))
        flag("QUOTIENT_EDGE", e.from + "->" + e.to,
             where + ": parents " + fa->second + "->" + fb->second +
                 " are not adjacent");
    }
  }
  return report;
}

}  // namespace stratos
