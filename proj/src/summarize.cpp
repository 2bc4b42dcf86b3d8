#include "stratos/summarize.hpp"

#include <algorithm>
#include <deque>
#include <tuple>

namespace stratos {

namespace {

/// Induced subgraph on a node set, keeping edges with both endpoints inside.
ServiceGraph induced(const ServiceGraph& g, const std::set<std::string>& nodes) {
  ServiceGraph out;
  for (const auto& n : nodes) {
    if (g.is_data(n)) out.data[n] = g.data.at(n);
    else if (g.is_activity(n)) out.activities[n] = g.activities.at(n);
  }
  for (const auto& e : g.dataflow)
    if (nodes.count(e.from) && nodes.count(e.to)) out.dataflow.push_back(e);
  for (const auto& r : g.relatedness)
    if (nodes.count(r.first) && nodes.count(r.second))
      out.relatedness.push_back(r);
  out.canonicalize();
  return out;
}

bool activities_connected(const ServiceGraph& g,
                          const std::set<std::string>& acts) {
  if (acts.size() <= 1) return true;
  // Activities are adjacent when they share a data node, whether or not the
  // data node belongs to the block.
  std::set<std::string> seen{*acts.begin()};
  std::deque<std::string> frontier{*acts.begin()};
  while (!frontier.empty()) {
    std::string cur = frontier.front();
    frontier.pop_front();
    for (const auto& d : g.dataflow_neighbors(cur)) {
      for (const auto& a : g.dataflow_neighbors(d)) {
        if (!acts.count(a) || seen.count(a)) continue;
        seen.insert(a);
        frontier.push_back(a);
      }
    }
  }
  return seen.size() == acts.size();
}

bool interior_data(const ServiceGraph& g, const std::string& id) {
  return !g.producers_of(id).empty() && !g.consumers_of(id).empty();
}

/// Sigma label of a registered description isomorphic to the block's
/// neighborhood subgraph (block nodes plus adjacent data), if any.
std::optional<std::string> registered_label(
    const ServiceGraph& g, const std::set<std::string>& block,
    const ConceptVocabulary& vocab,
    const std::map<std::string, GraphDescription>& descriptions) {
  std::set<std::string> scope = block;
  for (const auto& n : block)
    if (g.is_activity(n))
      for (const auto& d : g.dataflow_neighbors(n)) scope.insert(d);
  ServiceGraph sub = induced(g, scope);

  MatchParams exact;
  exact.exactMode = true;
  std::optional<std::string> best;
  for (const auto& [id, desc] : descriptions) {
    auto label = vocab.sigma(id);
    if (!label) continue;
    const ServiceGraph& base = desc.base();
    if (base.activities.size() != sub.activities.size() ||
        base.data.size() != sub.data.size() ||
        base.dataflow.size() != sub.dataflow.size())
      continue;
    if (match_layer(base, sub, vocab, exact).empty()) continue;
    if (!best || *label < *best) best = label;
  }
  return best;
}

std::string synthesized_label(const ServiceGraph& g,
                              const std::set<std::string>& block) {
  std::vector<std::string> labels;
  for (const auto& n : block)
    if (g.is_activity(n)) labels.push_back(g.activities.at(n).label);
  std::sort(labels.begin(), labels.end());
  std::string out = "composite:";
  for (size_t i = 0; i < labels.size(); ++i) {
    if (i) out += "+";
    out += labels[i];
  }
  return out;
}

}  // namespace

QuotientResult quotient(
    const ServiceGraph& g, const Partition& p, const ConceptVocabulary& vocab,
    const std::map<std::string, GraphDescription>& descriptions) {
  // Validate the partition.
  std::map<std::string, int> blockOf;
  for (size_t b = 0; b < p.blocks.size(); ++b) {
    for (const auto& n : p.blocks[b].members) {
      if (!g.has_node(n))
        throw Error(ErrorCode::InvalidPartition, "unknown node " + n);
      if (blockOf.count(n))
        throw Error(ErrorCode::InvalidPartition, "node " + n + " in two blocks");
      blockOf[n] = static_cast<int>(b);
    }
    if (p.blocks[b].label && !vocab.has_label(*p.blocks[b].label))
      throw Error(ErrorCode::UnknownLabel, *p.blocks[b].label);
  }
  for (const auto& [id, a] : g.activities)
    if (!blockOf.count(id))
      throw Error(ErrorCode::InvalidPartition, "activity " + id + " uncovered");

  std::vector<std::set<std::string>> members;
  std::vector<std::optional<std::string>> labels;
  for (const auto& b : p.blocks) {
    members.push_back(b.members);
    labels.push_back(b.label);
  }

  // Default grouping: pull an unassigned interior data node into a block when
  // all of its dataflow neighbors live there.
  for (const auto& [id, d] : g.data) {
    if (blockOf.count(id) || !interior_data(g, id)) continue;
    auto nbrs = g.dataflow_neighbors(id);
    int target = blockOf.at(*nbrs.begin());
    bool sameBlock = true;
    for (const auto& n : nbrs) sameBlock &= blockOf.at(n) == target;
    if (sameBlock && members[target].size() >= 1) {
      members[target].insert(id);
      blockOf[id] = target;
    }
  }

  // Per-block checks.
  for (size_t b = 0; b < members.size(); ++b) {
    std::set<std::string> acts, datas;
    for (const auto& n : members[b])
      (g.is_activity(n) ? acts : datas).insert(n);
    if (acts.size() >= 2 && !activities_connected(g, acts))
      throw Error(ErrorCode::InvalidPartition,
                  "block " + std::to_string(b) + " is disconnected");
    if (!acts.empty()) {
      for (const auto& d : datas) {
        for (const auto& n : g.dataflow_neighbors(d))
          if (!members[b].count(n))
            throw Error(ErrorCode::InvalidPartition,
                        "data node " + d + " has a neighbor outside its block");
      }
    }
  }

  // Remaining data nodes become singleton blocks.
  for (const auto& [id, d] : g.data) {
    if (blockOf.count(id)) continue;
    blockOf[id] = static_cast<int>(members.size());
    members.push_back({id});
    labels.push_back(std::nullopt);
  }

  QuotientResult out;
  std::map<int, std::string> blockNode;
  for (size_t b = 0; b < members.size(); ++b) {
    const auto& m = members[b];
    std::string pid = *m.begin();  // smallest member id, deterministic
    blockNode[static_cast<int>(b)] = pid;
    std::set<std::string> acts, datas;
    for (const auto& n : m) (g.is_activity(n) ? acts : datas).insert(n);

    if (!acts.empty()) {
      ActivityNode node;
      node.id = pid;
      if (acts.size() == 1 && datas.empty()) {
        node = g.activities.at(*acts.begin());
        node.id = pid;
        if (labels[b]) node.label = normalize_token(*labels[b]);
      } else {
        node.composite = true;
        if (labels[b]) {
          node.label = normalize_token(*labels[b]);
        } else if (auto reg = registered_label(g, m, vocab, descriptions)) {
          node.label = *reg;
        } else {
          node.label = synthesized_label(g, m);
        }
      }
      out.parent.activities[node.id] = node;
    } else {
      DataNode node;
      node.id = pid;
      std::set<std::string> semantics;
      std::vector<std::string> names, notes;
      std::optional<std::string> fmt;
      bool unanimous = true;
      for (const auto& n : datas) {
        const DataNode& d = g.data.at(n);
        names.push_back(d.name);
        if (!d.annotation.empty()) notes.push_back(d.annotation);
        semantics.insert(d.semantics.begin(), d.semantics.end());
        if (!fmt) fmt = d.format;
        else if (*fmt != d.format) unanimous = false;
      }
      node.format = unanimous && fmt ? *fmt : kMixedFormat;
      node.semantics.assign(semantics.begin(), semantics.end());
      std::sort(names.begin(), names.end());
      for (size_t i = 0; i < names.size(); ++i)
        node.name += (i ? "+" : "") + names[i];
      for (size_t i = 0; i < notes.size(); ++i)
        node.annotation += (i ? "; " : "") + notes[i];
      out.parent.data[node.id] = node;
    }
    for (const auto& n : m) out.parentMap[n] = pid;
  }

  for (const auto& e : g.dataflow) {
    const std::string& pa = out.parentMap.at(e.from);
    const std::string& pb = out.parentMap.at(e.to);
    if (pa != pb) out.parent.dataflow.push_back({pa, pb});
  }
  for (const auto& [a, b] : g.relatedness) {
    const std::string& pa = out.parentMap.at(a);
    const std::string& pb = out.parentMap.at(b);
    // Relatedness survives only between nodes that stayed data nodes.
    if (pa != pb && out.parent.is_data(pa) && out.parent.is_data(pb))
      out.parent.relatedness.emplace_back(pa, pb);
  }
  out.parent.canonicalize();
  return out;
}

LayerStack auto_summarize(
    const ServiceGraph& g, const ConceptVocabulary& vocab,
    const std::map<std::string, GraphDescription>& descriptions,
    const MatchParams& params, int maxLayers) {
  if (maxLayers < 1)
    throw Error(ErrorCode::SchemaError, "maxLayers must be >= 1");
  (void)params;  // thresholds are irrelevant in exact mode

  LayerStack stack;
  stack.layers.push_back(g);
  stack.layers.back().canonicalize();

  MatchParams exact;
  exact.exactMode = true;

  while (static_cast<int>(stack.layers.size()) < maxLayers) {
    const ServiceGraph& current = stack.layers.front();
    size_t total = current.data.size() + current.activities.size();

    // Best collapse: most matched nodes, then smallest Sigma label, then
    // smallest mapping.
    struct Pick {
      size_t size = 0;
      std::string label;
      Mapping mapping;
      std::string descId;
    };
    std::optional<Pick> best;
    for (const auto& [id, desc] : descriptions) {
      auto label = vocab.sigma(id);
      if (!label) continue;
      for (const auto& m : match_layer(desc.base(), current, vocab, exact)) {
        std::set<std::string> image;
        for (const auto& [qn, sn] : m.pairs) image.insert(sn);
        if (image.size() >= total) continue;  // proper subgraph only
        // The collapsed block: matched activities plus interior data.
        std::set<std::string> block;
        for (const auto& [qn, sn] : m.pairs)
          if (current.is_activity(sn)) block.insert(sn);
        if (block.empty()) continue;
        size_t absorbed = 0;
        for (const auto& [qn, sn] : m.pairs) {
          if (!current.is_data(sn) || !interior_data(current, sn)) continue;
          auto nbrs = current.dataflow_neighbors(sn);
          bool inside = true;
          for (const auto& n : nbrs) inside &= block.count(n) > 0;
          if (inside) ++absorbed;
        }
        if (block.size() + absorbed < 2) continue;  // no shrink, no layer
        Pick cand{image.size(), *label, m, id};
        auto better = [](const Pick& a, const Pick& b) {
          if (a.size != b.size) return a.size > b.size;
          if (a.label != b.label) return a.label < b.label;
          return a.mapping < b.mapping;
        };
        if (!best || better(cand, *best)) best = cand;
      }
    }
    if (!best) break;

    Partition part;
    Partition::Block collapse;
    collapse.label = best->label;
    for (const auto& [qn, sn] : best->mapping.pairs)
      if (current.is_activity(sn)) collapse.members.insert(sn);
    part.blocks.push_back(collapse);
    for (const auto& [id, a] : current.activities)
      if (!collapse.members.count(id)) part.blocks.push_back({{id}, {}});

    QuotientResult q = quotient(current, part, vocab, descriptions);
    size_t newTotal = q.parent.data.size() + q.parent.activities.size();
    if (newTotal >= total) break;  // guard: a layer must shrink
    stack.layers.insert(stack.layers.begin(), std::move(q.parent));
    stack.parentMaps.insert(stack.parentMaps.begin(), std::move(q.parentMap));
  }
  return stack;
}

}  // namespace stratos
