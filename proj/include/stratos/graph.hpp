#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "stratos/errors.hpp"
#include "stratos/vocabulary.hpp"

namespace stratos {

/// Sentinel format for summarized data nodes whose members disagree.
inline constexpr const char* kMixedFormat = "mixed";

struct DataNode {
  std::string id;
  std::string name;                    // N
  std::string format;                  // F, normalized
  std::vector<std::string> semantics;  // S: concept labels, sorted
  std::string annotation;              // S: optional free text

  bool operator==(const DataNode&) const = default;
};

struct ActivityNode {
  std::string id;
  std::string label;  // concept label, normalized
  bool composite = false;

  bool operator==(const ActivityNode&) const = default;
};

struct DataflowEdge {
  std::string from;
  std::string to;
  auto operator<=>(const DataflowEdge&) const = default;
};

/// One layer of a graph description: activity and data nodes joined by
/// directed dataflow edges (data->activity = input, activity->data = output)
/// plus undirected relatedness edges between data nodes.
struct ServiceGraph {
  std::map<std::string, DataNode> data;
  std::map<std::string, ActivityNode> activities;
  std::vector<DataflowEdge> dataflow;
  std::vector<std::pair<std::string, std::string>> relatedness;

  bool has_node(const std::string& id) const {
    return data.count(id) || activities.count(id);
  }
  bool is_data(const std::string& id) const { return data.count(id) > 0; }
  bool is_activity(const std::string& id) const {
    return activities.count(id) > 0;
  }
  bool has_dataflow_edge(const std::string& from, const std::string& to) const;
  bool has_relatedness_edge(const std::string& a, const std::string& b) const;

  /// Nodes reachable over one dataflow edge, either direction.
  std::set<std::string> dataflow_neighbors(const std::string& id) const;
  std::set<std::string> producers_of(const std::string& dataId) const;
  std::set<std::string> consumers_of(const std::string& dataId) const;

  /// Sorts edge lists and normalizes relatedness pairs to (min, max).
  void canonicalize();

  bool operator==(const ServiceGraph&) const = default;
};

struct PortDescriptor {
  std::string dataNodeId;
  enum Direction { In, Out } direction;
  std::string format;
  std::vector<std::string> semantics;
};

/// Boundary data nodes of a graph: In if no producing activity, Out if no
/// consuming activity. Interior data nodes are not ports.
std::vector<PortDescriptor> ports(const ServiceGraph& g);

/// Ordered layers, index 0 = most abstract. parentMaps[i] maps every node of
/// layer i+1 to a node of layer i.
struct LayerStack {
  std::vector<ServiceGraph> layers;
  std::vector<std::map<std::string, std::string>> parentMaps;

  const ServiceGraph& base() const { return layers.back(); }
  size_t depth() const { return layers.size(); }
};

struct GraphDescription {
  std::string id;  // content hash, assigned at ingest
  std::string label;  // Sigma label
  LayerStack stack;
  std::map<std::string, std::string> provenance;

  const ServiceGraph& base() const { return stack.base(); }
};

/// Checks the ServiceGraph representation rules: bipartite dataflow, acyclic
/// dataflow, relatedness between data nodes only, no isolated activities,
/// and that every label/format is registered in the vocabulary.
/// Violations are report content, not failures.
ValidationReport validate_graph(const ServiceGraph& g,
                                const ConceptVocabulary& vocab);

/// Checks the LayerStack invariants: total surjective parent maps, connected
/// activity preimages, and the quotient edge condition for dataflow edges
/// crossing block boundaries.
ValidationReport validate_stack(const LayerStack& stack);

}  // namespace stratos
