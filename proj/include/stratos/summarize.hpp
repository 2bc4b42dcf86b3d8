#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "stratos/graph.hpp"
#include "stratos/match.hpp"
#include "stratos/vocabulary.hpp"

namespace stratos {

/// Node partition of one layer. Blocks must be disjoint and cover every
/// activity node; data nodes are optional members. Unassigned interior data
/// nodes whose dataflow neighbors all lie in one block are merged into it.
struct Partition {
  struct Block {
    std::set<std::string> members;
    std::optional<std::string> label;  // concept label for the merged node
  };
  std::vector<Block> blocks;
};

struct QuotientResult {
  ServiceGraph parent;
  std::map<std::string, std::string> parentMap;  // child node -> parent node
};

/// Collapses each block into a single parent node: a composite activity for
/// multi-activity blocks, a merged data node for data-only blocks. Merged
/// data nodes carry the union of member semantics and the unanimous member
/// format, else the MIXED sentinel. The composite label is the block label
/// if given, else the Sigma label of a registered description isomorphic to
/// the block's subgraph, else a synthesized composite token.
QuotientResult quotient(
    const ServiceGraph& g, const Partition& p, const ConceptVocabulary& vocab,
    const std::map<std::string, GraphDescription>& descriptions = {});

/// Greedy concept-driven summarization: repeatedly collapses the largest
/// proper subgraph exactly matching a registered description (ties: most
/// nodes, then lexicographically smallest Sigma label) until nothing matches
/// or maxLayers is reached. Deterministic; the result passes validate_stack.
LayerStack auto_summarize(const ServiceGraph& g, const ConceptVocabulary& vocab,
                          const std::map<std::string, GraphDescription>& descriptions,
                          const MatchParams& params, int maxLayers);

}  // namespace stratos
