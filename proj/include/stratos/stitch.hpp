#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "stratos/graph.hpp"
#include "stratos/match.hpp"
#include "stratos/summarize.hpp"
#include "stratos/vocabulary.hpp"

namespace stratos {

/// A connected cut of one service layer, with entry/exit data ports and the
/// query activities it accounts for.
struct Fragment {
  std::string serviceId;
  int serviceLayer = 0;
  std::set<std::string> nodeSet;
  std::vector<PortDescriptor> entryPorts;
  std::vector<PortDescriptor> exitPorts;
  std::set<std::string> coveredQueryNodes;  // query activity ids
  Mapping mapping;                          // query node -> service node
};

/// Connection from one fragment's exit port to another's entry port, through
/// a (possibly empty) converter chain. The chain composes exit format to
/// entry format; it is empty iff the formats are equal.
struct GlueLink {
  int fromFragment = 0;
  std::string fromPort;
  int toFragment = 0;
  std::string toPort;
  std::vector<Converter> chain;
};

struct PortRef {
  int fragment = 0;
  std::string port;
  auto operator<=>(const PortRef&) const = default;
};

struct StitchPlan {
  std::vector<Fragment> fragments;
  std::vector<GlueLink> links;
  std::map<std::string, PortRef> inputBinding;   // query IN port -> plan entry
  std::map<std::string, PortRef> outputBinding;  // query OUT port -> plan exit
};

/// Greedy weighted set cover over the query's activity nodes. Results must be
/// in the canonical result order; each pick is cut into a fragment (mapping
/// image plus the mapped activities' data neighborhood). Throws
/// IncompleteCover, carrying the residual activity set, when coverage stalls.
std::vector<Fragment> select_fragments(
    const ServiceGraph& q, const std::vector<MatchResult>& results,
    const std::map<std::string, GraphDescription>& services,
    const ConceptVocabulary& vocab, const MatchParams& params);

/// Glues fragments along the query's dataflow: producer/consumer fragment
/// pairs are linked through the port pair with the highest semantics
/// similarity (>= semanticsThreshold), converter chains bridge format
/// mismatches, query boundary ports are bound, and remaining open entry
/// ports are fed from upstream exits when a compatible one exists.
StitchPlan stitch(const ServiceGraph& q, const std::vector<Fragment>& fragments,
                  const std::vector<Converter>& catalog,
                  const ConceptVocabulary& vocab, const MatchParams& params);

/// End-to-end composition against a registry's contents: stratified matching
/// of every service, fragment selection over the query's base layer, then
/// stitching. Convenience wrapper shared by the CLI and the gateway.
StitchPlan compose(const LayerStack& qStack,
                   const std::map<std::string, GraphDescription>& services,
                   const ConceptVocabulary& vocab,
                   const std::vector<Converter>& catalog,
                   const MatchParams& params);

/// Splices fragment subgraphs and converter activities into a single
/// base-layer graph, summarizes it into a stack, and records per-node source
/// services in the provenance map. Converter ids double as activity labels
/// and must be registered in the vocabulary.
GraphDescription materialize(
    const StitchPlan& plan,
    const std::map<std::string, GraphDescription>& services,
    const ConceptVocabulary& vocab, const MatchParams& params,
    const std::string& label, int maxLayers = 3);

/// Re-checks a plan against the StitchPlan invariants: acyclic fragment/link
/// graph, all query inputs bound, all query outputs produced, and every
/// chain composing format-to-format.
ValidationReport validate_plan(const StitchPlan& plan, const ServiceGraph& q);

}  // namespace stratos
