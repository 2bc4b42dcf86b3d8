#pragma once

#include <map>
#include <string>
#include <vector>

#include "stratos/graph.hpp"
#include "stratos/vocabulary.hpp"

namespace stratos {

struct MatchParams {
  double labelThreshold = 0.5;   // seed admission
  double acceptThreshold = 0.6;  // ranking cutoff
  double wLabel = 0.5;
  double wTopo = 0.3;
  double wFormat = 0.2;
  double layerPenalty = 0.15;  // per unit layer distance
  int maxConverterLen = 3;
  double semanticsThreshold = 0.5;  // stitcher glue admission
  bool exactMode = false;

  /// Throws SchemaError when weights or thresholds are out of range.
  void validate() const;
};

/// Partial injective, kind-preserving map from query node ids to service
/// node ids with at least one activity pair.
struct Mapping {
  std::map<std::string, std::string> pairs;

  bool operator==(const Mapping&) const = default;
  bool operator<(const Mapping& o) const { return pairs < o.pairs; }
};

struct MatchResult {
  std::string serviceId;
  int queryLayer = 0;
  int serviceLayer = 0;
  Mapping mapping;
  double coverage = 0.0;  // fraction of query activities mapped
  double score = 0.0;
  double penalizedScore = 0.0;
};

/// Node-pair similarity: label similarity for activities, semantics
/// similarity for data nodes. Kind mismatch scores 0.
double node_similarity(const ServiceGraph& q, const std::string& qid,
                       const ServiceGraph& s, const std::string& sid,
                       const ConceptVocabulary& vocab);

/// Matches a query layer against a service layer.
///
/// Approximate mode grows maximal mappings from activity seed pairs with
/// label similarity >= labelThreshold, greedily absorbing compatible seeds
/// and adjacency-consistent neighbor pairs. Exact mode enumerates every
/// full embedding of the query (all nodes mapped, all edges preserved,
/// similarity-1.0 node pairs, equal formats). Output order is canonical.
std::vector<Mapping> match_layer(const ServiceGraph& q, const ServiceGraph& s,
                                 const ConceptVocabulary& vocab,
                                 const MatchParams& params);

/// Scores a mapping:
///   wLabel  * mean node-pair similarity
/// + wTopo   * preserved query edges / total query edges
///             (relatedness edges weigh half a dataflow edge)
/// + wFormat * mean data-pair format score (EXACT=1, CONVERTIBLE(k)=0.5/k).
/// Edge-free and data-pair-free components count as 1.0.
double score_mapping(const Mapping& m, const ServiceGraph& q,
                     const ServiceGraph& s, const ConceptVocabulary& vocab,
                     const MatchParams& params,
                     const std::vector<Converter>& catalog);

/// Per-component decomposition of score_mapping, for diagnostics.
struct ScoreBreakdown {
  double labelComponent = 0.0;
  double topoComponent = 0.0;
  double formatComponent = 0.0;
  double total = 0.0;
};

ScoreBreakdown score_breakdown(const Mapping& m, const ServiceGraph& q,
                               const ServiceGraph& s,
                               const ConceptVocabulary& vocab,
                               const MatchParams& params,
                               const std::vector<Converter>& catalog);

/// Runs match_layer/score_mapping over every layer pair (i, j), applying
/// penalized score = score * max(0, 1 - layerPenalty*|i-j|). All results are
/// retained and sorted by penalized score desc, coverage desc, then
/// (serviceId, i, j) lexicographic.
std::vector<MatchResult> stratified_match(const LayerStack& qStack,
                                          const LayerStack& sStack,
                                          const std::string& serviceId,
                                          const ConceptVocabulary& vocab,
                                          const MatchParams& params,
                                          const std::vector<Converter>& catalog);

/// Stratified matching against every registered description; keeps the best
/// result per service with penalized score >= acceptThreshold and returns the
/// top K in the global order. Results are identical regardless of whether
/// candidate services are evaluated serially or concurrently.
std::vector<MatchResult> rank_services(
    const LayerStack& qStack,
    const std::map<std::string, GraphDescription>& services,
    const ConceptVocabulary& vocab, const MatchParams& params,
    const std::vector<Converter>& catalog, int topK, bool parallel = false);

/// Canonical result order shared by stratified_match and rank_services.
bool result_order(const MatchResult& a, const MatchResult& b);

}  // namespace stratos
