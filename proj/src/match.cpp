#include "stratos/match.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <set>
#include <tuple>

namespace stratos {

void MatchParams::validate() const {
  auto in01 = [](double v) { return v >= 0.0 && v <= 1.0; };
  if (!in01(labelThreshold) || !in01(acceptThreshold) ||
      !in01(semanticsThreshold))
    throw Error(ErrorCode::SchemaError, "thresholds must lie in [0,1]");
  if (wLabel < 0 || wTopo < 0 || wFormat < 0)
    throw Error(ErrorCode::SchemaError, "weights must be nonnegative");
  if (std::abs(wLabel + wTopo + wFormat - 1.0) > 1e-9)
    throw Error(ErrorCode::SchemaError, "weights must sum to 1");
  if (layerPenalty < 0)
    throw Error(ErrorCode::SchemaError, "layerPenalty must be nonnegative");
  if (maxConverterLen < 0)
    throw Error(ErrorCode::SchemaError, "maxConverterLen must be >= 0");
}

double node_similarity(const ServiceGraph& q, const std::string& qid,
                       const ServiceGraph& s, const std::string& sid,
                       const ConceptVocabulary& vocab) {
  if (q.is_activity(qid) && s.is_activity(sid))
    return label_similarity(q.activities.at(qid).label,
                            s.activities.at(sid).label, vocab);
  if (q.is_data(qid) && s.is_data(sid)) {
    const DataNode& a = q.data.at(qid);
    const DataNode& b = s.data.at(sid);
    return semantics_similarity(a.semantics, a.annotation, b.semantics,
                                b.annotation, vocab);
  }
  return 0.0;
}

namespace {

struct Candidate {
  double sim;
  std::string q, s;
};

bool candidate_order(const Candidate& a, const Candidate& b) {
  if (a.sim != b.sim) return a.sim > b.sim;
  return std::tie(a.q, a.s) < std::tie(b.q, b.s);
}

bool exact_node_compatible(const ServiceGraph& q, const std::string& qid,
                           const ServiceGraph& s, const std::string& sid,
                           const ConceptVocabulary& vocab) {
  if (q.is_data(qid) != s.is_data(sid)) return false;
  if (q.is_data(qid) && q.data.at(qid).format != s.data.at(sid).format)
    return false;
  return node_similarity(q, qid, s, sid, vocab) >= 1.0;
}

/// All query edges incident to qid whose counterpart must exist once both
/// endpoints are mapped.
bool edges_consistent(const ServiceGraph& q, const ServiceGraph& s,
                      const std::map<std::string, std::string>& assigned,
                      const std::string& qid, const std::string& sid) {
  for (const auto& e : q.dataflow) {
    if (e.from == qid) {
      auto it = assigned.find(e.to);
      if (it != assigned.end() && !s.has_dataflow_edge(sid, it->second))
        return false;
    } else if (e.to == qid) {
      auto it = assigned.find(e.from);
      if (it != assigned.end() && !s.has_dataflow_edge(it->second, sid))
        return false;
    }
  }
  for (const auto& [a, b] : q.relatedness) {
    const std::string* other = nullptr;
    if (a == qid) other = &b;
    else if (b == qid) other = &a;
    else continue;
    auto it = assigned.find(*other);
    if (it != assigned.end() && !s.has_relatedness_edge(sid, it->second))
      return false;
  }
  return true;
}

void enumerate_embeddings(const ServiceGraph& q, const ServiceGraph& s,
                          const ConceptVocabulary& vocab,
                          const std::vector<std::string>& order, size_t depth,
                          std::map<std::string, std::string>& assigned,
                          std::set<std::string>& used,
                          std::vector<Mapping>& out) {
  if (depth == order.size()) {
    out.push_back(Mapping{assigned});
    return;
  }
  const std::string& qid = order[depth];
  auto try_targets = [&](const auto& nodes) {
    for (const auto& [sid, node] : nodes) {
      if (used.count(sid)) continue;
      if (!exact_node_compatible(q, qid, s, sid, vocab)) continue;
      if (!edges_consistent(q, s, assigned, qid, sid)) continue;
      assigned[qid] = sid;
      used.insert(sid);
      enumerate_embeddings(q, s, vocab, order, depth + 1, assigned, used, out);
      used.erase(sid);
      assigned.erase(qid);
    }
  };
  if (q.is_activity(qid)) try_targets(s.activities);
  else try_targets(s.data);
}

std::vector<Mapping> match_exact(const ServiceGraph& q, const ServiceGraph& s,
                                 const ConceptVocabulary& vocab) {
  std::vector<std::string> order;
  for (const auto& [id, a] : q.activities) order.push_back(id);
  for (const auto& [id, d] : q.data) order.push_back(id);
  if (q.activities.empty()) return {};
  std::vector<Mapping> out;
  std::map<std::string, std::string> assigned;
  std::set<std::string> used;
  enumerate_embeddings(q, s, vocab, order, 0, assigned, used, out);
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<Mapping> match_approx(const ServiceGraph& q, const ServiceGraph& s,
                                  const ConceptVocabulary& vocab,
                                  const MatchParams& params) {
  std::vector<Candidate> seeds;
  for (const auto& [qid, qa] : q.activities)
    for (const auto& [sid, sa] : s.activities) {
      double sim = node_similarity(q, qid, s, sid, vocab);
      if (sim >= params.labelThreshold) seeds.push_back({sim, qid, sid});
    }
  std::sort(seeds.begin(), seeds.end(), candidate_order);
  if (seeds.empty()) return {};

  auto conflicts = [](const std::map<std::string, std::string>& m,
                      const std::string& qid, const std::string& sid) {
    auto it = m.find(qid);
    if (it != m.end()) return it->second != sid;
    for (const auto& [mq, ms] : m)
      if (ms == sid) return true;
    return false;
  };

  std::set<Mapping> emitted;
  std::vector<Mapping> out;
  for (const auto& seed : seeds) {
    std::map<std::string, std::string> m{{seed.q, seed.s}};
    bool grew = true;
    while (grew) {
      grew = false;
      std::vector<Candidate> cands;
      // Other seeds are always admissible: partial matches need not be
      // connected across concepts, and missing edges are the topology
      // component's business.
      for (const auto& other : seeds) {
        if (conflicts(m, other.q, other.s) || m.count(other.q)) continue;
        cands.push_back(other);
      }
      // Neighbor expansion along shared edges.
      for (const auto& [mq, ms] : m) {
        for (const auto& qn : q.dataflow_neighbors(mq)) {
          if (m.count(qn)) continue;
          for (const auto& sn : s.dataflow_neighbors(ms)) {
            if (q.is_data(qn) != s.is_data(sn)) continue;
            if (conflicts(m, qn, sn)) continue;
            bool fwd = q.has_dataflow_edge(mq, qn) && s.has_dataflow_edge(ms, sn);
            bool bwd = q.has_dataflow_edge(qn, mq) && s.has_dataflow_edge(sn, ms);
            if (!fwd && !bwd) continue;
            double sim = node_similarity(q, qn, s, sn, vocab);
            if (sim < params.labelThreshold) continue;
            if (!edges_consistent(q, s, m, qn, sn)) continue;
            cands.push_back({sim, qn, sn});
          }
        }
        if (!q.is_data(mq)) continue;
        for (const auto& [ra, rb] : q.relatedness) {
          const std::string* qn = nullptr;
          if (ra == mq) qn = &rb;
          else if (rb == mq) qn = &ra;
          else continue;
          if (m.count(*qn)) continue;
          for (const auto& [rsa, rsb] : s.relatedness) {
            const std::string* sn = nullptr;
            if (rsa == ms) sn = &rsb;
            else if (rsb == ms) sn = &rsa;
            else continue;
            if (conflicts(m, *qn, *sn)) continue;
            double sim = node_similarity(q, *qn, s, *sn, vocab);
            if (sim < params.labelThreshold) continue;
            if (!edges_consistent(q, s, m, *qn, *sn)) continue;
            cands.push_back({sim, *qn, *sn});
          }
        }
      }
      if (cands.empty()) break;
      std::sort(cands.begin(), cands.end(), candidate_order);
      m[cands.front().q] = cands.front().s;
      grew = true;
    }
    Mapping mapping{m};
    if (emitted.insert(mapping).second) out.push_back(std::move(mapping));
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

std::vector<Mapping> match_layer(const ServiceGraph& q, const ServiceGraph& s,
                                 const ConceptVocabulary& vocab,
                                 const MatchParams& params) {
  if (params.exactMode) return match_exact(q, s, vocab);
  return match_approx(q, s, vocab, params);
}

ScoreBreakdown score_breakdown(const Mapping& m, const ServiceGraph& q,
                               const ServiceGraph& s,
                               const ConceptVocabulary& vocab,
                               const MatchParams& params,
                               const std::vector<Converter>& catalog) {
  if (m.pairs.empty())
    throw Error(ErrorCode::InvalidMapping, "empty mapping");
  bool hasActivityPair = false;
  std::set<std::string> images;
  for (const auto& [qid, sid] : m.pairs) {
    if (!q.has_node(qid) || !s.has_node(sid))
      throw Error(ErrorCode::InvalidMapping, qid + "->" + sid);
    if (q.is_data(qid) != s.is_data(sid))
      throw Error(ErrorCode::InvalidMapping,
                  "kind mismatch on " + qid + "->" + sid);
    if (!images.insert(sid).second)
      throw Error(ErrorCode::InvalidMapping, "non-injective image " + sid);
    hasActivityPair |= q.is_activity(qid);
  }
  if (!hasActivityPair)
    throw Error(ErrorCode::InvalidMapping, "mapping has no activity pair");

  double simSum = 0.0;
  double fmtSum = 0.0;
  int dataPairs = 0;
  for (const auto& [qid, sid] : m.pairs) {
    simSum += node_similarity(q, qid, s, sid, vocab);
    if (!q.is_data(qid)) continue;
    ++dataPairs;
    const std::string& qf = q.data.at(qid).format;
    const std::string& sf = s.data.at(sid).format;
    // Direction-agnostic: a converter in either direction makes the pair
    // usable at a glue point.
    auto fc1 = format_compatibility(qf, sf, catalog, params.maxConverterLen);
    auto fc2 = format_compatibility(sf, qf, catalog, params.maxConverterLen);
    double best = 0.0;
    for (const auto& fc : {fc1, fc2}) {
      if (fc.kind == FormatCompatibility::Exact) best = 1.0;
      else if (fc.kind == FormatCompatibility::Convertible)
        best = std::max(best, 0.5 / fc.chainLength);
    }
    fmtSum += best;
  }
  double labelComponent = simSum / static_cast<double>(m.pairs.size());
  double fmtComponent = dataPairs == 0 ? 1.0 : fmtSum / dataPairs;

  double totalWeight = 0.0, preservedWeight = 0.0;
  for (const auto& e : q.dataflow) {
    totalWeight += 1.0;
    auto a = m.pairs.find(e.from);
    auto b = m.pairs.find(e.to);
    if (a != m.pairs.end() && b != m.pairs.end() &&
        s.has_dataflow_edge(a->second, b->second))
      preservedWeight += 1.0;
  }
  for (const auto& [ra, rb] : q.relatedness) {
    totalWeight += 0.5;
    auto a = m.pairs.find(ra);
    auto b = m.pairs.find(rb);
    if (a != m.pairs.end() && b != m.pairs.end() &&
        s.has_relatedness_edge(a->second, b->second))
      preservedWeight += 0.5;
  }
  double topoComponent = totalWeight == 0.0 ? 1.0 : preservedWeight / totalWeight;

  ScoreBreakdown bd;
  bd.labelComponent = labelComponent;
  bd.topoComponent = topoComponent;
  bd.formatComponent = fmtComponent;
  bd.total = params.wLabel * labelComponent + params.wTopo * topoComponent +
             params.wFormat * fmtComponent;
  return bd;
}

double score_mapping(const Mapping& m, const ServiceGraph& q,
                     const ServiceGraph& s, const ConceptVocabulary& vocab,
                     const MatchParams& params,
                     const std::vector<Converter>& catalog) {
  return score_breakdown(m, q, s, vocab, params, catalog).total;
}

bool result_order(const MatchResult& a, const MatchResult& b) {
  if (a.penalizedScore != b.penalizedScore)
    return a.penalizedScore > b.penalizedScore;
  if (a.coverage != b.coverage) return a.coverage > b.coverage;
  return std::tie(a.serviceId, a.queryLayer, a.serviceLayer, a.mapping.pairs) <
         std::tie(b.serviceId, b.queryLayer, b.serviceLayer, b.mapping.pairs);
}

std::vector<MatchResult> stratified_match(
    const LayerStack& qStack, const LayerStack& sStack,
    const std::string& serviceId, const ConceptVocabulary& vocab,
    const MatchParams& params, const std::vector<Converter>& catalog) {
  params.validate();
  std::vector<MatchResult> out;
  for (size_t i = 0; i < qStack.layers.size(); ++i) {
    const ServiceGraph& q = qStack.layers[i];
    size_t qActivities = q.activities.size();
    for (size_t j = 0; j < sStack.layers.size(); ++j) {
      const ServiceGraph& s = sStack.layers[j];
      for (const auto& mapping : match_layer(q, s, vocab, params)) {
        MatchResult r;
        r.serviceId = serviceId;
        r.queryLayer = static_cast<int>(i);
        r.serviceLayer = static_cast<int>(j);
        r.mapping = mapping;
        size_t mappedActivities = 0;
        for (const auto& [qid, sid] : mapping.pairs)
          if (q.is_activity(qid)) ++mappedActivities;
        r.coverage = qActivities == 0
                         ? 0.0
                         : static_cast<double>(mappedActivities) / qActivities;
        r.score = score_mapping(mapping, q, s, vocab, params, catalog);
        double factor =
            std::max(0.0, 1.0 - params.layerPenalty *
                                    std::abs(static_cast<double>(i) -
                                             static_cast<double>(j)));
        r.penalizedScore = r.score * factor;
        out.push_back(std::move(r));
      }
    }
  }
  std::sort(out.begin(), out.end(), result_order);
  return out;
}

std::vector<MatchResult> rank_services(
    const LayerStack& qStack,
    const std::map<std::string, GraphDescription>& services,
    const ConceptVocabulary& vocab, const MatchParams& params,
    const std::vector<Converter>& catalog, int topK, bool parallel) {
  if (topK < 1) throw Error(ErrorCode::SchemaError, "topK must be >= 1");
  if (services.empty())
    throw Error(ErrorCode::EmptyRegistry, "no descriptions registered");

  auto best_of = [&](const GraphDescription& desc)
      -> std::optional<MatchResult> {
    auto results =
        stratified_match(qStack, desc.stack, desc.id, vocab, params, catalog);
    for (const auto& r : results)
      if (r.penalizedScore >= params.acceptThreshold) return r;
    return std::nullopt;
  };

  std::vector<MatchResult> kept;
  if (parallel) {
    std::vector<std::future<std::optional<MatchResult>>> futures;
    for (const auto& [id, desc] : services)
      futures.push_back(std::async(std::launch::async, best_of, std::cref(desc)));
    for (auto& f : futures)
      if (auto r = f.get()) kept.push_back(std::move(*r));
  } else {
    for (const auto& [id, desc] : services)
      if (auto r = best_of(desc)) kept.push_back(std::move(*r));
  }
  // Merge then canonical sort: assembly is order-independent.
  std::sort(kept.begin(), kept.end(), result_order);
  if (static_cast<int>(kept.size()) > topK) kept.resize(topK);
  return kept;
}

}  // namespace stratos
