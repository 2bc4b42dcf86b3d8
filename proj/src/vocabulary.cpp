#include "stratos/vocabulary.hpp"

#include <algorithm>
#include <cctype>
#include <deque>
#include <functional>
#include <limits>
#include <queue>
#include <tuple>

namespace stratos {

std::string normalize_token(const std::string& raw) {
  size_t b = 0, e = raw.size();
  while (b < e && std::isspace(static_cast<unsigned char>(raw[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(raw[e - 1]))) --e;
  std::string out;
  out.reserve(e - b);
  for (size_t i = b; i < e; ++i)
    out.push_back(static_cast<char>(
        std::tolower(static_cast<unsigned char>(raw[i]))));
  return out;
}

std::vector<std::string> tokenize(const std::string& text) {
  std::vector<std::string> tokens;
  std::string cur;
  for (char raw : text) {
    unsigned char c = static_cast<unsigned char>(raw);
    if (std::isalnum(c)) {
      cur.push_back(static_cast<char>(std::tolower(c)));
    } else if (!cur.empty()) {
      tokens.push_back(cur);
      cur.clear();
    }
  }
  if (!cur.empty()) tokens.push_back(cur);
  return tokens;
}

void ConceptVocabulary::add_label(const std::string& id,
                                  const std::string& display) {
  std::string norm = normalize_token(id);
  if (norm.empty())
    throw Error(ErrorCode::SchemaError, "empty concept label id");
  labels_[norm] = ConceptLabel{norm, display.empty() ? id : display};
}

void ConceptVocabulary::add_format(const std::string& id) {
  std::string norm = normalize_token(id);
  if (norm.empty()) throw Error(ErrorCode::SchemaError, "empty format id");
  formats_.insert(norm);
}

void ConceptVocabulary::add_synonym_set(
    const std::vector<std::string>& members) {
  int idx = static_cast<int>(synonymSets_.size());
  std::vector<std::string> norm;
  for (const auto& m : members) {
    std::string n = normalize_token(m);
    if (!has_label(n))
      throw Error(ErrorCode::UnknownLabel, "synonym member " + n);
    if (synonymOf_.count(n) && synonymOf_[n] != idx)
      throw Error(ErrorCode::SchemaError,
                  "label " + n + " already in another synonym set");
    synonymOf_[n] = idx;
    norm.push_back(n);
  }
  std::sort(norm.begin(), norm.end());
  synonymSets_.push_back(std::move(norm));
}

void ConceptVocabulary::add_taxonomy_edge(const std::string& child,
                                          const std::string& parent) {
  std::string c = normalize_token(child), p = normalize_token(parent);
  if (!has_label(c)) throw Error(ErrorCode::UnknownLabel, c);
  if (!has_label(p)) throw Error(ErrorCode::UnknownLabel, p);
  if (c == p)
    throw Error(ErrorCode::SchemaError, "self is-a edge on " + c);
  // Reject edges that would close a directed is-a cycle.
  std::deque<std::string> frontier{p};
  std::set<std::string> seen;
  std::map<std::string, std::vector<std::string>> up;
  for (const auto& [ch, pa] : taxonomy_) up[ch].push_back(pa);
  while (!frontier.empty()) {
    std::string cur = frontier.front();
    frontier.pop_front();
    if (cur == c)
      throw Error(ErrorCode::SchemaError,
                  "is-a cycle through " + c + " and " + p);
    if (!seen.insert(cur).second) continue;
    for (const auto& nxt : up[cur]) frontier.push_back(nxt);
  }
  taxonomy_.emplace_back(c, p);
  taxonomyAdj_[c].push_back(p);
  taxonomyAdj_[p].push_back(c);
}

bool ConceptVocabulary::has_label(const std::string& id) const {
  return labels_.count(normalize_token(id)) > 0;
}

bool ConceptVocabulary::has_format(const std::string& id) const {
  return formats_.count(normalize_token(id)) > 0;
}

bool ConceptVocabulary::same_synonym_set(const std::string& a,
                                         const std::string& b) const {
  auto ia = synonymOf_.find(normalize_token(a));
  auto ib = synonymOf_.find(normalize_token(b));
  return ia != synonymOf_.end() && ib != synonymOf_.end() &&
         ia->second == ib->second;
}

std::optional<int> ConceptVocabulary::taxonomy_distance(
    const std::string& a, const std::string& b) const {
  std::string sa = normalize_token(a), sb = normalize_token(b);
  if (sa == sb) return 0;
  std::map<std::string, int> dist{{sa, 0}};
  std::deque<std::string> frontier{sa};
  while (!frontier.empty()) {
    std::string cur = frontier.front();
    frontier.pop_front();
    auto it = taxonomyAdj_.find(cur);
    if (it == taxonomyAdj_.end()) continue;
    for (const auto& nxt : it->second) {
      if (dist.count(nxt)) continue;
      dist[nxt] = dist[cur] + 1;
      if (nxt == sb) return dist[nxt];
      frontier.push_back(nxt);
    }
  }
  return std::nullopt;
}

void ConceptVocabulary::index_description(const std::string& descId,
                                          const std::string& label) {
  std::string norm = normalize_token(label);
  if (!has_label(norm)) throw Error(ErrorCode::UnknownLabel, norm);
  unindex_description(descId);
  sigma_[descId] = norm;
  gamma_[norm].insert(descId);
}

void ConceptVocabulary::unindex_description(const std::string& descId) {
  auto it = sigma_.find(descId);
  if (it == sigma_.end()) return;
  auto git = gamma_.find(it->second);
  if (git != gamma_.end()) {
    git->second.erase(descId);
    if (git->second.empty()) gamma_.erase(git);
  }
  sigma_.erase(it);
}

std::set<std::string> ConceptVocabulary::gamma(const std::string& label) const {
  auto it = gamma_.find(normalize_token(label));
  return it == gamma_.end() ? std::set<std::string>{} : it->second;
}

std::optional<std::string> ConceptVocabulary::sigma(
    const std::string& descId) const {
  auto it = sigma_.find(descId);
  if (it == sigma_.end()) return std::nullopt;
  return it->second;
}

namespace {

double token_overlap(const std::vector<std::string>& a,
                     const std::vector<std::string>& b) {
  if (a.empty() || b.empty()) return 0.0;
  std::set<std::string> sa(a.begin(), a.end()), sb(b.begin(), b.end());
  size_t common = 0;
  for (const auto& t : sa) common += sb.count(t);
  size_t uni = sa.size() + sb.size() - common;
  return uni == 0 ? 0.0 : static_cast<double>(common) / static_cast<double>(uni);
}

}  // namespace

double label_similarity(const std::string& a, const std::string& b,
                        const ConceptVocabulary& vocab) {
  std::string na = normalize_token(a), nb = normalize_token(b);
  if (!vocab.has_label(na)) throw Error(ErrorCode::UnknownLabel, na);
  if (!vocab.has_label(nb)) throw Error(ErrorCode::UnknownLabel, nb);
  if (na == nb || vocab.same_synonym_set(na, nb)) return 1.0;
  if (auto d = vocab.taxonomy_distance(na, nb)) return 1.0 / (1.0 + *d);
  return 0.4 * token_overlap(tokenize(na), tokenize(nb));
}

double semantics_similarity(const std::vector<std::string>& labelsA,
                            const std::string& textA,
                            const std::vector<std::string>& labelsB,
                            const std::string& textB,
                            const ConceptVocabulary& vocab) {
  if (!labelsA.empty() && !labelsB.empty()) {
    double best = 0.0;
    for (const auto& la : labelsA)
      for (const auto& lb : labelsB)
        best = std::max(best, label_similarity(la, lb, vocab));
    return best;
  }
  // At least one side only has free text; compare token bags.
  auto terms = [](const std::vector<std::string>& labels,
                  const std::string& text) {
    std::vector<std::string> t;
    for (const auto& l : labels) {
      auto lt = tokenize(l);
      t.insert(t.end(), lt.begin(), lt.end());
    }
    auto xt = tokenize(text);
    t.insert(t.end(), xt.begin(), xt.end());
    return t;
  };
  return 0.4 * token_overlap(terms(labelsA, textA), terms(labelsB, textB));
}

FormatCompatibility format_compatibility(const std::string& f1,
                                         const std::string& f2,
                                         const std::vector<Converter>& catalog,
                                         int maxLen) {
  auto chain = converter_chain(f1, f2, catalog, std::max(maxLen, 0));
  if (!chain) return {FormatCompatibility::Incompatible, 0};
  if (chain->empty()) return {FormatCompatibility::Exact, 0};
  return {FormatCompatibility::Convertible, static_cast<int>(chain->size())};
}

std::optional<std::vector<Converter>> converter_chain(
    const std::string& from, const std::string& to,
    const std::vector<Converter>& catalog, int maxLen) {
  std::string src = normalize_token(from), dst = normalize_token(to);
  if (src == dst) return std::vector<Converter>{};
  if (maxLen <= 0) return std::nullopt;

  // Outgoing converters per format, in canonical order so tie-breaking by
  // (hops, total cost, lexicographic id sequence) is deterministic.
  std::map<std::string, std::vector<Converter>> out;
  for (const auto& c : catalog) {
    Converter norm = c;
    norm.fromFormat = normalize_token(c.fromFormat);
    norm.toFormat = normalize_token(c.toFormat);
    out[norm.fromFormat].push_back(norm);
  }
  for (auto& [fmt, convs] : out)
    std::sort(convs.begin(), convs.end(),
              [](const Converter& a, const Converter& b) { return a.id < b.id; });

  struct Path {
    double cost;
    std::vector<std::string> ids;
    std::vector<Converter> chain;
  };
  auto better = [](const Path& a, const Path& b) {
    if (a.chain.size() != b.chain.size()) return a.chain.size() < b.chain.size();
    if (a.cost != b.cost) return a.cost < b.cost;
    return a.ids < b.ids;
  };

  std::map<std::string, Path> best{{src, {0.0, {}, {}}}};
  std::vector<std::string> frontier{src};
  for (int hop = 0; hop < maxLen && !frontier.empty(); ++hop) {
    std::vector<std::string> next;
    for (const auto& fmt : frontier) {
      Path base = best.at(fmt);
      if (static_cast<int>(base.chain.size()) != hop) continue;
      auto it = out.find(fmt);
      if (it == out.end()) continue;
      for (const auto& conv : it->second) {
        Path cand = base;
        cand.cost += conv.cost;
        cand.ids.push_back(conv.id);
        cand.chain.push_back(conv);
        auto bit = best.find(conv.toFormat);
        if (bit == best.end() || better(cand, bit->second)) {
          best[conv.toFormat] = cand;
          next.push_back(conv.toFormat);
        }
      }
    }
    std::sort(next.begin(), next.end());
    next.erase(std::unique(next.begin(), next.end()), next.end());
    frontier = std::move(next);
  }
  auto it = best.find(dst);
  if (it == best.end()) return std::nullopt;
  return it->second.chain;
}

}  // namespace stratos
