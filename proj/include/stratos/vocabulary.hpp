#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "stratos/errors.hpp"

namespace stratos {

/// Trim whitespace and lowercase; used to normalize label and format ids.
std::string normalize_token(const std::string& raw);

/// Split an id or free-text annotation into lowercase alphanumeric tokens.
std::vector<std::string> tokenize(const std::string& text);

struct ConceptLabel {
  std::string id;       // normalized, unique within a vocabulary
  std::string display;  // preserved verbatim
};

/// Converter between two data formats, part of the converter catalog.
struct Converter {
  std::string id;
  std::string fromFormat;
  std::string toFormat;
  double cost = 1.0;
  std::string note;
};

/// The label set with its similarity structure (synonym sets, is-a taxonomy)
/// plus the gamma/sigma indexes over registered descriptions.
///
/// Immutable after construction; the registry swaps whole vocabulary values
/// rather than mutating one in place.
class ConceptVocabulary {
 public:
  ConceptVocabulary() = default;

  void add_label(const std::string& id, const std::string& display = "");
  void add_format(const std::string& id);
  /// Declares every label in `members` mutually synonymous.
  void add_synonym_set(const std::vector<std::string>& members);
  /// Declares `child` is-a `parent`. Cycles are rejected.
  void add_taxonomy_edge(const std::string& child, const std::string& parent);

  bool has_label(const std::string& id) const;
  bool has_format(const std::string& id) const;
  const std::map<std::string, ConceptLabel>& labels() const { return labels_; }
  const std::set<std::string>& formats() const { return formats_; }

  bool same_synonym_set(const std::string& a, const std::string& b) const;
  /// Undirected is-a path length between two labels, if connected.
  std::optional<int> taxonomy_distance(const std::string& a,
                                       const std::string& b) const;

  // Gamma/Sigma indexes, maintained by the registry.
  void index_description(const std::string& descId, const std::string& label);
  void unindex_description(const std::string& descId);
  /// Gamma: descriptions carrying the given concept label.
  std::set<std::string> gamma(const std::string& label) const;
  /// Sigma: the single concept label describing a registered description.
  std::optional<std::string> sigma(const std::string& descId) const;
  const std::map<std::string, std::set<std::string>>& gamma_index() const {
    return gamma_;
  }
  const std::map<std::string, std::string>& sigma_index() const {
    return sigma_;
  }

  const std::vector<std::pair<std::string, std::string>>& taxonomy_edges()
      const {
    return taxonomy_;
  }
  const std::vector<std::vector<std::string>>& synonym_sets() const {
    return synonymSets_;
  }

 private:
  std::map<std::string, ConceptLabel> labels_;
  std::set<std::string> formats_;
  std::map<std::string, int> synonymOf_;
  std::vector<std::vector<std::string>> synonymSets_;
  std::vector<std::pair<std::string, std::string>> taxonomy_;  // child, parent
  std::map<std::string, std::vector<std::string>> taxonomyAdj_;
  std::map<std::string, std::set<std::string>> gamma_;
  std::map<std::string, std::string> sigma_;
};

/// Similarity of two concept labels in [0, 1].
///
/// Identity or shared synonym set scores 1.0. Labels connected in the
/// taxonomy score 1/(1+d) for undirected is-a distance d. Otherwise a
/// token-overlap string similarity scaled into [0, 0.4].
double label_similarity(const std::string& a, const std::string& b,
                        const ConceptVocabulary& vocab);

/// Similarity of two semantics descriptors (label set plus free text).
/// Best label pair wins when both sides carry labels; falls back to
/// token overlap over labels and annotation text otherwise.
double semantics_similarity(const std::vector<std::string>& labelsA,
                            const std::string& textA,
                            const std::vector<std::string>& labelsB,
                            const std::string& textB,
                            const ConceptVocabulary& vocab);

struct FormatCompatibility {
  enum Kind { Exact, Convertible, Incompatible };
  Kind kind = Incompatible;
  int chainLength = 0;

  bool operator==(const FormatCompatibility&) const = default;
};

/// Classifies the relation between two formats given a converter catalog:
/// EXACT, CONVERTIBLE(k) for shortest chain length k <= maxLen, else
/// INCOMPATIBLE.
FormatCompatibility format_compatibility(const std::string& f1,
                                         const std::string& f2,
                                         const std::vector<Converter>& catalog,
                                         int maxLen);

/// Shortest converter chain from one format to another. Ties broken by
/// total cost, then lexicographic converter ids. Empty chain iff the
/// formats are equal; nullopt if no chain of length <= maxLen exists.
std::optional<std::vector<Converter>> converter_chain(
    const std::string& from, const std::string& to,
    const std::vector<Converter>& catalog, int maxLen);

}  // namespace stratos
