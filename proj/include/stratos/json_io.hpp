#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "stratos/graph.hpp"
#include "stratos/match.hpp"
#include "stratos/stitch.hpp"
#include "stratos/vocabulary.hpp"

namespace stratos {

using json = nlohmann::json;

/// Canonical serialization: sorted keys, stable number formatting. All
/// golden-file comparisons and content hashes go through this.
std::string canonical_dump(const json& j, int indent = -1);

/// FNV-1a 64-bit over the canonical form, as a hex token.
std::string content_hash(const json& j);

json parse_json(const std::string& text);
json load_json_file(const std::string& path);

// Descriptor documents. Parsing is strict: unknown fields are rejected
// with SchemaError.
GraphDescription description_from_json(const json& doc);
json description_to_json(const GraphDescription& desc);

ConceptVocabulary vocabulary_from_json(const json& doc);
json vocabulary_to_json(const ConceptVocabulary& vocab);

/// Accepts a single converter object or an array of them.
std::vector<Converter> converters_from_json(const json& doc);
json converter_to_json(const Converter& c);

/// Overrides on top of `base`; absent fields keep their defaults.
MatchParams params_from_json(const json& doc, MatchParams base = {});

json report_to_json(const ValidationReport& report);
json result_to_json(const MatchResult& r);
json results_to_json(const std::vector<MatchResult>& results);

json plan_to_json(const StitchPlan& plan);
StitchPlan plan_from_json(const json& doc,
                          const std::vector<Converter>& catalog);

}  // namespace stratos
