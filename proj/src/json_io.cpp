#include "stratos/json_io.hpp"

#include <fstream>
#include <set>
#include <sstream>

namespace stratos {

namespace {

/// Strict-mode guard: every present key must be one of `allowed`.
void expect_fields(const json& j, const std::set<std::string>& allowed,
                   const std::string& context) {
  if (!j.is_object())
    throw Error(ErrorCode::SchemaError, context + ": expected an object");
  for (const auto& [key, value] : j.items())
    if (!allowed.count(key))
      throw Error(ErrorCode::SchemaError,
                  context + ": unknown field \"" + key + "\"");
}

std::string require_string(const json& j, const std::string& field,
                           const std::string& context) {
  if (!j.contains(field) || !j.at(field).is_string())
    throw Error(ErrorCode::SchemaError,
                context + ": missing string field \"" + field + "\"");
  return j.at(field).get<std::string>();
}

std::string optional_string(const json& j, const std::string& field) {
  if (!j.contains(field)) return "";
  if (!j.at(field).is_string())
    throw Error(ErrorCode::SchemaError, "field \"" + field + "\" must be a string");
  return j.at(field).get<std::string>();
}

std::vector<std::string> string_array(const json& j, const std::string& context) {
  if (!j.is_array())
    throw Error(ErrorCode::SchemaError, context + ": expected an array");
  std::vector<std::string> out;
  for (const auto& item : j) {
    if (!item.is_string())
      throw Error(ErrorCode::SchemaError, context + ": expected strings");
    out.push_back(item.get<std::string>());
  }
  return out;
}

std::pair<std::string, std::string> edge_pair(const json& j,
                                              const std::string& context) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_string() || !j[1].is_string())
    throw Error(ErrorCode::SchemaError,
                context + ": expected a [from, to] pair");
  return {j[0].get<std::string>(), j[1].get<std::string>()};
}

ServiceGraph layer_from_json(const json& j, const std::string& context) {
  expect_fields(j, {"nodes", "dataflow", "relatedness"}, context);
  ServiceGraph g;
  if (!j.contains("nodes") || !j.at("nodes").is_array())
    throw Error(ErrorCode::SchemaError, context + ": missing nodes array");
  for (const auto& n : j.at("nodes")) {
    std::string id = require_string(n, "id", context + " node");
    std::string type = require_string(n, "type", context + " node " + id);
    if (type == "data") {
      expect_fields(n, {"id", "type", "name", "format", "semantics", "annotation"},
                    context + " node " + id);
      DataNode d;
      d.id = id;
      d.name = optional_string(n, "name");
      d.format = normalize_token(require_string(n, "format", context + " node " + id));
      if (n.contains("semantics"))
        for (auto& s : string_array(n.at("semantics"), context + " node " + id))
          d.semantics.push_back(normalize_token(s));
      std::sort(d.semantics.begin(), d.semantics.end());
      d.annotation = optional_string(n, "annotation");
      if (g.has_node(id))
        throw Error(ErrorCode::SchemaError, context + ": duplicate node id " + id);
      g.data[id] = std::move(d);
    } else if (type == "activity") {
      expect_fields(n, {"id", "type", "label", "composite"},
                    context + " node " + id);
      ActivityNode a;
      a.id = id;
      a.label = normalize_token(require_string(n, "label", context + " node " + id));
      if (n.contains("composite")) {
        if (!n.at("composite").is_boolean())
          throw Error(ErrorCode::SchemaError,
                      context + ": composite must be boolean on " + id);
        a.composite = n.at("composite").get<bool>();
      }
      if (g.has_node(id))
        throw Error(ErrorCode::SchemaError, context + ": duplicate node id " + id);
      g.activities[id] = std::move(a);
    } else {
      throw Error(ErrorCode::SchemaError,
                  context + ": node " + id + " has unknown type \"" + type + "\"");
    }
  }
  if (j.contains("dataflow"))
    for (const auto& e : j.at("dataflow")) {
      auto [from, to] = edge_pair(e, context + " dataflow");
      g.dataflow.push_back({from, to});
    }
  if (j.contains("relatedness"))
    for (const auto& e : j.at("relatedness"))
      g.relatedness.push_back(edge_pair(e, context + " relatedness"));
  g.canonicalize();
  return g;
}

json layer_to_json(const ServiceGraph& g) {
  json nodes = json::array();
  for (const auto& [id, d] : g.data) {
    json n{{"id", id}, {"type", "data"}, {"format", d.format}};
    if (!d.name.empty()) n["name"] = d.name;
    if (!d.semantics.empty()) n["semantics"] = d.semantics;
    if (!d.annotation.empty()) n["annotation"] = d.annotation;
    nodes.push_back(std::move(n));
  }
  for (const auto& [id, a] : g.activities) {
    json n{{"id", id}, {"type", "activity"}, {"label", a.label}};
    if (a.composite) n["composite"] = true;
    nodes.push_back(std::move(n));
  }
  json out{{"nodes", std::move(nodes)}};
  json dataflow = json::array();
  for (const auto& e : g.dataflow) dataflow.push_back({e.from, e.to});
  out["dataflow"] = std::move(dataflow);
  if (!g.relatedness.empty()) {
    json rel = json::array();
    for (const auto& [a, b] : g.relatedness) rel.push_back({a, b});
    out["relatedness"] = std::move(rel);
  }
  return out;
}

}  // namespace

std::string canonical_dump(const json& j, int indent) {
  // nlohmann::json keeps object keys sorted; dump() is therefore canonical.
  return j.dump(indent);
}

std::string content_hash(const json& j) {
  std::string text = canonical_dump(j);
  uint64_t h = 1469598103934665603ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

json parse_json(const std::string& text) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded())
    throw Error(ErrorCode::SchemaError, "malformed JSON");
  return j;
}

json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in)
    throw Error(ErrorCode::PersistenceError, "cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_json(buf.str());
}

GraphDescription description_from_json(const json& doc) {
  expect_fields(doc, {"label", "layers", "parentMaps", "provenance"},
                "description");
  GraphDescription desc;
  desc.label = normalize_token(require_string(doc, "label", "description"));
  if (!doc.contains("layers") || !doc.at("layers").is_array() ||
      doc.at("layers").empty())
    throw Error(ErrorCode::SchemaError,
                "description: layers must be a non-empty array");
  int i = 0;
  for (const auto& layer : doc.at("layers"))
    desc.stack.layers.push_back(
        layer_from_json(layer, "layer " + std::to_string(i++)));
  if (doc.contains("parentMaps")) {
    if (!doc.at("parentMaps").is_array())
      throw Error(ErrorCode::SchemaError, "description: parentMaps must be an array");
    for (const auto& pm : doc.at("parentMaps")) {
      if (!pm.is_object())
        throw Error(ErrorCode::SchemaError, "description: parent map must be an object");
      std::map<std::string, std::string> m;
      for (const auto& [child, parent] : pm.items()) {
        if (!parent.is_string())
          throw Error(ErrorCode::SchemaError,
                      "description: parent of " + child + " must be a string");
        m[child] = parent.get<std::string>();
      }
      desc.stack.parentMaps.push_back(std::move(m));
    }
  }
  if (doc.contains("provenance")) {
    if (!doc.at("provenance").is_object())
      throw Error(ErrorCode::SchemaError, "description: provenance must be an object");
    for (const auto& [k, v] : doc.at("provenance").items()) {
      if (!v.is_string())
        throw Error(ErrorCode::SchemaError, "description: provenance values must be strings");
      desc.provenance[k] = v.get<std::string>();
    }
  }
  return desc;
}

json description_to_json(const GraphDescription& desc) {
  json out{{"label", desc.label}};
  json layers = json::array();
  for (const auto& g : desc.stack.layers) layers.push_back(layer_to_json(g));
  out["layers"] = std::move(layers);
  if (!desc.stack.parentMaps.empty()) {
    json maps = json::array();
    for (const auto& pm : desc.stack.parentMaps) maps.push_back(json(pm));
    out["parentMaps"] = std::move(maps);
  }
  if (!desc.provenance.empty()) out["provenance"] = json(desc.provenance);
  return out;
}

ConceptVocabulary vocabulary_from_json(const json& doc) {
  expect_fields(doc, {"labels", "formats", "synonyms", "taxonomy"}, "vocabulary");
  ConceptVocabulary vocab;
  if (doc.contains("labels")) {
    if (!doc.at("labels").is_array())
      throw Error(ErrorCode::SchemaError, "vocabulary: labels must be an array");
    for (const auto& l : doc.at("labels")) {
      if (l.is_string()) {
        vocab.add_label(l.get<std::string>());
      } else {
        expect_fields(l, {"id", "display"}, "vocabulary label");
        vocab.add_label(require_string(l, "id", "vocabulary label"),
                        optional_string(l, "display"));
      }
    }
  }
  if (doc.contains("formats"))
    for (const auto& f : string_array(doc.at("formats"), "vocabulary formats"))
      vocab.add_format(f);
  if (doc.contains("synonyms")) {
    if (!doc.at("synonyms").is_array())
      throw Error(ErrorCode::SchemaError, "vocabulary: synonyms must be an array");
    for (const auto& group : doc.at("synonyms"))
      vocab.add_synonym_set(string_array(group, "vocabulary synonym set"));
  }
  if (doc.contains("taxonomy"))
    for (const auto& e : doc.at("taxonomy")) {
      auto [child, parent] = edge_pair(e, "vocabulary taxonomy");
      vocab.add_taxonomy_edge(child, parent);
    }
  return vocab;
}

json vocabulary_to_json(const ConceptVocabulary& vocab) {
  json out;
  json labels = json::array();
  for (const auto& [id, l] : vocab.labels()) {
    if (l.display.empty() || l.display == id) labels.push_back(id);
    else labels.push_back(json{{"id", id}, {"display", l.display}});
  }
  out["labels"] = std::move(labels);
  out["formats"] = json(vocab.formats());
  if (!vocab.synonym_sets().empty()) out["synonyms"] = json(vocab.synonym_sets());
  if (!vocab.taxonomy_edges().empty()) {
    json tax = json::array();
    for (const auto& [c, p] : vocab.taxonomy_edges()) tax.push_back({c, p});
    out["taxonomy"] = std::move(tax);
  }
  return out;
}

std::vector<Converter> converters_from_json(const json& doc) {
  std::vector<json> items;
  if (doc.is_array()) items.assign(doc.begin(), doc.end());
  else items.push_back(doc);
  std::vector<Converter> out;
  for (const auto& c : items) {
    expect_fields(c, {"id", "from", "to", "cost", "note"}, "converter");
    Converter conv;
    conv.id = normalize_token(require_string(c, "id", "converter"));
    conv.fromFormat = normalize_token(require_string(c, "from", "converter " + conv.id));
    conv.toFormat = normalize_token(require_string(c, "to", "converter " + conv.id));
    if (c.contains("cost")) {
      if (!c.at("cost").is_number() || c.at("cost").get<double>() <= 0)
        throw Error(ErrorCode::SchemaError,
                    "converter " + conv.id + ": cost must be a positive number");
      conv.cost = c.at("cost").get<double>();
    }
    conv.note = optional_string(c, "note");
    out.push_back(std::move(conv));
  }
  return out;
}

json converter_to_json(const Converter& c) {
  json out{{"id", c.id}, {"from", c.fromFormat}, {"to", c.toFormat}};
  if (c.cost != 1.0) out["cost"] = c.cost;
  if (!c.note.empty()) out["note"] = c.note;
  return out;
}

MatchParams params_from_json(const json& doc, MatchParams base) {
  expect_fields(doc,
                {"labelThreshold", "acceptThreshold", "wLabel", "wTopo",
                 "wFormat", "layerPenalty", "maxConverterLen",
                 "semanticsThreshold", "exactMode"},
                "params");
  auto number = [&](const char* field, double& target) {
    if (!doc.contains(field)) return;
    if (!doc.at(field).is_number())
      throw Error(ErrorCode::SchemaError,
                  std::string("params: ") + field + " must be a number");
    target = doc.at(field).get<double>();
  };
  number("labelThreshold", base.labelThreshold);
  number("acceptThreshold", base.acceptThreshold);
  number("wLabel", base.wLabel);
  number("wTopo", base.wTopo);
  number("wFormat", base.wFormat);
  number("layerPenalty", base.layerPenalty);
  number("semanticsThreshold", base.semanticsThreshold);
  if (doc.contains("maxConverterLen")) {
    if (!doc.at("maxConverterLen").is_number_integer())
      throw Error(ErrorCode::SchemaError, "params: maxConverterLen must be an integer");
    base.maxConverterLen = doc.at("maxConverterLen").get<int>();
  }
  if (doc.contains("exactMode")) {
    if (!doc.at("exactMode").is_boolean())
      throw Error(ErrorCode::SchemaError, "params: exactMode must be boolean");
    base.exactMode = doc.at("exactMode").get<bool>();
  }
  base.validate();
  return base;
}

json report_to_json(const ValidationReport& report) {
  json out = json::array();
  for (const auto& v : report)
    out.push_back(json{{"code", v.code}, {"subject", v.subject}, {"detail", v.detail}});
  return out;
}

json result_to_json(const MatchResult& r) {
  return json{{"service", r.serviceId},
              {"queryLayer", r.queryLayer},
              {"serviceLayer", r.serviceLayer},
              {"mapping", json(r.mapping.pairs)},
              {"coverage", r.coverage},
              {"score", r.score},
              {"penalizedScore", r.penalizedScore}};
}

json results_to_json(const std::vector<MatchResult>& results) {
  json out = json::array();
  for (const auto& r : results) out.push_back(result_to_json(r));
  return out;
}

namespace {

json port_to_json(const PortDescriptor& p) {
  json out{{"port", p.dataNodeId}, {"format", p.format}};
  if (!p.semantics.empty()) out["semantics"] = p.semantics;
  return out;
}

PortDescriptor port_from_json(const json& j, PortDescriptor::Direction dir) {
  expect_fields(j, {"port", "format", "semantics"}, "plan port");
  PortDescriptor p;
  p.dataNodeId = require_string(j, "port", "plan port");
  p.direction = dir;
  p.format = normalize_token(require_string(j, "format", "plan port"));
  if (j.contains("semantics"))
    p.semantics = string_array(j.at("semantics"), "plan port semantics");
  return p;
}

json portref_to_json(const PortRef& r) {
  return json{{"fragment", r.fragment}, {"port", r.port}};
}

PortRef portref_from_json(const json& j) {
  expect_fields(j, {"fragment", "port"}, "plan port reference");
  if (!j.contains("fragment") || !j.at("fragment").is_number_integer())
    throw Error(ErrorCode::SchemaError, "plan port reference: fragment index required");
  return {j.at("fragment").get<int>(), require_string(j, "port", "plan port reference")};
}

}  // namespace

json plan_to_json(const StitchPlan& plan) {
  json fragments = json::array();
  for (const auto& f : plan.fragments) {
    json entries = json::array(), exits = json::array();
    for (const auto& p : f.entryPorts) entries.push_back(port_to_json(p));
    for (const auto& p : f.exitPorts) exits.push_back(port_to_json(p));
    fragments.push_back(json{{"service", f.serviceId},
                             {"layer", f.serviceLayer},
                             {"nodes", json(f.nodeSet)},
                             {"entries", std::move(entries)},
                             {"exits", std::move(exits)},
                             {"covered", json(f.coveredQueryNodes)},
                             {"mapping", json(f.mapping.pairs)}});
  }
  json links = json::array();
  for (const auto& l : plan.links) {
    json chain = json::array();
    for (const auto& c : l.chain) chain.push_back(c.id);
    links.push_back(json{{"from", portref_to_json({l.fromFragment, l.fromPort})},
                         {"to", portref_to_json({l.toFragment, l.toPort})},
                         {"chain", std::move(chain)}});
  }
  json inputs, outputs;
  for (const auto& [q, ref] : plan.inputBinding) inputs[q] = portref_to_json(ref);
  for (const auto& [q, ref] : plan.outputBinding) outputs[q] = portref_to_json(ref);
  return json{{"fragments", std::move(fragments)},
              {"links", std::move(links)},
              {"inputs", std::move(inputs)},
              {"outputs", std::move(outputs)}};
}

StitchPlan plan_from_json(const json& doc, const std::vector<Converter>& catalog) {
  expect_fields(doc, {"fragments", "links", "inputs", "outputs"}, "plan");
  std::map<std::string, Converter> byId;
  for (const auto& c : catalog) byId[c.id] = c;

  StitchPlan plan;
  if (!doc.contains("fragments") || !doc.at("fragments").is_array())
    throw Error(ErrorCode::SchemaError, "plan: fragments must be an array");
  for (const auto& fj : doc.at("fragments")) {
    expect_fields(fj, {"service", "layer", "nodes", "entries", "exits",
                       "covered", "mapping"},
                  "plan fragment");
    Fragment f;
    f.serviceId = require_string(fj, "service", "plan fragment");
    if (!fj.contains("layer") || !fj.at("layer").is_number_integer())
      throw Error(ErrorCode::SchemaError, "plan fragment: layer index required");
    f.serviceLayer = fj.at("layer").get<int>();
    for (auto& n : string_array(fj.at("nodes"), "plan fragment nodes"))
      f.nodeSet.insert(n);
    if (fj.contains("entries"))
      for (const auto& p : fj.at("entries"))
        f.entryPorts.push_back(port_from_json(p, PortDescriptor::In));
    if (fj.contains("exits"))
      for (const auto& p : fj.at("exits"))
        f.exitPorts.push_back(port_from_json(p, PortDescriptor::Out));
    if (fj.contains("covered"))
      for (auto& n : string_array(fj.at("covered"), "plan fragment covered"))
        f.coveredQueryNodes.insert(n);
    if (fj.contains("mapping")) {
      if (!fj.at("mapping").is_object())
        throw Error(ErrorCode::SchemaError, "plan fragment: mapping must be an object");
      for (const auto& [q, s] : fj.at("mapping").items()) {
        if (!s.is_string())
          throw Error(ErrorCode::SchemaError, "plan fragment: mapping values must be strings");
        f.mapping.pairs[q] = s.get<std::string>();
      }
    }
    plan.fragments.push_back(std::move(f));
  }
  if (doc.contains("links"))
    for (const auto& lj : doc.at("links")) {
      expect_fields(lj, {"from", "to", "chain"}, "plan link");
      GlueLink l;
      PortRef from = portref_from_json(lj.at("from"));
      PortRef to = portref_from_json(lj.at("to"));
      l.fromFragment = from.fragment;
      l.fromPort = from.port;
      l.toFragment = to.fragment;
      l.toPort = to.port;
      if (lj.contains("chain"))
        for (auto& id : string_array(lj.at("chain"), "plan link chain")) {
          auto it = byId.find(normalize_token(id));
          if (it == byId.end())
            throw Error(ErrorCode::UnknownConverter, id);
          l.chain.push_back(it->second);
        }
      plan.links.push_back(std::move(l));
    }
  auto bindings = [&](const char* field, std::map<std::string, PortRef>& target) {
    if (!doc.contains(field)) return;
    if (!doc.at(field).is_object())
      throw Error(ErrorCode::SchemaError, std::string("plan: ") + field + " must be an object");
    for (const auto& [q, ref] : doc.at(field).items())
      target[q] = portref_from_json(ref);
  };
  bindings("inputs", plan.inputBinding);
  bindings("outputs", plan.outputBinding);
  return plan;
}

}  // namespace stratos
