#include "stratos/registry.hpp"

#include <fstream>

#include "stratos/json_io.hpp"

namespace stratos {

namespace {

ValidationReport validate_description(const GraphDescription& desc,
                                      const ConceptVocabulary& vocab) {
  ValidationReport report;
  if (!vocab.has_label(desc.label))
    report.push_back({"UNKNOWN_LABEL", desc.label, "description label not in vocabulary"});
  for (size_t i = 0; i < desc.stack.layers.size(); ++i) {
    for (auto& v : validate_graph(desc.stack.layers[i], vocab)) {
      v.detail = "layer " + std::to_string(i) + ": " + v.detail;
      report.push_back(std::move(v));
    }
  }
  for (auto& v : validate_stack(desc.stack)) report.push_back(std::move(v));
  return report;
}

void recompute_atomicity(RegistrySnapshot& snap, const MatchParams& params) {
  snap.atomicity.clear();
  for (const auto& [id, desc] : snap.descriptions)
    snap.atomicity[id] = compute_atomicity(snap, id, params);
}

}  // namespace

Atomicity compute_atomicity(const RegistrySnapshot& snap,
                            const std::string& descId,
                            const MatchParams& params) {
  auto it = snap.descriptions.find(descId);
  if (it == snap.descriptions.end())
    throw Error(ErrorCode::UnknownDescription, descId);
  const ServiceGraph& base = it->second.base();
  size_t total = base.data.size() + base.activities.size();

  MatchParams exact = params;
  exact.exactMode = true;
  for (const auto& [otherId, other] : snap.descriptions) {
    if (otherId == descId) continue;
    if (!snap.vocab.sigma(otherId)) continue;
    const ServiceGraph& sub = other.base();
    size_t subTotal = sub.data.size() + sub.activities.size();
    if (subTotal == 0 || subTotal >= total) continue;  // proper subgraph only
    if (!match_layer(sub, base, snap.vocab, exact).empty())
      return Atomicity::Composite;
  }
  return Atomicity::Atomic;
}

Registry::Registry() : snap_(std::make_shared<RegistrySnapshot>()) {}

std::shared_ptr<const RegistrySnapshot> Registry::view() const {
  std::lock_guard<std::mutex> lock(readMutex_);
  return snap_;
}

void Registry::publish(std::shared_ptr<RegistrySnapshot> next) {
  std::lock_guard<std::mutex> lock(readMutex_);
  snap_ = std::move(next);
}

std::string Registry::ingest_service(const nlohmann::json& doc,
                                     const MatchParams& params) {
  GraphDescription desc = description_from_json(doc);
  std::lock_guard<std::mutex> write(writeMutex_);
  auto cur = view();

  ValidationReport report = validate_description(desc, cur->vocab);
  if (!report.empty())
    throw Error(ErrorCode::ValidationError, "description rejected", report);

  std::string id = "svc-" + content_hash(description_to_json(desc));
  if (cur->descriptions.count(id)) return id;  // idempotent re-ingest

  auto next = std::make_shared<RegistrySnapshot>(*cur);
  desc.id = id;
  next->descriptions[id] = std::move(desc);
  next->vocab.index_description(id, next->descriptions[id].label);
  recompute_atomicity(*next, params);
  next->version = cur->version + 1;
  publish(std::move(next));
  return id;
}

std::vector<std::string> Registry::ingest_converter(const nlohmann::json& doc) {
  std::vector<Converter> parsed = converters_from_json(doc);
  std::lock_guard<std::mutex> write(writeMutex_);
  auto cur = view();

  auto next = std::make_shared<RegistrySnapshot>(*cur);
  std::vector<std::string> ids;
  bool changed = false;
  for (const auto& c : parsed) {
    if (c.fromFormat == c.toFormat)
      throw Error(ErrorCode::ValidationError,
                  "converter " + c.id + " maps a format to itself");
    if (!next->vocab.has_format(c.fromFormat))
      throw Error(ErrorCode::UnknownFormat, c.fromFormat);
    if (!next->vocab.has_format(c.toFormat))
      throw Error(ErrorCode::UnknownFormat, c.toFormat);
    bool duplicate = false;
    for (const auto& existing : next->catalog) {
      if (existing.id != c.id) continue;
      if (existing.fromFormat == c.fromFormat &&
          existing.toFormat == c.toFormat && existing.cost == c.cost &&
          existing.note == c.note) {
        duplicate = true;  // identical content, idempotent
        break;
      }
      throw Error(ErrorCode::SchemaError,
                  "converter id " + c.id + " already registered with different content");
    }
    ids.push_back(c.id);
    if (!duplicate) {
      next->catalog.push_back(c);
      changed = true;
    }
  }
  if (changed) {
    next->version = cur->version + 1;
    publish(std::move(next));
  }
  return ids;
}

void Registry::ingest_vocabulary(const nlohmann::json& doc,
                                 const MatchParams& params) {
  ConceptVocabulary vocab = vocabulary_from_json(doc);
  std::lock_guard<std::mutex> write(writeMutex_);
  auto cur = view();

  // The replacement must keep every stored description and converter valid.
  ValidationReport conflicts;
  for (const auto& [id, desc] : cur->descriptions) {
    for (auto& v : validate_description(desc, vocab)) {
      v.subject = id;
      conflicts.push_back(std::move(v));
    }
  }
  for (const auto& c : cur->catalog) {
    if (!vocab.has_format(c.fromFormat))
      conflicts.push_back({"UNKNOWN_FORMAT", c.id, "converter input format " + c.fromFormat});
    if (!vocab.has_format(c.toFormat))
      conflicts.push_back({"UNKNOWN_FORMAT", c.id, "converter output format " + c.toFormat});
  }
  if (!conflicts.empty())
    throw Error(ErrorCode::VocabularyConflict,
                "vocabulary replacement breaks registered content", conflicts);

  auto next = std::make_shared<RegistrySnapshot>(*cur);
  next->vocab = std::move(vocab);
  for (const auto& [id, desc] : next->descriptions)
    next->vocab.index_description(id, desc.label);
  recompute_atomicity(*next, params);
  next->version = cur->version + 1;
  publish(std::move(next));
}

GraphDescription Registry::get(const std::string& id) const {
  auto cur = view();
  auto it = cur->descriptions.find(id);
  if (it == cur->descriptions.end()) throw Error(ErrorCode::NotFound, id);
  return it->second;
}

std::vector<std::string> Registry::list(const std::string& label) const {
  auto cur = view();
  std::vector<std::string> out;
  if (label.empty()) {
    for (const auto& [id, desc] : cur->descriptions) out.push_back(id);
  } else {
    auto matches = cur->vocab.gamma(normalize_token(label));
    out.assign(matches.begin(), matches.end());
  }
  return out;
}

void Registry::remove(const std::string& id) {
  std::lock_guard<std::mutex> write(writeMutex_);
  auto cur = view();
  if (!cur->descriptions.count(id)) throw Error(ErrorCode::NotFound, id);
  auto next = std::make_shared<RegistrySnapshot>(*cur);
  next->descriptions.erase(id);
  next->vocab.unindex_description(id);
  recompute_atomicity(*next, MatchParams{});
  next->version = cur->version + 1;
  publish(std::move(next));
}

Atomicity Registry::atomicity(const std::string& id) const {
  auto cur = view();
  auto it = cur->atomicity.find(id);
  if (it == cur->atomicity.end()) throw Error(ErrorCode::NotFound, id);
  return it->second;
}

void Registry::save_snapshot(const std::string& path) const {
  auto cur = view();
  json out;
  out["schemaVersion"] = 1;
  out["version"] = cur->version;
  out["vocabulary"] = vocabulary_to_json(cur->vocab);
  json converters = json::array();
  for (const auto& c : cur->catalog) converters.push_back(converter_to_json(c));
  out["converters"] = std::move(converters);
  json descriptions;
  for (const auto& [id, desc] : cur->descriptions)
    descriptions[id] = description_to_json(desc);
  out["descriptions"] = std::move(descriptions);
  json atomicity, sigma;
  for (const auto& [id, a] : cur->atomicity)
    atomicity[id] = a == Atomicity::Atomic ? "ATOMIC" : "COMPOSITE";
  out["atomicity"] = std::move(atomicity);
  out["sigma"] = json(cur->vocab.sigma_index());
  json gamma;
  for (const auto& [label, ids] : cur->vocab.gamma_index())
    gamma[label] = json(ids);
  out["gamma"] = std::move(gamma);

  std::ofstream file(path);
  if (!file)
    throw Error(ErrorCode::PersistenceError, "cannot write " + path);
  file << canonical_dump(out, 2) << "\n";
}

void Registry::load_snapshot(const std::string& path) {
  json doc;
  try {
    doc = load_json_file(path);
  } catch (const Error& e) {
    throw Error(ErrorCode::PersistenceError, e.what());
  }
  std::lock_guard<std::mutex> write(writeMutex_);
  try {
    if (!doc.is_object() || !doc.contains("schemaVersion") ||
        doc.at("schemaVersion") != 1)
      throw Error(ErrorCode::PersistenceError,
                  "unsupported snapshot schema in " + path);
    auto next = std::make_shared<RegistrySnapshot>();
    next->version = doc.value("version", 0L);
    next->vocab = vocabulary_from_json(doc.at("vocabulary"));
    if (doc.contains("converters"))
      next->catalog = converters_from_json(doc.at("converters"));
    if (doc.contains("descriptions")) {
      for (const auto& [id, dj] : doc.at("descriptions").items()) {
        GraphDescription desc = description_from_json(dj);
        desc.id = id;
        next->vocab.index_description(id, desc.label);
        next->descriptions[id] = std::move(desc);
      }
    }
    // Index tables are derived data; rebuild them instead of trusting the file.
    recompute_atomicity(*next, MatchParams{});
    publish(std::move(next));
  } catch (const Error& e) {
    if (e.code() == ErrorCode::PersistenceError) throw;
    throw Error(ErrorCode::PersistenceError,
                "corrupt snapshot " + path + ": " + e.what());
  } catch (const json::exception& e) {
    throw Error(ErrorCode::PersistenceError,
                "corrupt snapshot " + path + ": " + e.what());
  }
}

}  // namespace stratos
