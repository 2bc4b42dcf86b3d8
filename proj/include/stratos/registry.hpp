#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "stratos/graph.hpp"
#include "stratos/match.hpp"
#include "stratos/vocabulary.hpp"

namespace stratos {

enum class Atomicity { Atomic, Composite };

/// Immutable view of the registry contents. Readers pin a snapshot and work
/// against it; writers build a fresh one and swap it in.
struct RegistrySnapshot {
  std::map<std::string, GraphDescription> descriptions;
  std::vector<Converter> catalog;
  ConceptVocabulary vocab;
  std::map<std::string, Atomicity> atomicity;
  long version = 0;
};

/// COMPOSITE when some other registered description embeds exactly into a
/// proper subgraph of this description's base layer; ATOMIC otherwise.
Atomicity compute_atomicity(const RegistrySnapshot& snap,
                            const std::string& descId,
                            const MatchParams& params = {});

/// Description store with single-writer / multi-reader semantics. All write
/// operations serialize on an internal mutex and publish copy-on-write
/// snapshots, so concurrent readers never observe a half-applied change.
class Registry {
 public:
  Registry();

  /// Validates and stores a descriptor document. The returned id is a hash
  /// of the canonical document, so re-ingesting identical content is
  /// idempotent and leaves the version counter untouched.
  std::string ingest_service(const nlohmann::json& doc,
                             const MatchParams& params = {});

  /// Accepts a single converter document or an array. Re-ingesting identical
  /// content is idempotent; reusing an id with different content is an error.
  std::vector<std::string> ingest_converter(const nlohmann::json& doc);

  /// Replaces the whole vocabulary transactionally. Every stored description
  /// and converter is re-validated against the replacement; on any failure
  /// the registry is untouched and the error lists the dependents.
  void ingest_vocabulary(const nlohmann::json& doc,
                         const MatchParams& params = {});

  GraphDescription get(const std::string& id) const;
  /// Description ids, optionally restricted to one concept label (Gamma).
  std::vector<std::string> list(const std::string& label = "") const;
  void remove(const std::string& id);

  Atomicity atomicity(const std::string& id) const;

  void save_snapshot(const std::string& path) const;
  void load_snapshot(const std::string& path);

  /// Pins the current contents for lock-free reading.
  std::shared_ptr<const RegistrySnapshot> view() const;

 private:
  void publish(std::shared_ptr<RegistrySnapshot> next);

  mutable std::mutex readMutex_;
  std::mutex writeMutex_;
  std::shared_ptr<const RegistrySnapshot> snap_;
};

}  // namespace stratos
