#include "stratos/dot.hpp"

#include <sstream>

namespace stratos {

namespace {

std::string quoted(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  out += '"';
  return out;
}

std::string data_label(const DataNode& d) {
  std::string sem;
  for (size_t i = 0; i < d.semantics.size(); ++i)
    sem += (i ? "," : "") + d.semantics[i];
  return (d.name.empty() ? d.id : d.name) + "|" + d.format + "|" + sem;
}

/// Emits one layer's nodes and edges; `prefix` scopes node names so layers
/// can coexist in one digraph.
void emit_layer(std::ostringstream& out, const ServiceGraph& g,
                const std::string& prefix, const std::string& indent) {
  for (const auto& [id, d] : g.data)
    out << indent << quoted(prefix + id) << " [shape=note, label="
        << quoted(data_label(d)) << "];\n";
  for (const auto& [id, a] : g.activities)
    out << indent << quoted(prefix + id) << " [shape=oval, label="
        << quoted(a.label) << (a.composite ? ", peripheries=2" : "") << "];\n";
  for (const auto& e : g.dataflow)
    out << indent << quoted(prefix + e.from) << " -> " << quoted(prefix + e.to)
        << ";\n";
  for (const auto& [a, b] : g.relatedness)
    out << indent << quoted(prefix + a) << " -> " << quoted(prefix + b)
        << " [dir=none, style=dashed];\n";
}

ServiceGraph fragment_subgraph(const Fragment& f,
                               const std::map<std::string, GraphDescription>& services) {
  auto it = services.find(f.serviceId);
  if (it == services.end())
    throw Error(ErrorCode::UnknownDescription, f.serviceId);
  const auto& layers = it->second.stack.layers;
  if (f.serviceLayer < 0 || f.serviceLayer >= static_cast<int>(layers.size()))
    throw Error(ErrorCode::NotFound,
                f.serviceId + " layer " + std::to_string(f.serviceLayer));
  const ServiceGraph& g = layers[f.serviceLayer];
  ServiceGraph sub;
  for (const auto& n : f.nodeSet) {
    if (g.is_data(n)) sub.data[n] = g.data.at(n);
    else if (g.is_activity(n)) sub.activities[n] = g.activities.at(n);
  }
  for (const auto& e : g.dataflow)
    if (f.nodeSet.count(e.from) && f.nodeSet.count(e.to))
      sub.dataflow.push_back(e);
  for (const auto& r : g.relatedness)
    if (f.nodeSet.count(r.first) && f.nodeSet.count(r.second))
      sub.relatedness.push_back(r);
  sub.canonicalize();
  return sub;
}

}  // namespace

std::string export_dot(const ServiceGraph& g, const std::string& name) {
  std::ostringstream out;
  out << "digraph " << quoted(name) << " {\n";
  out << "  rankdir=LR;\n";
  emit_layer(out, g, "", "  ");
  out << "}\n";
  return out.str();
}

std::string export_dot(const GraphDescription& desc) {
  std::ostringstream out;
  out << "digraph " << quoted(desc.label.empty() ? desc.id : desc.label)
      << " {\n  rankdir=LR;\n";
  for (size_t i = 0; i < desc.stack.layers.size(); ++i) {
    std::string prefix = "L" + std::to_string(i) + ".";
    out << "  subgraph " << quoted("cluster_layer" + std::to_string(i))
        << " {\n    label=" << quoted("layer " + std::to_string(i)) << ";\n";
    emit_layer(out, desc.stack.layers[i], prefix, "    ");
    out << "  }\n";
  }
  for (size_t i = 0; i < desc.stack.parentMaps.size(); ++i) {
    std::string childPrefix = "L" + std::to_string(i + 1) + ".";
    std::string parentPrefix = "L" + std::to_string(i) + ".";
    for (const auto& [child, parent] : desc.stack.parentMaps[i])
      out << "  " << quoted(childPrefix + child) << " -> "
          << quoted(parentPrefix + parent)
          << " [style=dashed, color=grey, constraint=false];\n";
  }
  out << "}\n";
  return out.str();
}

std::string export_dot(const StitchPlan& plan,
                       const std::map<std::string, GraphDescription>& services) {
  std::ostringstream out;
  out << "digraph \"plan\" {\n  rankdir=LR;\n";
  for (size_t k = 0; k < plan.fragments.size(); ++k) {
    const Fragment& f = plan.fragments[k];
    std::string prefix = "f" + std::to_string(k) + ".";
    out << "  subgraph " << quoted("cluster_f" + std::to_string(k))
        << " {\n    label="
        << quoted(f.serviceId + " L" + std::to_string(f.serviceLayer))
        << ";\n";
    emit_layer(out, fragment_subgraph(f, services), prefix, "    ");
    out << "  }\n";
  }
  for (const auto& l : plan.links) {
    std::string from = "f" + std::to_string(l.fromFragment) + "." + l.fromPort;
    std::string to = "f" + std::to_string(l.toFragment) + "." + l.toPort;
    out << "  " << quoted(from) << " -> " << quoted(to);
    if (l.chain.empty()) {
      out << ";\n";
    } else {
      // Thick arrows mark format conversions.
      std::string label;
      for (size_t i = 0; i < l.chain.size(); ++i)
        label += (i ? "+" : "") + l.chain[i].id;
      out << " [penwidth=2.5, label=" << quoted(label) << "];\n";
    }
  }
  out << "}\n";
  return out.str();
}

}  // namespace stratos
