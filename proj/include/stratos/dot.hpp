#pragma once

#include <map>
#include <string>

#include "stratos/graph.hpp"
#include "stratos/stitch.hpp"

namespace stratos {

/// Deterministic DOT rendering of a single layer: activities as ovals, data
/// nodes as note-shaped boxes labeled "N|F|S", relatedness as undirected
/// dashed edges.
std::string export_dot(const ServiceGraph& g, const std::string& name = "layer");

/// Whole description: one cluster per layer (layer 0 on top), dashed grey
/// parent edges between adjacent layers.
std::string export_dot(const GraphDescription& desc);

/// Stitch plan: one cluster per fragment with its internal dataflow, one edge
/// per glue link; links with converter chains are drawn thick and labeled
/// with the chain's converter ids.
std::string export_dot(const StitchPlan& plan,
                       const std::map<std::string, GraphDescription>& services);

}  // namespace stratos
