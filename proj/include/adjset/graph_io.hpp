#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "adjset/graph.hpp"

namespace adjset {

/// {"nodes":[{"id","role","observed"}...],"directed":[[a,b]...],"bidirected":[[a,b]...]}
/// Serialization is canonical: nodes sorted by id, edges sorted lexicographically.
nlohmann::json graph_to_json(const Graph& g);
Graph graph_from_json(const nlohmann::json& j);

/// Parse errors carry the line and column of the offending byte.
Graph parse_graph(const std::string& text);
Graph load_graph(const std::filesystem::path& path);
void save_graph(const Graph& g, const std::filesystem::path& path);

}  // namespace adjset
