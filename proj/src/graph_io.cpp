#include "adjset/graph_io.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace adjset {

using nlohmann::json;

json graph_to_json(const Graph& g) {
    json nodes = json::array();
    for (const auto& n : g.nodes())
        nodes.push_back({{"id", n.id}, {"role", std::string(to_string(n.role))}, {"observed", n.observed}});
    auto edge_list = [&](const std::vector<Edge>& edges) {
        std::vector<std::pair<std::string, std::string>> named;
        for (const auto& [a, b] : edges) named.emplace_back(g.node(a).id, g.node(b).id);
        std::sort(named.begin(), named.end());
        json out = json::array();
        for (const auto& [a, b] : named) out.push_back(json::array({a, b}));
        return out;
    };
    return {{"nodes", nodes}, {"directed", edge_list(g.directed())}, {"bidirected", edge_list(g.bidirected())}};
}

Graph graph_from_json(const json& j) {
    if (!j.is_object() || !j.contains("nodes")) throw GraphError("graph JSON needs a \"nodes\" array");
    std::vector<Node> nodes;
    for (const auto& n : j.at("nodes")) {
        Node node;
        node.id = n.at("id").get<std::string>();
        node.role = role_from_string(n.value("role", std::string("feature")));
        node.observed = n.value("observed", true);
        nodes.push_back(std::move(node));
    }
    auto edges = [&](const char* key) {
        std::vector<std::pair<std::string, std::string>> out;
        if (!j.contains(key)) return out;
        for (const auto& e : j.at(key)) {
            if (!e.is_array() || e.size() != 2) throw GraphError(std::string("malformed edge in \"") + key + "\"");
            out.emplace_back(e[0].get<std::string>(), e[1].get<std::string>());
        }
        return out;
    };
    return Graph(std::move(nodes), edges("directed"), edges("bidirected"));
}

Graph parse_graph(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& err) {
        std::size_t line = 1, column = 1;
        const std::size_t limit = std::min<std::size_t>(err.byte > 0 ? err.byte - 1 : 0, text.size());
        for (std::size_t i = 0; i < limit; ++i) {
            if (text[i] == '\n') {
                ++line;
                column = 1;
            } else {
                ++column;
            }
        }
        throw GraphError("graph JSON parse error at line " + std::to_string(line) + ", column " +
                         std::to_string(column) + ": " + err.what());
    }
    try {
        return graph_from_json(j);
    } catch (const json::exception& err) {
        throw GraphError(std::string("graph JSON schema error: ") + err.what());
    }
}

Graph load_graph(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw GraphError("cannot open graph file " + path.string());
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_graph(buffer.str());
}

void save_graph(const Graph& g, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw GraphError("cannot write graph file " + path.string());
    out << graph_to_json(g).dump(2) << '\n';
}

}  // namespace adjset
