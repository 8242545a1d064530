#pragma once

#include <algorithm>
#include <cstdint>
#include <deque>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "manybody/matrix.hpp"

namespace manybody {

using NodeId = std::uint32_t;
using EdgeId = std::uint32_t;

constexpr int kUnreachable = -1;

/// Immutable undirected graph: sorted compressed neighbor lists, dense edge
/// ids in sorted-pair order. Construct through build_graph().
struct Graph {
    std::size_t n_nodes = 0;
    std::vector<std::pair<NodeId, NodeId>> edges;  // (u,v) with u < v, sorted
    std::vector<std::vector<NodeId>> adjacency;    // neighbors, ascending
    std::vector<std::uint32_t> degrees;

    std::size_t n_edges() const { return edges.size(); }

    bool has_edge(NodeId u, NodeId v) const {
        const auto& nu = adjacency[u];
        return std::binary_search(nu.begin(), nu.end(), v);
    }

    /// Dense id of edge {u,v}; throws if absent.
    EdgeId edge_id(NodeId u, NodeId v) const {
        if (u > v) std::swap(u, v);
        auto it = edge_index.find({u, v});
        if (it == edge_index.end())
            throw std::invalid_argument("edge_id: no edge (" + std::to_string(u) + "," +
                                        std::to_string(v) + ")");
        return it->second;
    }

    std::map<std::pair<NodeId, NodeId>, EdgeId> edge_index;
};

enum class LaplacianKind {
    unnormalized,           // D - A
    symmetric_normalized,   // I - D^{-1/2} A D^{-1/2}
    normalized_adjacency,   // D^{-1/2} A D^{-1/2}
};

inline Graph build_graph(const std::vector<std::pair<NodeId, NodeId>>& edge_list,
                         std::size_t n_nodes) {
    Graph g;
    g.n_nodes = n_nodes;
    std::vector<std::pair<NodeId, NodeId>> es;
    es.reserve(edge_list.size());
    for (auto [u, v] : edge_list) {
        if (u >= n_nodes || v >= n_nodes)
            throw std::invalid_argument("build_graph: node id out of range: (" +
                                        std::to_string(u) + "," + std::to_string(v) +
                                        ") with n_nodes=" + std::to_string(n_nodes));
        if (u == v)
            throw std::invalid_argument("build_graph: self-loop at node " + std::to_string(u));
        if (u > v) std::swap(u, v);
        es.emplace_back(u, v);
    }
    std::sort(es.begin(), es.end());
    es.erase(std::unique(es.begin(), es.end()), es.end());

    g.edges = std::move(es);
    g.adjacency.assign(n_nodes, {});
    for (EdgeId e = 0; e < g.edges.size(); ++e) {
        auto [u, v] = g.edges[e];
        g.adjacency[u].push_back(v);
        g.adjacency[v].push_back(u);
        g.edge_index[{u, v}] = e;
    }
    for (auto& nb : g.adjacency) std::sort(nb.begin(), nb.end());
    g.degrees.resize(n_nodes);
    for (std::size_t i = 0; i < n_nodes; ++i)
        g.degrees[i] = static_cast<std::uint32_t>(g.adjacency[i].size());
    return g;
}

/// Dense Laplacian of the requested kind. Optional per-edge weights must have
/// one entry per edge (dense edge-id order). Isolated nodes give zero
/// rows/columns in the normalized forms.
inline Matrix laplacian(const Graph& g, LaplacianKind kind,
                        const std::vector<double>* weights = nullptr) {
    if (weights && weights->size() != g.n_edges())
        throw std::invalid_argument("laplacian: weight count != edge count");
    const std::size_t n = g.n_nodes;
    std::vector<double> wdeg(n, 0.0);
    for (EdgeId e = 0; e < g.n_edges(); ++e) {
        const double w = weights ? (*weights)[e] : 1.0;
        wdeg[g.edges[e].first] += w;
        wdeg[g.edges[e].second] += w;
    }
    Matrix m(n, n);
    if (kind == LaplacianKind::unnormalized) {
        for (std::size_t i = 0; i < n; ++i) m(i, i) = wdeg[i];
        for (EdgeId e = 0; e < g.n_edges(); ++e) {
            const double w = weights ? (*weights)[e] : 1.0;
            auto [u, v] = g.edges[e];
            m(u, v) -= w;
            m(v, u) -= w;
        }
        return m;
    }
    std::vector<double> inv_sqrt(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        if (wdeg[i] > 0.0) inv_sqrt[i] = 1.0 / std::sqrt(wdeg[i]);
    const bool is_lap = (kind == LaplacianKind::symmetric_normalized);
    if (is_lap)
        for (std::size_t i = 0; i < n; ++i) m(i, i) = (wdeg[i] > 0.0) ? 1.0 : 0.0;
    for (EdgeId e = 0; e < g.n_edges(); ++e) {
        const double w = weights ? (*weights)[e] : 1.0;
        auto [u, v] = g.edges[e];
        const double a = w * inv_sqrt[u] * inv_sqrt[v];
        m(u, v) += is_lap ? -a : a;
        m(v, u) += is_lap ? -a : a;
    }
    return m;
}

/// All-pairs BFS hop distances; kUnreachable marks disconnected pairs.
inline std::vector<std::vector<int>> shortest_path_lengths(const Graph& g) {
    const std::size_t n = g.n_nodes;
    std::vector<std::vector<int>> dist(n, std::vector<int>(n, kUnreachable));
    std::deque<NodeId> queue;
    for (NodeId s = 0; s < n; ++s) {
        auto& d = dist[s];
        d[s] = 0;
        queue.clear();
        queue.push_back(s);
        while (!queue.empty()) {
            NodeId u = queue.front();
            queue.pop_front();
            for (NodeId v : g.adjacency[u]) {
                if (d[v] == kUnreachable) {
                    d[v] = d[u] + 1;
                    queue.push_back(v);
                }
            }
        }
    }
    return dist;
}

inline bool is_connected(const Graph& g) {
    if (g.n_nodes == 0) return true;
    std::vector<char> seen(g.n_nodes, 0);
    std::deque<NodeId> queue{0};
    seen[0] = 1;
    std::size_t count = 1;
    while (!queue.empty()) {
        NodeId u = queue.front();
        queue.pop_front();
        for (NodeId v : g.adjacency[u]) {
            if (!seen[v]) {
                seen[v] = 1;
                ++count;
                queue.push_back(v);
            }
        }
    }
    return count == g.n_nodes;
}

/// Mean over reachable unordered pairs; unreachable pairs are excluded.
inline double average_shortest_path(const Graph& g) {
    auto dist = shortest_path_lengths(g);
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t i = 0; i < g.n_nodes; ++i)
        for (std::size_t j = i + 1; j < g.n_nodes; ++j)
            if (dist[i][j] != kUnreachable) {
                sum += dist[i][j];
                ++count;
            }
    return count ? sum / double(count) : 0.0;
}

inline std::size_t triangles_at(const Graph& g, NodeId i) {
    const auto& nb = g.adjacency[i];
    std::size_t t = 0;
    for (std::size_t a = 0; a < nb.size(); ++a)
        for (std::size_t b = a + 1; b < nb.size(); ++b)
            if (g.has_edge(nb[a], nb[b])) ++t;
    return t;
}

/// Mean local clustering coefficient; nodes of degree < 2 contribute zero.
inline double average_clustering(const Graph& g) {
    if (g.n_nodes == 0) return 0.0;
    double sum = 0.0;
    for (NodeId i = 0; i < g.n_nodes; ++i) {
        const double d = g.degrees[i];
        if (d < 2) continue;
        sum += 2.0 * double(triangles_at(g, i)) / (d * (d - 1.0));
    }
    return sum / double(g.n_nodes);
}

/// Relabel nodes: node i of the input becomes perm[i] of the output.
inline Graph permute_graph(const Graph& g, const std::vector<NodeId>& perm) {
    std::vector<std::pair<NodeId, NodeId>> edges;
    edges.reserve(g.n_edges());
    for (auto [u, v] : g.edges) edges.emplace_back(perm[u], perm[v]);
    return build_graph(edges, g.n_nodes);
}

inline FeatureMatrix permute_rows(const FeatureMatrix& x, const std::vector<NodeId>& perm) {
    FeatureMatrix y(x.rows(), x.cols());
    for (std::size_t i = 0; i < x.rows(); ++i)
        for (std::size_t j = 0; j < x.cols(); ++j) y(perm[i], j) = x(i, j);
    return y;
}

}  // namespace manybody
