#pragma once

// Exhaustive-subgraph curvature oracle: walks explicit node triples and
// quadruples instead of neighbor-set scans. Shares only the final
// counts-to-value formula with the implementation, so integer agreement
// implies bit-identical curvature values.

#include <algorithm>
#include <map>

#include "manybody/curvature.hpp"
#include "manybody/graph.hpp"

namespace test_support {

inline manybody::CurvatureCounts brute_counts(const manybody::Graph& g, manybody::NodeId i,
                                              manybody::NodeId j) {
    using manybody::NodeId;
    manybody::CurvatureCounts c;
    c.deg_i = g.degrees[i];
    c.deg_j = g.degrees[j];
    for (NodeId k = 0; k < g.n_nodes; ++k)
        if (k != i && k != j && g.has_edge(k, i) && g.has_edge(k, j)) ++c.triangles;

    // every chord-free 4-cycle i-k-w-j, counted per traversing node
    std::map<NodeId, std::uint32_t> per_k, per_w;
    for (NodeId k = 0; k < g.n_nodes; ++k) {
        if (k == i || k == j || !g.has_edge(i, k) || g.has_edge(k, j)) continue;
        for (NodeId w = 0; w < g.n_nodes; ++w) {
            if (w == i || w == j || w == k) continue;
            if (!g.has_edge(k, w) || !g.has_edge(w, j) || g.has_edge(i, w)) continue;
            ++per_k[k];
            ++per_w[w];
        }
    }
    c.sharp_i = static_cast<std::uint32_t>(per_k.size());
    c.sharp_j = static_cast<std::uint32_t>(per_w.size());
    for (auto& [node, count] : per_k) c.gamma_max = std::max(c.gamma_max, count);
    for (auto& [node, count] : per_w) c.gamma_max = std::max(c.gamma_max, count);
    return c;
}

inline manybody::CurvatureMap brute_curvature(const manybody::Graph& g) {
    manybody::CurvatureMap cm;
    cm.values.resize(g.n_edges());
    cm.rounded.resize(g.n_edges());
    for (manybody::EdgeId e = 0; e < g.n_edges(); ++e) {
        auto [u, v] = g.edges[e];
        const double ric = manybody::curvature_from_counts(brute_counts(g, u, v));
        cm.values[e] = ric;
        cm.rounded[e] = (ric > 0.0) - (ric < 0.0);
    }
    return cm;
}

}  // namespace test_support
