#pragma once

#include <algorithm>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "manybody/graph.hpp"

namespace manybody {

/// Per-edge Balanced Forman curvature, indexed by dense edge id, plus the
/// sign-rounded variant used by the fast motif path.
struct CurvatureMap {
    std::vector<double> values;
    std::vector<int> rounded;  // sign(values[e]) in {-1, 0, +1}

    double value(EdgeId e) const { return values[e]; }
    int sign(EdgeId e) const { return rounded[e]; }
};

/// Integer ingredients of the curvature formula for one edge:
/// triangles based at the edge, diagonal-free 4-cycle neighbor counts on each
/// side, and the max number of such 4-cycles through any single node.
struct CurvatureCounts {
    std::uint32_t deg_i = 0;
    std::uint32_t deg_j = 0;
    std::uint32_t triangles = 0;
    std::uint32_t sharp_i = 0;
    std::uint32_t sharp_j = 0;
    std::uint32_t gamma_max = 0;
};

/// Single evaluation point for the formula so that any two count routes that
/// agree on the integers agree on the float bit-for-bit.
inline double curvature_from_counts(const CurvatureCounts& c) {
    const double d_max = std::max(c.deg_i, c.deg_j);
    const double d_min = std::min(c.deg_i, c.deg_j);
    double ric = 2.0 / d_min + 2.0 / d_max - 2.0;
    if (c.triangles > 0) ric += 2.0 * double(c.triangles) / d_max + double(c.triangles) / d_min;
    const std::uint32_t sharp = c.sharp_i + c.sharp_j;
    if (sharp > 0) ric += double(sharp) / (double(c.gamma_max) * d_max);
    return ric;
}

/// Counts for edge (i,j) by scanning neighbor sets: common neighbors give
/// triangles; a neighbor k of i (k ≁ j) is in #²_i when some w ∈ N(k)∩N(j)
/// with w ≁ i, w ≠ i closes a chord-free 4-cycle i–k–w–j. gamma_max is the
/// largest per-node count of such 4-cycles on either side. O(d_max²) per edge
/// with sorted-list membership tests.
inline CurvatureCounts balanced_forman_counts(const Graph& g, NodeId i, NodeId j) {
    CurvatureCounts c;
    c.deg_i = g.degrees[i];
    c.deg_j = g.degrees[j];
    for (NodeId k : g.adjacency[i])
        if (k != j && g.has_edge(k, j)) ++c.triangles;

    // Each chord-free 4-cycle i–k–w–j traverses one node from each side;
    // side(i,j) walks the k's and side(j,i) the w's, so between them every
    // traversing node's cycle count feeds gamma_max.
    auto side = [&](NodeId a, NodeId b, std::uint32_t& sharp) {
        for (NodeId k : g.adjacency[a]) {
            if (k == b || g.has_edge(k, b)) continue;
            std::uint32_t cycles = 0;
            for (NodeId w : g.adjacency[k]) {
                if (w == a || w == b) continue;
                if (g.has_edge(w, b) && !g.has_edge(w, a)) ++cycles;
            }
            if (cycles > 0) {
                ++sharp;
                c.gamma_max = std::max(c.gamma_max, cycles);
            }
        }
    };
    side(i, j, c.sharp_i);
    side(j, i, c.sharp_j);
    return c;
}

/// Balanced Forman curvature for every edge. The formula is applied for all
/// degree combinations (a leaf edge gets its degree terms; an isolated dyad
/// evaluates to 2).
inline CurvatureMap balanced_forman(const Graph& g) {
    CurvatureMap cm;
    cm.values.resize(g.n_edges());
    cm.rounded.resize(g.n_edges());
    for (EdgeId e = 0; e < g.n_edges(); ++e) {
        auto [u, v] = g.edges[e];
        const double ric = curvature_from_counts(balanced_forman_counts(g, u, v));
        cm.values[e] = ric;
        cm.rounded[e] = (ric > 0.0) - (ric < 0.0);
    }
    return cm;
}

enum class WeightMode {
    literal,              // w = Ricci(e)
    shifted_positive,     // w = 2 − Ricci(e)  (PSD motif Laplacian)
    sign_rounded,         // w = sign(Ricci(e)) ∈ {−1,0,+1}
    unweighted_learnable, // w = 1; order-level coefficients absorb the edges
};

inline std::string to_string(WeightMode m) {
    switch (m) {
        case WeightMode::literal: return "literal";
        case WeightMode::shifted_positive: return "shifted-positive";
        case WeightMode::sign_rounded: return "sign-rounded";
        case WeightMode::unweighted_learnable: return "unweighted-learnable";
    }
    return "?";
}

inline WeightMode weight_mode_from_string(const std::string& s) {
    if (s == "literal") return WeightMode::literal;
    if (s == "shifted-positive") return WeightMode::shifted_positive;
    if (s == "sign-rounded") return WeightMode::sign_rounded;
    if (s == "unweighted-learnable") return WeightMode::unweighted_learnable;
    throw std::invalid_argument("unknown weight mode: " + s);
}

inline double motif_edge_weight(double ricci, WeightMode mode) {
    switch (mode) {
        case WeightMode::literal: return ricci;
        case WeightMode::shifted_positive: return 2.0 - ricci;
        case WeightMode::sign_rounded: return double((ricci > 0.0) - (ricci < 0.0));
        case WeightMode::unweighted_learnable: return 1.0;
    }
    return 0.0;
}

/// Weights for the star (center, leaves) under the chosen mode; every
/// (center, leaf) pair must be an edge.
inline std::vector<double> motif_edge_weights(const CurvatureMap& cm, const Graph& g,
                                              NodeId center, const std::vector<NodeId>& leaves,
                                              WeightMode mode) {
    std::vector<double> w;
    w.reserve(leaves.size());
    for (NodeId leaf : leaves) w.push_back(motif_edge_weight(cm.values[g.edge_id(center, leaf)], mode));
    return w;
}

}  // namespace manybody
