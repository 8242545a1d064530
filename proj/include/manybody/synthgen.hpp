#pragma once

#include <cmath>
#include <cstdint>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "manybody/eigen.hpp"
#include "manybody/graph.hpp"
#include "manybody/matrix.hpp"
#include "manybody/rng.hpp"

namespace manybody {

enum class TargetKind { dist_emph, clust_emph, spectral_dist, spectral_adj, none };

inline std::string to_string(TargetKind t) {
    switch (t) {
        case TargetKind::dist_emph: return "dist-emph";
        case TargetKind::clust_emph: return "clust-emph";
        case TargetKind::spectral_dist: return "spectral-dist";
        case TargetKind::spectral_adj: return "spectral-adj";
        case TargetKind::none: return "none";
    }
    return "?";
}

inline TargetKind target_kind_from_string(const std::string& s) {
    if (s == "dist-emph") return TargetKind::dist_emph;
    if (s == "clust-emph") return TargetKind::clust_emph;
    if (s == "spectral-dist") return TargetKind::spectral_dist;
    if (s == "spectral-adj") return TargetKind::spectral_adj;
    if (s == "none") return TargetKind::none;
    throw std::invalid_argument("unknown target kind: " + s);
}

// target function constants; recorded in every dataset manifest
constexpr double kDistTargetScale = 2.0;   // exp(avg_sp / c1)
constexpr double kClustTargetScale = 10.0; // log(1 + c2 * avg_clust)
constexpr double kClassMeanScale = 0.2;    // heterophilic class-mean magnitude

inline Graph gen_erdos_renyi(std::size_t n, double p, std::uint64_t seed) {
    if (n < 2) throw std::invalid_argument("gen_erdos_renyi: need n >= 2");
    if (p < 0.0 || p > 1.0) throw std::invalid_argument("gen_erdos_renyi: p outside [0,1]");
    Rng rng(derive_seed(seed, 0x6572));
    std::vector<std::pair<NodeId, NodeId>> edges;
    for (NodeId i = 0; i < n; ++i)
        for (NodeId j = i + 1; j < n; ++j)
            if (rng.next_double() < p) edges.emplace_back(i, j);
    return build_graph(edges, n);
}

inline Graph gen_ring(std::size_t n) {
    if (n < 3) throw std::invalid_argument("gen_ring: need n >= 3");
    std::vector<std::pair<NodeId, NodeId>> edges;
    for (NodeId i = 0; i < n; ++i) edges.emplace_back(i, NodeId((i + 1) % n));
    return build_graph(edges, n);
}

/// Ring plus crossing chords (i, n−i+offset mod n) for i = 1..n/2−1: pairs
/// mirrored across the 0 ↔ n/2 axis, so the antipodal distance n/2 survives.
/// offset shifts the mirror axis; 0 is the usual construction.
inline Graph gen_crossed_ring(std::size_t n, std::size_t offset = 0) {
    if (n < 6 || n % 2 != 0)
        throw std::invalid_argument("gen_crossed_ring: need even n >= 6");
    std::vector<std::pair<NodeId, NodeId>> edges;
    for (NodeId i = 0; i < n; ++i) edges.emplace_back(i, NodeId((i + 1) % n));
    for (NodeId i = 1; i < n / 2; ++i) {
        NodeId j = NodeId((n - i + offset) % n);
        if (j != i && j != (i + 1) % n && (i + n - 1) % n != j) edges.emplace_back(i, j);
    }
    return build_graph(edges, n);
}

/// Two m-cliques joined by a path with `path_len` interior nodes
/// (path_len + 1 bridging edges).
inline Graph gen_clique_path(std::size_t m, std::size_t path_len) {
    if (m < 2) throw std::invalid_argument("gen_clique_path: need clique size >= 2");
    std::vector<std::pair<NodeId, NodeId>> edges;
    const NodeId path_start = NodeId(m);
    const NodeId second_clique = NodeId(m + path_len);
    for (NodeId i = 0; i < m; ++i)
        for (NodeId j = i + 1; j < m; ++j) {
            edges.emplace_back(i, j);
            edges.emplace_back(second_clique + i, second_clique + j);
        }
    NodeId prev = NodeId(m - 1);  // last node of the first clique
    for (std::size_t s = 0; s < path_len; ++s) {
        edges.emplace_back(prev, NodeId(path_start + s));
        prev = NodeId(path_start + s);
    }
    edges.emplace_back(prev, second_clique);
    return build_graph(edges, 2 * m + path_len);
}

/// Path of `spine_len` nodes, each with `leaves` pendant neighbors.
/// Spine nodes come first (0..spine_len-1), then the leaves in spine order.
inline Graph gen_spine(std::size_t spine_len, std::size_t leaves) {
    if (spine_len < 2) throw std::invalid_argument("gen_spine: need spine length >= 2");
    std::vector<std::pair<NodeId, NodeId>> edges;
    for (NodeId i = 0; i + 1 < spine_len; ++i) edges.emplace_back(i, i + 1);
    NodeId next = NodeId(spine_len);
    for (NodeId i = 0; i < spine_len; ++i)
        for (std::size_t f = 0; f < leaves; ++f) edges.emplace_back(i, next++);
    return build_graph(edges, spine_len * (1 + leaves));
}

struct HeterophilicGraph {
    Graph graph;
    std::vector<int> labels;
    FeatureMatrix features;  // class-conditional Gaussians
};

/// Uniform labels; n*avg_degree/2 distinct edges by repeated pair sampling,
/// accepting a cross-label pair with probability p_hetero and a same-label
/// pair with 1−p_hetero. Features: per-class Gaussian means (scale
/// kClassMeanScale) plus unit noise.
inline HeterophilicGraph gen_heterophilic(std::size_t n, std::size_t n_classes,
                                          std::size_t feature_dim, double avg_degree,
                                          double p_hetero, std::uint64_t seed) {
    if (n_classes < 2) throw std::invalid_argument("gen_heterophilic: need n_classes >= 2");
    if (p_hetero < 0.0 || p_hetero > 1.0)
        throw std::invalid_argument("gen_heterophilic: p_hetero outside [0,1]");
    HeterophilicGraph out;
    Rng rng(derive_seed(seed, 0x686574));
    out.labels.resize(n);
    for (auto& l : out.labels) l = int(rng.next_below(n_classes));

    const std::size_t m = std::size_t(std::llround(double(n) * avg_degree / 2.0));
    std::set<std::pair<NodeId, NodeId>> chosen;
    std::vector<std::pair<NodeId, NodeId>> edges;
    const std::size_t max_edges = n * (n - 1) / 2;
    while (edges.size() < std::min(m, max_edges)) {
        NodeId i = NodeId(rng.next_below(n));
        NodeId j = NodeId(rng.next_below(n));
        if (i == j) continue;
        if (i > j) std::swap(i, j);
        if (chosen.count({i, j})) continue;
        const double accept = (out.labels[i] != out.labels[j]) ? p_hetero : 1.0 - p_hetero;
        if (rng.next_double() < accept) {
            chosen.insert({i, j});
            edges.emplace_back(i, j);
        }
    }
    out.graph = build_graph(edges, n);

    Matrix means(n_classes, feature_dim);
    for (double& v : means.data()) v = kClassMeanScale * rng.normal();
    out.features = FeatureMatrix(n, feature_dim);
    for (std::size_t i = 0; i < n; ++i) {
        const double* mu = means.row(out.labels[i]);
        double* row = out.features.row(i);
        for (std::size_t f = 0; f < feature_dim; ++f) row[f] = mu[f] + rng.normal();
    }
    return out;
}

/// Acceptance-model expectation of the cross-label edge fraction for the
/// sampler above, from the realized label counts.
inline double expected_cross_fraction(const std::vector<int>& labels, std::size_t n_classes,
                                      double p_hetero) {
    std::vector<double> counts(n_classes, 0.0);
    for (int l : labels) counts[l] += 1.0;
    const double n = double(labels.size());
    double same_pair = 0.0;
    for (double c : counts) same_pair += c * (c - 1.0);
    const double q_diff = 1.0 - same_pair / (n * (n - 1.0));
    const double cross = q_diff * p_hetero;
    const double same = (1.0 - q_diff) * (1.0 - p_hetero);
    return cross / (cross + same);
}

inline double observed_cross_fraction(const Graph& g, const std::vector<int>& labels) {
    if (g.n_edges() == 0) return 0.0;
    std::size_t cross = 0;
    for (auto [u, v] : g.edges)
        if (labels[u] != labels[v]) ++cross;
    return double(cross) / double(g.n_edges());
}

/// Synthetic regression target per graph. Distance-based kinds reject
/// disconnected graphs.
inline double energy_target(const Graph& g, TargetKind kind) {
    switch (kind) {
        case TargetKind::dist_emph: {
            if (!is_connected(g))
                throw std::invalid_argument("energy_target: dist-emph needs a connected graph");
            return std::exp(average_shortest_path(g) / kDistTargetScale);
        }
        case TargetKind::clust_emph:
            return std::log(1.0 + kClustTargetScale * average_clustering(g));
        case TargetKind::spectral_dist: {
            if (!is_connected(g))
                throw std::invalid_argument("energy_target: spectral-dist needs a connected graph");
            auto dist = shortest_path_lengths(g);
            Matrix dm(g.n_nodes, g.n_nodes);
            for (std::size_t i = 0; i < g.n_nodes; ++i)
                for (std::size_t j = 0; j < g.n_nodes; ++j) dm(i, j) = double(dist[i][j]);
            auto d = eigh(dm);
            double sum = 0.0;
            for (double v : d.eigenvalues) sum += std::abs(v);
            return sum;
        }
        case TargetKind::spectral_adj: {
            Matrix a(g.n_nodes, g.n_nodes);
            for (auto [u, v] : g.edges) {
                a(u, v) = 1.0;
                a(v, u) = 1.0;
            }
            auto d = eigh(a);
            double sum = 0.0;
            for (double v : d.eigenvalues) sum += std::abs(v);
            return sum;
        }
        case TargetKind::none: return 0.0;
    }
    return 0.0;
}

/// Regression node features: [degree / d_max, local clustering, unit
/// Gaussians...] padded to `dim`.
inline FeatureMatrix regression_features(const Graph& g, std::size_t dim, std::uint64_t seed) {
    if (dim < 1) throw std::invalid_argument("regression_features: dim must be >= 1");
    Rng rng(derive_seed(seed, 0x66656174));
    double d_max = 1.0;
    for (auto d : g.degrees) d_max = std::max(d_max, double(d));
    FeatureMatrix x(g.n_nodes, dim);
    for (NodeId i = 0; i < g.n_nodes; ++i) {
        double* row = x.row(i);
        row[0] = double(g.degrees[i]) / d_max;
        if (dim >= 2) {
            const double d = g.degrees[i];
            row[1] = d >= 2 ? 2.0 * double(triangles_at(g, i)) / (d * (d - 1.0)) : 0.0;
        }
        for (std::size_t f = 2; f < dim; ++f) row[f] = rng.normal();
    }
    return x;
}

}  // namespace manybody
