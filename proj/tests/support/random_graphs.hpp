#pragma once

// Shared test helpers: small random graphs, permutations, random features.

#include <numeric>
#include <vector>

#include "manybody/graph.hpp"
#include "manybody/matrix.hpp"
#include "manybody/rng.hpp"

namespace test_support {

inline manybody::Graph random_graph(manybody::Rng& rng, std::size_t n, double p) {
    std::vector<std::pair<manybody::NodeId, manybody::NodeId>> edges;
    for (manybody::NodeId i = 0; i < n; ++i)
        for (manybody::NodeId j = i + 1; j < n; ++j)
            if (rng.next_double() < p) edges.emplace_back(i, j);
    return manybody::build_graph(edges, n);
}

/// Random connected graph: resamples until connected (bounded attempts).
inline manybody::Graph random_connected_graph(manybody::Rng& rng, std::size_t n, double p) {
    for (int attempt = 0; attempt < 1000; ++attempt) {
        manybody::Graph g = random_graph(rng, n, p);
        if (manybody::is_connected(g)) return g;
    }
    throw std::runtime_error("random_connected_graph: no connected sample");
}

inline std::vector<manybody::NodeId> random_permutation(manybody::Rng& rng, std::size_t n) {
    std::vector<manybody::NodeId> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    for (std::size_t i = n; i > 1; --i) {
        std::size_t j = rng.next_below(i);
        std::swap(perm[i - 1], perm[j]);
    }
    return perm;
}

inline manybody::Matrix random_matrix(manybody::Rng& rng, std::size_t rows, std::size_t cols,
                                      double scale = 1.0) {
    manybody::Matrix m(rows, cols);
    for (double& v : m.data()) v = rng.uniform(-scale, scale);
    return m;
}

inline manybody::Matrix random_symmetric(manybody::Rng& rng, std::size_t n, double scale = 1.0) {
    manybody::Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i; j < n; ++j) {
            double v = rng.uniform(-scale, scale);
            m(i, j) = v;
            m(j, i) = v;
        }
    return m;
}

}  // namespace test_support
