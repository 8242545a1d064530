#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "manybody/eigen.hpp"
#include "manybody/graph.hpp"
#include "manybody/matrix.hpp"

namespace manybody {

/// T_0(x), T_1(x), ..., T_max_order(x) by the three-term recurrence.
inline std::vector<double> chebyshev_values(double x, std::size_t max_order) {
    std::vector<double> t(max_order + 1);
    t[0] = 1.0;
    if (max_order >= 1) t[1] = x;
    for (std::size_t k = 2; k <= max_order; ++k) t[k] = 2.0 * x * t[k - 1] - t[k - 2];
    return t;
}

/// Spectral filter values g(λ) = Σ_{k'} θ_{k'} T_{k'+start}(λ̃) per eigenvalue,
/// with λ̃ = 2λ/λ_max − 1. `start` is 0 for the two-body expansion and 1 for
/// the motif expansions. λ_max must be positive; callers handle the fully
/// degenerate (all-zero-weight) motif case before getting here.
inline std::vector<double> chebyshev_filter(const EigenDecomposition& decomp,
                                            const std::vector<double>& coeffs, int start,
                                            double lambda_max) {
    if (coeffs.empty()) throw std::invalid_argument("chebyshev_filter: no coefficients");
    if (start != 0 && start != 1) throw std::invalid_argument("chebyshev_filter: start must be 0 or 1");
    if (!(lambda_max > 0.0))
        throw std::invalid_argument("chebyshev_filter: lambda_max must be positive");
    const std::size_t max_order = start + coeffs.size() - 1;
    std::vector<double> out(decomp.dim());
    for (std::size_t m = 0; m < decomp.dim(); ++m) {
        const double shifted = 2.0 * decomp.eigenvalues[m] / lambda_max - 1.0;
        const auto t = chebyshev_values(shifted, max_order);
        double g = 0.0;
        for (std::size_t j = 0; j < coeffs.size(); ++j) g += coeffs[j] * t[start + j];
        out[m] = g;
    }
    return out;
}

/// Basis convention for turning per-eigenvalue filter values into a node-space
/// operator. `spectral` is the projector form U·diag(g)·Uᵀ — well defined for
/// any orthonormal eigenbasis and permutation-equivariant. `transposed` is the
/// literal Uᵀ·diag(g)·U with the stored column-eigenvector matrix; it depends
/// on the solver's sign/degenerate-basis choices and is kept for comparison.
enum class FilterBasis { spectral, transposed };

inline FeatureMatrix apply_filter(const EigenDecomposition& decomp,
                                  const std::vector<double>& filtered_diag,
                                  const FeatureMatrix& h,
                                  FilterBasis basis = FilterBasis::spectral) {
    const std::size_t n = decomp.dim();
    if (filtered_diag.size() != n) throw std::invalid_argument("apply_filter: diag size mismatch");
    if (h.rows() != n) throw std::invalid_argument("apply_filter: feature rows != dimension");
    const Matrix& u = decomp.eigenvectors;
    const std::size_t d = h.cols();

    // coeffs = (basis == spectral ? Uᵀ h : U h), scaled by g, mapped back.
    Matrix coeffs(n, d);
    for (std::size_t m = 0; m < n; ++m)
        for (std::size_t i = 0; i < n; ++i) {
            const double w = (basis == FilterBasis::spectral) ? u(i, m) : u(m, i);
            if (w == 0.0) continue;
            const double* hrow = h.row(i);
            double* crow = coeffs.row(m);
            for (std::size_t j = 0; j < d; ++j) crow[j] += w * hrow[j];
        }
    for (std::size_t m = 0; m < n; ++m) {
        double* crow = coeffs.row(m);
        for (std::size_t j = 0; j < d; ++j) crow[j] *= filtered_diag[m];
    }
    FeatureMatrix out(n, d);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t m = 0; m < n; ++m) {
            const double w = (basis == FilterBasis::spectral) ? u(i, m) : u(m, i);
            if (w == 0.0) continue;
            const double* crow = coeffs.row(m);
            double* orow = out.row(i);
            for (std::size_t j = 0; j < d; ++j) orow[j] += w * crow[j];
        }
    return out;
}

/// y = D^{-1/2} A D^{-1/2} x over feature rows; neighbor order is fixed
/// (ascending), so the summation order is reproducible.
inline FeatureMatrix normalized_adjacency_apply(const Graph& g, const FeatureMatrix& h) {
    if (h.rows() != g.n_nodes)
        throw std::invalid_argument("normalized_adjacency_apply: row count mismatch");
    const std::size_t d = h.cols();
    std::vector<double> inv_sqrt(g.n_nodes, 0.0);
    for (std::size_t i = 0; i < g.n_nodes; ++i)
        if (g.degrees[i] > 0) inv_sqrt[i] = 1.0 / std::sqrt(double(g.degrees[i]));
    FeatureMatrix out(g.n_nodes, d);
    for (NodeId i = 0; i < g.n_nodes; ++i) {
        double* orow = out.row(i);
        for (NodeId j : g.adjacency[i]) {
            const double w = inv_sqrt[i] * inv_sqrt[j];
            const double* hrow = h.row(j);
            for (std::size_t c = 0; c < d; ++c) orow[c] += w * hrow[c];
        }
    }
    return out;
}

/// Two-body Chebyshev filter on the global symmetric-normalized Laplacian,
/// evaluated matrix-free: with λ_max = 2 the shifted operator is
/// L̃ = 𝓛 − I = −D^{-1/2}AD^{-1/2}, and X = Σ_{k'} θ_{k'} T_{k'}(L̃) H via the
/// vector recurrence. T_{k'} touches exactly the k'-hop neighborhood, so the
/// receptive field is exact (no eigensolver round-off leaking past it).
inline FeatureMatrix two_body_filter_apply(const Graph& g, const FeatureMatrix& h,
                                           const std::vector<double>& theta2) {
    if (theta2.empty()) throw std::invalid_argument("two_body_filter_apply: no coefficients");
    // L̃ = 𝓛 − I = −N except at isolated nodes, where the normalized Laplacian
    // row is zero and the shift leaves a −1 on the diagonal.
    auto ltilde_apply = [&](const FeatureMatrix& x) {
        FeatureMatrix y = normalized_adjacency_apply(g, x);
        for (double& v : y.data()) v = -v;
        for (NodeId i = 0; i < g.n_nodes; ++i)
            if (g.degrees[i] == 0) {
                const double* xrow = x.row(i);
                double* yrow = y.row(i);
                for (std::size_t c = 0; c < x.cols(); ++c) yrow[c] -= xrow[c];
            }
        return y;
    };
    FeatureMatrix prev;              // T_{k'-1}(L̃) H
    FeatureMatrix cur = h;           // T_{k'}(L̃) H
    FeatureMatrix acc(h.rows(), h.cols());
    for (std::size_t j = 0; j < acc.data().size(); ++j) acc.data()[j] = theta2[0] * h.data()[j];
    for (std::size_t k = 1; k < theta2.size(); ++k) {
        FeatureMatrix next = ltilde_apply(cur);
        if (k > 1)
            for (std::size_t j = 0; j < next.data().size(); ++j)
                next.data()[j] = 2.0 * next.data()[j] - prev.data()[j];
        prev = std::move(cur);
        cur = std::move(next);
        for (std::size_t j = 0; j < acc.data().size(); ++j)
            acc.data()[j] += theta2[k] * cur.data()[j];
    }
    return acc;
}

}  // namespace manybody
