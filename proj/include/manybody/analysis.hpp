#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "manybody/eigen.hpp"
#include "manybody/graph.hpp"
#include "manybody/matrix.hpp"
#include "manybody/model.hpp"

namespace manybody {

/// Dirichlet energy, edge-sum form: Σ_{(i,j)∈E} ‖h_i/√d_i − h_j/√d_j‖².
/// Zero-degree nodes have no incident terms by construction.
inline double dirichlet_energy(const Graph& g, const FeatureMatrix& h) {
    if (h.rows() != g.n_nodes) throw std::invalid_argument("dirichlet_energy: row mismatch");
    double total = 0.0;
    for (auto [u, v] : g.edges) {
        const double su = 1.0 / std::sqrt(double(g.degrees[u]));
        const double sv = 1.0 / std::sqrt(double(g.degrees[v]));
        const double* hu = h.row(u);
        const double* hv = h.row(v);
        for (std::size_t c = 0; c < h.cols(); ++c) {
            const double diff = hu[c] * su - hv[c] * sv;
            total += diff * diff;
        }
    }
    return total;
}

/// Same quantity through Tr(Hᵀ𝓛H) with the normalized Laplacian, evaluated
/// sparsely; the dual route for cross-checking the edge-sum form.
inline double dirichlet_energy_trace(const Graph& g, const FeatureMatrix& h) {
    if (h.rows() != g.n_nodes) throw std::invalid_argument("dirichlet_energy_trace: row mismatch");
    double total = 0.0;
    for (NodeId i = 0; i < g.n_nodes; ++i) {
        if (g.degrees[i] == 0) continue;
        const double* row = h.row(i);
        total += dot(row, row, h.cols());
    }
    for (auto [u, v] : g.edges) {
        const double w = 1.0 / std::sqrt(double(g.degrees[u]) * double(g.degrees[v]));
        total -= 2.0 * w * dot(h.row(u), h.row(v), h.cols());
    }
    return total;
}

/// λ_max of the symmetric-normalized Laplacian: exact (Jacobi) for small
/// graphs, deterministic power iteration beyond that.
inline double lambda_max_normalized(const Graph& g) {
    if (g.n_nodes == 0 || g.n_edges() == 0) return 0.0;
    if (g.n_nodes <= 256) {
        auto d = eigh(laplacian(g, LaplacianKind::symmetric_normalized));
        return d.eigenvalues.back();
    }
    FeatureMatrix v(g.n_nodes, 1, 1.0 / std::sqrt(double(g.n_nodes)));
    double lambda = 0.0;
    for (int it = 0; it < 300; ++it) {
        // y = 𝓛 v = v(on non-isolated) − N v
        FeatureMatrix y = normalized_adjacency_apply(g, v);
        for (NodeId i = 0; i < g.n_nodes; ++i)
            y(i, 0) = (g.degrees[i] > 0 ? v(i, 0) : 0.0) - y(i, 0);
        double norm = 0.0, ray = 0.0;
        for (NodeId i = 0; i < g.n_nodes; ++i) {
            ray += v(i, 0) * y(i, 0);
            norm += y(i, 0) * y(i, 0);
        }
        lambda = ray;
        norm = std::sqrt(norm);
        if (norm == 0.0) return 0.0;
        for (NodeId i = 0; i < g.n_nodes; ++i) v(i, 0) = y(i, 0) / norm;
    }
    return lambda;
}

/// The learned-potential bound: λ_max · |N| · (∏_{k=2..ν} [k·C(d_max,k−1)]^t ·
/// ∏_t w^(t) · h)², with w^(t) the observed max-abs parameter of layer t and
/// h the max-abs entry of the layer-0 hidden features.
struct BoundReport {
    double observed_energy = 0.0;
    double bound_value = 0.0;
    bool satisfied = false;
    double lambda_max = 0.0;
    std::size_t d_max = 0;
    std::vector<double> per_layer_weight;  // w^(t)
    double feature_bound = 0.0;            // h
};

inline double layer_max_abs_param(const LayerParams& l) {
    double m = std::max(l.w_x.max_abs(), l.w_y.max_abs());
    for (double v : l.theta2) m = std::max(m, std::abs(v));
    for (const auto& t : l.theta_k)
        for (double v : t) m = std::max(m, std::abs(v));
    return m;
}

inline double bound_order_factor(std::size_t d_max, std::size_t k) {
    return double(k) * double(binomial(d_max, k - 1));
}

inline BoundReport energy_bound(const Graph& g, const ModelConfig& config,
                                const ModelState& state, double h0_bound,
                                double observed_energy) {
    BoundReport r;
    r.observed_energy = observed_energy;
    r.lambda_max = lambda_max_normalized(g);
    for (auto d : g.degrees) r.d_max = std::max<std::size_t>(r.d_max, d);
    r.feature_bound = h0_bound;
    double inner = h0_bound;
    for (const auto& l : state.layers) {
        const double w = layer_max_abs_param(l);
        r.per_layer_weight.push_back(w);
        inner *= w;
    }
    const double t = double(config.layers);
    for (std::size_t k = 2; k <= config.nu; ++k)
        inner *= std::pow(bound_order_factor(r.d_max, k), t);
    r.bound_value = r.lambda_max * double(g.n_nodes) * inner * inner;
    r.satisfied = observed_energy <= r.bound_value;
    return r;
}

/// Per-order Dirichlet energies of one forward pass: k = 2 is the two-body
/// message, k >= 3 the motif sums, each averaged over layers; log values are
/// floored at 1e−12.
struct EnergyTraceRow {
    std::vector<double> energy;      // index k-2
    std::vector<double> log_energy;  // ln(max(energy, 1e-12))
};

inline EnergyTraceRow per_order_energy(const ModelContext& ctx, const ForwardCache& cache) {
    const Graph& g = *ctx.graph;
    const std::size_t orders = ctx.config.nu - 1;  // k = 2..nu
    EnergyTraceRow row;
    row.energy.assign(orders, 0.0);
    if (cache.layers.empty()) throw std::invalid_argument("per_order_energy: missing cache");
    for (const auto& entry : cache.layers) {
        row.energy[0] += dirichlet_energy(g, entry.x);
        for (std::size_t oi = 0; oi < entry.s.size(); ++oi)
            row.energy[oi + 1] += dirichlet_energy(g, entry.s[oi]);
    }
    for (double& e : row.energy) e /= double(cache.layers.size());
    row.log_energy.resize(orders);
    for (std::size_t i = 0; i < orders; ++i)
        row.log_energy[i] = std::log(std::max(row.energy[i], 1e-12));
    return row;
}

struct BenchResult {
    std::string model;
    std::size_t layers = 0;
    double mean_ms = 0.0;
    double std_ms = 0.0;
    double median_of_means_ms = 0.0;
    std::size_t threads = 1;
};

/// Wall-clock per repetition of `step` (monotonic clock), with `warmup`
/// runs excluded; median-of-means over 3 groups for the headline number.
inline BenchResult time_workload(const std::string& name, std::size_t layers,
                                 const std::function<void()>& step, std::size_t reps,
                                 std::size_t warmup = 2) {
    using clock = std::chrono::steady_clock;
    for (std::size_t i = 0; i < warmup; ++i) step();
    std::vector<double> ms;
    ms.reserve(reps);
    for (std::size_t i = 0; i < reps; ++i) {
        const auto t0 = clock::now();
        step();
        const auto t1 = clock::now();
        ms.push_back(std::chrono::duration<double, std::milli>(t1 - t0).count());
    }
    BenchResult r;
    r.model = name;
    r.layers = layers;
    for (double v : ms) r.mean_ms += v;
    r.mean_ms /= double(ms.size());
    for (double v : ms) r.std_ms += (v - r.mean_ms) * (v - r.mean_ms);
    r.std_ms = std::sqrt(r.std_ms / double(ms.size()));
    const std::size_t groups = std::min<std::size_t>(5, ms.size());
    std::vector<double> means;
    for (std::size_t gi = 0; gi < groups; ++gi) {
        double m = 0.0;
        std::size_t count = 0;
        for (std::size_t i = gi; i < ms.size(); i += groups) {
            m += ms[i];
            ++count;
        }
        means.push_back(m / double(count));
    }
    std::sort(means.begin(), means.end());
    r.median_of_means_ms = means[means.size() / 2];
    return r;
}

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;
};

inline LinearFit linear_fit(const std::vector<double>& xs, const std::vector<double>& ys) {
    const std::size_t n = xs.size();
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= double(n);
    my /= double(n);
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
        syy += (ys[i] - my) * (ys[i] - my);
    }
    LinearFit f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    double ss_res = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double pred = f.intercept + f.slope * xs[i];
        ss_res += (ys[i] - pred) * (ys[i] - pred);
    }
    f.r2 = syy > 0.0 ? 1.0 - ss_res / syy : 1.0;
    return f;
}

}  // namespace manybody
