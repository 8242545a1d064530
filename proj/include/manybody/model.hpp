#pragma once

#include <cstdint>
#include <deque>
#include <memory>
#include <stdexcept>
#include <vector>

#include "manybody/chebyshev.hpp"
#include "manybody/curvature.hpp"
#include "manybody/graph.hpp"
#include "manybody/matrix.hpp"
#include "manybody/motif.hpp"
#include "manybody/rng.hpp"

namespace manybody {

struct ModelConfig {
    std::size_t nu = 2;                // max correlation order (includes the center)
    std::size_t layers = 1;
    std::size_t hidden_dim = 16;
    std::size_t cheb_order_2body = 2;  // number of two-body Chebyshev coefficients (k' = 0..K-1)
    WeightMode weight_mode = WeightMode::shifted_positive;
    std::size_t enumeration_cap = 64;  // max motifs per node per order; 0 = exhaustive
    std::uint64_t rng_seed = 0;
    FilterBasis filter_basis = FilterBasis::spectral;

    void validate() const {
        if (nu < 2) throw std::invalid_argument("ModelConfig: nu must be >= 2");
        if (layers < 1) throw std::invalid_argument("ModelConfig: layers must be >= 1");
        if (hidden_dim < 1) throw std::invalid_argument("ModelConfig: hidden_dim must be >= 1");
        if (cheb_order_2body < 1)
            throw std::invalid_argument("ModelConfig: cheb_order_2body must be >= 1");
    }
};

enum class TaskKind { regression, classification };

struct LayerParams {
    std::vector<double> theta2;                // two-body coefficients, k' from 0
    std::vector<std::vector<double>> theta_k;  // [k-3][k'-1], k = 3..nu, k' = 1..k
    Matrix w_x;                                // hidden x hidden
    Matrix w_y;                                // hidden x hidden
};

/// All learnable tensors. The same shape doubles as the gradient buffer.
struct ModelState {
    std::size_t input_dim = 0;
    std::size_t output_dim = 0;
    TaskKind task = TaskKind::regression;
    Matrix w_in;   // hidden x input
    std::vector<LayerParams> layers;
    Matrix w_out;  // output x hidden
    std::vector<double> b_out;
    // regression readout calibration (targets are standardized during
    // training); not trainable
    double target_mu = 0.0;
    double target_sigma = 1.0;

    bool all_finite() const {
        if (!w_in.all_finite() || !w_out.all_finite()) return false;
        for (double v : b_out)
            if (!std::isfinite(v)) return false;
        for (const auto& l : layers) {
            if (!l.w_x.all_finite() || !l.w_y.all_finite()) return false;
            for (double v : l.theta2)
                if (!std::isfinite(v)) return false;
            for (const auto& t : l.theta_k)
                for (double v : t)
                    if (!std::isfinite(v)) return false;
        }
        return true;
    }
};

/// Flat parameter views in a fixed order; gradcheck, Adam and the checkpoint
/// all iterate the same way.
inline std::vector<double*> parameter_pointers(ModelState& s) {
    std::vector<double*> out;
    for (double& v : s.w_in.data()) out.push_back(&v);
    for (auto& l : s.layers) {
        for (double& v : l.theta2) out.push_back(&v);
        for (auto& t : l.theta_k)
            for (double& v : t) out.push_back(&v);
        for (double& v : l.w_x.data()) out.push_back(&v);
        for (double& v : l.w_y.data()) out.push_back(&v);
    }
    for (double& v : s.w_out.data()) out.push_back(&v);
    for (double& v : s.b_out) out.push_back(&v);
    return out;
}

/// Zero every tensor in place (no reallocation: existing parameter pointers
/// into the buffer stay valid).
inline void zero_state(ModelState& s) {
    s.w_in.fill(0.0);
    s.w_out.fill(0.0);
    s.b_out.assign(s.b_out.size(), 0.0);
    for (auto& l : s.layers) {
        l.w_x.fill(0.0);
        l.w_y.fill(0.0);
        l.theta2.assign(l.theta2.size(), 0.0);
        for (auto& t : l.theta_k) t.assign(t.size(), 0.0);
    }
}

inline ModelState zeros_like(const ModelState& s) {
    ModelState z = s;
    z.w_in.fill(0.0);
    z.w_out.fill(0.0);
    z.b_out.assign(z.b_out.size(), 0.0);
    for (auto& l : z.layers) {
        l.w_x.fill(0.0);
        l.w_y.fill(0.0);
        l.theta2.assign(l.theta2.size(), 0.0);
        for (auto& t : l.theta_k) t.assign(t.size(), 0.0);
    }
    return z;
}

/// Everything derived from (graph, curvature, config) that stays fixed during
/// a run: the motif lists per node and order (frozen enumeration), their
/// spectra (cached for the discrete weight alphabets, owned otherwise) and the
/// leaf-slot translation into each cached canonical basis.
struct ModelContext {
    struct Motif {
        std::vector<NodeId> leaves;           // ascending node ids
        const MotifSpectrum* spectrum = nullptr;
        std::vector<std::uint8_t> slots;      // actual slot -> canonical slot; empty = identity
    };

    const Graph* graph = nullptr;
    ModelConfig config;
    CurvatureMap curvature;
    std::shared_ptr<SpectrumCache> cache;
    std::deque<MotifSpectrum> owned_spectra;          // continuous weight modes
    std::vector<std::vector<std::vector<Motif>>> motifs;  // [k-3][node]
    std::vector<double> mean_motif_count;             // per order k = 3..nu
    std::size_t degenerate_motifs = 0;                // zero-lambda_max stars seen at build

    std::size_t order_count() const { return config.nu >= 3 ? config.nu - 2 : 0; }
};

inline ModelContext build_context(const Graph& g, const CurvatureMap& cm,
                                  const ModelConfig& config) {
    config.validate();
    ModelContext ctx;
    ctx.graph = &g;
    ctx.config = config;
    ctx.curvature = cm;
    ctx.cache = std::make_shared<SpectrumCache>(config.filter_basis);
    const std::size_t orders = ctx.order_count();
    ctx.motifs.resize(orders);
    ctx.mean_motif_count.assign(orders, 0.0);
    for (std::size_t oi = 0; oi < orders; ++oi) {
        const std::size_t k = oi + 3;
        ctx.motifs[oi].resize(g.n_nodes);
        std::size_t total = 0;
        for (NodeId i = 0; i < g.n_nodes; ++i) {
            auto instances = enumerate_motifs(g, i, k, config.enumeration_cap, config.rng_seed);
            auto& list = ctx.motifs[oi][i];
            list.reserve(instances.size());
            for (auto& inst : instances) {
                ModelContext::Motif m;
                m.leaves = std::move(inst.leaves);
                switch (config.weight_mode) {
                    case WeightMode::sign_rounded: {
                        std::vector<int> signs;
                        signs.reserve(m.leaves.size());
                        for (NodeId leaf : m.leaves)
                            signs.push_back(cm.rounded[g.edge_id(i, leaf)]);
                        m.spectrum = &ctx.cache->get_signed(signs);
                        auto slots = SpectrumCache::canonical_slots(signs);
                        m.slots.assign(slots.begin(), slots.end());
                        break;
                    }
                    case WeightMode::unweighted_learnable:
                        m.spectrum = &ctx.cache->get_unweighted(k);
                        break;
                    default: {
                        auto w = motif_edge_weights(cm, g, i, m.leaves, config.weight_mode);
                        ctx.owned_spectra.push_back(make_motif_spectrum(w, config.filter_basis));
                        m.spectrum = &ctx.owned_spectra.back();
                        break;
                    }
                }
                if (m.spectrum->degenerate) ++ctx.degenerate_motifs;
                list.push_back(std::move(m));
            }
            total += list.size();
        }
        ctx.mean_motif_count[oi] = g.n_nodes ? double(total) / double(g.n_nodes) : 0.0;
    }
    return ctx;
}

inline ModelState init_state(const ModelContext& ctx, std::size_t input_dim,
                             std::size_t output_dim, TaskKind task, std::uint64_t seed) {
    const ModelConfig& cfg = ctx.config;
    const std::size_t d = cfg.hidden_dim;
    Rng rng(derive_seed(seed, 0x696e6974));
    auto uniform_fill = [&](Matrix& m, double bound) {
        for (double& v : m.data()) v = rng.uniform(-bound, bound);
    };
    ModelState s;
    s.input_dim = input_dim;
    s.output_dim = output_dim;
    s.task = task;
    s.w_in = Matrix(d, input_dim);
    uniform_fill(s.w_in, 1.0 / std::sqrt(double(input_dim)));
    s.layers.resize(cfg.layers);
    for (auto& l : s.layers) {
        l.theta2.resize(cfg.cheb_order_2body);
        const double b2 = 1.0 / std::sqrt(double(cfg.cheb_order_2body));
        for (double& v : l.theta2) v = rng.uniform(-b2, b2);
        const std::size_t orders = ctx.order_count();
        l.theta_k.resize(orders);
        for (std::size_t oi = 0; oi < orders; ++oi) {
            const std::size_t k = oi + 3;
            l.theta_k[oi].resize(k);
            // motif sums scale with the per-node motif count; fold it into the
            // fan so the Hadamard product across orders starts O(1)
            const double fan = double(k) * std::max(1.0, ctx.mean_motif_count[oi]);
            const double bk = 1.0 / fan;
            for (double& v : l.theta_k[oi]) v = rng.uniform(-bk, bk);
        }
        l.w_x = Matrix(d, d);
        l.w_y = Matrix(d, d);
        // 1/d keeps the per-layer message increment well under the residual,
        // so deep stacks stay stable at initialization
        const double bw = 1.0 / double(d);
        uniform_fill(l.w_x, bw);
        uniform_fill(l.w_y, bw);
    }
    s.w_out = Matrix(output_dim, d);
    uniform_fill(s.w_out, 1.0 / std::sqrt(double(d)));
    s.b_out.assign(output_dim, 0.0);
    return s;
}

struct LayerCacheEntry {
    std::vector<FeatureMatrix> cheb;  // T_{k'}(L̃) H_prev, k' = 0..K2-1
    FeatureMatrix x;                  // two-body message
    std::vector<FeatureMatrix> s;     // per-order motif sums, k = 3..nu
    FeatureMatrix y;                  // Hadamard product across orders
};

struct ForwardCache {
    std::vector<FeatureMatrix> h;     // h[0] = input projection, ..., h[layers]
    std::vector<LayerCacheEntry> layers;
    std::vector<double> pooled;       // regression: sum over nodes of final hidden rows
    double scalar_out = 0.0;          // regression readout
    Matrix logits;                    // classification readout (n x C)

    const FeatureMatrix& final_hidden() const { return h.back(); }
};

namespace detail {

/// T_{k'}(L̃)H for k' = 0..count-1 on the global normalized Laplacian
/// (lambda_max = 2), kept separately for reuse in backward.
inline std::vector<FeatureMatrix> cheb_basis(const Graph& g, const FeatureMatrix& h,
                                             std::size_t count) {
    std::vector<FeatureMatrix> basis;
    basis.reserve(count);
    basis.push_back(h);
    for (std::size_t k = 1; k < count; ++k) {
        FeatureMatrix next = normalized_adjacency_apply(g, basis.back());
        for (double& v : next.data()) v = -v;
        for (NodeId i = 0; i < g.n_nodes; ++i)
            if (g.degrees[i] == 0) {
                const double* xrow = basis.back().row(i);
                double* yrow = next.row(i);
                for (std::size_t c = 0; c < h.cols(); ++c) yrow[c] -= xrow[c];
            }
        if (k > 1) {
            const FeatureMatrix& prev = basis[k - 2];
            for (std::size_t j = 0; j < next.data().size(); ++j)
                next.data()[j] = 2.0 * next.data()[j] - prev.data()[j];
        }
        basis.push_back(std::move(next));
    }
    return basis;
}

inline void add_scaled(FeatureMatrix& acc, const FeatureMatrix& m, double scale) {
    for (std::size_t j = 0; j < acc.data().size(); ++j) acc.data()[j] += scale * m.data()[j];
}

/// out_row += W * in_row (W is rows x cols, in_row has cols entries).
inline void matvec_add(const Matrix& w, const double* in_row, double* out_row) {
    for (std::size_t a = 0; a < w.rows(); ++a)
        out_row[a] += dot(w.row(a), in_row, w.cols());
}

/// out_row += Wᵀ * in_row.
inline void matvec_t_add(const Matrix& w, const double* in_row, double* out_row) {
    for (std::size_t a = 0; a < w.rows(); ++a) {
        const double g = in_row[a];
        if (g == 0.0) continue;
        const double* wrow = w.row(a);
        for (std::size_t b = 0; b < w.cols(); ++b) out_row[b] += g * wrow[b];
    }
}

inline std::size_t motif_slot(const ModelContext::Motif& m, std::size_t s) {
    return m.slots.empty() ? s : m.slots[s];
}

}  // namespace detail

/// One layer's messages from H_prev: the two-body filtered matrix, the
/// per-order motif sums and their Hadamard product. A node with no motifs at
/// any order gets a zero higher-order row; orders missing at a node simply
/// drop out of its product.
inline void layer_messages(const ModelContext& ctx, const LayerParams& params,
                           const FeatureMatrix& h_prev, LayerCacheEntry& out) {
    const Graph& g = *ctx.graph;
    const std::size_t d = h_prev.cols();
    out.cheb = detail::cheb_basis(g, h_prev, params.theta2.size());
    out.x = FeatureMatrix(g.n_nodes, d);
    for (std::size_t k = 0; k < params.theta2.size(); ++k)
        detail::add_scaled(out.x, out.cheb[k], params.theta2[k]);

    const std::size_t orders = ctx.order_count();
    out.s.assign(orders, FeatureMatrix(g.n_nodes, d));
    std::vector<double> f;
    for (std::size_t oi = 0; oi < orders; ++oi) {
        const auto& theta = params.theta_k[oi];
        FeatureMatrix& sk = out.s[oi];
        for (NodeId i = 0; i < g.n_nodes; ++i) {
            double* srow = sk.row(i);
            for (const auto& m : ctx.motifs[oi][i]) {
                if (m.spectrum->degenerate) continue;
                const std::size_t k = m.spectrum->k;
                f.resize(k);
                for (std::size_t s = 0; s < k; ++s)
                    f[s] = m.spectrum->filter_center_row(theta, detail::motif_slot(m, s));
                const double* crow = h_prev.row(i);
                for (std::size_t c = 0; c < d; ++c) srow[c] += f[0] * crow[c];
                for (std::size_t s = 1; s < k; ++s) {
                    const double* lrow = h_prev.row(m.leaves[s - 1]);
                    const double fs = f[s];
                    for (std::size_t c = 0; c < d; ++c) srow[c] += fs * lrow[c];
                }
            }
        }
    }

    out.y = FeatureMatrix(g.n_nodes, d);
    for (NodeId i = 0; i < g.n_nodes; ++i) {
        bool any = false;
        double* yrow = out.y.row(i);
        for (std::size_t c = 0; c < d; ++c) yrow[c] = 1.0;
        for (std::size_t oi = 0; oi < orders; ++oi) {
            if (ctx.motifs[oi][i].empty()) continue;
            any = true;
            const double* srow = out.s[oi].row(i);
            for (std::size_t c = 0; c < d; ++c) yrow[c] *= srow[c];
        }
        if (!any)
            for (std::size_t c = 0; c < d; ++c) yrow[c] = 0.0;
    }
}

/// Full forward pass: input projection, `layer_count` residual layers
/// (defaults to all), readout. Caches every intermediate needed by backward
/// and by the energy instrumentation.
inline ForwardCache model_forward(const ModelContext& ctx, const ModelState& state,
                                  const FeatureMatrix& x, std::size_t layer_count = SIZE_MAX) {
    const Graph& g = *ctx.graph;
    if (x.rows() != g.n_nodes) throw std::invalid_argument("model_forward: feature rows != nodes");
    if (x.cols() != state.input_dim)
        throw std::invalid_argument("model_forward: feature dim != input_dim");
    const std::size_t t = std::min(layer_count, ctx.config.layers);
    const std::size_t d = ctx.config.hidden_dim;

    ForwardCache cache;
    cache.h.reserve(t + 1);
    FeatureMatrix h0(g.n_nodes, d);
    for (NodeId i = 0; i < g.n_nodes; ++i)
        detail::matvec_add(state.w_in, x.row(i), h0.row(i));
    cache.h.push_back(std::move(h0));

    cache.layers.resize(t);
    for (std::size_t layer = 0; layer < t; ++layer) {
        const FeatureMatrix& h_prev = cache.h.back();
        LayerCacheEntry& entry = cache.layers[layer];
        layer_messages(ctx, state.layers[layer], h_prev, entry);
        FeatureMatrix h_next = h_prev;
        for (NodeId i = 0; i < g.n_nodes; ++i) {
            detail::matvec_add(state.layers[layer].w_x, entry.x.row(i), h_next.row(i));
            detail::matvec_add(state.layers[layer].w_y, entry.y.row(i), h_next.row(i));
        }
        cache.h.push_back(std::move(h_next));
    }

    const FeatureMatrix& ht = cache.h.back();
    if (state.task == TaskKind::regression) {
        cache.pooled.assign(d, 0.0);
        for (NodeId i = 0; i < g.n_nodes; ++i) {
            const double* row = ht.row(i);
            for (std::size_t c = 0; c < d; ++c) cache.pooled[c] += row[c];
        }
        cache.scalar_out = state.b_out.empty() ? 0.0 : state.b_out[0];
        cache.scalar_out += dot(state.w_out.row(0), cache.pooled.data(), d);
    } else {
        cache.logits = Matrix(g.n_nodes, state.output_dim);
        for (NodeId i = 0; i < g.n_nodes; ++i) {
            double* lrow = cache.logits.row(i);
            for (std::size_t c = 0; c < state.output_dim; ++c) lrow[c] = state.b_out[c];
            detail::matvec_add(state.w_out, ht.row(i), lrow);
        }
    }
    return cache;
}

/// Reverse pass from d(loss)/d(final hidden). `grads` is zeroed first (it is
/// the state's gradient buffer); pooled/logit readout gradients are handled by
/// the task-specific wrappers below.
inline void backward_from_hidden(const ModelContext& ctx, const ModelState& state,
                                 const ForwardCache& cache, const FeatureMatrix& x,
                                 FeatureMatrix g_hidden, ModelState& grads) {
    const Graph& g = *ctx.graph;
    const std::size_t d = ctx.config.hidden_dim;
    const std::size_t t = cache.layers.size();
    const std::size_t orders = ctx.order_count();

    for (std::size_t layer_plus1 = t; layer_plus1 >= 1; --layer_plus1) {
        const std::size_t layer = layer_plus1 - 1;
        const LayerParams& params = state.layers[layer];
        LayerParams& gparams = grads.layers[layer];
        const LayerCacheEntry& entry = cache.layers[layer];
        const FeatureMatrix& h_prev = cache.h[layer];

        // residual: gradient flows through unchanged, extra terms added below
        FeatureMatrix g_x(g.n_nodes, d), g_y(g.n_nodes, d);
        for (NodeId i = 0; i < g.n_nodes; ++i) {
            const double* grow = g_hidden.row(i);
            for (std::size_t a = 0; a < d; ++a) {
                const double ga = grow[a];
                if (ga == 0.0) continue;
                const double* xrow = entry.x.row(i);
                const double* yrow = entry.y.row(i);
                double* wx = gparams.w_x.row(a);
                double* wy = gparams.w_y.row(a);
                for (std::size_t b = 0; b < d; ++b) {
                    wx[b] += ga * xrow[b];
                    wy[b] += ga * yrow[b];
                }
            }
            detail::matvec_t_add(params.w_x, grow, g_x.row(i));
            detail::matvec_t_add(params.w_y, grow, g_y.row(i));
        }

        // two-body: dθ2 and the filtered gradient back into h_prev
        for (std::size_t k = 0; k < params.theta2.size(); ++k) {
            double acc = 0.0;
            for (std::size_t j = 0; j < g_x.data().size(); ++j)
                acc += g_x.data()[j] * entry.cheb[k].data()[j];
            gparams.theta2[k] += acc;
        }
        detail::add_scaled(g_hidden, two_body_filter_apply(g, g_x, params.theta2), 1.0);

        // higher orders: product rule across orders, then per-motif chain
        if (orders > 0) {
            std::vector<double> g_s(d), prod(d), dots;
            std::vector<double> f;
            for (NodeId i = 0; i < g.n_nodes; ++i) {
                bool any = false;
                for (std::size_t oi = 0; oi < orders && !any; ++oi)
                    if (!ctx.motifs[oi][i].empty()) any = true;
                if (!any) continue;
                const double* gyrow = g_y.row(i);
                for (std::size_t oi = 0; oi < orders; ++oi) {
                    if (ctx.motifs[oi][i].empty()) continue;
                    for (std::size_t c = 0; c < d; ++c) prod[c] = 1.0;
                    for (std::size_t oj = 0; oj < orders; ++oj) {
                        if (oj == oi || ctx.motifs[oj][i].empty()) continue;
                        const double* srow = entry.s[oj].row(i);
                        for (std::size_t c = 0; c < d; ++c) prod[c] *= srow[c];
                    }
                    for (std::size_t c = 0; c < d; ++c) g_s[c] = gyrow[c] * prod[c];

                    const auto& theta = params.theta_k[oi];
                    auto& gtheta = gparams.theta_k[oi];
                    for (const auto& m : ctx.motifs[oi][i]) {
                        if (m.spectrum->degenerate) continue;
                        const std::size_t k = m.spectrum->k;
                        dots.resize(k);
                        f.resize(k);
                        for (std::size_t s = 0; s < k; ++s) {
                            const double* hrow =
                                (s == 0) ? h_prev.row(i) : h_prev.row(m.leaves[s - 1]);
                            dots[s] = dot(hrow, g_s.data(), d);
                            f[s] = m.spectrum->filter_center_row(theta, detail::motif_slot(m, s));
                        }
                        for (std::size_t kp = 0; kp < k; ++kp) {
                            double acc = 0.0;
                            for (std::size_t s = 0; s < k; ++s)
                                acc += m.spectrum->rows(kp, detail::motif_slot(m, s)) * dots[s];
                            gtheta[kp] += acc;
                        }
                        for (std::size_t s = 0; s < k; ++s) {
                            double* hrow = (s == 0) ? g_hidden.row(i)
                                                    : g_hidden.row(m.leaves[s - 1]);
                            const double fs = f[s];
                            for (std::size_t c = 0; c < d; ++c) hrow[c] += fs * g_s[c];
                        }
                    }
                }
            }
        }
    }

    // input projection
    for (NodeId i = 0; i < g.n_nodes; ++i) {
        const double* grow = g_hidden.row(i);
        const double* xrow = x.row(i);
        for (std::size_t a = 0; a < d; ++a) {
            const double ga = grow[a];
            if (ga == 0.0) continue;
            double* wrow = grads.w_in.row(a);
            for (std::size_t b = 0; b < state.input_dim; ++b) wrow[b] += ga * xrow[b];
        }
    }
}

/// Regression backward: d(loss)/d(scalar output) in, gradients out.
inline void model_backward_regression(const ModelContext& ctx, const ModelState& state,
                                      const ForwardCache& cache, const FeatureMatrix& x,
                                      double d_scalar, ModelState& grads) {
    if (cache.h.empty()) throw std::invalid_argument("model_backward: missing forward cache");
    const std::size_t d = ctx.config.hidden_dim;
    for (std::size_t c = 0; c < d; ++c) grads.w_out(0, c) += d_scalar * cache.pooled[c];
    grads.b_out[0] += d_scalar;
    FeatureMatrix g_hidden(ctx.graph->n_nodes, d);
    for (NodeId i = 0; i < ctx.graph->n_nodes; ++i) {
        double* row = g_hidden.row(i);
        for (std::size_t c = 0; c < d; ++c) row[c] = d_scalar * state.w_out(0, c);
    }
    backward_from_hidden(ctx, state, cache, x, std::move(g_hidden), grads);
}

/// Classification backward: d(loss)/d(logits) in (n x C), gradients out.
inline void model_backward_classification(const ModelContext& ctx, const ModelState& state,
                                          const ForwardCache& cache, const FeatureMatrix& x,
                                          const Matrix& d_logits, ModelState& grads) {
    if (cache.h.empty()) throw std::invalid_argument("model_backward: missing forward cache");
    const std::size_t d = ctx.config.hidden_dim;
    const FeatureMatrix& ht = cache.final_hidden();
    FeatureMatrix g_hidden(ctx.graph->n_nodes, d);
    for (NodeId i = 0; i < ctx.graph->n_nodes; ++i) {
        const double* grow = d_logits.row(i);
        const double* hrow = ht.row(i);
        for (std::size_t c = 0; c < state.output_dim; ++c) {
            const double gc = grow[c];
            if (gc == 0.0) continue;
            grads.b_out[c] += gc;
            double* wrow = grads.w_out.row(c);
            for (std::size_t b = 0; b < d; ++b) wrow[b] += gc * hrow[b];
        }
        detail::matvec_t_add(state.w_out, grow, g_hidden.row(i));
    }
    backward_from_hidden(ctx, state, cache, x, std::move(g_hidden), grads);
}

/// max_{a,b} |∂ h_u^{(r)}[a] / ∂ x_v[b]| by central differences over the
/// truncated forward pass. When v lies outside u's r-hop ball the two
/// perturbed passes are bitwise identical and the probe is exactly zero.
inline double jacobian_probe(const ModelContext& ctx, const ModelState& state,
                             const FeatureMatrix& x, NodeId u, NodeId v, std::size_t r,
                             double eps = 1e-5) {
    if (r > ctx.config.layers)
        throw std::invalid_argument("jacobian_probe: r exceeds layer count");
    double best = 0.0;
    FeatureMatrix xp = x;
    for (std::size_t b = 0; b < x.cols(); ++b) {
        const double saved = xp(v, b);
        xp(v, b) = saved + eps;
        ForwardCache plus = model_forward(ctx, state, xp, r);
        xp(v, b) = saved - eps;
        ForwardCache minus = model_forward(ctx, state, xp, r);
        xp(v, b) = saved;
        const double* prow = plus.h.back().row(u);
        const double* mrow = minus.h.back().row(u);
        for (std::size_t a = 0; a < ctx.config.hidden_dim; ++a)
            best = std::max(best, std::abs((prow[a] - mrow[a]) / (2.0 * eps)));
    }
    return best;
}

}  // namespace manybody
