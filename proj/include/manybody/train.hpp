#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "manybody/analysis.hpp"
#include "manybody/io.hpp"
#include "manybody/model.hpp"
#include "manybody/rng.hpp"

namespace manybody {

struct AdamConfig {
    double lr = 0.01;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

/// Adam over the flat parameter order of parameter_pointers().
class Adam {
public:
    Adam(const AdamConfig& cfg, std::size_t n_params)
        : cfg_(cfg), m_(n_params, 0.0), v_(n_params, 0.0) {}

    void step(const std::vector<double*>& params, const std::vector<double*>& grads) {
        if (params.size() != m_.size() || grads.size() != m_.size())
            throw std::invalid_argument("Adam: parameter count mismatch");
        ++t_;
        const double bc1 = 1.0 - std::pow(cfg_.beta1, double(t_));
        const double bc2 = 1.0 - std::pow(cfg_.beta2, double(t_));
        for (std::size_t i = 0; i < m_.size(); ++i) {
            const double g = *grads[i];
            m_[i] = cfg_.beta1 * m_[i] + (1.0 - cfg_.beta1) * g;
            v_[i] = cfg_.beta2 * v_[i] + (1.0 - cfg_.beta2) * g * g;
            const double mhat = m_[i] / bc1;
            const double vhat = v_[i] / bc2;
            *params[i] -= cfg_.lr * mhat / (std::sqrt(vhat) + cfg_.eps);
        }
    }

private:
    AdamConfig cfg_;
    std::vector<double> m_, v_;
    std::size_t t_ = 0;
};

struct RunConfig {
    DatasetSpec dataset;       // inline spec; cmd_train may substitute a directory
    std::string dataset_dir;   // when set, the dataset is loaded from disk
    ModelConfig model;
    AdamConfig adam;
    std::size_t epochs = 50;
    std::size_t batch_size = 4;
    double split = 0.8;
    std::uint64_t seed = 0;
    std::size_t threads = 1;
    bool standardize_targets = true;  // regression: z-score targets on the train split

    void validate() const {
        model.validate();
        if (!(adam.lr > 0.0)) throw std::invalid_argument("run config: lr must be > 0");
        if (epochs < 1) throw std::invalid_argument("run config: epochs must be >= 1");
        if (batch_size < 1) throw std::invalid_argument("run config: batch_size must be >= 1");
        if (!(split > 0.0 && split < 1.0))
            throw std::invalid_argument("run config: split must lie in (0,1)");
        if (threads < 1) throw std::invalid_argument("run config: threads must be >= 1");
    }
};

inline json run_config_to_json(const RunConfig& c) {
    return json{{"dataset", dataset_spec_to_json(c.dataset)},
                {"dataset_dir", c.dataset_dir},
                {"model", model_config_to_json(c.model)},
                {"adam", {{"lr", c.adam.lr},
                          {"beta1", c.adam.beta1},
                          {"beta2", c.adam.beta2},
                          {"eps", c.adam.eps}}},
                {"epochs", c.epochs},
                {"batch_size", c.batch_size},
                {"split", c.split},
                {"seed", c.seed},
                {"threads", c.threads},
                {"standardize_targets", c.standardize_targets}};
}

inline RunConfig run_config_from_json(const json& j) {
    RunConfig c;
    if (j.contains("dataset")) c.dataset = dataset_spec_from_json(j.at("dataset"));
    if (j.contains("dataset_dir")) c.dataset_dir = j.at("dataset_dir").get<std::string>();
    if (j.contains("model")) c.model = model_config_from_json(j.at("model"));
    if (j.contains("adam")) {
        const auto& a = j.at("adam");
        if (a.contains("lr")) c.adam.lr = a.at("lr").get<double>();
        if (a.contains("beta1")) c.adam.beta1 = a.at("beta1").get<double>();
        if (a.contains("beta2")) c.adam.beta2 = a.at("beta2").get<double>();
        if (a.contains("eps")) c.adam.eps = a.at("eps").get<double>();
    }
    auto get = [&](const char* key, auto& field) {
        if (j.contains(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
    };
    get("epochs", c.epochs);
    get("batch_size", c.batch_size);
    get("split", c.split);
    get("seed", c.seed);
    get("threads", c.threads);
    get("standardize_targets", c.standardize_targets);
    c.validate();
    return c;
}

struct EpochMetrics {
    std::size_t epoch = 0;
    double train_loss = 0.0;
    double test_metric = 0.0;   // MSE (regression) or accuracy (classification)
    double dirichlet = 0.0;     // energy of the final hidden features
    std::vector<double> order_energy;  // k = 2..nu, layer-averaged
    double wall_ms = 0.0;       // reported, excluded from the replay hash
};

struct RunRecord {
    json resolved_config;
    TaskKind task = TaskKind::regression;
    std::vector<EpochMetrics> epochs;
    std::size_t degenerate_motifs = 0;
    bool aborted = false;       // non-finite loss; state holds the last good epoch
    std::size_t aborted_epoch = 0;
    double target_mu = 0.0;     // regression target standardization (train split)
    double target_sigma = 1.0;
    std::size_t best_epoch = 0;
    double max_h0_abs = 0.0;    // feature bound fed to the energy-bound check
    std::string environment;

    /// metrics.csv text (spec columns); wall_ms last so the deterministic
    /// projection is a prefix of every row. order_energy is indexed k-2.
    std::string metrics_csv(std::size_t nu) const {
        std::string out = "epoch,train_loss,test_metric,dirichlet_energy";
        for (std::size_t k = 3; k <= nu; ++k) out += ",energy_k" + std::to_string(k);
        out += ",wall_ms\n";
        for (const auto& e : epochs) {
            out += std::to_string(e.epoch) + "," + format_full(e.train_loss) + "," +
                   format_full(e.test_metric) + "," + format_full(e.dirichlet);
            for (std::size_t k = 3; k <= nu; ++k) {
                const std::size_t idx = k - 2;
                out += "," + format_full(idx < e.order_energy.size() ? e.order_energy[idx] : 0.0);
            }
            out += "," + format_full(e.wall_ms) + "\n";
        }
        return out;
    }
};

struct TrainResult {
    RunRecord record;
    ModelState final_state;
    ModelState best_state;
    std::vector<std::size_t> train_indices;  // graphs (regression) or nodes (classification)
    std::vector<std::size_t> test_indices;
};

inline std::string environment_fingerprint(std::size_t threads) {
    std::string env = "compiler=" __VERSION__;
#ifdef NDEBUG
    env += ";build=release";
#else
    env += ";build=debug";
#endif
    env += ";threads=" + std::to_string(threads);
    return env;
}

namespace detail {

inline std::vector<std::size_t> seeded_split(std::size_t count, double split_fraction,
                                             std::uint64_t seed, std::vector<std::size_t>& test) {
    std::vector<std::size_t> idx(count);
    std::iota(idx.begin(), idx.end(), 0);
    Rng rng(derive_seed(seed, 0x73706c69));
    for (std::size_t i = count; i > 1; --i) std::swap(idx[i - 1], idx[rng.next_below(i)]);
    std::size_t n_train = std::size_t(std::llround(split_fraction * double(count)));
    n_train = std::min(std::max<std::size_t>(n_train, 1), count - 1);
    std::vector<std::size_t> train(idx.begin(), idx.begin() + n_train);
    test.assign(idx.begin() + n_train, idx.end());
    return train;
}

/// softmax cross-entropy over the masked rows; fills d_logits (zero elsewhere)
/// and returns the mean loss.
inline double softmax_ce(const Matrix& logits, const std::vector<int>& labels,
                         const std::vector<std::size_t>& rows, Matrix& d_logits) {
    const std::size_t c_dim = logits.cols();
    d_logits = Matrix(logits.rows(), c_dim);
    double loss = 0.0;
    const double inv = 1.0 / double(rows.size());
    for (std::size_t r : rows) {
        const double* lrow = logits.row(r);
        double mx = lrow[0];
        for (std::size_t c = 1; c < c_dim; ++c) mx = std::max(mx, lrow[c]);
        double z = 0.0;
        for (std::size_t c = 0; c < c_dim; ++c) z += std::exp(lrow[c] - mx);
        const double logz = std::log(z) + mx;
        loss += (logz - lrow[labels[r]]) * inv;
        double* drow = d_logits.row(r);
        for (std::size_t c = 0; c < c_dim; ++c)
            drow[c] = (std::exp(lrow[c] - logz) - (int(c) == labels[r] ? 1.0 : 0.0)) * inv;
    }
    return loss;
}

inline double accuracy(const Matrix& logits, const std::vector<int>& labels,
                       const std::vector<std::size_t>& rows) {
    if (rows.empty()) return 0.0;
    std::size_t hits = 0;
    for (std::size_t r : rows) {
        const double* lrow = logits.row(r);
        std::size_t best = 0;
        for (std::size_t c = 1; c < logits.cols(); ++c)
            if (lrow[c] > lrow[best]) best = c;
        if (int(best) == labels[r]) ++hits;
    }
    return double(hits) / double(rows.size());
}

}  // namespace detail

/// Deterministic training loop. Regression: MSE over graphs, gradients
/// aggregated over `batch_size` graphs per Adam step, 80/20 split by graph.
/// Classification: full-batch softmax cross-entropy on the first instance,
/// split by node. Non-finite loss aborts with the last finite-epoch state.
inline TrainResult train_run(const RunConfig& cfg, const Dataset& ds) {
    cfg.validate();
    if (ds.instances.empty()) throw std::invalid_argument("train_run: empty dataset");
    const bool classify = !ds.instances.front().labels.empty();
    TrainResult result;
    RunRecord& rec = result.record;
    rec.resolved_config = run_config_to_json(cfg);
    rec.task = classify ? TaskKind::classification : TaskKind::regression;
    rec.environment = environment_fingerprint(cfg.threads);

    const std::size_t in_dim = ds.instances.front().features.cols();
    std::size_t out_dim = 1;
    if (classify) {
        int max_label = 0;
        for (int l : ds.instances.front().labels) max_label = std::max(max_label, l);
        out_dim = std::size_t(max_label) + 1;
    }

    // per-graph contexts (motif enumeration frozen per run)
    std::vector<ModelContext> contexts;
    contexts.reserve(ds.instances.size());
    for (const auto& inst : ds.instances) {
        auto cm = balanced_forman(inst.graph);
        ModelConfig mc = cfg.model;
        mc.rng_seed = derive_seed(cfg.seed, 0x6d6f74, contexts.size());
        contexts.push_back(build_context(inst.graph, cm, mc));
        rec.degenerate_motifs += contexts.back().degenerate_motifs;
    }

    ModelState state = init_state(contexts.front(), in_dim, out_dim,
                                  classify ? TaskKind::classification : TaskKind::regression,
                                  derive_seed(cfg.seed, 0x706172));
    for (const auto& inst : ds.instances)
        rec.max_h0_abs = std::max(rec.max_h0_abs, [&] {
            FeatureMatrix h0(inst.graph.n_nodes, cfg.model.hidden_dim);
            for (NodeId i = 0; i < inst.graph.n_nodes; ++i)
                detail::matvec_add(state.w_in, inst.features.row(i), h0.row(i));
            return h0.max_abs();
        }());

    auto params = parameter_pointers(state);
    Adam adam(cfg.adam, params.size());
    ModelState grads = zeros_like(state);
    ModelState batch_grads = zeros_like(state);
    const auto grad_ptrs = parameter_pointers(grads);
    const auto batch_ptrs = parameter_pointers(batch_grads);

    double best_metric = classify ? -1.0 : std::numeric_limits<double>::infinity();
    result.best_state = state;
    ModelState last_good = state;

    if (classify) {
        result.train_indices = detail::seeded_split(ds.instances.front().graph.n_nodes,
                                                    cfg.split, cfg.seed, result.test_indices);
    } else {
        result.train_indices =
            detail::seeded_split(ds.instances.size(), cfg.split, cfg.seed, result.test_indices);
    }

    // optional target standardization (train-split statistics); metrics are
    // reported in original units
    double target_mu = 0.0, target_sigma = 1.0;
    if (!classify && cfg.standardize_targets) {
        for (std::size_t gi : result.train_indices) target_mu += ds.instances[gi].target;
        target_mu /= double(result.train_indices.size());
        double var = 0.0;
        for (std::size_t gi : result.train_indices) {
            const double d0 = ds.instances[gi].target - target_mu;
            var += d0 * d0;
        }
        var /= double(result.train_indices.size());
        target_sigma = std::sqrt(std::max(var, 1e-12));
    }
    rec.target_mu = target_mu;
    rec.target_sigma = target_sigma;
    state.target_mu = target_mu;
    state.target_sigma = target_sigma;
    result.best_state = state;
    last_good = state;

    using clock = std::chrono::steady_clock;
    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        const auto t0 = clock::now();
        EpochMetrics em;
        em.epoch = epoch;

        if (classify) {
            const auto& inst = ds.instances.front();
            const auto& ctx = contexts.front();
            auto cache = model_forward(ctx, state, inst.features);
            Matrix d_logits;
            em.train_loss =
                detail::softmax_ce(cache.logits, inst.labels, result.train_indices, d_logits);
            zero_state(grads);
            model_backward_classification(ctx, state, cache, inst.features, d_logits, grads);
            adam.step(params, grad_ptrs);

            auto eval = model_forward(ctx, state, inst.features);
            em.test_metric = detail::accuracy(eval.logits, inst.labels, result.test_indices);
            em.dirichlet = dirichlet_energy(inst.graph, eval.final_hidden());
            em.order_energy = per_order_energy(ctx, eval).energy;
        } else {
            double train_se = 0.0;
            std::size_t processed = 0;
            for (std::size_t b = 0; b < result.train_indices.size(); b += cfg.batch_size) {
                const std::size_t batch_end =
                    std::min(b + cfg.batch_size, result.train_indices.size());
                const double inv = 1.0 / double(batch_end - b);
                zero_state(batch_grads);
                for (std::size_t bi = b; bi < batch_end; ++bi) {
                    const std::size_t gi = result.train_indices[bi];
                    const auto& inst = ds.instances[gi];
                    auto cache = model_forward(contexts[gi], state, inst.features);
                    const double err =
                        cache.scalar_out - (inst.target - target_mu) / target_sigma;
                    train_se += err * err * target_sigma * target_sigma;
                    zero_state(grads);
                    model_backward_regression(contexts[gi], state, cache, inst.features,
                                              2.0 * err * inv, grads);
                    for (std::size_t i = 0; i < grad_ptrs.size(); ++i)
                        *batch_ptrs[i] += *grad_ptrs[i];
                    ++processed;
                }
                adam.step(params, batch_ptrs);
            }
            em.train_loss = train_se / double(processed);

            double test_se = 0.0, test_energy = 0.0;
            std::vector<double> order_acc;
            for (std::size_t gi : result.test_indices) {
                const auto& inst = ds.instances[gi];
                auto cache = model_forward(contexts[gi], state, inst.features);
                const double err =
                    target_sigma * cache.scalar_out + target_mu - inst.target;
                test_se += err * err;
                test_energy += dirichlet_energy(inst.graph, cache.final_hidden());
                auto row = per_order_energy(contexts[gi], cache).energy;
                if (order_acc.empty()) order_acc.assign(row.size(), 0.0);
                for (std::size_t i = 0; i < row.size(); ++i) order_acc[i] += row[i];
            }
            const double inv_test = 1.0 / double(result.test_indices.size());
            em.test_metric = test_se * inv_test;
            em.dirichlet = test_energy * inv_test;
            for (double& v : order_acc) v *= inv_test;
            em.order_energy = std::move(order_acc);
        }

        em.wall_ms =
            std::chrono::duration<double, std::milli>(clock::now() - t0).count();

        if (!std::isfinite(em.train_loss) || !std::isfinite(em.test_metric) ||
            !state.all_finite()) {
            rec.aborted = true;
            rec.aborted_epoch = epoch;
            result.final_state = last_good;
            return result;
        }
        last_good = state;
        rec.epochs.push_back(std::move(em));

        const double metric = rec.epochs.back().test_metric;
        const bool improved = classify ? metric > best_metric : metric < best_metric;
        if (improved) {
            best_metric = metric;
            rec.best_epoch = epoch;
            result.best_state = state;
        }
    }
    result.final_state = state;
    return result;
}

/// Test-split metric plus Dirichlet energy of a trained state on a dataset.
struct EvalResult {
    double metric = 0.0;
    double dirichlet = 0.0;
};

inline EvalResult evaluate(const RunConfig& cfg, const Dataset& ds, const ModelState& state) {
    if (ds.instances.empty()) throw std::invalid_argument("evaluate: empty dataset");
    const bool classify = state.task == TaskKind::classification;
    if (ds.instances.front().features.cols() != state.input_dim)
        throw std::invalid_argument("evaluate: dataset feature dim != checkpoint input dim");
    EvalResult out;
    if (classify) {
        const auto& inst = ds.instances.front();
        if (inst.labels.empty()) throw std::invalid_argument("evaluate: dataset has no labels");
        auto cm = balanced_forman(inst.graph);
        ModelConfig mc = cfg.model;
        mc.rng_seed = derive_seed(cfg.seed, 0x6d6f74, 0);
        auto ctx = build_context(inst.graph, cm, mc);
        auto cache = model_forward(ctx, state, inst.features);
        std::vector<std::size_t> all(inst.graph.n_nodes);
        std::iota(all.begin(), all.end(), 0);
        out.metric = detail::accuracy(cache.logits, inst.labels, all);
        out.dirichlet = dirichlet_energy(inst.graph, cache.final_hidden());
    } else {
        double se = 0.0, energy = 0.0;
        for (std::size_t gi = 0; gi < ds.instances.size(); ++gi) {
            const auto& inst = ds.instances[gi];
            auto cm = balanced_forman(inst.graph);
            ModelConfig mc = cfg.model;
            mc.rng_seed = derive_seed(cfg.seed, 0x6d6f74, gi);
            auto ctx = build_context(inst.graph, cm, mc);
            auto cache = model_forward(ctx, state, inst.features);
            const double err =
                state.target_sigma * cache.scalar_out + state.target_mu - inst.target;
            se += err * err;
            energy += dirichlet_energy(inst.graph, cache.final_hidden());
        }
        out.metric = se / double(ds.instances.size());
        out.dirichlet = energy / double(ds.instances.size());
    }
    return out;
}

}  // namespace manybody
