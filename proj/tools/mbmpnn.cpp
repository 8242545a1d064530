// mbmpnn: command-line harness for the many-body message passing engine.
// Subcommands: gen, train, eval, bench, curvature, probe.

#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>

#include "manybody/analysis.hpp"
#include "manybody/io.hpp"
#include "manybody/model.hpp"
#include "manybody/synthgen.hpp"
#include "manybody/train.hpp"

namespace fs = std::filesystem;
using namespace manybody;

namespace {

std::string hex_hash(const std::string& bytes) {
    char buf[24];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(fnv1a_hash(bytes)));
    return buf;
}

int cmd_gen(const std::string& spec_path, const std::string& out_dir,
            std::int64_t seed_override) {
    DatasetSpec spec = dataset_spec_from_json(read_json_file(spec_path));
    if (seed_override >= 0) spec.seed = std::uint64_t(seed_override);
    Dataset ds = build_dataset(spec);
    write_dataset(ds, out_dir);
    std::printf("gen: %zu instance(s) -> %s (manifest hash %s)\n", ds.instances.size(),
                out_dir.c_str(),
                hex_hash(read_text_file(fs::path(out_dir) / "manifest.json")).c_str());
    return 0;
}

int cmd_train(const std::string& config_path, const std::string& dataset_dir_flag,
              const std::string& out_dir, std::int64_t seed_override,
              std::int64_t threads_override, const std::string& run_id_flag) {
    RunConfig cfg = run_config_from_json(read_json_file(config_path));
    if (seed_override >= 0) cfg.seed = std::uint64_t(seed_override);
    if (threads_override > 0) cfg.threads = std::size_t(threads_override);
    if (!dataset_dir_flag.empty()) cfg.dataset_dir = dataset_dir_flag;

    Dataset ds = cfg.dataset_dir.empty() ? build_dataset(cfg.dataset)
                                         : load_dataset(cfg.dataset_dir);

    const json resolved = run_config_to_json(cfg);
    const std::string run_id =
        run_id_flag.empty() ? "run-" + hex_hash(resolved.dump()) : run_id_flag;
    const fs::path dir = fs::path(out_dir) / run_id;
    fs::create_directories(dir);

    std::string log = "run " + run_id + "\n";
    auto result = train_run(cfg, ds);
    RunRecord& rec = result.record;

    write_text_file(dir / "metrics.csv", rec.metrics_csv(cfg.model.nu));
    write_text_file(dir / "checkpoint.json",
                    checkpoint_to_json(cfg.model, result.final_state).dump());
    write_text_file(dir / "checkpoint_best.json",
                    checkpoint_to_json(cfg.model, result.best_state).dump());

    json record;
    record["resolved_config"] = rec.resolved_config;
    record["task"] = rec.task == TaskKind::classification ? "classification" : "regression";
    record["environment"] = rec.environment;
    record["degenerate_motifs"] = rec.degenerate_motifs;
    record["best_epoch"] = rec.best_epoch;
    record["aborted"] = rec.aborted;
    record["aborted_epoch"] = rec.aborted_epoch;
    record["max_h0_abs"] = rec.max_h0_abs;
    record["checkpoint"] = "checkpoint.json";
    record["checkpoint_best"] = "checkpoint_best.json";
    json epochs = json::array();
    for (const auto& e : rec.epochs)
        epochs.push_back({{"epoch", e.epoch},
                          {"train_loss", e.train_loss},
                          {"test_metric", e.test_metric},
                          {"dirichlet_energy", e.dirichlet},
                          {"order_energy", e.order_energy}});
    record["epochs"] = std::move(epochs);
    record["metrics_hash_no_wall"] =
        hex_hash(strip_wall_column(rec.metrics_csv(cfg.model.nu)));
    write_text_file(dir / "runrecord.json", record.dump(2));

    if (rec.aborted) {
        log += "aborted: non-finite loss at epoch " + std::to_string(rec.aborted_epoch) +
               "; checkpoint.json holds the last finite state\n";
        write_text_file(dir / "log.txt", log);
        std::fprintf(stderr, "train: aborted at epoch %zu (non-finite loss); see %s\n",
                     rec.aborted_epoch, (dir / "log.txt").string().c_str());
        return 2;
    }
    const auto& last = rec.epochs.back();
    log += "epochs=" + std::to_string(rec.epochs.size()) +
           " final_train_loss=" + format_full(last.train_loss) +
           " final_test_metric=" + format_full(last.test_metric) +
           " dirichlet=" + format_full(last.dirichlet) + "\n";
    write_text_file(dir / "log.txt", log);
    std::printf("train: %s  test_metric=%.6g  dirichlet=%.6g  metrics_hash=%s\n",
                run_id.c_str(), last.test_metric, last.dirichlet,
                record["metrics_hash_no_wall"].get<std::string>().c_str());
    return 0;
}

int cmd_eval(const std::string& checkpoint_path, const std::string& dataset_dir,
             std::int64_t nu_flag) {
    auto ckpt = checkpoint_from_json(read_json_file(checkpoint_path));
    if (nu_flag > 0 && std::size_t(nu_flag) != ckpt.config.nu)
        std::fprintf(stderr,
                     "eval: warning: --nu %lld ignored, checkpoint was trained with nu=%zu\n",
                     static_cast<long long>(nu_flag), ckpt.config.nu);
    Dataset ds = load_dataset(dataset_dir);
    RunConfig cfg;
    cfg.model = ckpt.config;
    auto r = evaluate(cfg, ds, ckpt.state);
    const char* name =
        ckpt.state.task == TaskKind::classification ? "accuracy" : "mse";
    std::printf("eval: %s=%.17g dirichlet=%.17g\n", name, r.metric, r.dirichlet);
    return 0;
}

int cmd_curvature(const std::string& graph_path, const std::string& out_path) {
    auto bundle = graph_from_json(read_json_file(graph_path));
    auto cm = balanced_forman(bundle.graph);
    std::string csv = "edge_id,u,v,ricci,rounded\n";
    for (EdgeId e = 0; e < bundle.graph.n_edges(); ++e) {
        auto [u, v] = bundle.graph.edges[e];
        csv += std::to_string(e) + "," + std::to_string(u) + "," + std::to_string(v) + "," +
               format_full(cm.values[e]) + "," + std::to_string(cm.rounded[e]) + "\n";
    }
    if (out_path.empty())
        std::fputs(csv.c_str(), stdout);
    else
        write_text_file(out_path, csv);
    return 0;
}

int cmd_bench(const std::string& layers_csv, const std::string& models_csv, std::size_t reps,
              const std::string& out_path, std::size_t threads) {
    std::vector<std::size_t> layer_counts;
    {
        std::stringstream ss(layers_csv);
        std::string tok;
        while (std::getline(ss, tok, ',')) layer_counts.push_back(std::stoul(tok));
    }
    std::vector<std::string> models;
    {
        std::stringstream ss(models_csv);
        std::string tok;
        while (std::getline(ss, tok, ',')) models.push_back(tok);
    }

    // fixed benchmark workload: one Adam step over a 4-graph batch
    DatasetSpec spec;
    spec.family = "erdos-renyi";
    spec.count = 4;
    spec.n_min = 60;
    spec.n_max = 60;
    spec.p_min = 0.15;
    spec.p_max = 0.15;
    spec.feature_dim = 8;
    spec.target = "none";
    spec.seed = 12345;
    Dataset ds = build_dataset(spec);

    std::string csv = "model,layers,mean_ms,std_ms,threads\n";
    for (const auto& model : models) {
        ModelConfig mc;
        mc.hidden_dim = 16;
        mc.cheb_order_2body = 4;
        mc.weight_mode = WeightMode::sign_rounded;
        mc.enumeration_cap = 32;
        if (model == "manybody") {
            mc.nu = 4;
        } else if (model == "chebnet") {
            mc.nu = 2;
        } else {
            std::fprintf(stderr, "bench: unknown model '%s' (use manybody,chebnet)\n",
                         model.c_str());
            return 1;
        }
        for (std::size_t layers : layer_counts) {
            mc.layers = layers;
            std::vector<ModelContext> ctxs;
            for (const auto& inst : ds.instances) {
                auto cm = balanced_forman(inst.graph);
                ModelConfig per = mc;
                per.rng_seed = derive_seed(1, 0x62656e63, ctxs.size());
                ctxs.push_back(build_context(inst.graph, cm, per));
            }
            ModelState state = init_state(ctxs.front(), spec.feature_dim, 1,
                                          TaskKind::regression, 77);
            ModelState grads = zeros_like(state);
            auto params = parameter_pointers(state);
            auto gptrs = parameter_pointers(grads);
            AdamConfig acfg;
            Adam adam(acfg, params.size());
            auto step = [&] {
                zero_state(grads);
                for (std::size_t gi = 0; gi < ds.instances.size(); ++gi) {
                    auto cache = model_forward(ctxs[gi], state, ds.instances[gi].features);
                    model_backward_regression(ctxs[gi], state, cache,
                                              ds.instances[gi].features,
                                              2.0 * cache.scalar_out / 4.0, grads);
                }
                adam.step(params, gptrs);
            };
            auto r = time_workload(model, layers, step, reps);
            r.threads = threads;
            csv += r.model + "," + std::to_string(r.layers) + "," + format_full(r.mean_ms) +
                   "," + format_full(r.std_ms) + "," + std::to_string(r.threads) + "\n";
            std::printf("bench: %-9s layers=%-3zu mean=%8.3f ms  std=%6.3f ms\n",
                        model.c_str(), layers, r.mean_ms, r.std_ms);
        }
    }
    if (!out_path.empty()) write_text_file(out_path, csv);
    return 0;
}

int cmd_probe(const std::string& graph_path, std::size_t spine_len, std::size_t spine_leaves,
              std::size_t r, std::size_t nu, std::uint64_t seed, const std::string& out_path) {
    Graph g;
    if (!graph_path.empty()) {
        g = graph_from_json(read_json_file(graph_path)).graph;
    } else {
        g = gen_spine(spine_len, spine_leaves);
    }
    auto cm = balanced_forman(g);
    ModelConfig mc;
    mc.nu = nu;
    mc.layers = std::max<std::size_t>(r, 1);
    mc.hidden_dim = 4;
    mc.weight_mode = WeightMode::sign_rounded;
    mc.enumeration_cap = 0;
    mc.rng_seed = seed;
    auto ctx = build_context(g, cm, mc);
    ModelState state = init_state(ctx, 3, 1, TaskKind::regression, seed);
    FeatureMatrix x = regression_features(g, 3, derive_seed(seed, 0x70726f62));

    auto dist = shortest_path_lengths(g);
    std::string csv = "u,v,dist,r,max_abs_jacobian\n";
    const NodeId u = 0;
    const std::size_t limit = graph_path.empty() ? spine_len : g.n_nodes;
    for (NodeId v = 0; v < limit; ++v) {
        const double p = jacobian_probe(ctx, state, x, u, v, r);
        csv += std::to_string(u) + "," + std::to_string(v) + "," +
               std::to_string(dist[u][v]) + "," + std::to_string(r) + "," + format_full(p) +
               "\n";
    }
    if (out_path.empty())
        std::fputs(csv.c_str(), stdout);
    else
        write_text_file(out_path, csv);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"many-body message passing network engine"};
    app.require_subcommand(1);

    std::int64_t seed = -1;
    std::int64_t threads = -1;
    std::string out;
    app.add_option("--seed", seed, "override the config seed");
    app.add_option("--threads", threads, "worker thread count (recorded in run records)");
    app.add_option("--out", out, "output directory or file");

    auto* gen = app.add_subcommand("gen", "generate a synthetic dataset from a spec file");
    gen->fallthrough();
    std::string gen_spec;
    gen->add_option("--spec", gen_spec, "dataset spec JSON")->required();

    auto* train = app.add_subcommand("train", "train a model from a run-config file");
    train->fallthrough();
    std::string train_config, train_dataset, run_id;
    train->add_option("--config", train_config, "run config JSON")->required();
    train->add_option("--dataset", train_dataset, "dataset directory (overrides config)");
    train->add_option("--run-id", run_id, "run directory name (default: config hash)");

    auto* eval = app.add_subcommand("eval", "evaluate a checkpoint on a dataset");
    eval->fallthrough();
    std::string eval_ckpt, eval_dataset;
    std::int64_t eval_nu = -1;
    eval->add_option("--checkpoint", eval_ckpt, "checkpoint JSON")->required();
    eval->add_option("--dataset", eval_dataset, "dataset directory")->required();
    eval->add_option("--nu", eval_nu, "ignored if it disagrees with the checkpoint");

    auto* bench = app.add_subcommand("bench", "runtime benchmarks over layer counts");
    bench->fallthrough();
    std::string bench_layers = "5,10,15,20";
    std::string bench_models = "manybody,chebnet";
    std::size_t bench_reps = 30;
    bench->add_option("--layers", bench_layers, "comma-separated layer counts");
    bench->add_option("--models", bench_models, "comma-separated: manybody,chebnet");
    bench->add_option("--reps", bench_reps, "repetitions per configuration");

    auto* curvature = app.add_subcommand("curvature", "per-edge Balanced Forman curvature CSV");
    curvature->fallthrough();
    std::string curv_graph;
    curvature->add_option("--graph", curv_graph, "graph JSON file")->required();

    auto* probe = app.add_subcommand("probe", "Jacobian sensitivity probes");
    probe->fallthrough();
    std::string probe_graph;
    std::size_t probe_spine = 8, probe_leaves = 2, probe_r = 3, probe_nu = 3;
    probe->add_option("--graph", probe_graph, "graph JSON (default: generated spine)");
    probe->add_option("--spine-length", probe_spine, "spine length when generating");
    probe->add_option("--spine-leaves", probe_leaves, "pendant nodes per spine node");
    probe->add_option("--r", probe_r, "propagation depth (layers)");
    probe->add_option("--nu", probe_nu, "max correlation order");

    CLI11_PARSE(app, argc, argv);

    try {
        if (gen->parsed()) {
            if (out.empty()) throw std::runtime_error("gen: --out directory required");
            return cmd_gen(gen_spec, out, seed);
        }
        if (train->parsed()) {
            if (out.empty()) throw std::runtime_error("train: --out directory required");
            return cmd_train(train_config, train_dataset, out, seed, threads, run_id);
        }
        if (eval->parsed()) return cmd_eval(eval_ckpt, eval_dataset, eval_nu);
        if (bench->parsed())
            return cmd_bench(bench_layers, bench_models, bench_reps, out,
                             threads > 0 ? std::size_t(threads) : 1);
        if (curvature->parsed()) return cmd_curvature(curv_graph, out);
        if (probe->parsed())
            return cmd_probe(probe_graph, probe_spine, probe_leaves, probe_r, probe_nu,
                             seed >= 0 ? std::uint64_t(seed) : 17, out);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
