#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "manybody/graph.hpp"
#include "manybody/matrix.hpp"
#include "manybody/model.hpp"
#include "manybody/synthgen.hpp"

namespace manybody {

using json = nlohmann::json;

// ---------------------------------------------------------------------------
// graph JSON schema: {"n_nodes": int, "edges": [[i,j],...],
//                     "features": row-major floats with "dim", "labels": ints}
// edges are written in canonical sorted-pair order.

struct GraphBundle {
    Graph graph;
    FeatureMatrix features;   // empty when absent
    std::vector<int> labels;  // empty when absent
};

inline json graph_to_json(const Graph& g, const FeatureMatrix* features = nullptr,
                          const std::vector<int>* labels = nullptr) {
    json j;
    j["n_nodes"] = g.n_nodes;
    json edges = json::array();
    for (auto [u, v] : g.edges) edges.push_back({u, v});
    j["edges"] = std::move(edges);
    if (features && !features->empty()) {
        j["dim"] = features->cols();
        j["features"] = features->data();
    }
    if (labels && !labels->empty()) j["labels"] = *labels;
    return j;
}

inline GraphBundle graph_from_json(const json& j) {
    GraphBundle b;
    if (!j.contains("n_nodes") || !j.contains("edges"))
        throw std::invalid_argument("graph json: missing n_nodes or edges");
    const std::size_t n = j.at("n_nodes").get<std::size_t>();
    std::vector<std::pair<NodeId, NodeId>> edges;
    for (const auto& e : j.at("edges"))
        edges.emplace_back(e.at(0).get<NodeId>(), e.at(1).get<NodeId>());
    b.graph = build_graph(edges, n);
    if (j.contains("features")) {
        const std::size_t dim = j.at("dim").get<std::size_t>();
        const auto flat = j.at("features").get<std::vector<double>>();
        if (flat.size() != n * dim)
            throw std::invalid_argument("graph json: features size != n_nodes * dim");
        b.features = FeatureMatrix(n, dim);
        b.features.data() = flat;
        if (!b.features.all_finite())
            throw std::invalid_argument("graph json: non-finite feature entries");
    }
    if (j.contains("labels")) {
        b.labels = j.at("labels").get<std::vector<int>>();
        if (b.labels.size() != n)
            throw std::invalid_argument("graph json: labels size != n_nodes");
    }
    return b;
}

inline void write_text_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << text;
}

inline std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline json read_json_file(const std::filesystem::path& path) {
    return json::parse(read_text_file(path));
}

inline std::string format_full(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

/// FNV-1a over bytes; the replay contract compares these.
inline std::uint64_t fnv1a_hash(const std::string& bytes) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

// ---------------------------------------------------------------------------
// dataset spec + directory layout

struct DatasetSpec {
    std::string family = "erdos-renyi";  // ring | crossed-ring | clique-path | spine | heterophilic
    std::size_t count = 1;
    std::size_t n_min = 100;
    std::size_t n_max = 150;
    double p_min = 0.15;
    double p_max = 0.3;
    std::size_t n_classes = 7;
    std::size_t feature_dim = 8;
    double avg_degree = 10.0;
    double p_hetero = 0.8;
    std::size_t clique_size = 4;    // clique-path: clique order (path length from n range)
    std::size_t spine_leaves = 3;   // spine: pendant nodes per spine node
    std::size_t chord_offset = 0;   // crossed-ring chord rule parameter
    std::string target = "none";
    std::uint64_t seed = 0;

    void validate() const {
        auto in01 = [](double v) { return v >= 0.0 && v <= 1.0; };
        if (family != "erdos-renyi" && family != "ring" && family != "crossed-ring" &&
            family != "clique-path" && family != "spine" && family != "heterophilic")
            throw std::invalid_argument("dataset spec: unknown family '" + family + "'");
        if (count < 1) throw std::invalid_argument("dataset spec: count must be >= 1");
        if (n_min < 2 || n_max < n_min)
            throw std::invalid_argument("dataset spec: bad node range n_min..n_max");
        if (!in01(p_min) || !in01(p_max) || p_max < p_min)
            throw std::invalid_argument("dataset spec: edge_prob outside [0,1] (p_min/p_max)");
        if (!in01(p_hetero)) throw std::invalid_argument("dataset spec: p_hetero outside [0,1]");
        if (family == "heterophilic" && n_classes < 2)
            throw std::invalid_argument("dataset spec: n_classes must be >= 2");
        if (feature_dim < 1) throw std::invalid_argument("dataset spec: feature_dim must be >= 1");
        target_kind_from_string(target);  // throws on unknown
    }
};

inline json dataset_spec_to_json(const DatasetSpec& s) {
    return json{{"family", s.family},       {"count", s.count},
                {"n_min", s.n_min},         {"n_max", s.n_max},
                {"p_min", s.p_min},         {"p_max", s.p_max},
                {"n_classes", s.n_classes}, {"feature_dim", s.feature_dim},
                {"avg_degree", s.avg_degree}, {"p_hetero", s.p_hetero},
                {"clique_size", s.clique_size}, {"spine_leaves", s.spine_leaves},
                {"chord_offset", s.chord_offset}, {"target", s.target},
                {"seed", s.seed}};
}

inline DatasetSpec dataset_spec_from_json(const json& j) {
    DatasetSpec s;
    auto get = [&](const char* key, auto& field) {
        if (j.contains(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
    };
    get("family", s.family);
    get("count", s.count);
    get("n_min", s.n_min);
    get("n_max", s.n_max);
    get("p_min", s.p_min);
    get("p_max", s.p_max);
    get("n_classes", s.n_classes);
    get("feature_dim", s.feature_dim);
    get("avg_degree", s.avg_degree);
    get("p_hetero", s.p_hetero);
    get("clique_size", s.clique_size);
    get("spine_leaves", s.spine_leaves);
    get("chord_offset", s.chord_offset);
    get("target", s.target);
    get("seed", s.seed);
    s.validate();
    return s;
}

struct GraphInstance {
    Graph graph;
    FeatureMatrix features;
    std::vector<int> labels;
    double target = 0.0;
    std::uint64_t instance_seed = 0;
    std::size_t attempts = 1;  // connectivity resampling count
};

struct Dataset {
    DatasetSpec spec;
    std::vector<GraphInstance> instances;
};

/// Build the dataset in memory, deterministically from (spec, seed).
inline Dataset build_dataset(const DatasetSpec& spec) {
    spec.validate();
    const TargetKind kind = target_kind_from_string(spec.target);
    const bool needs_connected =
        kind == TargetKind::dist_emph || kind == TargetKind::spectral_dist;
    Dataset ds;
    ds.spec = spec;
    for (std::size_t idx = 0; idx < spec.count; ++idx) {
        GraphInstance inst;
        inst.instance_seed = derive_seed(spec.seed, 0x64617461, idx);
        Rng rng(inst.instance_seed);
        const std::size_t n = spec.n_min + rng.next_below(spec.n_max - spec.n_min + 1);
        if (spec.family == "erdos-renyi") {
            const double p = rng.uniform(spec.p_min, spec.p_max);
            for (std::size_t attempt = 0;; ++attempt) {
                if (attempt >= 200)
                    throw std::runtime_error("build_dataset: no connected sample after 200 draws");
                inst.graph = gen_erdos_renyi(n, p, derive_seed(inst.instance_seed, attempt));
                inst.attempts = attempt + 1;
                if (!needs_connected || is_connected(inst.graph)) break;
            }
        } else if (spec.family == "ring") {
            inst.graph = gen_ring(n);
        } else if (spec.family == "crossed-ring") {
            inst.graph = gen_crossed_ring(n % 2 == 0 ? n : n - 1, spec.chord_offset);
        } else if (spec.family == "clique-path") {
            inst.graph = gen_clique_path(spec.clique_size, n);
        } else if (spec.family == "spine") {
            inst.graph = gen_spine(n, spec.spine_leaves);
        } else {  // heterophilic
            auto h = gen_heterophilic(n, spec.n_classes, spec.feature_dim, spec.avg_degree,
                                      spec.p_hetero, inst.instance_seed);
            inst.graph = std::move(h.graph);
            inst.labels = std::move(h.labels);
            inst.features = std::move(h.features);
        }
        if (spec.family != "heterophilic") {
            inst.features = regression_features(inst.graph, spec.feature_dim, inst.instance_seed);
            inst.target = energy_target(inst.graph, kind);
        }
        ds.instances.push_back(std::move(inst));
    }
    return ds;
}

/// Write manifest.json + graph_NNN.json (+ targets.csv) into `dir`.
inline void write_dataset(const Dataset& ds, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    json manifest;
    manifest["format"] = "mbmpnn-dataset";
    manifest["version"] = 1;
    manifest["spec"] = dataset_spec_to_json(ds.spec);
    manifest["constants"] = {{"dist_target_scale", kDistTargetScale},
                             {"clust_target_scale", kClustTargetScale},
                             {"class_mean_scale", kClassMeanScale}};
    json insts = json::array();
    const bool has_targets = target_kind_from_string(ds.spec.target) != TargetKind::none &&
                             ds.spec.family != "heterophilic";
    std::string targets_csv = "graph_id,target\n";
    for (std::size_t i = 0; i < ds.instances.size(); ++i) {
        const auto& inst = ds.instances[i];
        char name[32];
        std::snprintf(name, sizeof(name), "graph_%03zu.json", i);
        insts.push_back({{"file", name},
                         {"seed", inst.instance_seed},
                         {"attempts", inst.attempts},
                         {"n_nodes", inst.graph.n_nodes},
                         {"n_edges", inst.graph.n_edges()}});
        json gj = graph_to_json(inst.graph, &inst.features,
                                inst.labels.empty() ? nullptr : &inst.labels);
        write_text_file(dir / name, gj.dump());
        if (has_targets)
            targets_csv += std::to_string(i) + "," + format_full(inst.target) + "\n";
    }
    manifest["instances"] = std::move(insts);
    write_text_file(dir / "manifest.json", manifest.dump(2));
    if (has_targets) write_text_file(dir / "targets.csv", targets_csv);
}

inline Dataset load_dataset(const std::filesystem::path& dir) {
    const json manifest = read_json_file(dir / "manifest.json");
    if (!manifest.contains("format") || manifest.at("format") != "mbmpnn-dataset")
        throw std::runtime_error("load_dataset: not a dataset directory: " + dir.string());
    Dataset ds;
    ds.spec = dataset_spec_from_json(manifest.at("spec"));
    std::vector<double> targets;
    const auto targets_path = dir / "targets.csv";
    if (std::filesystem::exists(targets_path)) {
        std::istringstream in(read_text_file(targets_path));
        std::string line;
        std::getline(in, line);  // header
        while (std::getline(in, line)) {
            const auto comma = line.find(',');
            if (comma == std::string::npos) continue;
            targets.push_back(std::stod(line.substr(comma + 1)));
        }
    }
    for (const auto& entry : manifest.at("instances")) {
        GraphInstance inst;
        auto bundle = graph_from_json(read_json_file(dir / entry.at("file").get<std::string>()));
        inst.graph = std::move(bundle.graph);
        inst.features = std::move(bundle.features);
        inst.labels = std::move(bundle.labels);
        inst.instance_seed = entry.value("seed", std::uint64_t(0));
        inst.attempts = entry.value("attempts", std::size_t(1));
        if (ds.instances.size() < targets.size()) inst.target = targets[ds.instances.size()];
        ds.instances.push_back(std::move(inst));
    }
    return ds;
}

// ---------------------------------------------------------------------------
// model checkpoint: config + every parameter tensor, exact double round-trip

inline json model_config_to_json(const ModelConfig& c) {
    return json{{"nu", c.nu},
                {"layers", c.layers},
                {"hidden_dim", c.hidden_dim},
                {"cheb_order_2body", c.cheb_order_2body},
                {"weight_mode", to_string(c.weight_mode)},
                {"enumeration_cap", c.enumeration_cap},
                {"rng_seed", c.rng_seed},
                {"filter_basis",
                 c.filter_basis == FilterBasis::spectral ? "spectral" : "transposed"}};
}

inline ModelConfig model_config_from_json(const json& j) {
    ModelConfig c;
    auto get = [&](const char* key, auto& field) {
        if (j.contains(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
    };
    get("nu", c.nu);
    get("layers", c.layers);
    get("hidden_dim", c.hidden_dim);
    get("cheb_order_2body", c.cheb_order_2body);
    get("enumeration_cap", c.enumeration_cap);
    get("rng_seed", c.rng_seed);
    if (j.contains("weight_mode"))
        c.weight_mode = weight_mode_from_string(j.at("weight_mode").get<std::string>());
    if (j.contains("filter_basis"))
        c.filter_basis = j.at("filter_basis").get<std::string>() == "transposed"
                             ? FilterBasis::transposed
                             : FilterBasis::spectral;
    c.validate();
    return c;
}

inline json matrix_to_json(const Matrix& m) {
    return json{{"rows", m.rows()}, {"cols", m.cols()}, {"data", m.data()}};
}

inline Matrix matrix_from_json(const json& j) {
    Matrix m(j.at("rows").get<std::size_t>(), j.at("cols").get<std::size_t>());
    const auto data = j.at("data").get<std::vector<double>>();
    if (data.size() != m.data().size())
        throw std::invalid_argument("matrix json: data size mismatch");
    m.data() = data;
    return m;
}

inline json checkpoint_to_json(const ModelConfig& config, const ModelState& state) {
    json layers = json::array();
    for (const auto& l : state.layers) {
        json lk = json::array();
        for (const auto& t : l.theta_k) lk.push_back(t);
        layers.push_back({{"theta2", l.theta2},
                          {"theta_k", std::move(lk)},
                          {"w_x", matrix_to_json(l.w_x)},
                          {"w_y", matrix_to_json(l.w_y)}});
    }
    return json{{"format", "mbmpnn-checkpoint"},
                {"version", 1},
                {"config", model_config_to_json(config)},
                {"input_dim", state.input_dim},
                {"output_dim", state.output_dim},
                {"task", state.task == TaskKind::regression ? "regression" : "classification"},
                {"w_in", matrix_to_json(state.w_in)},
                {"layers", std::move(layers)},
                {"w_out", matrix_to_json(state.w_out)},
                {"b_out", state.b_out},
                {"target_mu", state.target_mu},
                {"target_sigma", state.target_sigma}};
}

struct Checkpoint {
    ModelConfig config;
    ModelState state;
};

inline Checkpoint checkpoint_from_json(const json& j) {
    if (!j.contains("format") || j.at("format") != "mbmpnn-checkpoint")
        throw std::runtime_error("checkpoint: unrecognized file format");
    Checkpoint c;
    c.config = model_config_from_json(j.at("config"));
    c.state.input_dim = j.at("input_dim").get<std::size_t>();
    c.state.output_dim = j.at("output_dim").get<std::size_t>();
    c.state.task = j.at("task").get<std::string>() == "classification"
                       ? TaskKind::classification
                       : TaskKind::regression;
    c.state.w_in = matrix_from_json(j.at("w_in"));
    for (const auto& lj : j.at("layers")) {
        LayerParams l;
        l.theta2 = lj.at("theta2").get<std::vector<double>>();
        for (const auto& t : lj.at("theta_k")) l.theta_k.push_back(t.get<std::vector<double>>());
        l.w_x = matrix_from_json(lj.at("w_x"));
        l.w_y = matrix_from_json(lj.at("w_y"));
        c.state.layers.push_back(std::move(l));
    }
    c.state.w_out = matrix_from_json(j.at("w_out"));
    c.state.b_out = j.at("b_out").get<std::vector<double>>();
    c.state.target_mu = j.value("target_mu", 0.0);
    c.state.target_sigma = j.value("target_sigma", 1.0);
    return c;
}

/// metrics.csv minus its wall_ms column: the deterministic projection that
/// replays must reproduce bitwise.
inline std::string strip_wall_column(const std::string& csv) {
    std::istringstream in(csv);
    std::string line, out;
    while (std::getline(in, line)) {
        const auto comma = line.rfind(',');
        out += (comma == std::string::npos) ? line : line.substr(0, comma);
        out += '\n';
    }
    return out;
}

}  // namespace manybody
