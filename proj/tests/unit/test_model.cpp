#include <catch2/catch_amalgamated.hpp>
#include <cmath>

#include "manybody/model.hpp"
#include "support/random_graphs.hpp"

using namespace manybody;

namespace {

Graph triangle_plus_tail() {
    // 0-1-2 triangle, 3 hangs off 2, 4 isolated-ish chain
    return build_graph({{0, 1}, {1, 2}, {0, 2}, {2, 3}, {3, 4}}, 5);
}

ModelConfig small_config(std::size_t nu, std::size_t layers, std::size_t hidden) {
    ModelConfig cfg;
    cfg.nu = nu;
    cfg.layers = layers;
    cfg.hidden_dim = hidden;
    cfg.enumeration_cap = 0;
    cfg.rng_seed = 7;
    return cfg;
}

}  // namespace

TEST_CASE("ModelConfig: zero-layer and order-1 configs rejected") {
    ModelConfig cfg;
    cfg.layers = 0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg.layers = 1;
    cfg.nu = 1;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

TEST_CASE("layer_messages: theta2 identity/zero filters") {
    Graph g = triangle_plus_tail();
    auto cm = balanced_forman(g);
    auto ctx = build_context(g, cm, small_config(2, 1, 3));
    Rng rng(3);
    FeatureMatrix h = test_support::random_matrix(rng, g.n_nodes, 3);

    LayerParams p;
    p.theta2 = {1.0, 0.0};
    p.w_x = Matrix(3, 3);
    p.w_y = Matrix(3, 3);
    LayerCacheEntry entry;
    layer_messages(ctx, p, h, entry);
    CHECK(max_abs_diff(entry.x, h) == 0.0);

    p.theta2 = {0.0, 0.0};
    layer_messages(ctx, p, h, entry);
    CHECK(entry.x.max_abs() == 0.0);
}

TEST_CASE("higher-order message: node with no motifs gives a zero row") {
    Graph path = build_graph({{0, 1}, {1, 2}}, 3);
    auto cm = balanced_forman(path);
    auto ctx = build_context(path, cm, small_config(3, 1, 2));
    Rng rng(5);
    FeatureMatrix h = test_support::random_matrix(rng, 3, 2);
    LayerParams p;
    p.theta2 = {0.0, 0.0};
    p.theta_k = {{0.4, -0.2, 0.1}};
    p.w_x = Matrix(2, 2);
    p.w_y = Matrix(2, 2);
    LayerCacheEntry entry;
    layer_messages(ctx, p, h, entry);
    // end nodes have degree 1: no order-3 motifs, so zero rows
    CHECK(entry.y(0, 0) == 0.0);
    CHECK(entry.y(0, 1) == 0.0);
    CHECK(entry.y(2, 0) == 0.0);
    // the middle node has exactly one motif; its row is S_3's row
    CHECK(entry.y(1, 0) == entry.s[0](1, 0));
    CHECK(entry.y(1, 1) == entry.s[0](1, 1));
}

TEST_CASE("higher-order message: missing orders drop out of the product") {
    // degree-2 center with nu=4: order 3 exists, order 4 does not
    Graph path = build_graph({{0, 1}, {1, 2}}, 3);
    auto cm = balanced_forman(path);
    auto ctx = build_context(path, cm, small_config(4, 1, 2));
    Rng rng(6);
    FeatureMatrix h = test_support::random_matrix(rng, 3, 2);
    LayerParams p;
    p.theta2 = {0.0, 0.0};
    p.theta_k = {{0.4, -0.2, 0.1}, {0.3, 0.1, -0.5, 0.2}};
    p.w_x = Matrix(2, 2);
    p.w_y = Matrix(2, 2);
    LayerCacheEntry entry;
    layer_messages(ctx, p, h, entry);
    CHECK(entry.y(1, 0) == entry.s[0](1, 0));
    CHECK(entry.y(1, 1) == entry.s[0](1, 1));
}

TEST_CASE("higher-order message: single unweighted 3-star matches the dense oracle") {
    // path 0-1-2 under unweighted-learnable weights: node 1 owns one 3-motif
    Graph path = build_graph({{0, 1}, {1, 2}}, 3);
    auto cm = balanced_forman(path);
    ModelConfig cfg = small_config(3, 1, 2);
    cfg.weight_mode = WeightMode::unweighted_learnable;
    auto ctx = build_context(path, cm, cfg);

    FeatureMatrix h(3, 2);
    for (std::size_t i = 0; i < 3; ++i) {
        h(i, 0) = 2.5;  // constant feature column
        h(i, 1) = double(i) - 1.0;
    }
    LayerParams p;
    p.theta2 = {0.0, 0.0};
    p.theta_k = {{1.0, 0.0, 0.0}};  // T_1 only
    p.w_x = Matrix(2, 2);
    p.w_y = Matrix(2, 2);
    LayerCacheEntry entry;
    layer_messages(ctx, p, h, entry);

    // dense oracle on the explicit 3-node star Laplacian (center first)
    auto d = eigh(star_laplacian({1.0, 1.0}));
    auto diag = chebyshev_filter(d, {1.0}, 1, d.max_abs_eigenvalue());
    FeatureMatrix h_motif(3, 2);
    for (std::size_t c = 0; c < 2; ++c) {
        h_motif(0, c) = h(1, c);
        h_motif(1, c) = h(0, c);
        h_motif(2, c) = h(2, c);
    }
    auto filtered = apply_filter(d, diag, h_motif);
    CHECK_THAT(entry.s[0](1, 0), Catch::Matchers::WithinAbs(filtered(0, 0), 1e-12));
    CHECK_THAT(entry.s[0](1, 1), Catch::Matchers::WithinAbs(filtered(0, 1), 1e-12));
}

TEST_CASE("model_forward: zero mixing weights leave the residual stream") {
    Graph g = triangle_plus_tail();
    auto cm = balanced_forman(g);
    auto ctx = build_context(g, cm, small_config(3, 3, 4));
    ModelState s = init_state(ctx, 4, 1, TaskKind::regression, 11);
    for (auto& l : s.layers) {
        l.w_x.fill(0.0);
        l.w_y.fill(0.0);
    }
    Rng rng(8);
    FeatureMatrix x = test_support::random_matrix(rng, g.n_nodes, 4);
    auto cache = model_forward(ctx, s, x);
    CHECK(max_abs_diff(cache.h.front(), cache.h.back()) == 0.0);
}

TEST_CASE("model_forward: identity projection with zero weights pools the input") {
    Graph g = triangle_plus_tail();
    auto cm = balanced_forman(g);
    auto ctx = build_context(g, cm, small_config(2, 1, 3));
    ModelState s = init_state(ctx, 3, 1, TaskKind::regression, 4);
    s.w_in = Matrix::identity(3);
    s.layers[0].w_x.fill(0.0);
    s.layers[0].w_y.fill(0.0);
    Rng rng(9);
    FeatureMatrix x = test_support::random_matrix(rng, g.n_nodes, 3);
    auto cache = model_forward(ctx, s, x);
    for (std::size_t c = 0; c < 3; ++c) {
        double col = 0.0;
        for (std::size_t i = 0; i < g.n_nodes; ++i) col += x(i, c);
        CHECK_THAT(cache.pooled[c], Catch::Matchers::WithinAbs(col, 1e-12));
    }
}

TEST_CASE("model_forward: shape validation") {
    Graph g = triangle_plus_tail();
    auto cm = balanced_forman(g);
    auto ctx = build_context(g, cm, small_config(2, 1, 3));
    ModelState s = init_state(ctx, 3, 1, TaskKind::regression, 4);
    CHECK_THROWS_AS(model_forward(ctx, s, FeatureMatrix(2, 3)), std::invalid_argument);
    CHECK_THROWS_AS(model_forward(ctx, s, FeatureMatrix(g.n_nodes, 2)), std::invalid_argument);
}

namespace {

/// Squared-error loss on one graph; returns analytic grads via backward.
double regression_loss(const ModelContext& ctx, const ModelState& s, const FeatureMatrix& x,
                       double target, ModelState* grads) {
    auto cache = model_forward(ctx, s, x);
    const double err = cache.scalar_out - target;
    if (grads) model_backward_regression(ctx, s, cache, x, 2.0 * err, *grads);
    return err * err;
}

}  // namespace

TEST_CASE("model_backward: gradients match central finite differences") {
    Rng rng(42);
    Graph g = test_support::random_connected_graph(rng, 10, 0.35);
    auto cm = balanced_forman(g);
    ModelConfig cfg = small_config(3, 2, 4);
    auto ctx = build_context(g, cm, cfg);
    ModelState s = init_state(ctx, 3, 1, TaskKind::regression, 21);
    FeatureMatrix x = test_support::random_matrix(rng, g.n_nodes, 3);
    const double target = 0.7;

    ModelState grads = zeros_like(s);
    regression_loss(ctx, s, x, target, &grads);

    auto params = parameter_pointers(s);
    auto gptrs = parameter_pointers(grads);
    REQUIRE(params.size() == gptrs.size());
    const double eps = 1e-5;
    double worst = 0.0;
    for (std::size_t p = 0; p < params.size(); ++p) {
        const double saved = *params[p];
        *params[p] = saved + eps;
        const double lp = regression_loss(ctx, s, x, target, nullptr);
        *params[p] = saved - eps;
        const double lm = regression_loss(ctx, s, x, target, nullptr);
        *params[p] = saved;
        const double numeric = (lp - lm) / (2.0 * eps);
        const double analytic = *gptrs[p];
        const double err = std::abs(numeric - analytic) /
                           std::max({1.0, std::abs(numeric), std::abs(analytic)});
        worst = std::max(worst, err);
    }
    CHECK(worst < 1e-6);
}

TEST_CASE("model_backward: theta gradients vanish when mixing weights are zero") {
    Rng rng(43);
    Graph g = test_support::random_connected_graph(rng, 8, 0.4);
    auto cm = balanced_forman(g);
    auto ctx = build_context(g, cm, small_config(3, 2, 3));
    ModelState s = init_state(ctx, 2, 1, TaskKind::regression, 5);
    for (auto& l : s.layers) {
        l.w_x.fill(0.0);
        l.w_y.fill(0.0);
    }
    FeatureMatrix x = test_support::random_matrix(rng, g.n_nodes, 2);
    ModelState grads = zeros_like(s);
    regression_loss(ctx, s, x, 0.0, &grads);
    for (const auto& l : grads.layers) {
        for (double v : l.theta2) CHECK(v == 0.0);
        for (const auto& t : l.theta_k)
            for (double v : t) CHECK(v == 0.0);
    }
}

TEST_CASE("model_backward: doubling the upstream gradient doubles every gradient") {
    Rng rng(44);
    Graph g = test_support::random_connected_graph(rng, 8, 0.4);
    auto cm = balanced_forman(g);
    auto ctx = build_context(g, cm, small_config(3, 1, 3));
    ModelState s = init_state(ctx, 2, 1, TaskKind::regression, 6);
    FeatureMatrix x = test_support::random_matrix(rng, g.n_nodes, 2);
    auto cache = model_forward(ctx, s, x);

    ModelState g1 = zeros_like(s), g2 = zeros_like(s);
    model_backward_regression(ctx, s, cache, x, 1.0, g1);
    model_backward_regression(ctx, s, cache, x, 2.0, g2);
    auto p1 = parameter_pointers(g1);
    auto p2 = parameter_pointers(g2);
    for (std::size_t i = 0; i < p1.size(); ++i)
        CHECK_THAT(*p2[i], Catch::Matchers::WithinRel(2.0 * *p1[i], 1e-12) ||
                               Catch::Matchers::WithinAbs(0.0, 1e-300));
}

TEST_CASE("jacobian_probe: zero beyond the receptive field, exact") {
    // path of 6 nodes; default two-term Chebyshev reaches one hop per layer
    Graph g = build_graph({{0, 1}, {1, 2}, {2, 3}, {3, 4}, {4, 5}}, 6);
    auto cm = balanced_forman(g);
    ModelConfig cfg = small_config(3, 4, 3);
    auto ctx = build_context(g, cm, cfg);
    ModelState s = init_state(ctx, 2, 1, TaskKind::regression, 33);
    Rng rng(50);
    FeatureMatrix x = test_support::random_matrix(rng, g.n_nodes, 2);

    CHECK(jacobian_probe(ctx, s, x, 0, 3, 2) == 0.0);  // dist 3 > r 2
    CHECK(jacobian_probe(ctx, s, x, 0, 5, 4) == 0.0);  // dist 5 > r 4
    CHECK(jacobian_probe(ctx, s, x, 0, 2, 2) != 0.0);  // dist 2 <= r 2
    CHECK(jacobian_probe(ctx, s, x, 0, 1, 1) != 0.0);
}

TEST_CASE("jacobian_probe: r=0 at u=v is 1 under an identity projection") {
    Graph g = build_graph({{0, 1}}, 2);
    auto cm = balanced_forman(g);
    auto ctx = build_context(g, cm, small_config(2, 1, 2));
    ModelState s = init_state(ctx, 2, 1, TaskKind::regression, 1);
    s.w_in = Matrix::identity(2);
    FeatureMatrix x(2, 2);
    x(0, 0) = 0.3;
    x(1, 1) = -0.2;
    CHECK_THAT(jacobian_probe(ctx, s, x, 0, 0, 0), Catch::Matchers::WithinAbs(1.0, 1e-9));
    CHECK(jacobian_probe(ctx, s, x, 0, 1, 0) == 0.0);
}

TEST_CASE("model_forward: permutation invariance on a small case") {
    Rng rng(60);
    Graph g = test_support::random_connected_graph(rng, 9, 0.4);
    auto cm = balanced_forman(g);
    ModelConfig cfg = small_config(4, 2, 3);
    auto ctx = build_context(g, cm, cfg);
    ModelState s = init_state(ctx, 3, 1, TaskKind::regression, 70);
    FeatureMatrix x = test_support::random_matrix(rng, g.n_nodes, 3);
    auto perm = test_support::random_permutation(rng, g.n_nodes);

    Graph pg = permute_graph(g, perm);
    auto pcm = balanced_forman(pg);
    auto pctx = build_context(pg, pcm, cfg);
    auto base = model_forward(ctx, s, x);
    auto permuted = model_forward(pctx, s, permute_rows(x, perm));
    auto expected = permute_rows(base.final_hidden(), perm);
    CHECK(max_abs_diff(permuted.final_hidden(), expected) < 1e-11);
    CHECK_THAT(permuted.scalar_out, Catch::Matchers::WithinAbs(base.scalar_out, 1e-11));
}

TEST_CASE("model_forward: golden regression pin on a fixed tiny graph") {
    Graph g = build_graph({{0, 1}, {0, 2}, {1, 2}, {2, 3}, {3, 4}, {3, 5}, {4, 5}}, 6);
    auto cm = balanced_forman(g);
    ModelConfig cfg;
    cfg.nu = 4;
    cfg.layers = 2;
    cfg.hidden_dim = 3;
    cfg.enumeration_cap = 0;
    cfg.rng_seed = 123;
    auto ctx = build_context(g, cm, cfg);
    ModelState s = init_state(ctx, 2, 1, TaskKind::regression, 123);
    FeatureMatrix x(6, 2);
    Rng rng(derive_seed(123, 0xfeed));
    for (double& v : x.data()) v = rng.uniform(-1.0, 1.0);
    auto cache = model_forward(ctx, s, x);
    CHECK_THAT(cache.scalar_out,
               Catch::Matchers::WithinAbs(0.57396874587449764, 1e-12));
    CHECK_THAT(cache.final_hidden()(0, 0),
               Catch::Matchers::WithinAbs(0.22000641484077332, 1e-12));
    CHECK_THAT(cache.final_hidden()(5, 2),
               Catch::Matchers::WithinAbs(0.015671232879203176, 1e-12));
}

TEST_CASE("model_forward: deterministic given identical seeds") {
    Rng rng(61);
    Graph g = test_support::random_connected_graph(rng, 10, 0.3);
    auto cm = balanced_forman(g);
    ModelConfig cfg = small_config(4, 2, 4);
    cfg.enumeration_cap = 3;  // exercise the seeded sampler
    auto a_ctx = build_context(g, cm, cfg);
    auto b_ctx = build_context(g, cm, cfg);
    ModelState s = init_state(a_ctx, 3, 1, TaskKind::regression, 99);
    FeatureMatrix x = test_support::random_matrix(rng, g.n_nodes, 3);
    auto a = model_forward(a_ctx, s, x);
    auto b = model_forward(b_ctx, s, x);
    CHECK(a.final_hidden().data() == b.final_hidden().data());
    CHECK(a.scalar_out == b.scalar_out);
}
