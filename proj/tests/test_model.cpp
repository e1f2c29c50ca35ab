#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>

#include "pathmlp/model.hpp"

using namespace pathmlp;

namespace {

struct SmallFixture {
  Graph g;
  NodeFeatures x;
  Labels y;
  PathSet paths;
  ModelConfig cfg;

  SmallFixture(int n, int f, int classes, int d, int n_paths, std::uint64_t seed,
               double edge_prob = 0.35) {
    Rng rng(seed);
    std::set<std::pair<int, int>> edges;
    for (int u = 1; u < n; ++u) edges.emplace(u - 1, u);
    for (int u = 0; u < n; ++u) {
      for (int v = u + 1; v < n; ++v) {
        if (rng.next_double() < edge_prob) edges.emplace(u, v);
      }
    }
    g = build_graph({edges.begin(), edges.end()}, n);
    x = NodeFeatures(n, f);
    for (double& v : x.v) v = rng.next_gaussian();
    y.class_count = classes;
    y.values.resize(n);
    for (int i = 0; i < n; ++i) y.values[i] = static_cast<int>(rng.next_below(classes));

    SamplerConfig scfg;
    scfg.d = d;
    scfg.n_paths = n_paths;
    scfg.seed = seed;
    paths = sample_all_paths(g, x, scfg);

    cfg.in_dim = f;
    cfg.f_prime = 6;
    cfg.f_h = 8;
    cfg.class_count = classes;
    cfg.d = d;
    cfg.n_paths = n_paths;
  }

  std::vector<int> all_nodes() const {
    std::vector<int> nodes(g.node_count);
    for (int i = 0; i < g.node_count; ++i) nodes[i] = i;
    return nodes;
  }
};

} // namespace

TEST_CASE("augment_features doubles the dimension and is identity-concat on edgeless graphs") {
  const Graph edgeless = build_graph({}, 3);
  const auto op = renormalized_affinity(edgeless);
  NodeFeatures x(3, 2);
  Rng rng(1);
  for (double& v : x.v) v = rng.next_gaussian();
  const auto aug = augment_features(x, op, 1);
  CHECK(aug.cols == 4);
  for (int i = 0; i < 3; ++i) {
    for (int c = 0; c < 2; ++c) {
      CHECK(aug.at(i, c) == x.at(i, c));
      CHECK(aug.at(i, 2 + c) == x.at(i, c));
    }
  }
}

TEST_CASE("augment_features two-node hand case") {
  const Graph pair = build_graph({{0, 1}}, 2);
  const auto op = renormalized_affinity(pair);
  NodeFeatures x(2, 1);
  x.at(0, 0) = 2.0;
  x.at(1, 0) = 0.0;
  const auto aug = augment_features(x, op, 1);
  CHECK(aug.at(0, 0) == 2.0);
  CHECK(aug.at(0, 1) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(aug.at(1, 0) == 0.0);
  CHECK(aug.at(1, 1) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK_THROWS_AS(augment_features(x, op, 3), std::invalid_argument);
}

TEST_CASE("node encodings: zero weights give zeros, identical nodes identical rows") {
  SmallFixture fx(10, 4, 2, 3, 2, 5);
  PathMLPParams params = init_params(fx.cfg, fx.g.node_count, 5);
  for (double& v : params.w1.value.v) v = 0.0;
  Tape tape;
  const auto fc = pathmlp_forward(tape, fx.g, fx.x, fx.paths, fx.all_nodes(), nullptr,
                                  params, fx.cfg, false, nullptr);
  for (double v : tape.value(fc.node_encodings).v) CHECK(v == 0.0);
}

TEST_CASE("relu of a negative 1-D transform is zero") {
  // W1 = [[1]], bias 0, x = -2: sigma(MLP1(x)) = 0
  SmallFixture fx(6, 1, 2, 2, 2, 6);
  for (int i = 0; i < 6; ++i) fx.x.at(i, 0) = -2.0;
  ModelConfig cfg = fx.cfg;
  cfg.f_prime = 1;
  PathMLPParams params = init_params(cfg, fx.g.node_count, 6);
  params.w1.value.v[0] = 1.0;
  Tape tape;
  const auto fc = pathmlp_forward(tape, fx.g, fx.x, fx.paths, fx.all_nodes(), nullptr,
                                  params, cfg, false, nullptr);
  for (double v : tape.value(fc.node_encodings).v) CHECK(v == 0.0);
}

TEST_CASE("path concat shape chain holds for the default grids") {
  for (int f_prime : {12, 24, 32}) {
    for (int d : {3, 4, 5}) {
      SmallFixture fx(12, 5, 3, d, 4, 7);
      ModelConfig cfg = fx.cfg;
      cfg.f_prime = f_prime;
      cfg.f_h = 64;
      PathMLPParams params = init_params(cfg, fx.g.node_count, 7);
      Tape tape;
      const auto fc = pathmlp_forward(tape, fx.g, fx.x, fx.paths, fx.all_nodes(), nullptr,
                                      params, cfg, false, nullptr);
      CHECK(tape.value(fc.path_concat).cols == (d + 1) * f_prime);
      CHECK(tape.value(fc.path_encodings).cols == 64);
      CHECK(tape.value(fc.fused).cols == 64);
      CHECK(tape.value(fc.probs).cols == 3);
    }
  }
}

TEST_CASE("zero eps logits average the path encodings") {
  SmallFixture fx(10, 4, 2, 3, 4, 8);
  PathMLPParams params = init_params(fx.cfg, fx.g.node_count, 8);
  Tape tape;
  const auto fc = pathmlp_forward(tape, fx.g, fx.x, fx.paths, fx.all_nodes(), nullptr,
                                  params, fx.cfg, false, nullptr);
  const Matrix& weights = tape.value(fc.path_weights);
  for (double w : weights.v) CHECK(w == doctest::Approx(0.25).epsilon(1e-12));
  const Matrix& enc = tape.value(fc.path_encodings);
  const Matrix& msg = tape.value(fc.path_message);
  for (int i = 0; i < 10; ++i) {
    for (int c = 0; c < fx.cfg.f_h; ++c) {
      double mean = 0.0;
      for (int k = 0; k < 4; ++k) mean += enc.at(i * 4 + k, c) / 4.0;
      CHECK(msg.at(i, c) == doctest::Approx(mean).epsilon(1e-12));
    }
  }
}

TEST_CASE("saturated eps logits select a single path") {
  SmallFixture fx(8, 4, 2, 2, 3, 9);
  PathMLPParams params = init_params(fx.cfg, fx.g.node_count, 9);
  for (int i = 0; i < 8; ++i) params.eps_logits.value.at(i, 1) = 60.0;  // softmax saturates
  Tape tape;
  const auto fc = pathmlp_forward(tape, fx.g, fx.x, fx.paths, fx.all_nodes(), nullptr,
                                  params, fx.cfg, false, nullptr);
  const Matrix& enc = tape.value(fc.path_encodings);
  const Matrix& msg = tape.value(fc.path_message);
  for (int i = 0; i < 8; ++i) {
    for (int c = 0; c < fx.cfg.f_h; ++c) {
      CHECK(msg.at(i, c) == doctest::Approx(enc.at(i * 3 + 1, c)).epsilon(1e-9));
    }
  }
}

TEST_CASE("hand-mixed eps weights: logits (0, ln 3) give 0.25/0.75") {
  SmallFixture fx(8, 4, 2, 2, 2, 10);
  PathMLPParams params = init_params(fx.cfg, fx.g.node_count, 10);
  for (int i = 0; i < 8; ++i) params.eps_logits.value.at(i, 1) = std::log(3.0);
  Tape tape;
  const auto fc = pathmlp_forward(tape, fx.g, fx.x, fx.paths, fx.all_nodes(), nullptr,
                                  params, fx.cfg, false, nullptr);
  const Matrix& w = tape.value(fc.path_weights);
  for (int i = 0; i < 8; ++i) {
    CHECK(w.at(i, 0) == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(w.at(i, 1) == doctest::Approx(0.75).epsilon(1e-12));
  }
}

TEST_CASE("state update adds the path message to the self encoding") {
  SmallFixture fx(9, 4, 2, 2, 3, 11);
  PathMLPParams params = init_params(fx.cfg, fx.g.node_count, 11);

  // zero path branch: state equals the self encoding
  PathMLPParams zero_msg = params;
  for (double& v : zero_msg.w2.value.v) v = 0.0;
  for (double& v : zero_msg.b2.value.v) v = 0.0;
  Tape t1;
  const auto fc1 = pathmlp_forward(t1, fx.g, fx.x, fx.paths, fx.all_nodes(), nullptr,
                                   zero_msg, fx.cfg, false, nullptr);
  const Matrix& state1 = t1.value(fc1.state);
  const Matrix& self1 = t1.value(fc1.self_encoding);
  for (std::size_t i = 0; i < state1.v.size(); ++i) CHECK(state1.v[i] == self1.v[i]);

  // zero self branch: state equals the path message
  PathMLPParams zero_self = params;
  for (double& v : zero_self.w3.value.v) v = 0.0;
  for (double& v : zero_self.b3.value.v) v = 0.0;
  Tape t2;
  const auto fc2 = pathmlp_forward(t2, fx.g, fx.x, fx.paths, fx.all_nodes(), nullptr,
                                   zero_self, fx.cfg, false, nullptr);
  const Matrix& state2 = t2.value(fc2.state);
  const Matrix& msg2 = t2.value(fc2.path_message);
  for (std::size_t i = 0; i < state2.v.size(); ++i) CHECK(state2.v[i] == msg2.v[i]);
}

TEST_CASE("beta 0 output is bitwise independent of w4 and w4 gets no gradient") {
  SmallFixture fx(10, 4, 2, 3, 3, 12);
  PathMLPParams a = init_params(fx.cfg, fx.g.node_count, 12);
  PathMLPParams b = a;
  Rng scramble(99);
  for (double& v : b.w4.value.v) v = scramble.next_gaussian() * 10.0;

  Tape ta, tb;
  const auto fa = pathmlp_forward(ta, fx.g, fx.x, fx.paths, fx.all_nodes(), &fx.y, a,
                                  fx.cfg, false, nullptr);
  const auto fb = pathmlp_forward(tb, fx.g, fx.x, fx.paths, fx.all_nodes(), &fx.y, b,
                                  fx.cfg, false, nullptr);
  for (std::size_t i = 0; i < ta.value(fa.probs).v.size(); ++i) {
    CHECK(ta.value(fa.probs).v[i] == tb.value(fb.probs).v[i]);
  }
  ta.backward(fa.loss);
  for (double g : a.w4.grad.v) CHECK(g == 0.0);
  CHECK(!fa.topo_encoding.valid());
}

TEST_CASE("beta 1 uses the topology embedding alone") {
  SmallFixture fx(10, 4, 2, 3, 3, 13);
  ModelConfig cfg = fx.cfg;
  cfg.beta = 1.0;
  PathMLPParams params = init_params(cfg, fx.g.node_count, 13);
  Tape tape;
  const auto fc = pathmlp_forward(tape, fx.g, fx.x, fx.paths, fx.all_nodes(), nullptr,
                                  params, cfg, false, nullptr);
  const Matrix& fused = tape.value(fc.fused);
  const Matrix& topo = tape.value(fc.topo_encoding);
  for (std::size_t i = 0; i < fused.v.size(); ++i) {
    CHECK(fused.v[i] == doctest::Approx(topo.v[i]).epsilon(1e-15));
  }
}

TEST_CASE("sparse adjacency row sums equal the dense product on a random 10-node graph") {
  SmallFixture fx(10, 4, 2, 2, 2, 14);
  ModelConfig cfg = fx.cfg;
  cfg.beta = 0.4;
  PathMLPParams params = init_params(cfg, fx.g.node_count, 14);
  Tape tape;
  const auto fc = pathmlp_forward(tape, fx.g, fx.x, fx.paths, fx.all_nodes(), nullptr,
                                  params, cfg, false, nullptr);
  // dense oracle: relu(A W4 + b4)
  const Matrix& w4 = params.w4.value;
  for (int i = 0; i < 10; ++i) {
    for (int c = 0; c < cfg.f_h; ++c) {
      double acc = params.b4.value.v[c];
      for (int u = 0; u < 10; ++u) {
        if (fx.g.has_edge(i, u)) acc += w4.at(u, c);
      }
      const double expect = acc > 0.0 ? acc : 0.0;
      CHECK(tape.value(fc.topo_encoding).at(i, c) == doctest::Approx(expect).epsilon(1e-12));
    }
  }
}

TEST_CASE("predict yields uniform rows for zero weights and valid distributions") {
  SmallFixture fx(9, 4, 3, 2, 2, 15);
  PathMLPParams params = init_params(fx.cfg, fx.g.node_count, 15);
  for (double& v : params.w5.value.v) v = 0.0;
  for (double& v : params.b5.value.v) v = 0.0;
  Tape tape;
  const auto fc = pathmlp_forward(tape, fx.g, fx.x, fx.paths, fx.all_nodes(), nullptr,
                                  params, fx.cfg, false, nullptr);
  const Matrix& probs = tape.value(fc.probs);
  for (double p : probs.v) CHECK(p == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("forward is deterministic in eval mode and eps rows stay normalized") {
  SmallFixture fx(14, 5, 3, 3, 4, 16);
  PathMLPParams params = init_params(fx.cfg, fx.g.node_count, 16);
  Tape t1, t2;
  const auto f1 = pathmlp_forward(t1, fx.g, fx.x, fx.paths, fx.all_nodes(), &fx.y, params,
                                  fx.cfg, false, nullptr);
  const auto f2 = pathmlp_forward(t2, fx.g, fx.x, fx.paths, fx.all_nodes(), &fx.y, params,
                                  fx.cfg, false, nullptr);
  CHECK(t1.value(f1.loss).v[0] == t2.value(f2.loss).v[0]);
  const Matrix& w = t1.value(f1.path_weights);
  for (int i = 0; i < w.rows; ++i) {
    double s = 0.0;
    for (int k = 0; k < w.cols; ++k) s += w.at(i, k);
    CHECK(std::abs(s - 1.0) <= 1e-9);
  }
}

TEST_CASE("isolated node with all-self paths reduces to a transformed self feature") {
  // node 0 isolated: its N paths are [0,0,0]; the model must still produce a
  // valid row driven only by its own feature.
  const Graph g = build_graph({{1, 2}, {2, 3}, {1, 3}}, 4);
  NodeFeatures x(4, 3);
  Rng rng(17);
  for (double& v : x.v) v = rng.next_gaussian();
  SamplerConfig scfg;
  scfg.d = 2;
  scfg.n_paths = 3;
  scfg.seed = 17;
  const auto paths = sample_all_paths(g, x, scfg);
  for (int k = 0; k < 3; ++k) {
    const auto p = paths.path(0, k);
    for (int j = 0; j <= 2; ++j) CHECK(p[j] == 0);
  }
  ModelConfig cfg;
  cfg.in_dim = 3;
  cfg.f_prime = 4;
  cfg.f_h = 5;
  cfg.class_count = 2;
  cfg.d = 2;
  cfg.n_paths = 3;
  Labels y{{0, 1, 0, 1}, 2};
  PathMLPParams params = init_params(cfg, 4, 17);
  Tape tape;
  const auto fc = pathmlp_forward(tape, g, x, paths, {0, 1, 2, 3}, &y, params, cfg,
                                  false, nullptr);
  for (double p : tape.value(fc.probs).v) {
    CHECK(std::isfinite(p));
    CHECK(p >= 0.0);
  }
}

TEST_CASE("permuting a node's paths together with its eps row leaves outputs unchanged") {
  SmallFixture fx(12, 5, 2, 3, 4, 18);
  PathMLPParams params = init_params(fx.cfg, fx.g.node_count, 18);
  Rng lrand(55);
  for (double& v : params.eps_logits.value.v) v = lrand.next_gaussian();

  Tape t1;
  const auto f1 = pathmlp_forward(t1, fx.g, fx.x, fx.paths, fx.all_nodes(), nullptr,
                                  params, fx.cfg, false, nullptr);
  const Matrix before = t1.value(f1.probs);

  // rotate node 5's paths by one and its eps row the same way
  PathSet rotated = fx.paths;
  PathMLPParams rparams = params;
  const int node = 5, N = fx.cfg.n_paths, L = fx.cfg.d + 1;
  for (int k = 0; k < N; ++k) {
    const auto src = fx.paths.path(node, (k + 1) % N);
    std::copy(src.begin(), src.end(),
              rotated.nodes.begin() + (static_cast<std::size_t>(node) * N + k) * L);
    rparams.eps_logits.value.at(node, k) = params.eps_logits.value.at(node, (k + 1) % N);
  }
  Tape t2;
  const auto f2 = pathmlp_forward(t2, fx.g, fx.x, rotated, fx.all_nodes(), nullptr,
                                  rparams, fx.cfg, false, nullptr);
  const Matrix& after = t2.value(f2.probs);
  for (std::size_t i = 0; i < before.v.size(); ++i) {
    CHECK(after.v[i] == doctest::Approx(before.v[i]).epsilon(1e-12));
  }
}

TEST_CASE("plus variant on an edgeless graph equals base on duplicated features") {
  const int n = 12, f = 4;
  const Graph edgeless = build_graph({}, n);
  NodeFeatures x(n, f);
  Rng rng(19);
  for (double& v : x.v) v = rng.next_gaussian();
  Labels y;
  y.class_count = 2;
  y.values.resize(n);
  for (int i = 0; i < n; ++i) y.values[i] = i % 2;

  SamplerConfig scfg;
  scfg.d = 2;
  scfg.n_paths = 2;
  scfg.seed = 19;
  const auto paths = sample_all_paths(edgeless, x, scfg);

  const auto op = renormalized_affinity(edgeless);
  const auto augmented = augment_features(x, op, 1);
  NodeFeatures duplicated(n, 2 * f);
  for (int i = 0; i < n; ++i) {
    for (int c = 0; c < f; ++c) {
      duplicated.at(i, c) = x.at(i, c);
      duplicated.at(i, f + c) = x.at(i, c);
    }
  }

  ModelConfig cfg;
  cfg.in_dim = 2 * f;
  cfg.f_prime = 5;
  cfg.f_h = 6;
  cfg.class_count = 2;
  cfg.d = 2;
  cfg.n_paths = 2;
  cfg.variant = Variant::plus;
  PathMLPParams p1 = init_params(cfg, n, 19);
  PathMLPParams p2 = p1;

  std::vector<int> nodes(n);
  for (int i = 0; i < n; ++i) nodes[i] = i;
  Tape t1, t2;
  const auto f1 = pathmlp_forward(t1, edgeless, augmented, paths, nodes, &y, p1, cfg,
                                  false, nullptr);
  ModelConfig base_cfg = cfg;
  base_cfg.variant = Variant::base;
  const auto f2 = pathmlp_forward(t2, edgeless, duplicated, paths, nodes, &y, p2,
                                  base_cfg, false, nullptr);
  for (std::size_t i = 0; i < t1.value(f1.probs).v.size(); ++i) {
    CHECK(t1.value(f1.probs).v[i] == doctest::Approx(t2.value(f2.probs).v[i]).epsilon(1e-12));
  }
}

TEST_CASE("full model gradients match central finite differences") {
  SmallFixture fx(12, 5, 3, 3, 4, 20);
  ModelConfig cfg = fx.cfg;
  cfg.beta = 0.3;  // exercise the w4 branch too
  PathMLPParams params = init_params(cfg, fx.g.node_count, 20);
  const auto nodes = fx.all_nodes();

  auto run = [&](bool want_backward) {
    Tape tape;
    const auto fc = pathmlp_forward(tape, fx.g, fx.x, fx.paths, nodes, &fx.y, params, cfg,
                                    false, nullptr);
    if (want_backward) tape.backward(fc.loss);
    return FdiffOutcome{tape.value(fc.loss).v[0], tape.min_relu_abs()};
  };
  run(true);
  const auto report = finite_difference_check([&] { return run(false); }, params.all(),
                                              1e-5, 60, 21);
  CHECK(report.checked > 200);
  CHECK(report.max_rel_error < 1e-4);
}

TEST_CASE("model config file round trip and validation") {
  ModelConfig cfg;
  cfg.f_prime = 24;
  cfg.f_h = 32;
  cfg.d = 4;
  cfg.n_paths = 10;
  cfg.beta = 0.3;
  cfg.dropout = 0.7;
  cfg.variant = Variant::plus;
  cfg.m = 2;
  const auto tmp = std::filesystem::temp_directory_path() / "pathmlp_cfg_test.txt";
  write_model_config(tmp.string(), cfg, 42);
  const auto back = read_model_config(tmp.string());
  CHECK(back.config.f_prime == 24);
  CHECK(back.config.f_h == 32);
  CHECK(back.config.d == 4);
  CHECK(back.config.n_paths == 10);
  CHECK(back.config.beta == 0.3);
  CHECK(back.config.dropout == 0.7);
  CHECK(back.config.variant == Variant::plus);
  CHECK(back.config.m == 2);
  CHECK(back.seed == 42);
  CHECK(back.has("f_prime"));

  std::ofstream bad(tmp);
  bad << "f_prime=12\nwat=3\n";
  bad.close();
  CHECK_THROWS_AS(read_model_config(tmp.string()), std::runtime_error);
  std::filesystem::remove(tmp);
}

TEST_CASE("checkpoint round trip restores every parameter bit for bit") {
  SmallFixture fx(9, 4, 2, 2, 3, 22);
  PathMLPParams params = init_params(fx.cfg, fx.g.node_count, 22);
  const auto tmp = std::filesystem::temp_directory_path() / "pathmlp_ckpt_test.txt";
  save_checkpoint(tmp.string(), params);
  PathMLPParams restored = init_params(fx.cfg, fx.g.node_count, 23);
  load_checkpoint(tmp.string(), restored);
  for (std::size_t p = 0; p < params.all().size(); ++p) {
    const auto& a = params.all()[p]->value;
    const auto& b = restored.all()[p]->value;
    for (std::size_t i = 0; i < a.v.size(); ++i) CHECK(a.v[i] == b.v[i]);
  }
  std::filesystem::remove(tmp);
}
