#include "pathmlp/leakage.hpp"

#include <cmath>
#include <stdexcept>

#include "pathmlp/engine.hpp"

namespace pathmlp {

namespace {

struct MlpParams {
  Parameter w1, b1;
  Parameter wa, ba;  // adjacency embedding, |V| x f_h
  Parameter w2, b2;

  std::vector<Parameter*> all(bool use_adjacency) {
    if (use_adjacency) return {&w1, &b1, &wa, &ba, &w2, &b2};
    return {&w1, &b1, &w2, &b2};
  }
};

MlpParams init_mlp(int in_dim, int f_h, int class_count, int node_count,
                   bool use_adjacency, std::uint64_t seed) {
  Rng rng(seed, 0x317a);
  auto uniform = [&rng](const std::string& name, int rows, int cols) {
    Matrix m(rows, cols);
    const double bound = 1.0 / std::sqrt(static_cast<double>(rows));
    for (double& v : m.v) v = (2.0 * rng.next_double() - 1.0) * bound;
    return Parameter(name, std::move(m));
  };
  MlpParams p;
  p.w1 = uniform("w1", in_dim, f_h);
  p.b1 = Parameter("b1", Matrix(1, f_h, 0.0));
  if (use_adjacency) {
    p.wa = uniform("wa", node_count, f_h);
    p.ba = Parameter("ba", Matrix(1, f_h, 0.0));
  }
  p.w2 = uniform("w2", f_h, class_count);
  p.b2 = Parameter("b2", Matrix(1, class_count, 0.0));
  return p;
}

struct MlpForward {
  Tape::Var probs;
  Tape::Var loss;
};

MlpForward mlp_forward(Tape& tape, const Dataset& ds, const std::vector<int>& batch,
                       bool with_labels, MlpParams& p, const MlpConfig& cfg,
                       bool training, Rng* drop_rng) {
  const auto v_w1 = tape.param(p.w1);
  const auto v_b1 = tape.param(p.b1);
  Tape::Var v_wa, v_ba;
  if (cfg.use_adjacency) {
    v_wa = tape.param(p.wa);
    v_ba = tape.param(p.ba);
  }
  const auto v_w2 = tape.param(p.w2);
  const auto v_b2 = tape.param(p.b2);

  Matrix xb(static_cast<int>(batch.size()), ds.features.cols);
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const double* src = ds.features.row(batch[i]);
    std::copy(src, src + ds.features.cols, xb.row(static_cast<int>(i)));
  }
  auto hidden = tape.relu(tape.linear(tape.input(std::move(xb)), v_w1, v_b1));
  if (training && cfg.dropout > 0.0 && drop_rng) {
    hidden = tape.dropout(hidden, cfg.dropout, true, *drop_rng);
  }
  if (cfg.use_adjacency) {
    const auto adj = tape.add_row_broadcast(
        tape.neighbor_row_sum(v_wa, ds.graph, batch), v_ba);
    hidden = tape.add(hidden, adj);
  }
  MlpForward out;
  out.probs = tape.softmax_rows(tape.linear(hidden, v_w2, v_b2));
  if (with_labels) {
    std::vector<int> batch_labels(batch.size());
    for (std::size_t i = 0; i < batch.size(); ++i) {
      batch_labels[i] = ds.labels.values[batch[i]];
    }
    out.loss = tape.cross_entropy_mean(out.probs, std::move(batch_labels));
  }
  return out;
}

double mlp_metric(Tape& tape, Tape::Var probs, const Dataset& ds,
                  const std::vector<int>& nodes, Metric metric) {
  const Matrix& pv = tape.value(probs);
  std::vector<int> node_labels(nodes.size());
  for (std::size_t i = 0; i < nodes.size(); ++i) node_labels[i] = ds.labels.values[nodes[i]];
  if (metric == Metric::accuracy) return evaluate_accuracy(pv, node_labels);
  if (pv.cols != 2) throw std::invalid_argument("auc requires exactly 2 classes");
  std::vector<double> scores(pv.rows);
  for (int i = 0; i < pv.rows; ++i) scores[i] = pv.at(i, 1);
  return evaluate_auc(scores, node_labels);
}

double mlp_eval(const Dataset& ds, const std::vector<int>& nodes, MlpParams& p,
                const MlpConfig& cfg, Metric metric) {
  Tape tape;
  const auto fwd = mlp_forward(tape, ds, nodes, false, p, cfg, false, nullptr);
  return mlp_metric(tape, fwd.probs, ds, nodes, metric);
}

// Single training run mirroring the main early-stopping loop.
double mlp_run(const Dataset& ds, const SplitSpec& split, const MlpConfig& cfg,
               const TrainConfig& tcfg, std::uint64_t seed) {
  MlpParams params = init_mlp(ds.features.cols, cfg.f_h, ds.labels.class_count,
                              ds.graph.node_count, cfg.use_adjacency, seed);
  auto ptrs = params.all(cfg.use_adjacency);
  AdamState adam;
  adam.init(ptrs);
  Rng drop_rng(seed, 0xd217);

  MlpParams best = params;
  double best_val = -1.0;
  int stale = 0;
  for (int epoch = 1; epoch <= tcfg.max_epochs; ++epoch) {
    Tape tape;
    const auto fwd = mlp_forward(tape, ds, split.train, true, params, cfg, true, &drop_rng);
    tape.backward(fwd.loss);
    adam_step(ptrs, adam, cfg.lr, tcfg.weight_decay);
    const double val = mlp_eval(ds, split.val, params, cfg, tcfg.metric);
    if (val > best_val) {
      best_val = val;
      best = params;
      stale = 0;
    } else {
      ++stale;
    }
    if (stale >= tcfg.patience) break;
  }
  return mlp_eval(ds, split.test, best, cfg, tcfg.metric);
}

} // namespace

double mlp_baseline_mean_score(const Dataset& ds, SplitProfile profile,
                               const MlpConfig& mcfg, const TrainConfig& tcfg,
                               std::uint64_t base_seed) {
  double sum = 0.0;
  for (int run = 0; run < tcfg.runs; ++run) {
    const std::uint64_t seed = base_seed + static_cast<std::uint64_t>(run);
    const SplitSpec split = make_random_split(ds.graph.node_count, profile, seed);
    sum += mlp_run(ds, split, mcfg, tcfg, seed);
  }
  return sum / tcfg.runs;
}

LeakageReport verify_leakage(const Dataset& ds, SplitProfile profile,
                             const TrainConfig& tcfg, std::uint64_t base_seed) {
  LeakageReport report;
  report.rates = detect_leakage(ds.graph, ds.labels);
  report.metric = tcfg.metric;
  report.runs = tcfg.runs;
  MlpConfig plain;
  MlpConfig with_adj;
  with_adj.use_adjacency = true;
  report.mlp_score = mlp_baseline_mean_score(ds, profile, plain, tcfg, base_seed);
  report.mlp_adj_score = mlp_baseline_mean_score(ds, profile, with_adj, tcfg, base_seed);
  report.relative_gain = (report.mlp_adj_score - report.mlp_score) / report.mlp_score;
  return report;
}

} // namespace pathmlp
