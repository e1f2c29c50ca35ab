#include "pathmlp/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace pathmlp {

std::string split_profile_name(SplitProfile p) {
  return p == SplitProfile::p48_32_20 ? "48/32/20" : "50/25/25";
}

SplitProfile split_profile_from_name(const std::string& name) {
  if (name == "48/32/20") return SplitProfile::p48_32_20;
  if (name == "50/25/25") return SplitProfile::p50_25_25;
  throw std::invalid_argument("unknown split profile: " + name);
}

std::string metric_name(Metric m) { return m == Metric::accuracy ? "accuracy" : "auc"; }

Metric metric_from_name(const std::string& name) {
  if (name == "accuracy") return Metric::accuracy;
  if (name == "auc") return Metric::auc;
  throw std::invalid_argument("unknown metric: " + name);
}

SplitSpec make_random_split(int node_count, SplitProfile profile, std::uint64_t seed) {
  if (node_count < 3) throw std::invalid_argument("make_random_split: need >= 3 nodes");
  std::vector<int> order(node_count);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed, 0x59117);
  rng.shuffle(order);
  const double train_ratio = profile == SplitProfile::p48_32_20 ? 0.48 : 0.50;
  const double val_ratio = profile == SplitProfile::p48_32_20 ? 0.32 : 0.25;
  const int n_train = static_cast<int>(std::floor(train_ratio * node_count + 0.5));
  const int n_val = static_cast<int>(std::floor(val_ratio * node_count + 0.5));
  SplitSpec s;
  s.train.assign(order.begin(), order.begin() + n_train);
  s.val.assign(order.begin() + n_train, order.begin() + n_train + n_val);
  s.test.assign(order.begin() + n_train + n_val, order.end());
  return s;
}

void AdamState::init(const std::vector<Parameter*>& params) {
  m.clear();
  v.clear();
  for (const Parameter* p : params) {
    m.emplace_back(p->value.rows, p->value.cols, 0.0);
    v.emplace_back(p->value.rows, p->value.cols, 0.0);
  }
  t = 0;
}

void adam_step(const std::vector<Parameter*>& params, AdamState& state, double lr,
               double weight_decay) {
  constexpr double kBeta1 = 0.9, kBeta2 = 0.999, kEps = 1e-8;
  ++state.t;
  const double bc1 = 1.0 - std::pow(kBeta1, static_cast<double>(state.t));
  const double bc2 = 1.0 - std::pow(kBeta2, static_cast<double>(state.t));
  for (std::size_t pi = 0; pi < params.size(); ++pi) {
    Parameter* p = params[pi];
    if (!p->trainable) continue;
    const double wd = p->decay_exempt ? 0.0 : weight_decay;
    for (std::size_t i = 0; i < p->value.v.size(); ++i) {
      const double grad = p->grad.v[i] + wd * p->value.v[i];
      state.m[pi].v[i] = kBeta1 * state.m[pi].v[i] + (1.0 - kBeta1) * grad;
      state.v[pi].v[i] = kBeta2 * state.v[pi].v[i] + (1.0 - kBeta2) * grad * grad;
      const double mhat = state.m[pi].v[i] / bc1;
      const double vhat = state.v[pi].v[i] / bc2;
      p->value.v[i] -= lr * mhat / (std::sqrt(vhat) + kEps);
    }
  }
}

double evaluate_accuracy(const Matrix& probs, const std::vector<int>& labels) {
  if (static_cast<int>(labels.size()) != probs.rows) {
    throw std::invalid_argument("evaluate_accuracy: label count != rows");
  }
  if (probs.rows == 0) throw std::invalid_argument("evaluate_accuracy: empty batch");
  int hits = 0;
  for (int i = 0; i < probs.rows; ++i) {
    const double* row = probs.row(i);
    int arg = 0;
    for (int c = 1; c < probs.cols; ++c) {
      if (row[c] > row[arg]) arg = c;  // ties keep the lower class id
    }
    if (arg == labels[i]) ++hits;
  }
  return static_cast<double>(hits) / probs.rows;
}

double evaluate_auc(const std::vector<double>& scores, const std::vector<int>& labels) {
  if (scores.size() != labels.size()) {
    throw std::invalid_argument("evaluate_auc: size mismatch");
  }
  const int n = static_cast<int>(scores.size());
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) { return scores[a] < scores[b]; });
  // Average ranks across ties, then the Mann-Whitney U statistic.
  std::vector<double> rank(n);
  int i = 0;
  while (i < n) {
    int j = i;
    while (j + 1 < n && scores[order[j + 1]] == scores[order[i]]) ++j;
    const double avg = 0.5 * (i + j) + 1.0;
    for (int k = i; k <= j; ++k) rank[order[k]] = avg;
    i = j + 1;
  }
  long long pos = 0;
  double pos_rank_sum = 0.0;
  for (int k = 0; k < n; ++k) {
    if (labels[k] == 1) {
      ++pos;
      pos_rank_sum += rank[k];
    } else if (labels[k] != 0) {
      throw std::invalid_argument("evaluate_auc: labels must be binary");
    }
  }
  const long long neg = n - pos;
  if (pos == 0 || neg == 0) {
    throw std::invalid_argument("evaluate_auc: need both classes present");
  }
  const double u = pos_rank_sum - 0.5 * pos * (pos + 1);
  return u / (static_cast<double>(pos) * static_cast<double>(neg));
}

double evaluate_model(const Graph& g, const NodeFeatures& x_model, const Labels& y,
                      const PathSet& paths, PathMLPParams& params, const ModelConfig& mcfg,
                      const std::vector<int>& nodes, Metric metric) {
  Tape tape;
  const auto fc = pathmlp_forward(tape, g, x_model, paths, nodes, nullptr, params, mcfg,
                                  /*training=*/false, nullptr);
  const Matrix& probs = tape.value(fc.probs);
  std::vector<int> node_labels(nodes.size());
  for (std::size_t i = 0; i < nodes.size(); ++i) node_labels[i] = y.values[nodes[i]];
  if (metric == Metric::accuracy) {
    return evaluate_accuracy(probs, node_labels);
  }
  if (probs.cols != 2) throw std::invalid_argument("auc requires exactly 2 classes");
  std::vector<double> scores(probs.rows);
  for (int i = 0; i < probs.rows; ++i) scores[i] = probs.at(i, 1);
  return evaluate_auc(scores, node_labels);
}

TrainResult train_pathmlp(const Graph& g, const NodeFeatures& x_model, const Labels& y,
                          const PathSet& paths, const ModelConfig& mcfg,
                          const TrainConfig& tcfg, const SplitSpec& split,
                          std::uint64_t seed, const EpochObserver& observer) {
  if (split.train.empty()) throw std::invalid_argument("train_pathmlp: empty train split");
  PathMLPParams params = init_params(mcfg, g.node_count, seed);
  AdamState adam;
  auto param_ptrs = params.all();
  adam.init(param_ptrs);
  Rng drop_rng(seed, 0xd20b);

  TrainResult result;
  result.best_params = params;
  result.best_val = -1.0;
  int stale = 0;
  for (int epoch = 1; epoch <= tcfg.max_epochs; ++epoch) {
    Tape tape;
    const auto fc = pathmlp_forward(tape, g, x_model, paths, split.train, &y, params, mcfg,
                                    /*training=*/true, &drop_rng);
    const double loss = tape.value(fc.loss).v[0];
    tape.backward(fc.loss);
    adam_step(param_ptrs, adam, tcfg.lr, tcfg.weight_decay);

    const double val =
        evaluate_model(g, x_model, y, paths, params, mcfg, split.val, tcfg.metric);
    result.loss_curve.push_back(loss);
    result.val_curve.push_back(val);
    result.epochs_run = epoch;

    if (observer) {
      // Row-sum deviation of the softmaxed path weights over all nodes.
      double max_dev = 0.0;
      const Matrix& eps = params.eps_logits.value;
      for (int n = 0; n < eps.rows; ++n) {
        const double* row = eps.row(n);
        double mx = row[0];
        for (int c = 1; c < eps.cols; ++c) mx = std::max(mx, row[c]);
        double z = 0.0;
        for (int c = 0; c < eps.cols; ++c) z += std::exp(row[c] - mx);
        double s = 0.0;
        for (int c = 0; c < eps.cols; ++c) s += std::exp(row[c] - mx) / z;
        max_dev = std::max(max_dev, std::abs(s - 1.0));
      }
      observer(EpochStats{epoch, loss, val, max_dev});
    }

    if (val > result.best_val) {
      result.best_val = val;
      result.best_epoch = epoch;
      result.best_params = params;
      stale = 0;
    } else {
      ++stale;
    }
    if (stale >= tcfg.patience) break;
  }
  return result;
}

ProtocolResult run_protocol(const Graph& g, const NodeFeatures& x_raw, const Labels& y,
                            const SamplerConfig& scfg, const ModelConfig& mcfg,
                            const TrainConfig& tcfg, SplitProfile profile,
                            std::uint64_t base_seed, const EpochObserver& observer,
                            int sampling_threads) {
  ProtocolResult pr;
  NodeFeatures x_model = x_raw;
  NodeFeatures x_sampling = x_raw;
  ModelConfig cfg = mcfg;
  if (mcfg.variant == Variant::plus) {
    const auto affinity = renormalized_affinity(g);
    x_model = augment_features(x_raw, affinity, mcfg.m);
    if (scfg.augment_before_sampling) x_sampling = x_model;
  }
  cfg.in_dim = x_model.cols;
  cfg.d = scfg.d;
  cfg.n_paths = scfg.n_paths;

  double best_val = -1.0;
  for (int run = 0; run < tcfg.runs; ++run) {
    const std::uint64_t seed = base_seed + static_cast<std::uint64_t>(run);
    SamplerConfig run_scfg = scfg;
    run_scfg.seed = seed;
    const PathSet paths = sample_all_paths(g, x_sampling, run_scfg, sampling_threads);
    const SplitSpec split = make_random_split(g.node_count, profile, seed);
    TrainResult tr = train_pathmlp(g, x_model, y, paths, cfg, tcfg, split, seed, observer);
    const double test = evaluate_model(g, x_model, y, paths, tr.best_params, cfg,
                                       split.test, tcfg.metric);
    pr.runs.push_back(RunScore{run, tr.best_val, test});
    if (tr.best_val > best_val) {
      best_val = tr.best_val;
      pr.best_run = run;
      pr.best_params = tr.best_params;
      pr.best_run_val = tr.best_val;
      pr.best_run_test = test;
    }
  }
  double sum = 0.0;
  for (const auto& r : pr.runs) sum += r.test;
  pr.mean = sum / pr.runs.size();
  double sq = 0.0;
  for (const auto& r : pr.runs) sq += (r.test - pr.mean) * (r.test - pr.mean);
  pr.stddev = std::sqrt(sq / pr.runs.size());
  return pr;
}

std::string config_id(const ModelConfig& mcfg, const TrainConfig& tcfg) {
  std::ostringstream os;
  os << variant_name(mcfg.variant) << "-fp" << mcfg.f_prime << "-d" << mcfg.d << "-n"
     << mcfg.n_paths << "-b" << mcfg.beta << "-m" << mcfg.m << "-do" << mcfg.dropout
     << "-lr" << tcfg.lr << "-wd" << tcfg.weight_decay;
  return os.str();
}

std::vector<GridCell> grid_search(const Graph& g, const NodeFeatures& x_raw,
                                  const Labels& y, const SamplerConfig& scfg,
                                  const ModelConfig& base_mcfg, const TrainConfig& base_tcfg,
                                  SplitProfile profile, const GridSpec& grid,
                                  std::uint64_t base_seed, int max_cells) {
  std::vector<GridCell> cells;
  const std::vector<int> ms =
      base_mcfg.variant == Variant::plus ? grid.m : std::vector<int>{1};
  for (int fp : grid.f_prime)
    for (int d : grid.d)
      for (int n : grid.n_paths)
        for (double beta : grid.beta)
          for (int m : ms)
            for (double lr : grid.lr)
              for (double wd : grid.weight_decay)
                for (double dp : grid.dropout) {
                  GridCell cell;
                  cell.mcfg = base_mcfg;
                  cell.mcfg.f_prime = fp;
                  cell.mcfg.d = d;
                  cell.mcfg.n_paths = n;
                  cell.mcfg.beta = beta;
                  cell.mcfg.m = m;
                  cell.mcfg.dropout = dp;
                  cell.tcfg = base_tcfg;
                  cell.tcfg.lr = lr;
                  cell.tcfg.weight_decay = wd;
                  cell.id = config_id(cell.mcfg, cell.tcfg);
                  cells.push_back(std::move(cell));
                }
  if (max_cells > 0 && static_cast<int>(cells.size()) > max_cells) {
    cells.resize(max_cells);
  }
  for (auto& cell : cells) {
    SamplerConfig cell_scfg = scfg;
    cell_scfg.d = cell.mcfg.d;
    cell_scfg.n_paths = cell.mcfg.n_paths;
    std::vector<double> vals;
    ProtocolResult pr = run_protocol(g, x_raw, y, cell_scfg, cell.mcfg, cell.tcfg, profile,
                                     base_seed);
    for (const auto& r : pr.runs) vals.push_back(r.val);
    double sum = 0.0;
    for (double v : vals) sum += v;
    cell.mean_val = sum / vals.size();
    double sq = 0.0;
    for (double v : vals) sq += (v - cell.mean_val) * (v - cell.mean_val);
    cell.std_val = std::sqrt(sq / vals.size());
  }
  std::stable_sort(cells.begin(), cells.end(),
                   [](const GridCell& a, const GridCell& b) { return a.mean_val > b.mean_val; });
  return cells;
}

} // namespace pathmlp
