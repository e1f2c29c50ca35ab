#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "pathmlp/model.hpp"

namespace pathmlp {

enum class SplitProfile { p48_32_20, p50_25_25 };

std::string split_profile_name(SplitProfile p);
SplitProfile split_profile_from_name(const std::string& name);

struct SplitSpec {
  std::vector<int> train, val, test;
};

// Uniform shuffle then ratio cut; realized sizes are within one node of the
// exact ratios. Deterministic per seed.
SplitSpec make_random_split(int node_count, SplitProfile profile, std::uint64_t seed);

enum class Metric { accuracy, auc };

std::string metric_name(Metric m);
Metric metric_from_name(const std::string& name);

struct TrainConfig {
  double lr = 0.01;
  double weight_decay = 5e-4;
  int max_epochs = 500;
  int patience = 100;
  int runs = 10;
  Metric metric = Metric::accuracy;
};

// Classic Adam with L2 folded into the gradient (decay_exempt parameters are
// excluded from decay). beta1/beta2/eps fixed at 0.9 / 0.999 / 1e-8.
struct AdamState {
  std::vector<Matrix> m, v;
  long long t = 0;

  void init(const std::vector<Parameter*>& params);
};

void adam_step(const std::vector<Parameter*>& params, AdamState& state, double lr,
               double weight_decay);

// Argmax match rate; argmax ties resolve to the lower class id. probs row i
// corresponds to labels[i].
double evaluate_accuracy(const Matrix& probs, const std::vector<int>& labels);

// Mann-Whitney rank AUC for binary labels with average ranks on ties.
double evaluate_auc(const std::vector<double>& scores, const std::vector<int>& labels);

struct EpochStats {
  int epoch = 0;
  double train_loss = 0.0;
  double val_metric = 0.0;
  double max_eps_row_deviation = 0.0;  // max |sum softmax(eps row) - 1|
};

using EpochObserver = std::function<void(const EpochStats&)>;

struct TrainResult {
  PathMLPParams best_params;
  int best_epoch = 0;
  double best_val = 0.0;
  int epochs_run = 0;
  std::vector<double> loss_curve;
  std::vector<double> val_curve;
};

// Full-batch training with early stopping: keeps the parameters of the best
// validation epoch and stops after `patience` epochs without improvement.
// Paths must be sampled for all nodes before the first epoch.
TrainResult train_pathmlp(const Graph& g, const NodeFeatures& x_model, const Labels& y,
                          const PathSet& paths, const ModelConfig& mcfg,
                          const TrainConfig& tcfg, const SplitSpec& split,
                          std::uint64_t seed, const EpochObserver& observer = {});

// Eval-mode metric of a parameter snapshot over a node set.
double evaluate_model(const Graph& g, const NodeFeatures& x_model, const Labels& y,
                      const PathSet& paths, PathMLPParams& params, const ModelConfig& mcfg,
                      const std::vector<int>& nodes, Metric metric);

struct RunScore {
  int run = 0;
  double val = 0.0;
  double test = 0.0;
};

struct ProtocolResult {
  std::vector<RunScore> runs;
  double mean = 0.0;
  double stddev = 0.0;  // population std over the runs
  int best_run = 0;     // run with the highest validation score
  PathMLPParams best_params;
  double best_run_val = 0.0;
  double best_run_test = 0.0;
};

// The 10-run protocol: run r uses seed base_seed + r for split, path sampling
// and initialization together. Model features are augmented here when the
// variant asks for it. Sampling may fan out over threads; per-node RNG
// streams keep the result identical to a serial run.
ProtocolResult run_protocol(const Graph& g, const NodeFeatures& x_raw, const Labels& y,
                            const SamplerConfig& scfg, const ModelConfig& mcfg,
                            const TrainConfig& tcfg, SplitProfile profile,
                            std::uint64_t base_seed, const EpochObserver& observer = {},
                            int sampling_threads = 1);

struct GridCell {
  std::string id;
  ModelConfig mcfg;
  TrainConfig tcfg;
  double mean_val = 0.0;
  double std_val = 0.0;
};

struct GridSpec {
  std::vector<int> f_prime{12, 24, 32};
  std::vector<int> n_paths{2, 4, 6, 8, 10, 12, 15, 18};
  std::vector<int> d{3, 4, 5};
  std::vector<double> beta{0.0, 0.3, 0.5};
  std::vector<int> m{1, 2};  // plus variant only; base uses {1}
  std::vector<double> lr{0.005, 0.01, 0.05, 0.1};
  std::vector<double> weight_decay{5e-5, 1e-5, 5e-4, 1e-4, 5e-3};
  std::vector<double> dropout{0.1, 0.3, 0.5, 0.7, 0.9};
};

std::string config_id(const ModelConfig& mcfg, const TrainConfig& tcfg);

// Exhaustive sweep ranked by mean validation metric; max_cells > 0 truncates
// the cell list (in deterministic enumeration order) before evaluation.
std::vector<GridCell> grid_search(const Graph& g, const NodeFeatures& x_raw,
                                  const Labels& y, const SamplerConfig& scfg,
                                  const ModelConfig& base_mcfg, const TrainConfig& base_tcfg,
                                  SplitProfile profile, const GridSpec& grid,
                                  std::uint64_t base_seed, int max_cells = 0);

} // namespace pathmlp
