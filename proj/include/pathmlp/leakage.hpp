#pragma once

#include <cstdint>

#include "pathmlp/dataset.hpp"
#include "pathmlp/trainer.hpp"

namespace pathmlp {

// Two-layer MLP baseline, optionally with a linear adjacency-row embedding
// summed into the hidden state after the first layer. The adjacency flavor is
// what a structure shortcut learner needs: it can match neighbor patterns
// without using node features.
struct MlpConfig {
  int f_h = 64;
  double dropout = 0.5;
  double lr = 0.01;
  bool use_adjacency = false;
};

// Mean test metric of the baseline over tcfg.runs runs with per-run splits,
// seeds base_seed + run.
double mlp_baseline_mean_score(const Dataset& ds, SplitProfile profile,
                               const MlpConfig& mcfg, const TrainConfig& tcfg,
                               std::uint64_t base_seed);

struct LeakageReport {
  DuplicationRates rates;
  double mlp_score = 0.0;      // features-only two-layer MLP
  double mlp_adj_score = 0.0;  // same MLP + adjacency embedding after layer 1
  double relative_gain = 0.0;  // (mlp_adj - mlp) / mlp
  Metric metric = Metric::accuracy;
  int runs = 0;
};

// Appendix-style leak verification: duplication rates plus the paired MLP /
// MLP+adjacency comparison under the standard training defaults.
LeakageReport verify_leakage(const Dataset& ds, SplitProfile profile,
                             const TrainConfig& tcfg, std::uint64_t base_seed);

} // namespace pathmlp
