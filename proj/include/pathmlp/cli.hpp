#pragma once

#include <cstdint>
#include <string>

#include "pathmlp/dataset.hpp"
#include "pathmlp/trainer.hpp"

namespace pathmlp {

struct TrainCommandOptions {
  std::string dataset_manifest;
  std::string out_dir;
  std::string variant = "base";
  std::string strategy = "similarity";
  std::string metric;         // empty: accuracy
  std::string split_profile;  // empty: manifest override or 48/32/20
  int f_prime = 12;
  int f_h = 64;
  int d = 3;
  int n_paths = 8;
  double beta = 0.0;
  double dropout = 0.5;
  int m = 1;
  bool augment_before_sampling = false;
  double lr = 0.01;
  double weight_decay = 5e-4;
  int max_epochs = 500;
  int patience = 100;
  int runs = 10;
  std::uint64_t seed = 0;
  int threads = 1;
};

struct TrainArtifacts {
  std::string checkpoint_path;
  std::string run_manifest_path;
  std::string metrics_csv_path;
  ProtocolResult protocol;
};

// The full train pipeline behind the `train` subcommand: resolves the dataset,
// runs the multi-run protocol and writes checkpoint + run manifest + metrics
// CSV into out_dir. Exposed so tests can exercise the exact artifact path.
TrainArtifacts run_train_command(const TrainCommandOptions& opts);

struct EvalResult {
  double val = 0.0;
  double test = 0.0;
  double recorded_val = 0.0;
  double recorded_test = 0.0;
};

// Rebuilds split and paths from the run manifest's recorded seeds and
// re-scores the checkpoint.
EvalResult run_eval_command(const std::string& run_manifest_path,
                            const std::string& checkpoint_path,
                            const std::string& dataset_manifest_path);

int cli_main(int argc, char** argv);

} // namespace pathmlp
