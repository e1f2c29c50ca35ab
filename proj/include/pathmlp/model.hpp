#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pathmlp/engine.hpp"
#include "pathmlp/graph.hpp"
#include "pathmlp/sampler.hpp"

namespace pathmlp {

enum class Variant { base, plus };

std::string variant_name(Variant v);
Variant variant_from_name(const std::string& name);

struct ModelConfig {
  int in_dim = 0;      // feature dimension seen by the model (2f under plus)
  int f_prime = 12;    // per-node transform dimension
  int f_h = 64;        // hidden dimension
  int class_count = 0;
  int d = 3;           // path length parameter
  int n_paths = 4;     // N
  double beta = 0.0;   // topology mix weight
  double dropout = 0.0;
  Variant variant = Variant::base;
  int m = 1;           // augmentation power, plus variant only
};

// The five MLP weight matrices with biases plus the per-node path logits.
// eps_logits is softmax-normalized per row inside the forward pass; it is
// exempt from weight decay.
struct PathMLPParams {
  Parameter w1, b1;          // in_dim x f'
  Parameter w2, b2;          // (d+1)f' x f_h
  Parameter w3, b3;          // in_dim x f_h
  Parameter w4, b4;          // |V| x f_h
  Parameter w5, b5;          // f_h x C
  Parameter eps_logits;      // |V| x N

  std::vector<Parameter*> all();
  std::vector<const Parameter*> all() const;
};

PathMLPParams init_params(const ModelConfig& cfg, int node_count, std::uint64_t seed);

// x || Ã_sym^m x. The plus variant feeds this to the model (and optionally to
// the sampler).
NodeFeatures augment_features(const NodeFeatures& x, const AffinityOperator& op, int m);

// Handles to the intermediate tensors of one forward pass.
struct ForwardCache {
  Tape::Var node_encodings;  // |V| x f'
  Tape::Var path_concat;     // (B*N) x (d+1)f'
  Tape::Var path_encodings;  // (B*N) x f_h
  Tape::Var path_weights;    // B x N, rows sum to 1
  Tape::Var path_message;    // B x f_h
  Tape::Var self_encoding;   // B x f_h
  Tape::Var state;           // B x f_h
  Tape::Var topo_encoding;   // B x f_h; invalid when beta == 0
  Tape::Var fused;           // B x f_h
  Tape::Var probs;           // B x C
  Tape::Var loss;            // 1x1; invalid when labels not supplied
};

// Full forward pass over a node batch: per-node encodings, path concat and
// re-encoding, adaptive path aggregation, state update, optional topology mix
// and the softmax head. All parameters are registered on the tape whether or
// not the beta branch runs, so backward always fills every grad.
ForwardCache pathmlp_forward(Tape& tape, const Graph& g, const NodeFeatures& x,
                             const PathSet& paths, const std::vector<int>& batch,
                             const Labels* labels, PathMLPParams& params,
                             const ModelConfig& cfg, bool training, Rng* dropout_rng);

void save_checkpoint(const std::string& path, const PathMLPParams& params);
void load_checkpoint(const std::string& path, PathMLPParams& params);

// Flat key=value model config file. Recognized keys: f_prime, f_h, d, n_paths,
// beta, dropout, variant, m, seed. Unknown keys are rejected.
struct ModelConfigFile {
  ModelConfig config;
  std::uint64_t seed = 0;
  std::vector<std::string> keys_present;

  bool has(const std::string& key) const;
};

ModelConfigFile read_model_config(const std::string& path);
void write_model_config(const std::string& path, const ModelConfig& cfg, std::uint64_t seed);

} // namespace pathmlp
