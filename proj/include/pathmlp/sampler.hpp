#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "pathmlp/graph.hpp"
#include "pathmlp/matrix.hpp"
#include "pathmlp/rng.hpp"

namespace pathmlp {

// A fixed-length node sequence rooted at its target node (nodes[0]). Every
// consecutive pair is either a graph edge or a padding repetition of the same
// node; padding only occurs when the target itself is isolated, because any
// step from a node with neighbors always has a candidate (revisits allowed).
struct Path {
  std::vector<int> nodes;  // length d+1
  int target() const { return nodes[0]; }
};

struct CandidateSet {
  int target = -1;
  std::vector<Path> paths;
};

enum class SampleStrategy { similarity, bfs, dfs };

std::string strategy_name(SampleStrategy s);
SampleStrategy strategy_from_name(const std::string& name);

struct SamplerConfig {
  int d = 3;        // path length parameter; paths have d+1 nodes
  int n_paths = 4;  // N sampled per node
  SampleStrategy strategy = SampleStrategy::similarity;
  std::uint64_t seed = 0;
  // For the feature-augmented variant: rank candidate neighbors on augmented
  // instead of raw features. Off by default.
  bool augment_before_sampling = false;
};

// Inner product of two equally sized feature vectors.
double node_similarity(std::span<const double> a, std::span<const double> b);

// Up to k neighbors of anchor with the largest similarity to anchor's
// features, ties broken by ascending node id. Fewer than k when the degree is
// smaller; empty for an isolated anchor.
std::vector<int> top_k_similar_neighbors(const Graph& g, const NodeFeatures& x,
                                         int anchor, int k);

// Ranked-neighbor prefixes (similarity descending, id ascending on ties) for
// every node, precomputed once and shared read-only across sampling workers.
// Only the first five ranks are kept: the branch schedule never looks deeper.
class SimilarityCache {
public:
  SimilarityCache(const Graph& g, const NodeFeatures& x);
  std::span<const int> top(int node, int k) const;

private:
  std::vector<int> offsets_;
  std::vector<int> ranked_;
};

// Cartesian expansion of the per-step candidate sets: step 1 branches over the
// target's top-2 similar neighbors, steps 2..4 over the previous node's top-3,
// top-4, top-5, and steps >= 5 follow the single most similar neighbor. Yields
// 2, 6, 24, 120, 120, ... candidates for d = 1, 2, 3, 4, 5, ... when degrees
// suffice; smaller degrees shrink the branch sets.
CandidateSet enumerate_candidates(const Graph& g, const NodeFeatures& x, int target, int d);

// Internal-cache variant used by sample_all_paths.
CandidateSet enumerate_candidates(const Graph& g, const SimilarityCache& cache,
                                  int target, int d);

// n paths drawn uniformly without replacement when the set is large enough;
// otherwise every candidate once plus uniform draws with replacement up to n.
std::vector<Path> sample_paths(const CandidateSet& c, int n, Rng& rng);

// Random walks biased breadth-first: each step picks uniformly among the
// unvisited neighbors at minimal BFS distance from the target, falling back to
// a uniform neighbor when all are visited.
std::vector<Path> bfs_paths(const Graph& g, int target, int d, int n, Rng& rng);

// Random walks biased depth-first: uniform among unvisited neighbors, falling
// back to a uniform neighbor when all are visited.
std::vector<Path> dfs_paths(const Graph& g, int target, int d, int n, Rng& rng);

// Mean over paths of the mean BFS distance from the path's target to each
// non-target position. Throws if a path node is unreachable from its target.
double average_path_order(const std::vector<Path>& paths, const Graph& g);

// Mean inner-product similarity of consecutive path node pairs (padding pairs
// included; they compare a node with itself).
double mean_consecutive_similarity(const std::vector<Path>& paths, const NodeFeatures& x);

// Sampled paths for every node, flattened for fixed-shape consumption.
struct PathSet {
  int node_count = 0;
  int n_paths = 0;
  int path_len = 0;  // d+1
  std::vector<int> nodes;

  std::span<const int> path(int node, int k) const {
    const std::size_t base =
        (static_cast<std::size_t>(node) * n_paths + k) * path_len;
    return {nodes.data() + base, static_cast<std::size_t>(path_len)};
  }
};

// Runs the configured sampler for every node. Each node draws from its own
// RNG stream derived from (seed, node id), so thread count does not affect
// the result; threads <= 1 runs serially.
PathSet sample_all_paths(const Graph& g, const NodeFeatures& sampling_features,
                         const SamplerConfig& cfg, int threads = 1);

void save_path_cache(const std::string& path, const PathSet& ps, const SamplerConfig& cfg);
PathSet load_path_cache(const std::string& path, SamplerConfig* cfg_out = nullptr);

} // namespace pathmlp
