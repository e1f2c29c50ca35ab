#pragma once

#include <span>
#include <utility>
#include <vector>

#include "pathmlp/matrix.hpp"

namespace pathmlp {

// Immutable undirected simple graph in CSR form. Neighbor lists are sorted
// ascending, deduplicated, self-loop free, and symmetric: (u,v) is stored in
// both rows. Construction goes through build_graph; afterwards the structure
// is safe to read from any number of threads.
struct Graph {
  int node_count = 0;
  std::vector<int> row_offsets;  // length node_count + 1
  std::vector<int> col_targets;  // concatenated sorted neighbor lists

  int degree(int u) const { return row_offsets[u + 1] - row_offsets[u]; }

  std::span<const int> neighbors(int u) const {
    return {col_targets.data() + row_offsets[u],
            static_cast<std::size_t>(degree(u))};
  }

  // Undirected edge count (each edge stored twice).
  long long edge_count() const { return static_cast<long long>(col_targets.size()) / 2; }

  bool has_edge(int u, int v) const;
};

struct Labels {
  std::vector<int> values;  // one label per node, in [0, class_count)
  int class_count = 0;
};

// D̃^{-1/2} (A + I) D̃^{-1/2} with D̃ = D + I, stored sparsely with the
// diagonal included. entry(u,v) = 1/sqrt((deg(u)+1)(deg(v)+1)).
struct AffinityOperator {
  int node_count = 0;
  std::vector<int> row_offsets;
  std::vector<int> col_targets;     // includes the node itself per row
  std::vector<double> weights;
};

// Canonicalizes an edge list (either direction, duplicates, self-loops allowed
// in the input) into a symmetric deduplicated CSR. Throws std::invalid_argument
// on node_count == 0 or an endpoint out of range.
Graph build_graph(const std::vector<std::pair<int, int>>& edges, int node_count);

// Fraction of undirected edges whose endpoints share a label. Throws on an
// empty edge set.
double edge_homophily(const Graph& g, const Labels& y);

// Edge homophily corrected for class-degree imbalance:
//   (H_edge - sum_c D_c^2/(2|E|)^2) / (1 - sum_c D_c^2/(2|E|)^2)
// where D_c is the degree sum of class-c nodes. Throws when the denominator
// vanishes (e.g. a single-class graph).
double adjusted_homophily(const Graph& g, const Labels& y);

// Mean, over nodes with a nonempty exact-distance-h neighborhood, of the
// fraction of nodes at shortest-path distance exactly h sharing the node's
// label. Nodes without distance-h neighbors are skipped; throws if h < 1 or
// no node has one.
double order_homophily(const Graph& g, const Labels& y, int h);

AffinityOperator renormalized_affinity(const Graph& g);

// Ã_sym^m · X for m in {1,2}. Throws on a shape mismatch or bad power.
NodeFeatures apply_affinity(const AffinityOperator& op, const NodeFeatures& x, int power);

// BFS distances from source; unreachable nodes get -1. When max_depth >= 0 the
// search stops expanding past that depth (deeper nodes stay -1).
std::vector<int> bfs_distances(const Graph& g, int source, int max_depth = -1);

} // namespace pathmlp
