#include "pathmlp/graph.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <stdexcept>
#include <string>

namespace pathmlp {

bool Graph::has_edge(int u, int v) const {
  const auto nb = neighbors(u);
  return std::binary_search(nb.begin(), nb.end(), v);
}

Graph build_graph(const std::vector<std::pair<int, int>>& edges, int node_count) {
  if (node_count <= 0) {
    throw std::invalid_argument("build_graph: node_count must be positive");
  }
  std::vector<std::pair<int, int>> dir;
  dir.reserve(edges.size() * 2);
  for (const auto& [u, v] : edges) {
    if (u < 0 || u >= node_count || v < 0 || v >= node_count) {
      throw std::invalid_argument("build_graph: endpoint out of range: (" +
                                  std::to_string(u) + "," + std::to_string(v) + ")");
    }
    if (u == v) continue;  // self-loops are implicit in the affinity operator only
    dir.emplace_back(u, v);
    dir.emplace_back(v, u);
  }
  std::sort(dir.begin(), dir.end());
  dir.erase(std::unique(dir.begin(), dir.end()), dir.end());

  Graph g;
  g.node_count = node_count;
  g.row_offsets.assign(node_count + 1, 0);
  g.col_targets.reserve(dir.size());
  for (const auto& [u, v] : dir) g.row_offsets[u + 1]++;
  for (int i = 0; i < node_count; ++i) g.row_offsets[i + 1] += g.row_offsets[i];
  for (const auto& [u, v] : dir) g.col_targets.push_back(v);
  return g;
}

namespace {

void require_labels(const Graph& g, const Labels& y) {
  if (static_cast<int>(y.values.size()) != g.node_count) {
    throw std::invalid_argument("labels length does not match node count");
  }
}

} // namespace

double edge_homophily(const Graph& g, const Labels& y) {
  require_labels(g, y);
  if (g.edge_count() == 0) {
    throw std::invalid_argument("edge_homophily: empty edge set");
  }
  long long same = 0;
  for (int u = 0; u < g.node_count; ++u) {
    for (int v : g.neighbors(u)) {
      if (v <= u) continue;  // count each undirected edge once
      if (y.values[u] == y.values[v]) ++same;
    }
  }
  return static_cast<double>(same) / static_cast<double>(g.edge_count());
}

double adjusted_homophily(const Graph& g, const Labels& y) {
  require_labels(g, y);
  const double h_edge = edge_homophily(g, y);
  std::vector<double> class_degree(y.class_count, 0.0);
  for (int u = 0; u < g.node_count; ++u) {
    class_degree[y.values[u]] += static_cast<double>(g.degree(u));
  }
  const double two_e = 2.0 * static_cast<double>(g.edge_count());
  double expected = 0.0;
  for (double dc : class_degree) expected += (dc / two_e) * (dc / two_e);
  const double denom = 1.0 - expected;
  if (std::abs(denom) < 1e-15) {
    throw std::domain_error("adjusted_homophily: degenerate denominator");
  }
  return (h_edge - expected) / denom;
}

double order_homophily(const Graph& g, const Labels& y, int h) {
  require_labels(g, y);
  if (h < 1) throw std::invalid_argument("order_homophily: h must be >= 1");
  double total = 0.0;
  int counted = 0;
  for (int v = 0; v < g.node_count; ++v) {
    const auto dist = bfs_distances(g, v, h);
    int at_h = 0, same = 0;
    for (int u = 0; u < g.node_count; ++u) {
      if (dist[u] == h) {
        ++at_h;
        if (y.values[u] == y.values[v]) ++same;
      }
    }
    if (at_h == 0) continue;  // isolated at this order, skipped
    total += static_cast<double>(same) / static_cast<double>(at_h);
    ++counted;
  }
  if (counted == 0) {
    throw std::domain_error("order_homophily: no node has a distance-" +
                            std::to_string(h) + " neighbor");
  }
  return total / static_cast<double>(counted);
}

AffinityOperator renormalized_affinity(const Graph& g) {
  AffinityOperator op;
  op.node_count = g.node_count;
  op.row_offsets.assign(g.node_count + 1, 0);
  for (int u = 0; u < g.node_count; ++u) {
    op.row_offsets[u + 1] = op.row_offsets[u] + g.degree(u) + 1;  // +1 for the diagonal
  }
  op.col_targets.resize(op.row_offsets.back());
  op.weights.resize(op.row_offsets.back());
  std::vector<double> inv_sqrt(g.node_count);
  for (int u = 0; u < g.node_count; ++u) {
    inv_sqrt[u] = 1.0 / std::sqrt(static_cast<double>(g.degree(u)) + 1.0);
  }
  for (int u = 0; u < g.node_count; ++u) {
    int pos = op.row_offsets[u];
    bool placed_self = false;
    for (int v : g.neighbors(u)) {
      if (!placed_self && v > u) {
        op.col_targets[pos] = u;
        op.weights[pos] = inv_sqrt[u] * inv_sqrt[u];
        ++pos;
        placed_self = true;
      }
      op.col_targets[pos] = v;
      op.weights[pos] = inv_sqrt[u] * inv_sqrt[v];
      ++pos;
    }
    if (!placed_self) {
      op.col_targets[pos] = u;
      op.weights[pos] = inv_sqrt[u] * inv_sqrt[u];
    }
  }
  return op;
}

NodeFeatures apply_affinity(const AffinityOperator& op, const NodeFeatures& x, int power) {
  if (power != 1 && power != 2) {
    throw std::invalid_argument("apply_affinity: power must be 1 or 2");
  }
  if (x.rows != op.node_count) {
    throw std::invalid_argument("apply_affinity: feature rows do not match node count");
  }
  NodeFeatures cur = x;
  for (int step = 0; step < power; ++step) {
    NodeFeatures next(cur.rows, cur.cols, 0.0);
    for (int u = 0; u < op.node_count; ++u) {
      double* out = next.row(u);
      for (int k = op.row_offsets[u]; k < op.row_offsets[u + 1]; ++k) {
        const double w = op.weights[k];
        const double* in = cur.row(op.col_targets[k]);
        for (int c = 0; c < cur.cols; ++c) out[c] += w * in[c];
      }
    }
    cur = std::move(next);
  }
  return cur;
}

std::vector<int> bfs_distances(const Graph& g, int source, int max_depth) {
  std::vector<int> dist(g.node_count, -1);
  dist[source] = 0;
  std::deque<int> queue{source};
  while (!queue.empty()) {
    const int u = queue.front();
    queue.pop_front();
    if (max_depth >= 0 && dist[u] >= max_depth) continue;
    for (int v : g.neighbors(u)) {
      if (dist[v] < 0) {
        dist[v] = dist[u] + 1;
        queue.push_back(v);
      }
    }
  }
  return dist;
}

} // namespace pathmlp
