#include "pathmlp/sampler.hpp"

#include <algorithm>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <thread>
#include <unordered_map>

namespace pathmlp {

std::string strategy_name(SampleStrategy s) {
  switch (s) {
    case SampleStrategy::similarity: return "similarity";
    case SampleStrategy::bfs: return "bfs";
    case SampleStrategy::dfs: return "dfs";
  }
  return "similarity";
}

SampleStrategy strategy_from_name(const std::string& name) {
  if (name == "similarity") return SampleStrategy::similarity;
  if (name == "bfs") return SampleStrategy::bfs;
  if (name == "dfs") return SampleStrategy::dfs;
  throw std::invalid_argument("unknown sampling strategy: " + name);
}

double node_similarity(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw std::invalid_argument("node_similarity: dimension mismatch");
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

namespace {

std::span<const double> feature_row(const NodeFeatures& x, int node) {
  return {x.row(node), static_cast<std::size_t>(x.cols)};
}

// Sort neighbor ids by (similarity desc, id asc) and keep the first `keep`.
std::vector<int> ranked_neighbors(const Graph& g, const NodeFeatures& x, int anchor,
                                  int keep) {
  const auto anchor_feat = feature_row(x, anchor);
  std::vector<std::pair<double, int>> scored;
  scored.reserve(g.degree(anchor));
  for (int v : g.neighbors(anchor)) {
    scored.emplace_back(node_similarity(anchor_feat, feature_row(x, v)), v);
  }
  std::stable_sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });
  const int take = std::min<int>(keep, static_cast<int>(scored.size()));
  std::vector<int> out(take);
  for (int i = 0; i < take; ++i) out[i] = scored[i].second;
  return out;
}

constexpr int kMaxBranch = 5;  // deepest rank the branch schedule ever uses

int branch_factor(int step) { return step <= 4 ? step + 1 : 1; }

} // namespace

std::vector<int> top_k_similar_neighbors(const Graph& g, const NodeFeatures& x,
                                         int anchor, int k) {
  if (k < 1) throw std::invalid_argument("top_k_similar_neighbors: k must be >= 1");
  return ranked_neighbors(g, x, anchor, k);
}

SimilarityCache::SimilarityCache(const Graph& g, const NodeFeatures& x) {
  offsets_.assign(g.node_count + 1, 0);
  for (int u = 0; u < g.node_count; ++u) {
    offsets_[u + 1] = offsets_[u] + std::min(kMaxBranch, g.degree(u));
  }
  ranked_.resize(offsets_.back());
  for (int u = 0; u < g.node_count; ++u) {
    const auto top = ranked_neighbors(g, x, u, kMaxBranch);
    std::copy(top.begin(), top.end(), ranked_.begin() + offsets_[u]);
  }
}

std::span<const int> SimilarityCache::top(int node, int k) const {
  const int have = offsets_[node + 1] - offsets_[node];
  return {ranked_.data() + offsets_[node], static_cast<std::size_t>(std::min(k, have))};
}

CandidateSet enumerate_candidates(const Graph&, const SimilarityCache& cache,
                                  int target, int d) {
  if (d < 1) throw std::invalid_argument("enumerate_candidates: d must be >= 1");
  CandidateSet set;
  set.target = target;
  std::vector<std::vector<int>> frontier{{target}};
  for (int step = 1; step <= d; ++step) {
    std::vector<std::vector<int>> next;
    next.reserve(frontier.size() * branch_factor(step));
    for (const auto& prefix : frontier) {
      const int last = prefix.back();
      const auto branch = cache.top(last, branch_factor(step));
      if (branch.empty()) {
        auto padded = prefix;
        padded.push_back(last);  // dead end: repeat until full length
        next.push_back(std::move(padded));
        continue;
      }
      for (int candidate : branch) {
        auto extended = prefix;
        extended.push_back(candidate);
        next.push_back(std::move(extended));
      }
    }
    frontier = std::move(next);
  }
  set.paths.reserve(frontier.size());
  for (auto& nodes : frontier) set.paths.push_back(Path{std::move(nodes)});
  return set;
}

CandidateSet enumerate_candidates(const Graph& g, const NodeFeatures& x, int target,
                                  int d) {
  // Rank lazily only the nodes the expansion actually visits.
  if (d < 1) throw std::invalid_argument("enumerate_candidates: d must be >= 1");
  std::unordered_map<int, std::vector<int>> top5;
  auto top = [&](int node, int k) -> std::span<const int> {
    auto it = top5.find(node);
    if (it == top5.end()) {
      it = top5.emplace(node, ranked_neighbors(g, x, node, kMaxBranch)).first;
    }
    const auto& list = it->second;
    return {list.data(), static_cast<std::size_t>(std::min<int>(k, list.size()))};
  };
  CandidateSet set;
  set.target = target;
  std::vector<std::vector<int>> frontier{{target}};
  for (int step = 1; step <= d; ++step) {
    std::vector<std::vector<int>> next;
    for (const auto& prefix : frontier) {
      const int last = prefix.back();
      const auto branch = top(last, branch_factor(step));
      if (branch.empty()) {
        auto padded = prefix;
        padded.push_back(last);
        next.push_back(std::move(padded));
        continue;
      }
      for (int candidate : branch) {
        auto extended = prefix;
        extended.push_back(candidate);
        next.push_back(std::move(extended));
      }
    }
    frontier = std::move(next);
  }
  set.paths.reserve(frontier.size());
  for (auto& nodes : frontier) set.paths.push_back(Path{std::move(nodes)});
  return set;
}

std::vector<Path> sample_paths(const CandidateSet& c, int n, Rng& rng) {
  if (c.paths.empty()) throw std::invalid_argument("sample_paths: empty candidate set");
  if (n < 1) throw std::invalid_argument("sample_paths: n must be >= 1");
  const int m = static_cast<int>(c.paths.size());
  std::vector<Path> out;
  out.reserve(n);
  if (m >= n) {
    std::vector<int> idx(m);
    for (int i = 0; i < m; ++i) idx[i] = i;
    for (int i = 0; i < n; ++i) {  // partial Fisher-Yates
      const int j = i + static_cast<int>(rng.next_below(m - i));
      std::swap(idx[i], idx[j]);
      out.push_back(c.paths[idx[i]]);
    }
  } else {
    for (int i = 0; i < m; ++i) out.push_back(c.paths[i]);
    for (int i = m; i < n; ++i) {
      out.push_back(c.paths[rng.next_below(m)]);
    }
  }
  return out;
}

namespace {

Path random_walk(const Graph& g, int target, int d, Rng& rng,
                 const std::vector<int>* dist_from_target) {
  Path p;
  p.nodes.reserve(d + 1);
  p.nodes.push_back(target);
  std::vector<int> visited{target};
  int cur = target;
  for (int step = 1; step <= d; ++step) {
    const auto nbrs = g.neighbors(cur);
    if (nbrs.empty()) {
      p.nodes.push_back(cur);  // isolated target, pad
      continue;
    }
    std::vector<int> pool;
    for (int v : nbrs) {
      if (std::find(visited.begin(), visited.end(), v) == visited.end()) {
        pool.push_back(v);
      }
    }
    int chosen;
    if (!pool.empty()) {
      if (dist_from_target) {
        int best = std::numeric_limits<int>::max();
        for (int v : pool) {
          const int dv = (*dist_from_target)[v] < 0 ? std::numeric_limits<int>::max()
                                                    : (*dist_from_target)[v];
          best = std::min(best, dv);
        }
        std::vector<int> close;
        for (int v : pool) {
          const int dv = (*dist_from_target)[v] < 0 ? std::numeric_limits<int>::max()
                                                    : (*dist_from_target)[v];
          if (dv == best) close.push_back(v);
        }
        chosen = close[rng.next_below(close.size())];
      } else {
        chosen = pool[rng.next_below(pool.size())];
      }
    } else {
      chosen = nbrs[rng.next_below(nbrs.size())];
    }
    visited.push_back(chosen);
    p.nodes.push_back(chosen);
    cur = chosen;
  }
  return p;
}

} // namespace

std::vector<Path> bfs_paths(const Graph& g, int target, int d, int n, Rng& rng) {
  const auto dist = bfs_distances(g, target, d + 1);
  std::vector<Path> out;
  out.reserve(n);
  for (int i = 0; i < n; ++i) out.push_back(random_walk(g, target, d, rng, &dist));
  return out;
}

std::vector<Path> dfs_paths(const Graph& g, int target, int d, int n, Rng& rng) {
  std::vector<Path> out;
  out.reserve(n);
  for (int i = 0; i < n; ++i) out.push_back(random_walk(g, target, d, rng, nullptr));
  return out;
}

double average_path_order(const std::vector<Path>& paths, const Graph& g) {
  if (paths.empty()) throw std::invalid_argument("average_path_order: no paths");
  std::unordered_map<int, std::vector<int>> dist_cache;
  double total = 0.0;
  for (const auto& p : paths) {
    auto it = dist_cache.find(p.target());
    if (it == dist_cache.end()) {
      it = dist_cache.emplace(p.target(), bfs_distances(g, p.target())).first;
    }
    const auto& dist = it->second;
    double acc = 0.0;
    const int tail = static_cast<int>(p.nodes.size()) - 1;
    for (int j = 1; j <= tail; ++j) {
      if (dist[p.nodes[j]] < 0) {
        throw std::invalid_argument("average_path_order: node unreachable from target");
      }
      acc += dist[p.nodes[j]];
    }
    total += tail > 0 ? acc / tail : 0.0;
  }
  return total / paths.size();
}

double mean_consecutive_similarity(const std::vector<Path>& paths, const NodeFeatures& x) {
  if (paths.empty()) throw std::invalid_argument("mean_consecutive_similarity: no paths");
  double total = 0.0;
  long long pairs = 0;
  for (const auto& p : paths) {
    for (std::size_t j = 1; j < p.nodes.size(); ++j) {
      total += node_similarity(feature_row(x, p.nodes[j - 1]), feature_row(x, p.nodes[j]));
      ++pairs;
    }
  }
  return total / static_cast<double>(pairs);
}

namespace {

void sample_range(const Graph& g, const SimilarityCache* cache, const SamplerConfig& cfg,
                  int begin, int end, PathSet& out) {
  for (int v = begin; v < end; ++v) {
    Rng rng(cfg.seed, static_cast<std::uint64_t>(v));
    std::vector<Path> paths;
    switch (cfg.strategy) {
      case SampleStrategy::similarity: {
        const auto cand = enumerate_candidates(g, *cache, v, cfg.d);
        paths = sample_paths(cand, cfg.n_paths, rng);
        break;
      }
      case SampleStrategy::bfs:
        paths = bfs_paths(g, v, cfg.d, cfg.n_paths, rng);
        break;
      case SampleStrategy::dfs:
        paths = dfs_paths(g, v, cfg.d, cfg.n_paths, rng);
        break;
    }
    const std::size_t base =
        static_cast<std::size_t>(v) * cfg.n_paths * (cfg.d + 1);
    for (int k = 0; k < cfg.n_paths; ++k) {
      std::copy(paths[k].nodes.begin(), paths[k].nodes.end(),
                out.nodes.begin() + base + static_cast<std::size_t>(k) * (cfg.d + 1));
    }
  }
}

} // namespace

PathSet sample_all_paths(const Graph& g, const NodeFeatures& sampling_features,
                         const SamplerConfig& cfg, int threads) {
  if (cfg.d < 1 || cfg.n_paths < 1) {
    throw std::invalid_argument("sample_all_paths: d and n_paths must be >= 1");
  }
  PathSet ps;
  ps.node_count = g.node_count;
  ps.n_paths = cfg.n_paths;
  ps.path_len = cfg.d + 1;
  ps.nodes.resize(static_cast<std::size_t>(g.node_count) * cfg.n_paths * (cfg.d + 1));

  std::optional<SimilarityCache> local_cache;
  const SimilarityCache* cache = nullptr;
  if (cfg.strategy == SampleStrategy::similarity) {
    local_cache.emplace(g, sampling_features);
    cache = &*local_cache;
  }

  if (threads <= 1 || g.node_count < 2 * threads) {
    sample_range(g, cache, cfg, 0, g.node_count, ps);
    return ps;
  }
  std::vector<std::thread> workers;
  const int chunk = (g.node_count + threads - 1) / threads;
  for (int t = 0; t < threads; ++t) {
    const int begin = t * chunk;
    const int end = std::min(g.node_count, begin + chunk);
    if (begin >= end) break;
    workers.emplace_back([&, begin, end] { sample_range(g, cache, cfg, begin, end, ps); });
  }
  for (auto& w : workers) w.join();
  return ps;
}

void save_path_cache(const std::string& path, const PathSet& ps, const SamplerConfig& cfg) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open path cache for writing: " + path);
  out << "pathcache v1 d=" << cfg.d << " n=" << cfg.n_paths
      << " strategy=" << strategy_name(cfg.strategy) << " seed=" << cfg.seed << "\n";
  for (int v = 0; v < ps.node_count; ++v) {
    for (int k = 0; k < ps.n_paths; ++k) {
      out << v;
      for (int node : ps.path(v, k)) out << ' ' << node;
      out << '\n';
    }
  }
}

PathSet load_path_cache(const std::string& path, SamplerConfig* cfg_out) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open path cache: " + path);
  std::string header;
  std::getline(in, header);
  SamplerConfig cfg;
  {
    std::istringstream hs(header);
    std::string magic, version, field;
    hs >> magic >> version;
    if (magic != "pathcache" || version != "v1") {
      throw std::runtime_error("bad path cache header: " + path);
    }
    while (hs >> field) {
      const auto eq = field.find('=');
      if (eq == std::string::npos) continue;
      const std::string key = field.substr(0, eq);
      const std::string val = field.substr(eq + 1);
      if (key == "d") cfg.d = std::stoi(val);
      else if (key == "n") cfg.n_paths = std::stoi(val);
      else if (key == "strategy") cfg.strategy = strategy_from_name(val);
      else if (key == "seed") cfg.seed = std::stoull(val);
    }
  }
  PathSet ps;
  ps.n_paths = cfg.n_paths;
  ps.path_len = cfg.d + 1;
  std::string line;
  int max_node = -1;
  std::vector<int> flat;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    int target;
    ls >> target;
    max_node = std::max(max_node, target);
    for (int j = 0; j <= cfg.d; ++j) {
      int node;
      if (!(ls >> node)) throw std::runtime_error("truncated path line in " + path);
      flat.push_back(node);
    }
  }
  ps.node_count = max_node + 1;
  ps.nodes = std::move(flat);
  if (ps.nodes.size() != static_cast<std::size_t>(ps.node_count) * ps.n_paths * ps.path_len) {
    throw std::runtime_error("path cache row count mismatch in " + path);
  }
  if (cfg_out) *cfg_out = cfg;
  return ps;
}

} // namespace pathmlp
