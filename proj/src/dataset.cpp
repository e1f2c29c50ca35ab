#include "pathmlp/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

namespace pathmlp {

namespace {

std::string format_g17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

[[noreturn]] void fail_at(const std::string& file, int line, const std::string& what) {
  throw std::runtime_error(file + ":" + std::to_string(line) + ": " + what);
}

bool is_comment_or_blank(const std::string& line) {
  for (char c : line) {
    if (c == '#') return true;
    if (!std::isspace(static_cast<unsigned char>(c))) return false;
  }
  return true;
}

} // namespace

DatasetManifest read_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open manifest: " + path);
  DatasetManifest m;
  const auto dir = std::filesystem::path(path).parent_path();
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (is_comment_or_blank(line)) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) fail_at(path, line_no, "expected key=value");
    const std::string key = line.substr(0, eq);
    const std::string val = line.substr(eq + 1);
    if (key == "name") m.name = val;
    else if (key == "edges") m.edge_file = (dir / val).string();
    else if (key == "features") m.feature_file = (dir / val).string();
    else if (key == "labels") m.label_file = (dir / val).string();
    else if (key == "node_count") m.node_count = std::stoi(val);
    else if (key == "feature_dim") m.feature_dim = std::stoi(val);
    else if (key == "class_count") m.class_count = std::stoi(val);
    else if (key == "split_profile") m.split_profile = split_profile_from_name(val);
    else fail_at(path, line_no, "unknown manifest key: " + key);
  }
  return m;
}

void write_manifest(const std::string& path, const DatasetManifest& m) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open manifest for writing: " + path);
  out << "name=" << m.name << '\n'
      << "edges=" << std::filesystem::path(m.edge_file).filename().string() << '\n'
      << "features=" << std::filesystem::path(m.feature_file).filename().string() << '\n'
      << "labels=" << std::filesystem::path(m.label_file).filename().string() << '\n'
      << "node_count=" << m.node_count << '\n'
      << "feature_dim=" << m.feature_dim << '\n'
      << "class_count=" << m.class_count << '\n';
  if (m.split_profile) out << "split_profile=" << split_profile_name(*m.split_profile) << '\n';
}

namespace {

std::vector<std::pair<int, int>> read_edge_list(const std::string& path, int node_count) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open edge file: " + path);
  std::vector<std::pair<int, int>> edges;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (is_comment_or_blank(line)) continue;
    std::istringstream ls(line);
    long long u, v;
    if (!(ls >> u >> v)) fail_at(path, line_no, "expected 'u v'");
    std::string extra;
    if (ls >> extra) fail_at(path, line_no, "trailing tokens on edge line");
    if (u < 0 || v < 0 || u >= node_count || v >= node_count) {
      fail_at(path, line_no, "endpoint out of range for node_count=" +
                                 std::to_string(node_count));
    }
    edges.emplace_back(static_cast<int>(u), static_cast<int>(v));
  }
  return edges;
}

NodeFeatures read_features(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open feature file: " + path);
  std::string line;
  int line_no = 0;
  int rows = -1, cols = -1;
  while (std::getline(in, line)) {
    ++line_no;
    if (is_comment_or_blank(line)) continue;
    std::istringstream ls(line);
    if (!(ls >> rows >> cols) || rows <= 0 || cols <= 0) {
      fail_at(path, line_no, "expected header 'rows cols'");
    }
    break;
  }
  if (rows < 0) fail_at(path, line_no, "missing feature header");
  NodeFeatures x(rows, cols);
  int filled = 0;
  while (filled < rows && std::getline(in, line)) {
    ++line_no;
    if (is_comment_or_blank(line)) continue;
    std::istringstream ls(line);
    double* row = x.row(filled);
    for (int c = 0; c < cols; ++c) {
      if (!(ls >> row[c])) fail_at(path, line_no, "expected " + std::to_string(cols) +
                                                      " values in feature row");
      if (!std::isfinite(row[c])) fail_at(path, line_no, "non-finite feature value");
    }
    std::string extra;
    if (ls >> extra) fail_at(path, line_no, "trailing tokens on feature row");
    ++filled;
  }
  if (filled != rows) {
    fail_at(path, line_no, "feature file ended after " + std::to_string(filled) +
                               " of " + std::to_string(rows) + " rows");
  }
  return x;
}

Labels read_labels(const std::string& path, int class_count) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open label file: " + path);
  Labels y;
  y.class_count = class_count;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (is_comment_or_blank(line)) continue;
    std::istringstream ls(line);
    long long value;
    if (!(ls >> value)) fail_at(path, line_no, "expected an integer label");
    if (value < 0 || value >= class_count) {
      fail_at(path, line_no, "label " + std::to_string(value) + " outside [0," +
                                 std::to_string(class_count) + ")");
    }
    y.values.push_back(static_cast<int>(value));
  }
  return y;
}

} // namespace

Dataset load_dataset(const DatasetManifest& manifest) {
  if (manifest.node_count <= 0 || manifest.class_count < 2) {
    throw std::runtime_error("manifest for '" + manifest.name +
                             "' must declare node_count and class_count");
  }
  Dataset ds;
  ds.name = manifest.name;
  const auto edges = read_edge_list(manifest.edge_file, manifest.node_count);
  ds.graph = build_graph(edges, manifest.node_count);
  ds.features = read_features(manifest.feature_file);
  if (ds.features.rows != manifest.node_count) {
    throw std::runtime_error(manifest.feature_file + ": feature rows " +
                             std::to_string(ds.features.rows) + " != declared node_count " +
                             std::to_string(manifest.node_count));
  }
  if (manifest.feature_dim > 0 && ds.features.cols != manifest.feature_dim) {
    throw std::runtime_error(manifest.feature_file + ": feature dim " +
                             std::to_string(ds.features.cols) + " != declared " +
                             std::to_string(manifest.feature_dim));
  }
  ds.labels = read_labels(manifest.label_file, manifest.class_count);
  if (static_cast<int>(ds.labels.values.size()) != manifest.node_count) {
    throw std::runtime_error(manifest.label_file + ": label rows " +
                             std::to_string(ds.labels.values.size()) +
                             " != declared node_count " + std::to_string(manifest.node_count));
  }
  return ds;
}

Dataset load_dataset_files(const std::string& name, const std::string& edge_file,
                           const std::string& feature_file, const std::string& label_file,
                           int class_count) {
  Dataset ds;
  ds.name = name;
  ds.features = read_features(feature_file);
  const auto edges = read_edge_list(edge_file, ds.features.rows);
  ds.graph = build_graph(edges, ds.features.rows);
  ds.labels = read_labels(label_file, class_count);
  if (static_cast<int>(ds.labels.values.size()) != ds.features.rows) {
    throw std::runtime_error(label_file + ": label count does not match feature rows");
  }
  return ds;
}

DatasetManifest save_dataset(const Dataset& ds, const std::string& dir) {
  std::filesystem::create_directories(dir);
  const auto base = std::filesystem::path(dir);
  DatasetManifest m;
  m.name = ds.name;
  m.edge_file = (base / "edges.txt").string();
  m.feature_file = (base / "features.txt").string();
  m.label_file = (base / "labels.txt").string();
  m.node_count = ds.graph.node_count;
  m.feature_dim = ds.features.cols;
  m.class_count = ds.labels.class_count;

  {
    std::ofstream out(m.edge_file);
    if (!out) throw std::runtime_error("cannot write " + m.edge_file);
    out << "# " << ds.name << ": one undirected edge per line\n";
    for (int u = 0; u < ds.graph.node_count; ++u) {
      for (int v : ds.graph.neighbors(u)) {
        if (v > u) out << u << ' ' << v << '\n';
      }
    }
  }
  {
    std::ofstream out(m.feature_file);
    if (!out) throw std::runtime_error("cannot write " + m.feature_file);
    out << ds.features.rows << ' ' << ds.features.cols << '\n';
    for (int i = 0; i < ds.features.rows; ++i) {
      const double* row = ds.features.row(i);
      for (int c = 0; c < ds.features.cols; ++c) {
        if (c) out << ' ';
        out << format_g17(row[c]);
      }
      out << '\n';
    }
  }
  {
    std::ofstream out(m.label_file);
    if (!out) throw std::runtime_error("cannot write " + m.label_file);
    for (int y : ds.labels.values) out << y << '\n';
  }
  write_manifest((base / "dataset.manifest").string(), m);
  return m;
}

std::uint64_t dataset_hash(const Dataset& ds) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&h](const void* data, std::size_t len) {
    const auto* bytes = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < len; ++i) {
      h ^= bytes[i];
      h *= 0x100000001b3ULL;
    }
  };
  mix(ds.graph.row_offsets.data(), ds.graph.row_offsets.size() * sizeof(int));
  mix(ds.graph.col_targets.data(), ds.graph.col_targets.size() * sizeof(int));
  mix(ds.features.v.data(), ds.features.v.size() * sizeof(double));
  mix(ds.labels.values.data(), ds.labels.values.size() * sizeof(int));
  mix(&ds.labels.class_count, sizeof(int));
  return h;
}

DuplicationRates detect_leakage(const Graph& g, const Labels& y) {
  if (static_cast<int>(y.values.size()) != g.node_count) {
    throw std::invalid_argument("detect_leakage: labels do not match node count");
  }
  std::map<std::vector<int>, int> adjacency_counts;
  std::map<std::vector<int>, int> adjacency_label_counts;
  for (int u = 0; u < g.node_count; ++u) {
    const auto nb = g.neighbors(u);
    std::vector<int> key(nb.begin(), nb.end());  // CSR rows are already sorted
    ++adjacency_counts[key];
    key.push_back(g.node_count + y.values[u]);  // disjoint from node id range
    ++adjacency_label_counts[key];
  }
  DuplicationRates rates;
  for (int u = 0; u < g.node_count; ++u) {
    const auto nb = g.neighbors(u);
    std::vector<int> key(nb.begin(), nb.end());
    if (adjacency_counts[key] >= 2) rates.adjacency_rate += 1.0;
    key.push_back(g.node_count + y.values[u]);
    if (adjacency_label_counts[key] >= 2) rates.adjacency_label_rate += 1.0;
  }
  rates.adjacency_rate /= g.node_count;
  rates.adjacency_label_rate /= g.node_count;
  return rates;
}

namespace {

// Mutually orthogonal unit prototypes plus one extra direction, all via
// Gram-Schmidt over Gaussian draws.
std::vector<std::vector<double>> orthonormal_directions(int count, int dim, Rng& rng) {
  if (count > dim) throw std::invalid_argument("need feature_dim >= class_count + 1");
  std::vector<std::vector<double>> dirs;
  for (int k = 0; k < count; ++k) {
    std::vector<double> v(dim);
    for (;;) {
      for (double& x : v) x = rng.next_gaussian();
      for (const auto& prev : dirs) {
        double dot = 0.0;
        for (int i = 0; i < dim; ++i) dot += v[i] * prev[i];
        for (int i = 0; i < dim; ++i) v[i] -= dot * prev[i];
      }
      double norm = 0.0;
      for (double x : v) norm += x * x;
      norm = std::sqrt(norm);
      if (norm > 1e-8) {
        for (double& x : v) x /= norm;
        break;
      }
    }
    dirs.push_back(std::move(v));
  }
  return dirs;
}

Dataset generate_homophilous(int n, int f, int C, std::uint64_t seed) {
  Rng rng(seed, 0x40b0);
  Dataset ds;
  ds.name = "synthetic-homophilous";
  Labels y;
  y.class_count = C;
  y.values.resize(n);
  for (int i = 0; i < n; ++i) y.values[i] = i % C;
  rng.shuffle(y.values);

  std::vector<std::vector<int>> by_class(C);
  for (int i = 0; i < n; ++i) by_class[y.values[i]].push_back(i);

  std::set<std::pair<int, int>> edge_set;
  const int target_edges = 4 * n;
  int attempts = 0;
  while (static_cast<int>(edge_set.size()) < target_edges && attempts < 50 * target_edges) {
    ++attempts;
    const int u = static_cast<int>(rng.next_below(n));
    int v;
    if (rng.next_double() < 0.9) {
      const auto& mates = by_class[y.values[u]];
      v = mates[rng.next_below(mates.size())];
    } else {
      v = static_cast<int>(rng.next_below(n));
    }
    if (u == v) continue;
    edge_set.emplace(std::min(u, v), std::max(u, v));
  }
  std::vector<std::pair<int, int>> edges(edge_set.begin(), edge_set.end());
  ds.graph = build_graph(edges, n);

  const auto protos = orthonormal_directions(C, f, rng);
  ds.features = NodeFeatures(n, f);
  constexpr double kSignal = 1.0, kNoise = 0.45;
  for (int i = 0; i < n; ++i) {
    double* row = ds.features.row(i);
    const auto& proto = protos[y.values[i]];
    for (int c = 0; c < f; ++c) row[c] = kSignal * proto[c] + kNoise * rng.next_gaussian();
  }
  ds.labels = std::move(y);
  return ds;
}

// Chain of class-alternating segments with one hub per segment. All edges are
// cross-class, so any walk alternates classes and every even-distance node
// shares the target's class. Hub feature norms grow along the chain, which
// pulls inner-product sampling outward through the hub spine.
Dataset generate_heterophilous(int n, int f, int C, std::uint64_t seed) {
  if (C < 2) throw std::invalid_argument("heterophilous fixture needs class_count >= 2");
  Rng rng(seed, 0x4e70);
  Dataset ds;
  ds.name = "synthetic-heterophilous";

  const int seg_size = 11;                 // regular nodes per segment
  const int segments = std::max(12, n / (seg_size + 1));
  const int hubs = segments;
  const int regulars = n - hubs;

  // Segment classes: alternate within blocks of one class pair, never letting
  // two consecutive segments coincide.
  std::vector<int> seg_class(segments + 1);
  {
    const int pairs = std::max(1, C / 2);
    const int block_len = 8;
    int prev = -1;
    for (int s = 0; s < segments + 1; ++s) {
      const int pair = (s / block_len) % pairs;
      int a = 2 * pair, b = 2 * pair + 1;
      if (b >= C) b = 0;
      int cls = (s % 2 == 0) ? a : b;
      if (cls == prev) cls = (cls == a) ? b : a;
      seg_class[s] = cls;
      prev = cls;
    }
  }

  // Node layout: regulars first (segment-major), then one hub per segment.
  std::vector<std::vector<int>> seg_nodes(segments);
  {
    int next = 0;
    for (int s = 0; s < segments && next < regulars; ++s) {
      const int count = (regulars / segments) + (s < regulars % segments ? 1 : 0);
      for (int i = 0; i < count; ++i) seg_nodes[s].push_back(next++);
    }
  }
  const auto hub_id = [&](int s) { return regulars + s; };

  Labels y;
  y.class_count = C;
  y.values.resize(n);
  for (int s = 0; s < segments; ++s) {
    for (int v : seg_nodes[s]) y.values[v] = seg_class[s];
    y.values[hub_id(s)] = seg_class[s + 1];  // differs from its own segment
  }

  std::set<std::pair<int, int>> edge_set;
  auto link = [&edge_set](int a, int b) {
    if (a != b) edge_set.emplace(std::min(a, b), std::max(a, b));
  };
  for (int s = 0; s + 1 < segments; ++s) link(hub_id(s), hub_id(s + 1));
  for (int s = 0; s < segments; ++s) {
    for (int v : seg_nodes[s]) {
      link(v, hub_id(s));
      if (s + 1 < segments && !seg_nodes[s + 1].empty()) {
        for (int k = 0; k < 4; ++k) {
          link(v, seg_nodes[s + 1][rng.next_below(seg_nodes[s + 1].size())]);
        }
      }
    }
  }
  ds.graph = build_graph({edge_set.begin(), edge_set.end()}, n);

  // Features: class prototype + shared positive direction + noise. Hubs carry
  // a strong prototype and a chain-position-scaled shared component.
  const auto dirs = orthonormal_directions(C + 1, f, rng);
  const auto& shared = dirs[C];
  constexpr double kRegSignal = 0.45, kRegNoise = 0.35;
  constexpr double kHubSignal = 3.0, kHubNoise = 0.15;
  ds.features = NodeFeatures(n, f);
  for (int s = 0; s < segments; ++s) {
    for (int v : seg_nodes[s]) {
      double* row = ds.features.row(v);
      const auto& proto = dirs[y.values[v]];
      const double gamma = 1.0 + 0.05 * rng.next_gaussian();
      for (int c = 0; c < f; ++c) {
        row[c] = kRegSignal * proto[c] + gamma * shared[c] + kRegNoise * rng.next_gaussian();
      }
    }
    double* hub_row = ds.features.row(hub_id(s));
    const auto& proto = dirs[y.values[hub_id(s)]];
    const double gamma = 3.0 + 5.0 * static_cast<double>(s) / std::max(1, segments - 1);
    for (int c = 0; c < f; ++c) {
      hub_row[c] = kHubSignal * proto[c] + gamma * shared[c] + kHubNoise * rng.next_gaussian();
    }
  }
  ds.labels = std::move(y);
  return ds;
}

} // namespace

Dataset generate_synthetic(SyntheticKind kind, int n, int f, int class_count,
                           std::uint64_t seed) {
  if (n < 20) throw std::invalid_argument("generate_synthetic: n too small");
  if (f < class_count + 1) {
    throw std::invalid_argument("generate_synthetic: need f >= class_count + 1");
  }
  switch (kind) {
    case SyntheticKind::homophilous: return generate_homophilous(n, f, class_count, seed);
    case SyntheticKind::heterophilous_high_order:
      return generate_heterophilous(n, f, class_count, seed);
  }
  throw std::invalid_argument("generate_synthetic: unknown kind");
}

namespace {

Dataset generate_leaky_once(int n, int class_count, double target_dup_rate,
                            std::uint64_t seed, std::uint64_t salt) {
  Rng rng(seed, 0x1eaf + salt);
  const int pairs = static_cast<int>(std::floor(target_dup_rate * n / 2.0 + 0.5));
  const int base_n = n - pairs;
  if (base_n < class_count * 8) throw std::invalid_argument("generate_leaky: n too small");

  // Community-labeled base graph on the first base_n nodes; features carry no
  // signal, so only structure predicts the label. Kept sparse so that enough
  // pairwise non-adjacent originals exist below.
  Labels y;
  y.class_count = class_count;
  y.values.assign(n, 0);
  std::vector<std::vector<int>> by_class(class_count);
  for (int i = 0; i < base_n; ++i) {
    y.values[i] = i % class_count;
    by_class[y.values[i]].push_back(i);
  }
  std::set<std::pair<int, int>> edge_set;
  const int target_edges = 2 * base_n;
  int attempts = 0;
  while (static_cast<int>(edge_set.size()) < target_edges && attempts < 60 * target_edges) {
    ++attempts;
    const int u = static_cast<int>(rng.next_below(base_n));
    int v;
    if (rng.next_double() < 0.85) {
      const auto& mates = by_class[y.values[u]];
      v = mates[rng.next_below(mates.size())];
    } else {
      v = static_cast<int>(rng.next_below(base_n));
    }
    if (u != v) edge_set.emplace(std::min(u, v), std::max(u, v));
  }
  Graph base = build_graph({edge_set.begin(), edge_set.end()}, n);

  // Originals must be pairwise non-adjacent: cloning v's neighborhood adds the
  // clone to every row in N(v), which must not touch another original's row.
  std::vector<int> order(base_n);
  for (int i = 0; i < base_n; ++i) order[i] = i;
  rng.shuffle(order);
  std::vector<int> originals;
  std::vector<char> blocked(base_n, 0);
  for (int cand : order) {
    if (blocked[cand] || base.degree(cand) == 0) continue;
    originals.push_back(cand);
    blocked[cand] = 1;
    for (int nb : base.neighbors(cand)) blocked[nb] = 1;
    if (static_cast<int>(originals.size()) == pairs) break;
  }
  if (static_cast<int>(originals.size()) < pairs) {
    throw std::runtime_error("generate_leaky: could not place enough duplicates");
  }
  for (int i = 0; i < pairs; ++i) {
    const int clone = base_n + i;
    y.values[clone] = y.values[originals[i]];
    for (int nb : base.neighbors(originals[i])) {
      edge_set.emplace(std::min(clone, nb), std::max(clone, nb));
    }
  }

  Dataset ds;
  ds.name = "synthetic-leaky";
  ds.graph = build_graph({edge_set.begin(), edge_set.end()}, n);
  ds.features = NodeFeatures(n, 32);
  for (double& x : ds.features.v) x = rng.next_gaussian();
  ds.labels = std::move(y);
  return ds;
}

} // namespace

Dataset generate_leaky(int n, int class_count, double target_dup_rate, std::uint64_t seed) {
  if (target_dup_rate <= 0.0 || target_dup_rate >= 0.9) {
    throw std::invalid_argument("generate_leaky: rate must be in (0, 0.9)");
  }
  // Accidental row collisions in the random base graph shift the realized
  // rate; retry with a salt until the measured rate matches the request.
  for (std::uint64_t salt = 0; salt < 32; ++salt) {
    Dataset ds = generate_leaky_once(n, class_count, target_dup_rate, seed, salt);
    const auto rates = detect_leakage(ds.graph, ds.labels);
    if (std::abs(rates.adjacency_label_rate - target_dup_rate) <= 0.005) return ds;
  }
  throw std::runtime_error("generate_leaky: rate did not converge to target");
}

WebFixtureSpec web_fixture_preset(const std::string& name) {
  WebFixtureSpec spec;
  spec.name = name;
  spec.class_weights = {0.50, 0.17, 0.15, 0.10, 0.08};
  spec.feature_dim = 128;
  spec.signature_words = 12;
  spec.p_signature = 0.55;
  spec.p_background = 0.02;
  if (name == "texas") {
    spec.node_count = 183;
    spec.target_edges = 574;
    spec.edge_homophily = 0.09;
    spec.label_noise = 0.12;
    spec.seed = 7;
  } else if (name == "cornell") {
    spec.node_count = 183;
    spec.target_edges = 557;
    spec.edge_homophily = 0.12;
    spec.label_noise = 0.17;
    spec.seed = 11;
  } else if (name == "wisconsin") {
    spec.node_count = 251;
    spec.target_edges = 916;
    spec.edge_homophily = 0.19;
    spec.label_noise = 0.08;
    spec.seed = 13;
  } else {
    throw std::invalid_argument("unknown web fixture preset: " + name);
  }
  return spec;
}

Dataset generate_web_fixture(const WebFixtureSpec& spec) {
  Rng rng(spec.seed, 0x3eb);
  const int n = spec.node_count;
  const int C = spec.class_count;
  Dataset ds;
  ds.name = spec.name;

  Labels y;
  y.class_count = C;
  y.values.resize(n);
  {
    std::vector<int> counts(C, 0);
    int assigned = 0;
    for (int c = 0; c < C; ++c) {
      counts[c] = static_cast<int>(std::floor(spec.class_weights[c] * n));
      assigned += counts[c];
    }
    for (int c = 0; assigned < n; c = (c + 1) % C) {
      ++counts[c];
      ++assigned;
    }
    int next = 0;
    for (int c = 0; c < C; ++c) {
      for (int i = 0; i < counts[c]; ++i) y.values[next++] = c;
    }
    rng.shuffle(y.values);
  }
  std::vector<std::vector<int>> by_class(C);
  for (int i = 0; i < n; ++i) by_class[y.values[i]].push_back(i);

  std::set<std::pair<int, int>> edge_set;
  int attempts = 0;
  while (static_cast<int>(edge_set.size()) < spec.target_edges &&
         attempts < 200 * spec.target_edges) {
    ++attempts;
    const int u = static_cast<int>(rng.next_below(n));
    int v;
    if (rng.next_double() < spec.edge_homophily) {
      const auto& mates = by_class[y.values[u]];
      v = mates[rng.next_below(mates.size())];
    } else {
      do {
        v = static_cast<int>(rng.next_below(n));
      } while (y.values[v] == y.values[u]);
    }
    if (u != v) edge_set.emplace(std::min(u, v), std::max(u, v));
  }
  ds.graph = build_graph({edge_set.begin(), edge_set.end()}, n);

  // Bag-of-words features follow the clean class; the label noise applied
  // afterwards is irreducible and caps the reachable accuracy.
  const std::vector<int> clean = y.values;
  for (int i = 0; i < n; ++i) {
    if (rng.next_double() < spec.label_noise) {
      y.values[i] = static_cast<int>(rng.next_below(C));
    }
  }
  // Disjoint signature word blocks per class at the front of the vocabulary.
  ds.features = NodeFeatures(n, spec.feature_dim);
  for (int i = 0; i < n; ++i) {
    double* row = ds.features.row(i);
    const int sig_begin = clean[i] * spec.signature_words;
    for (int wdx = 0; wdx < spec.feature_dim; ++wdx) {
      const bool in_signature =
          wdx >= sig_begin && wdx < sig_begin + spec.signature_words;
      const double p = in_signature ? spec.p_signature : spec.p_background;
      row[wdx] = rng.next_double() < p ? 1.0 : 0.0;
    }
  }
  ds.labels = std::move(y);
  return ds;
}

} // namespace pathmlp
