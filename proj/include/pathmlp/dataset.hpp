#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "pathmlp/graph.hpp"
#include "pathmlp/matrix.hpp"
#include "pathmlp/trainer.hpp"

namespace pathmlp {

// Text formats: edge file has one "u v" per line (0-based, '#' comments),
// the feature file starts with "rows cols" followed by one row per line,
// the label file has one integer per line.
struct DatasetManifest {
  std::string name;
  std::string edge_file;
  std::string feature_file;
  std::string label_file;
  int node_count = 0;
  int feature_dim = 0;
  int class_count = 0;
  std::optional<SplitProfile> split_profile;
};

struct Dataset {
  std::string name;
  Graph graph;
  NodeFeatures features;
  Labels labels;
};

DatasetManifest read_manifest(const std::string& path);
void write_manifest(const std::string& path, const DatasetManifest& m);

// Validates file contents against the declared counts; any malformed row,
// count mismatch or out-of-range value is reported with file and line.
Dataset load_dataset(const DatasetManifest& manifest);

// Convenience loader that takes the three files directly and infers counts.
Dataset load_dataset_files(const std::string& name, const std::string& edge_file,
                           const std::string& feature_file, const std::string& label_file,
                           int class_count);

// Writes edges.txt / features.txt / labels.txt / dataset.manifest into dir.
// Feature values are written with full precision so save/load round-trips.
DatasetManifest save_dataset(const Dataset& ds, const std::string& dir);

// FNV-1a over a canonical serialization of structure, features and labels.
std::uint64_t dataset_hash(const Dataset& ds);

struct DuplicationRates {
  double adjacency_rate = 0.0;        // nodes whose neighbor list duplicates another's
  double adjacency_label_rate = 0.0;  // same, with the label appended
};

// Exact-equality duplicate detection over canonical sorted neighbor lists;
// a node counts as duplicated when at least one other node has the identical
// vector.
DuplicationRates detect_leakage(const Graph& g, const Labels& y);

enum class SyntheticKind { homophilous, heterophilous_high_order };

// Deterministic desk-scale fixtures.
//
// homophilous: planted partition (90% intra-class edges) with Gaussian
// class-prototype features.
//
// heterophilous_high_order: same-class nodes are never adjacent. Regular
// nodes sit in a chain of class-alternating segments wired to the next
// segment; one high-feature-norm hub per segment links consecutive segments
// into a spine whose norms grow along the chain, so inner-product sampling
// drifts outward while every walk alternates classes. Distance-2 neighbors
// are therefore same-class, which is the high-order homophily the fixture
// exists to exhibit.
Dataset generate_synthetic(SyntheticKind kind, int n, int f, int class_count,
                           std::uint64_t seed);

// Structure-labeled graph with noise features and an exact fraction of nodes
// sharing identical (adjacency row, label) pairs spread across the graph.
Dataset generate_leaky(int n, int class_count, double target_dup_rate, std::uint64_t seed);

// Web-page-like stand-ins for the small heterophilous benchmarks: bag-of-words
// Bernoulli features, skewed class sizes, mostly cross-class wiring and a
// label-noise dial that sets the reachable accuracy ceiling.
struct WebFixtureSpec {
  std::string name;
  int node_count = 0;
  int target_edges = 0;      // undirected
  int class_count = 5;
  int feature_dim = 256;
  double edge_homophily = 0.1;
  double label_noise = 0.15;
  int signature_words = 8;
  double p_signature = 0.30;
  double p_background = 0.04;
  std::vector<double> class_weights;
  std::uint64_t seed = 0;
};

WebFixtureSpec web_fixture_preset(const std::string& name);
Dataset generate_web_fixture(const WebFixtureSpec& spec);

} // namespace pathmlp
