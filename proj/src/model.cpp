#include "pathmlp/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace pathmlp {

std::string variant_name(Variant v) { return v == Variant::base ? "base" : "plus"; }

Variant variant_from_name(const std::string& name) {
  if (name == "base") return Variant::base;
  if (name == "plus") return Variant::plus;
  throw std::invalid_argument("unknown variant: " + name);
}

std::vector<Parameter*> PathMLPParams::all() {
  return {&w1, &b1, &w2, &b2, &w3, &b3, &w4, &b4, &w5, &b5, &eps_logits};
}

std::vector<const Parameter*> PathMLPParams::all() const {
  return {&w1, &b1, &w2, &b2, &w3, &b3, &w4, &b4, &w5, &b5, &eps_logits};
}

namespace {

Parameter uniform_init(const std::string& name, int rows, int cols, Rng& rng) {
  Matrix m(rows, cols);
  const double bound = 1.0 / std::sqrt(static_cast<double>(rows));
  for (double& v : m.v) v = (2.0 * rng.next_double() - 1.0) * bound;
  return Parameter(name, std::move(m));
}

Parameter zero_init(const std::string& name, int rows, int cols) {
  return Parameter(name, Matrix(rows, cols, 0.0));
}

} // namespace

PathMLPParams init_params(const ModelConfig& cfg, int node_count, std::uint64_t seed) {
  if (cfg.in_dim <= 0 || cfg.class_count < 2) {
    throw std::invalid_argument("init_params: in_dim and class_count must be set");
  }
  Rng rng(seed, 0x11a7);
  PathMLPParams p;
  p.w1 = uniform_init("w1", cfg.in_dim, cfg.f_prime, rng);
  p.b1 = zero_init("b1", 1, cfg.f_prime);
  p.w2 = uniform_init("w2", (cfg.d + 1) * cfg.f_prime, cfg.f_h, rng);
  p.b2 = zero_init("b2", 1, cfg.f_h);
  p.w3 = uniform_init("w3", cfg.in_dim, cfg.f_h, rng);
  p.b3 = zero_init("b3", 1, cfg.f_h);
  p.w4 = uniform_init("w4", node_count, cfg.f_h, rng);
  p.b4 = zero_init("b4", 1, cfg.f_h);
  p.w5 = uniform_init("w5", cfg.f_h, cfg.class_count, rng);
  p.b5 = zero_init("b5", 1, cfg.class_count);
  p.eps_logits = zero_init("eps_logits", node_count, cfg.n_paths);
  p.eps_logits.decay_exempt = true;
  return p;
}

NodeFeatures augment_features(const NodeFeatures& x, const AffinityOperator& op, int m) {
  const NodeFeatures smooth = apply_affinity(op, x, m);
  NodeFeatures out(x.rows, 2 * x.cols);
  for (int i = 0; i < x.rows; ++i) {
    double* dst = out.row(i);
    const double* raw = x.row(i);
    const double* sm = smooth.row(i);
    for (int c = 0; c < x.cols; ++c) dst[c] = raw[c];
    for (int c = 0; c < x.cols; ++c) dst[x.cols + c] = sm[c];
  }
  return out;
}

ForwardCache pathmlp_forward(Tape& tape, const Graph& g, const NodeFeatures& x,
                             const PathSet& paths, const std::vector<int>& batch,
                             const Labels* labels, PathMLPParams& params,
                             const ModelConfig& cfg, bool training, Rng* dropout_rng) {
  if (x.cols != cfg.in_dim) {
    throw std::invalid_argument("pathmlp_forward: feature dim != config in_dim");
  }
  if (paths.path_len != cfg.d + 1 || paths.n_paths != cfg.n_paths) {
    throw std::invalid_argument("pathmlp_forward: path set shape != config");
  }
  Rng fallback_rng(0);
  Rng& drop_rng = dropout_rng ? *dropout_rng : fallback_rng;
  const bool drop = training && cfg.dropout > 0.0;

  // Register every parameter so backward always produces a full gradient set.
  const auto v_w1 = tape.param(params.w1);
  const auto v_b1 = tape.param(params.b1);
  const auto v_w2 = tape.param(params.w2);
  const auto v_b2 = tape.param(params.b2);
  const auto v_w3 = tape.param(params.w3);
  const auto v_b3 = tape.param(params.b3);
  const auto v_w4 = tape.param(params.w4);
  const auto v_b4 = tape.param(params.b4);
  const auto v_w5 = tape.param(params.w5);
  const auto v_b5 = tape.param(params.b5);
  const auto v_eps = tape.param(params.eps_logits);

  const auto v_x = tape.input(x);

  ForwardCache fc;

  // Per-node encodings, shared by every path occurrence of a node.
  auto enc = tape.relu(tape.linear(v_x, v_w1, v_b1));
  if (drop) enc = tape.dropout(enc, cfg.dropout, true, drop_rng);
  fc.node_encodings = enc;

  // Concatenate the encodings along each path.
  const int B = static_cast<int>(batch.size());
  std::vector<Tape::Var> position_slices;
  position_slices.reserve(cfg.d + 1);
  for (int j = 0; j <= cfg.d; ++j) {
    std::vector<int> idx(static_cast<std::size_t>(B) * cfg.n_paths);
    for (int i = 0; i < B; ++i) {
      for (int k = 0; k < cfg.n_paths; ++k) {
        idx[static_cast<std::size_t>(i) * cfg.n_paths + k] = paths.path(batch[i], k)[j];
      }
    }
    position_slices.push_back(tape.gather_rows(enc, std::move(idx)));
  }
  fc.path_concat = tape.concat_cols(position_slices);

  auto path_enc = tape.relu(tape.linear(fc.path_concat, v_w2, v_b2));
  if (drop) path_enc = tape.dropout(path_enc, cfg.dropout, true, drop_rng);
  fc.path_encodings = path_enc;

  // Adaptive aggregation of the N path encodings per node.
  fc.path_weights = tape.softmax_rows(tape.gather_rows(v_eps, batch));
  fc.path_message = tape.weighted_sum_groups(fc.path_weights, path_enc);

  // State update from the node's own features.
  auto self_enc = tape.relu(tape.linear(tape.gather_rows(v_x, batch), v_w3, v_b3));
  if (drop) self_enc = tape.dropout(self_enc, cfg.dropout, true, drop_rng);
  fc.self_encoding = self_enc;
  fc.state = tape.add(self_enc, fc.path_message);

  // Topology branch; skipped entirely at beta == 0 so the result cannot
  // depend on w4 and w4 receives no gradient.
  if (cfg.beta > 0.0) {
    auto topo = tape.relu(
        tape.add_row_broadcast(tape.neighbor_row_sum(v_w4, g, batch), v_b4));
    if (drop) topo = tape.dropout(topo, cfg.dropout, true, drop_rng);
    fc.topo_encoding = topo;
    fc.fused = tape.affine_mix(topo, fc.state, cfg.beta);
  } else {
    fc.fused = fc.state;
  }

  fc.probs = tape.softmax_rows(tape.linear(fc.fused, v_w5, v_b5));

  if (labels) {
    std::vector<int> batch_labels(batch.size());
    for (std::size_t i = 0; i < batch.size(); ++i) {
      batch_labels[i] = labels->values[batch[i]];
    }
    fc.loss = tape.cross_entropy_mean(fc.probs, std::move(batch_labels));
  }
  return fc;
}

namespace {

std::string format_g17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

} // namespace

void save_checkpoint(const std::string& path, const PathMLPParams& params) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open checkpoint for writing: " + path);
  out << "pathmlp-ckpt v1\n";
  for (const Parameter* p : params.all()) {
    out << p->name << ' ' << p->value.rows << ' ' << p->value.cols << '\n';
    for (int i = 0; i < p->value.rows; ++i) {
      const double* row = p->value.row(i);
      for (int c = 0; c < p->value.cols; ++c) {
        if (c) out << ' ';
        out << format_g17(row[c]);
      }
      out << '\n';
    }
  }
}

bool ModelConfigFile::has(const std::string& key) const {
  return std::find(keys_present.begin(), keys_present.end(), key) != keys_present.end();
}

ModelConfigFile read_model_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open model config: " + path);
  ModelConfigFile out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::runtime_error(path + ":" + std::to_string(line_no) + ": expected key=value");
    }
    const std::string key = line.substr(0, eq);
    const std::string val = line.substr(eq + 1);
    if (key == "f_prime") out.config.f_prime = std::stoi(val);
    else if (key == "f_h") out.config.f_h = std::stoi(val);
    else if (key == "d") out.config.d = std::stoi(val);
    else if (key == "n_paths") out.config.n_paths = std::stoi(val);
    else if (key == "beta") out.config.beta = std::stod(val);
    else if (key == "dropout") out.config.dropout = std::stod(val);
    else if (key == "variant") out.config.variant = variant_from_name(val);
    else if (key == "m") out.config.m = std::stoi(val);
    else if (key == "seed") out.seed = std::stoull(val);
    else {
      throw std::runtime_error(path + ":" + std::to_string(line_no) +
                               ": unknown model config key: " + key);
    }
    out.keys_present.push_back(key);
  }
  return out;
}

void write_model_config(const std::string& path, const ModelConfig& cfg, std::uint64_t seed) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open model config for writing: " + path);
  out << "f_prime=" << cfg.f_prime << '\n'
      << "f_h=" << cfg.f_h << '\n'
      << "d=" << cfg.d << '\n'
      << "n_paths=" << cfg.n_paths << '\n'
      << "beta=" << format_g17(cfg.beta) << '\n'
      << "dropout=" << format_g17(cfg.dropout) << '\n'
      << "variant=" << variant_name(cfg.variant) << '\n'
      << "m=" << cfg.m << '\n'
      << "seed=" << seed << '\n';
}

void load_checkpoint(const std::string& path, PathMLPParams& params) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open checkpoint: " + path);
  std::string header;
  std::getline(in, header);
  if (header != "pathmlp-ckpt v1") {
    throw std::runtime_error("bad checkpoint header in " + path);
  }
  std::map<std::string, Parameter*> by_name;
  for (Parameter* p : params.all()) by_name[p->name] = p;
  std::string name;
  int rows, cols;
  while (in >> name >> rows >> cols) {
    auto it = by_name.find(name);
    if (it == by_name.end()) throw std::runtime_error("unknown parameter in checkpoint: " + name);
    Parameter* p = it->second;
    if (p->value.rows != rows || p->value.cols != cols) {
      throw std::runtime_error("checkpoint shape mismatch for " + name);
    }
    for (double& v : p->value.v) {
      if (!(in >> v)) throw std::runtime_error("truncated checkpoint: " + path);
    }
  }
}

} // namespace pathmlp
