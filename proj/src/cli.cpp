#include "pathmlp/cli.hpp"

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include <CLI11.hpp>

#include "pathmlp/leakage.hpp"
#include "pathmlp/model.hpp"
#include "pathmlp/sampler.hpp"

namespace pathmlp {

namespace {

std::string format_g17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string format_f6(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6f", x);
  return buf;
}

// A manifest argument is either a path or, with PATHMLP_DATA_DIR set, a bare
// fixture name resolved inside that directory.
std::string resolve_manifest_path(const std::string& arg) {
  if (std::filesystem::exists(arg)) return arg;
  if (const char* dir = std::getenv("PATHMLP_DATA_DIR")) {
    const auto candidate = std::filesystem::path(dir) / arg / "dataset.manifest";
    if (std::filesystem::exists(candidate)) return candidate.string();
  }
  throw std::runtime_error("dataset manifest not found: " + arg);
}

Dataset load_from_manifest_path(const std::string& path) {
  return load_dataset(read_manifest(resolve_manifest_path(path)));
}

SplitProfile resolve_profile(const std::string& requested, const DatasetManifest& m) {
  if (!requested.empty()) return split_profile_from_name(requested);
  if (m.split_profile) return *m.split_profile;
  return SplitProfile::p48_32_20;
}

} // namespace

TrainArtifacts run_train_command(const TrainCommandOptions& opts) {
  const DatasetManifest dm = read_manifest(resolve_manifest_path(opts.dataset_manifest));
  const Dataset ds = load_dataset(dm);
  const SplitProfile profile = resolve_profile(opts.split_profile, dm);

  SamplerConfig scfg;
  scfg.d = opts.d;
  scfg.n_paths = opts.n_paths;
  scfg.strategy = strategy_from_name(opts.strategy);
  scfg.augment_before_sampling = opts.augment_before_sampling;

  ModelConfig mcfg;
  mcfg.f_prime = opts.f_prime;
  mcfg.f_h = opts.f_h;
  mcfg.class_count = ds.labels.class_count;
  mcfg.d = opts.d;
  mcfg.n_paths = opts.n_paths;
  mcfg.beta = opts.beta;
  mcfg.dropout = opts.dropout;
  mcfg.variant = variant_from_name(opts.variant);
  mcfg.m = opts.m;

  TrainConfig tcfg;
  tcfg.lr = opts.lr;
  tcfg.weight_decay = opts.weight_decay;
  tcfg.max_epochs = opts.max_epochs;
  tcfg.patience = opts.patience;
  tcfg.runs = opts.runs;
  tcfg.metric = opts.metric.empty() ? Metric::accuracy : metric_from_name(opts.metric);

  TrainArtifacts art;
  art.protocol = run_protocol(ds.graph, ds.features, ds.labels, scfg, mcfg, tcfg, profile,
                              opts.seed, {}, opts.threads);

  std::filesystem::create_directories(opts.out_dir);
  const auto base = std::filesystem::path(opts.out_dir);
  art.checkpoint_path = (base / "checkpoint.txt").string();
  art.run_manifest_path = (base / "run.manifest").string();
  art.metrics_csv_path = (base / "metrics.csv").string();

  save_checkpoint(art.checkpoint_path, art.protocol.best_params);

  {
    std::ofstream csv(art.metrics_csv_path);
    if (!csv) throw std::runtime_error("cannot write " + art.metrics_csv_path);
    csv << "dataset,variant,config_id,run,metric\n";
    const std::string id = config_id(mcfg, tcfg);
    for (const auto& r : art.protocol.runs) {
      csv << ds.name << ',' << opts.variant << ',' << id << ',' << r.run << ','
          << format_f6(r.test) << '\n';
    }
  }
  {
    std::ofstream mf(art.run_manifest_path);
    if (!mf) throw std::runtime_error("cannot write " + art.run_manifest_path);
    mf << "dataset=" << ds.name << '\n'
       << "dataset_manifest=" << opts.dataset_manifest << '\n'
       << "dataset_hash=" << dataset_hash(ds) << '\n'
       << "split_profile=" << split_profile_name(profile) << '\n'
       << "metric=" << metric_name(tcfg.metric) << '\n'
       << "strategy=" << opts.strategy << '\n'
       << "augment_before_sampling=" << (opts.augment_before_sampling ? 1 : 0) << '\n'
       << "variant=" << opts.variant << '\n'
       << "f_prime=" << mcfg.f_prime << '\n'
       << "f_h=" << mcfg.f_h << '\n'
       << "d=" << mcfg.d << '\n'
       << "n_paths=" << mcfg.n_paths << '\n'
       << "beta=" << format_g17(mcfg.beta) << '\n'
       << "dropout=" << format_g17(mcfg.dropout) << '\n'
       << "m=" << mcfg.m << '\n'
       << "lr=" << format_g17(tcfg.lr) << '\n'
       << "weight_decay=" << format_g17(tcfg.weight_decay) << '\n'
       << "max_epochs=" << tcfg.max_epochs << '\n'
       << "patience=" << tcfg.patience << '\n'
       << "runs=" << tcfg.runs << '\n'
       << "base_seed=" << opts.seed << '\n'
       << "best_run=" << art.protocol.best_run << '\n'
       << "best_run_seed=" << opts.seed + static_cast<std::uint64_t>(art.protocol.best_run)
       << '\n'
       << "best_val=" << format_g17(art.protocol.best_run_val) << '\n'
       << "best_test=" << format_g17(art.protocol.best_run_test) << '\n'
       << "config_id=" << config_id(mcfg, tcfg) << '\n'
       << "eps_weight_decay=excluded\n"
       << "threads=" << opts.threads << '\n';
  }
  return art;
}

EvalResult run_eval_command(const std::string& run_manifest_path,
                            const std::string& checkpoint_path,
                            const std::string& dataset_manifest_path) {
  std::map<std::string, std::string> kv;
  {
    std::ifstream in(run_manifest_path);
    if (!in) throw std::runtime_error("cannot open run manifest: " + run_manifest_path);
    std::string line;
    while (std::getline(in, line)) {
      const auto eq = line.find('=');
      if (eq == std::string::npos) continue;
      kv[line.substr(0, eq)] = line.substr(eq + 1);
    }
  }
  const std::string dataset_manifest = resolve_manifest_path(
      dataset_manifest_path.empty() ? kv.at("dataset_manifest") : dataset_manifest_path);
  const Dataset ds = load_dataset(read_manifest(dataset_manifest));
  const SplitProfile profile = split_profile_from_name(kv.at("split_profile"));

  SamplerConfig scfg;
  scfg.d = std::stoi(kv.at("d"));
  scfg.n_paths = std::stoi(kv.at("n_paths"));
  scfg.strategy = strategy_from_name(kv.at("strategy"));
  scfg.augment_before_sampling = kv.at("augment_before_sampling") == "1";
  scfg.seed = std::stoull(kv.at("best_run_seed"));

  ModelConfig mcfg;
  mcfg.f_prime = std::stoi(kv.at("f_prime"));
  mcfg.f_h = std::stoi(kv.at("f_h"));
  mcfg.class_count = ds.labels.class_count;
  mcfg.d = scfg.d;
  mcfg.n_paths = scfg.n_paths;
  mcfg.beta = std::stod(kv.at("beta"));
  mcfg.dropout = std::stod(kv.at("dropout"));
  mcfg.variant = variant_from_name(kv.at("variant"));
  mcfg.m = std::stoi(kv.at("m"));

  NodeFeatures x_model = ds.features;
  NodeFeatures x_sampling = ds.features;
  if (mcfg.variant == Variant::plus) {
    const auto affinity = renormalized_affinity(ds.graph);
    x_model = augment_features(ds.features, affinity, mcfg.m);
    if (scfg.augment_before_sampling) x_sampling = x_model;
  }
  mcfg.in_dim = x_model.cols;

  const PathSet paths = sample_all_paths(ds.graph, x_sampling, scfg);
  const SplitSpec split = make_random_split(ds.graph.node_count, profile, scfg.seed);

  PathMLPParams params = init_params(mcfg, ds.graph.node_count, /*seed=*/0);
  load_checkpoint(checkpoint_path, params);

  const Metric metric = metric_from_name(kv.at("metric"));
  EvalResult res;
  res.val = evaluate_model(ds.graph, x_model, ds.labels, paths, params, mcfg, split.val, metric);
  res.test =
      evaluate_model(ds.graph, x_model, ds.labels, paths, params, mcfg, split.test, metric);
  res.recorded_val = std::stod(kv.at("best_val"));
  res.recorded_test = std::stod(kv.at("best_test"));
  return res;
}

namespace {

std::vector<double> parse_double_list(const std::string& csv) {
  std::vector<double> out;
  std::istringstream ss(csv);
  std::string tok;
  while (std::getline(ss, tok, ',')) out.push_back(std::stod(tok));
  return out;
}

std::vector<int> parse_int_list(const std::string& csv) {
  std::vector<int> out;
  std::istringstream ss(csv);
  std::string tok;
  while (std::getline(ss, tok, ',')) out.push_back(std::stoi(tok));
  return out;
}

int cmd_homophily(const std::string& manifest, int max_order) {
  const Dataset ds = load_from_manifest_path(manifest);
  std::cout << "dataset " << ds.name << '\n';
  std::cout << "edge_homophily " << format_f6(edge_homophily(ds.graph, ds.labels)) << '\n';
  std::cout << "adjusted_homophily " << format_f6(adjusted_homophily(ds.graph, ds.labels))
            << '\n';
  for (int h = 1; h <= max_order; ++h) {
    std::string cell = "n/a";
    try {
      cell = format_f6(order_homophily(ds.graph, ds.labels, h));
    } catch (const std::domain_error&) {
    }
    std::cout << "order_homophily_h" << h << ' ' << cell << '\n';
  }
  return 0;
}

int cmd_sample(const std::string& manifest, const std::string& strategy, int d, int n,
               std::uint64_t seed, const std::string& out, int threads, bool augment,
               int m) {
  const Dataset ds = load_from_manifest_path(manifest);
  SamplerConfig scfg;
  scfg.d = d;
  scfg.n_paths = n;
  scfg.strategy = strategy_from_name(strategy);
  scfg.seed = seed;
  scfg.augment_before_sampling = augment;
  NodeFeatures x = ds.features;
  if (augment) {
    x = augment_features(ds.features, renormalized_affinity(ds.graph), m);
  }
  const PathSet ps = sample_all_paths(ds.graph, x, scfg, threads);
  save_path_cache(out, ps, scfg);
  std::cout << "wrote " << out << " (" << ds.graph.node_count * n << " paths)\n";
  return 0;
}

int cmd_bench_samplers(const std::string& manifest, const TrainCommandOptions& base) {
  const DatasetManifest dm = read_manifest(manifest);
  const Dataset ds = load_dataset(dm);
  const SplitProfile profile = resolve_profile(base.split_profile, dm);
  std::cout << "strategy,mean,std,avg_path_order\n";
  for (const auto& strategy : {"similarity", "bfs", "dfs"}) {
    SamplerConfig scfg;
    scfg.d = base.d;
    scfg.n_paths = base.n_paths;
    scfg.strategy = strategy_from_name(strategy);
    scfg.seed = base.seed;

    ModelConfig mcfg;
    mcfg.f_prime = base.f_prime;
    mcfg.f_h = base.f_h;
    mcfg.class_count = ds.labels.class_count;
    mcfg.d = base.d;
    mcfg.n_paths = base.n_paths;
    mcfg.beta = base.beta;
    mcfg.dropout = base.dropout;
    mcfg.variant = variant_from_name(base.variant);
    mcfg.m = base.m;

    TrainConfig tcfg;
    tcfg.lr = base.lr;
    tcfg.weight_decay = base.weight_decay;
    tcfg.max_epochs = base.max_epochs;
    tcfg.patience = base.patience;
    tcfg.runs = base.runs;
    tcfg.metric = base.metric.empty() ? Metric::accuracy : metric_from_name(base.metric);

    const auto pr = run_protocol(ds.graph, ds.features, ds.labels, scfg, mcfg, tcfg,
                                 profile, base.seed);

    const PathSet ps = sample_all_paths(ds.graph, ds.features, scfg);
    std::vector<Path> flat;
    flat.reserve(static_cast<std::size_t>(ps.node_count) * ps.n_paths);
    for (int v = 0; v < ps.node_count; ++v) {
      for (int k = 0; k < ps.n_paths; ++k) {
        const auto sp = ps.path(v, k);
        flat.push_back(Path{{sp.begin(), sp.end()}});
      }
    }
    std::cout << strategy << ',' << format_f6(pr.mean) << ',' << format_f6(pr.stddev) << ','
              << format_f6(average_path_order(flat, ds.graph)) << '\n';
  }
  return 0;
}

int cmd_leakage(const std::string& manifest, int runs, int max_epochs, int patience,
                std::uint64_t seed, const std::string& metric) {
  const DatasetManifest dm = read_manifest(manifest);
  const Dataset ds = load_dataset(dm);
  TrainConfig tcfg;
  tcfg.runs = runs;
  tcfg.max_epochs = max_epochs;
  tcfg.patience = patience;
  tcfg.metric = metric.empty() ? Metric::accuracy : metric_from_name(metric);
  const SplitProfile profile = resolve_profile("", dm);
  const auto report = verify_leakage(ds, profile, tcfg, seed);
  std::cout << "# mlp_plus_adj = two-layer MLP with a linear adjacency-row embedding "
               "summed after layer 1\n";
  std::cout << "adjacency_duplication_rate " << format_f6(report.rates.adjacency_rate)
            << '\n';
  std::cout << "adjacency_label_duplication_rate "
            << format_f6(report.rates.adjacency_label_rate) << '\n';
  std::cout << "mlp_" << metric_name(report.metric) << ' ' << format_f6(report.mlp_score)
            << '\n';
  std::cout << "mlp_plus_adj_" << metric_name(report.metric) << ' '
            << format_f6(report.mlp_adj_score) << '\n';
  std::cout << "relative_gain " << format_f6(report.relative_gain) << '\n';
  return 0;
}

int cmd_gen(const std::string& kind, const std::string& preset, int n, int f, int classes,
            double dup_rate, std::uint64_t seed, bool seed_given,
            const std::string& out_dir) {
  Dataset ds;
  if (kind == "homophilous") {
    ds = generate_synthetic(SyntheticKind::homophilous, n, f, classes, seed);
  } else if (kind == "heterophilous") {
    ds = generate_synthetic(SyntheticKind::heterophilous_high_order, n, f, classes, seed);
  } else if (kind == "leaky") {
    ds = generate_leaky(n, classes, dup_rate, seed);
  } else if (kind == "weblike") {
    auto spec = web_fixture_preset(preset);
    if (seed_given) spec.seed = seed;  // presets pin their own seed otherwise
    ds = generate_web_fixture(spec);
  } else {
    throw std::invalid_argument("unknown kind: " + kind);
  }
  save_dataset(ds, out_dir);
  std::cout << "dataset " << ds.name << " nodes " << ds.graph.node_count << " edges "
            << ds.graph.edge_count() << '\n';
  std::cout << "edge_homophily " << format_f6(edge_homophily(ds.graph, ds.labels)) << '\n';
  for (int h = 1; h <= 4; ++h) {
    std::string cell = "n/a";
    try {
      cell = format_f6(order_homophily(ds.graph, ds.labels, h));
    } catch (const std::domain_error&) {
    }
    std::cout << "order_homophily_h" << h << ' ' << cell << '\n';
  }
  std::cout << "wrote " << out_dir << '\n';
  return 0;
}

int cmd_grid(const std::string& manifest, const TrainCommandOptions& base,
             const std::string& out_csv, int max_cells, const std::string& lrs,
             const std::string& wds, const std::string& dropouts, const std::string& fps,
             const std::string& ds_list, const std::string& ns, const std::string& betas) {
  const DatasetManifest dm = read_manifest(manifest);
  const Dataset data = load_dataset(dm);
  const SplitProfile profile = resolve_profile(base.split_profile, dm);

  GridSpec grid;
  if (!lrs.empty()) grid.lr = parse_double_list(lrs);
  if (!wds.empty()) grid.weight_decay = parse_double_list(wds);
  if (!dropouts.empty()) grid.dropout = parse_double_list(dropouts);
  if (!fps.empty()) grid.f_prime = parse_int_list(fps);
  if (!ds_list.empty()) grid.d = parse_int_list(ds_list);
  if (!ns.empty()) grid.n_paths = parse_int_list(ns);
  if (!betas.empty()) grid.beta = parse_double_list(betas);

  SamplerConfig scfg;
  scfg.strategy = strategy_from_name(base.strategy);
  scfg.augment_before_sampling = base.augment_before_sampling;

  ModelConfig mcfg;
  mcfg.f_h = base.f_h;
  mcfg.class_count = data.labels.class_count;
  mcfg.variant = variant_from_name(base.variant);
  mcfg.m = base.m;

  TrainConfig tcfg;
  tcfg.max_epochs = base.max_epochs;
  tcfg.patience = base.patience;
  tcfg.runs = base.runs;
  tcfg.metric = base.metric.empty() ? Metric::accuracy : metric_from_name(base.metric);

  const auto cells = grid_search(data.graph, data.features, data.labels, scfg, mcfg, tcfg,
                                 profile, grid, base.seed, max_cells);
  std::ofstream csv(out_csv);
  if (!csv) throw std::runtime_error("cannot write " + out_csv);
  csv << "dataset,variant,config_id,mean_val,std_val\n";
  for (const auto& cell : cells) {
    csv << data.name << ',' << base.variant << ',' << cell.id << ','
        << format_f6(cell.mean_val) << ',' << format_f6(cell.std_val) << '\n';
  }
  std::cout << "best " << cells.front().id << " mean_val " << format_f6(cells.front().mean_val)
            << " (wrote " << out_csv << ")\n";
  return 0;
}

} // namespace

int cli_main(int argc, char** argv) {
  CLI::App app{"PathMLP: similarity-guided path sampling and MLP path encoding for "
               "node classification on attributed graphs"};
  app.require_subcommand(1);

  // homophily
  std::string manifest;
  int max_order = 4;
  auto* homophily = app.add_subcommand("homophily", "edge/adjusted/order homophily table");
  homophily->add_option("--manifest", manifest, "dataset manifest")->required();
  homophily->add_option("--max-order", max_order, "largest order to report");

  // sample
  std::string sample_manifest, sample_strategy = "similarity", sample_out = "paths.txt";
  int sample_d = 3, sample_n = 8, sample_threads = 1, sample_m = 1;
  std::uint64_t sample_seed = 0;
  bool sample_augment = false;
  auto* sample = app.add_subcommand("sample", "emit a path cache");
  sample->add_option("--manifest", sample_manifest)->required();
  sample->add_option("--strategy", sample_strategy, "similarity|bfs|dfs");
  sample->add_option("--d", sample_d);
  sample->add_option("--n", sample_n);
  sample->add_option("--seed", sample_seed);
  sample->add_option("--out", sample_out);
  sample->add_option("--threads", sample_threads);
  sample->add_flag("--augment-before-sampling", sample_augment);
  sample->add_option("--m", sample_m);

  // train
  TrainCommandOptions topt;
  std::string train_config_file;
  auto* train = app.add_subcommand("train", "multi-run training; emits checkpoint, "
                                            "run manifest and metrics CSV");
  train->add_option("--manifest", topt.dataset_manifest)->required();
  train->add_option("--out-dir", topt.out_dir)->required();
  train->add_option("--config", train_config_file,
                    "model config file (key=value); explicit flags win");
  train->add_option("--variant", topt.variant, "base|plus");
  train->add_option("--strategy", topt.strategy, "similarity|bfs|dfs");
  train->add_option("--metric", topt.metric, "accuracy|auc");
  train->add_option("--split", topt.split_profile, "48/32/20 or 50/25/25");
  train->add_option("--f-prime", topt.f_prime);
  train->add_option("--f-h", topt.f_h);
  train->add_option("--d", topt.d);
  train->add_option("--n-paths", topt.n_paths);
  train->add_option("--beta", topt.beta);
  train->add_option("--dropout", topt.dropout);
  train->add_option("--m", topt.m);
  train->add_flag("--augment-before-sampling", topt.augment_before_sampling);
  train->add_option("--lr", topt.lr);
  train->add_option("--weight-decay", topt.weight_decay);
  train->add_option("--max-epochs", topt.max_epochs);
  train->add_option("--patience", topt.patience);
  train->add_option("--runs", topt.runs);
  train->add_option("--seed", topt.seed);
  train->add_option("--threads", topt.threads);

  // eval
  std::string eval_run_manifest, eval_checkpoint, eval_dataset;
  auto* eval = app.add_subcommand("eval", "re-score a checkpoint from its run manifest");
  eval->add_option("--run-manifest", eval_run_manifest)->required();
  eval->add_option("--checkpoint", eval_checkpoint)->required();
  eval->add_option("--manifest", eval_dataset, "dataset manifest override");

  // bench-samplers
  TrainCommandOptions bopt;
  std::string bench_manifest;
  auto* bench = app.add_subcommand("bench-samplers",
                                   "similarity vs BFS vs DFS accuracy and path order");
  bench->add_option("--manifest", bench_manifest)->required();
  bench->add_option("--d", bopt.d);
  bench->add_option("--n-paths", bopt.n_paths);
  bench->add_option("--f-prime", bopt.f_prime);
  bench->add_option("--beta", bopt.beta);
  bench->add_option("--dropout", bopt.dropout);
  bench->add_option("--lr", bopt.lr);
  bench->add_option("--weight-decay", bopt.weight_decay);
  bench->add_option("--runs", bopt.runs);
  bench->add_option("--max-epochs", bopt.max_epochs);
  bench->add_option("--patience", bopt.patience);
  bench->add_option("--seed", bopt.seed);
  bench->add_option("--metric", bopt.metric);

  // leakage
  std::string leak_manifest, leak_metric;
  int leak_runs = 5, leak_epochs = 300, leak_patience = 60;
  std::uint64_t leak_seed = 0;
  auto* leakage = app.add_subcommand("leakage", "duplication rates plus MLP vs MLP+adjacency");
  leakage->add_option("--manifest", leak_manifest)->required();
  leakage->add_option("--runs", leak_runs);
  leakage->add_option("--max-epochs", leak_epochs);
  leakage->add_option("--patience", leak_patience);
  leakage->add_option("--seed", leak_seed);
  leakage->add_option("--metric", leak_metric);

  // gen
  std::string gen_kind = "heterophilous", gen_preset = "texas", gen_out = "out";
  int gen_n = 500, gen_f = 32, gen_classes = 2;
  double gen_dup = 0.25;
  std::uint64_t gen_seed = 1;
  auto* gen = app.add_subcommand("gen", "generate a synthetic dataset");
  gen->add_option("--kind", gen_kind, "homophilous|heterophilous|leaky|weblike");
  gen->add_option("--preset", gen_preset, "weblike preset: texas|cornell|wisconsin");
  gen->add_option("--n", gen_n);
  gen->add_option("--f", gen_f);
  gen->add_option("--classes", gen_classes);
  gen->add_option("--dup-rate", gen_dup);
  gen->add_option("--seed", gen_seed);
  gen->add_option("--out-dir", gen_out)->required();

  // grid
  TrainCommandOptions gopt;
  std::string grid_manifest, grid_out = "grid.csv";
  std::string grid_lrs, grid_wds, grid_dropouts, grid_fps, grid_ds, grid_ns, grid_betas;
  int grid_max_cells = 0;
  auto* grid = app.add_subcommand("grid", "hyper-parameter sweep by mean validation metric");
  grid->add_option("--manifest", grid_manifest)->required();
  grid->add_option("--out", grid_out);
  grid->add_option("--max-cells", grid_max_cells);
  grid->add_option("--variant", gopt.variant);
  grid->add_option("--strategy", gopt.strategy);
  grid->add_option("--metric", gopt.metric);
  grid->add_option("--runs", gopt.runs);
  grid->add_option("--max-epochs", gopt.max_epochs);
  grid->add_option("--patience", gopt.patience);
  grid->add_option("--seed", gopt.seed);
  grid->add_option("--lrs", grid_lrs, "comma list override");
  grid->add_option("--wds", grid_wds, "comma list override");
  grid->add_option("--dropouts", grid_dropouts, "comma list override");
  grid->add_option("--f-primes", grid_fps, "comma list override");
  grid->add_option("--ds", grid_ds, "comma list override");
  grid->add_option("--ns", grid_ns, "comma list override");
  grid->add_option("--betas", grid_betas, "comma list override");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (homophily->parsed()) return cmd_homophily(manifest, max_order);
    if (sample->parsed()) {
      return cmd_sample(sample_manifest, sample_strategy, sample_d, sample_n, sample_seed,
                        sample_out, sample_threads, sample_augment, sample_m);
    }
    if (train->parsed()) {
      if (!train_config_file.empty()) {
        const auto cf = read_model_config(train_config_file);
        const auto unset = [&](const char* flag) { return train->count(flag) == 0; };
        if (cf.has("f_prime") && unset("--f-prime")) topt.f_prime = cf.config.f_prime;
        if (cf.has("f_h") && unset("--f-h")) topt.f_h = cf.config.f_h;
        if (cf.has("d") && unset("--d")) topt.d = cf.config.d;
        if (cf.has("n_paths") && unset("--n-paths")) topt.n_paths = cf.config.n_paths;
        if (cf.has("beta") && unset("--beta")) topt.beta = cf.config.beta;
        if (cf.has("dropout") && unset("--dropout")) topt.dropout = cf.config.dropout;
        if (cf.has("variant") && unset("--variant")) {
          topt.variant = variant_name(cf.config.variant);
        }
        if (cf.has("m") && unset("--m")) topt.m = cf.config.m;
        if (cf.has("seed") && unset("--seed")) topt.seed = cf.seed;
      }
      const auto art = run_train_command(topt);
      std::cout << "mean_test " << format_f6(art.protocol.mean) << " std "
                << format_f6(art.protocol.stddev) << '\n';
      std::cout << "wrote " << art.checkpoint_path << ' ' << art.run_manifest_path << ' '
                << art.metrics_csv_path << '\n';
      return 0;
    }
    if (eval->parsed()) {
      const auto res = run_eval_command(eval_run_manifest, eval_checkpoint, eval_dataset);
      std::cout << "val " << format_g17(res.val) << " (recorded "
                << format_g17(res.recorded_val) << ")\n";
      std::cout << "test " << format_g17(res.test) << " (recorded "
                << format_g17(res.recorded_test) << ")\n";
      return res.val == res.recorded_val ? 0 : 2;
    }
    if (bench->parsed()) return cmd_bench_samplers(bench_manifest, bopt);
    if (leakage->parsed()) {
      return cmd_leakage(leak_manifest, leak_runs, leak_epochs, leak_patience, leak_seed,
                         leak_metric);
    }
    if (gen->parsed()) {
      return cmd_gen(gen_kind, gen_preset, gen_n, gen_f, gen_classes, gen_dup, gen_seed,
                     gen->count("--seed") > 0, gen_out);
    }
    if (grid->parsed()) {
      return cmd_grid(grid_manifest, gopt, grid_out, grid_max_cells, grid_lrs, grid_wds,
                      grid_dropouts, grid_fps, grid_ds, grid_ns, grid_betas);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}

} // namespace pathmlp
