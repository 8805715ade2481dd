#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include "diffpath/covariance.hpp"
#include "diffpath/datagen.hpp"
#include "diffpath/evaluation.hpp"
#include "diffpath/io.hpp"
#include "diffpath/path_io.hpp"
#include "diffpath/path_solver.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace diffpath;

namespace {

enum ExitCode { kOk = 0, kBadInput = 2, kNoStableLambda = 3, kNumerical = 4 };

struct RunConfig {
  std::string command;
  std::string manifest;
  std::string out = ".";
  Index c = 100;
  double mu = 1e-8;
  double lambda_min = 0.0;
  std::optional<double> lambda;
  std::string grid;
  Index stars_repeats = 10;
  double stars_fraction = 0.8;
  double stars_threshold = 0.001;
  std::uint64_t seed = 0;
  unsigned threads = 1;
  // simulate / bench
  Index d = 50;
  Index m = 200;
  Index datasets = 4;
  Index k = 20;
  Index attach_m = 1;
  double gamma_margin = 0.05;
  Index seeds = 3;
  std::string methods = "path,apgd5,apgd";
};

json to_json(const RunConfig& c) {
  json j{{"command", c.command}, {"out", c.out}, {"seed", c.seed}, {"threads", c.threads}};
  if (c.command == "estimate") {
    j.update({{"manifest", c.manifest},
              {"c", c.c},
              {"mu", c.mu},
              {"lambda_min", c.lambda_min},
              {"grid", c.grid},
              {"stars_repeats", c.stars_repeats},
              {"stars_fraction", c.stars_fraction},
              {"stars_threshold", c.stars_threshold}});
    j["lambda"] = c.lambda ? json(*c.lambda) : json(nullptr);
  } else if (c.command == "simulate") {
    j.update({{"d", c.d}, {"m", c.m}, {"datasets", c.datasets}, {"k", c.k}, {"attach_m", c.attach_m},
              {"gamma_margin", c.gamma_margin}});
  } else if (c.command == "bench") {
    j.update({{"d", c.d}, {"m", c.m}, {"k", c.k}, {"c", c.c}, {"grid", c.grid}, {"seeds", c.seeds},
              {"methods", c.methods}});
  }
  return j;
}

template <typename T>
void take(const json& j, const char* key, T& field) {
  if (j.contains(key) && !j[key].is_null()) field = j[key].get<T>();
}

RunConfig from_json(const json& j) {
  RunConfig c;
  take(j, "command", c.command);
  take(j, "manifest", c.manifest);
  take(j, "out", c.out);
  take(j, "c", c.c);
  take(j, "mu", c.mu);
  take(j, "lambda_min", c.lambda_min);
  if (j.contains("lambda") && !j["lambda"].is_null()) c.lambda = j["lambda"].get<double>();
  take(j, "grid", c.grid);
  take(j, "stars_repeats", c.stars_repeats);
  take(j, "stars_fraction", c.stars_fraction);
  take(j, "stars_threshold", c.stars_threshold);
  take(j, "seed", c.seed);
  take(j, "threads", c.threads);
  take(j, "d", c.d);
  take(j, "m", c.m);
  take(j, "datasets", c.datasets);
  take(j, "k", c.k);
  take(j, "attach_m", c.attach_m);
  take(j, "gamma_margin", c.gamma_margin);
  take(j, "seeds", c.seeds);
  take(j, "methods", c.methods);
  return c;
}

// --config is read before the real parse; explicit flags override it.
std::optional<std::string> find_config_flag(int argc, char** argv) {
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--config" && i + 1 < argc) return std::string(argv[i + 1]);
    if (arg.rfind("--config=", 0) == 0) return arg.substr(9);
  }
  return std::nullopt;
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

void write_echo(const RunConfig& config) { write_file_atomic(fs::path(config.out) / "config.json", dump(to_json(config))); }

std::vector<std::string> split_commas(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, ',');) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

int cmd_estimate(RunConfig& config) {
  if (config.c < 1) throw std::invalid_argument("--c must be >= 1");
  if (config.lambda && !(*config.lambda >= 0.0)) throw std::invalid_argument("--lambda must be >= 0");
  if (config.stars_repeats < 1) throw std::invalid_argument("--stars-repeats must be >= 1");
  if (!(config.stars_threshold >= 0.0)) throw std::invalid_argument("--stars-threshold must be >= 0");
  const Manifest manifest = read_manifest(config.manifest);
  auto [group_a, group_b] = load_groups(manifest);
  fs::create_directories(config.out);
  const fs::path out(config.out);

  const auto est_a = estimate_correlation(group_a, config.mu);
  const auto est_b = estimate_correlation(group_b, config.mu);
  const auto& names = group_a.datasets().front().column_names;
  write_file_atomic(out / "sigma.csv", matrix_csv(est_a.correlation.matrix(), names));
  write_file_atomic(out / "sigma_prime.csv", matrix_csv(est_b.correlation.matrix(), names));

  const auto path = compute_path(est_a.correlation, est_b.correlation, config.c, config.lambda_min);
  write_file_atomic(out / "path.json", dump(path_to_json(path)));

  json summary{{"knots", path.knots.size()}, {"termination_reason", to_string(path.termination)}};
  Eigen::SparseMatrix<double> delta;
  if (config.lambda) {
    if (*config.lambda < path.last_lambda()) {
      throw std::invalid_argument("--lambda " + std::to_string(*config.lambda) + " is below the end of the path (" +
                                  std::to_string(path.last_lambda()) + ", " + to_string(path.termination) +
                                  "); raise --c or --lambda");
    }
    delta = interpolate(path, *config.lambda);
    summary["lambda"] = *config.lambda;
    summary["selection"] = "user";
  } else {
    StarsOptions opts;
    opts.repeats = config.stars_repeats;
    opts.fraction = config.stars_fraction;
    opts.threshold = config.stars_threshold;
    opts.c = config.c;
    opts.mu = config.mu;
    opts.seed = config.seed;
    opts.threads = config.threads;
    if (!config.grid.empty()) opts.lambda_grid = make_grid(parse_grid(config.grid));
    try {
      const auto stars = stars_select(group_a, group_b, opts);
      write_file_atomic(out / "stability.csv", stability_csv(stars.profile));
      delta = stars.delta_hat;
      summary["lambda"] = stars.chosen_lambda;
      summary["selection"] = "stars";
    } catch (const NoStableLambda& e) {
      write_file_atomic(out / "stability.csv", stability_csv(e.profile()));
      write_echo(config);
      throw;
    }
  }
  write_file_atomic(out / "edges.tsv", edge_list_tsv(delta, names));
  summary["edges"] = upper_support(delta).size();
  write_file_atomic(out / "summary.json", dump(summary));
  write_echo(config);
  return kOk;
}

int cmd_simulate(RunConfig& config) {
  if (config.datasets < 1) throw std::invalid_argument("--datasets must be >= 1");
  if (config.k < 0 || config.k % 2 != 0) throw std::invalid_argument("--k must be a non-negative even number");
  SimulationConfig sim;
  sim.d = config.d;
  sim.attach_m = config.attach_m;
  sim.k_delete = config.k / 2;
  sim.k_insert = config.k / 2;
  sim.gamma_margin = config.gamma_margin;
  sim.sizes_a.assign(static_cast<std::size_t>(config.datasets), config.m);
  sim.sizes_b = sim.sizes_a;
  const SyntheticInstance inst = simulate(sim, config.seed);

  fs::create_directories(config.out);
  const fs::path out(config.out);
  Manifest manifest;
  const auto emit = [&](const DatasetCollection& coll, const std::string& group) {
    for (const auto& ds : coll.datasets()) {
      const std::string file = ds.source_id + ".csv";
      write_file_atomic(out / file, matrix_csv(ds.samples, ds.column_names));
      manifest.datasets.push_back({file, ds.source_id, group});
    }
  };
  emit(inst.group_a, "a");
  emit(inst.group_b, "b");
  write_file_atomic(out / "manifest.json", dump(manifest_json(manifest)));

  json support = json::array();
  for (const auto& [i, j] : inst.precision.true_delta_support) support.push_back({i, j});
  const auto spectrum = [](const Eigen::MatrixXd& m) {
    const Eigen::VectorXd ev = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(m, Eigen::EigenvaluesOnly).eigenvalues();
    return std::vector<double>(ev.data(), ev.data() + ev.size());
  };
  const auto names = [](const TransformSet& ts) {
    std::vector<std::string> out;
    for (const auto t : ts) out.emplace_back(to_string(t));
    return out;
  };
  json transforms_a = json::array(), transforms_b = json::array();
  for (const auto& ts : inst.transforms_a) transforms_a.push_back(names(ts));
  for (const auto& ts : inst.transforms_b) transforms_b.push_back(names(ts));
  json truth{{"true_delta_support", support},
             {"k", config.k},
             {"gamma", inst.precision.gamma},
             {"omega_spectra", {{"omega", spectrum(inst.precision.omega)},
                                {"omega_prime", spectrum(inst.precision.omega_prime)}}},
             {"seeds", {{"master", config.seed}}},
             {"transforms", {{"a", transforms_a}, {"b", transforms_b}}},
             {"parameters", to_json(config)}};
  write_file_atomic(out / "truth.json", dump(truth));
  write_echo(config);
  return kOk;
}

int cmd_bench(RunConfig& config) {
  BenchSpec spec;
  spec.d = config.d;
  spec.m = config.m;
  spec.n_seeds = config.seeds;
  spec.c = config.c;
  spec.k_changes = config.k;
  spec.seed = config.seed;
  spec.methods = split_commas(config.methods);
  if (spec.methods.empty()) throw std::invalid_argument("--methods is empty");
  for (const auto& m : spec.methods) {
    if (!is_known_method(m)) throw std::invalid_argument("unknown method '" + m + "'");
  }
  spec.lambda_grid = make_grid(config.grid.empty() ? GridSpec{} : parse_grid(config.grid));
  const BenchResult result = timing_benchmark(spec);

  fs::create_directories(config.out);
  const fs::path out(config.out);
  write_file_atomic(out / "timing.csv", timing_csv(result.timings));
  std::map<std::string, std::pair<double, double>> area;  // method -> (sum, count)
  for (std::size_t r = 0; r < result.timings.size(); ++r) {
    const auto& row = result.timings[r];
    const std::string name = "pr_" + row.method + "_" + std::to_string(row.seed) + ".csv";
    write_file_atomic(out / name, pr_curve_csv(result.curves[r]));
    auto& [sum, count] = area[row.method];
    sum += pr_area(result.curves[r]);
    count += 1.0;
  }
  json summary = json::object();
  for (const auto& [method, acc] : area) summary["mean_pr_area"][method] = acc.first / acc.second;
  write_file_atomic(out / "summary.json", dump(summary));
  write_echo(config);
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  RunConfig config;
  if (const auto path = find_config_flag(argc, argv)) {
    std::ifstream in(*path);
    if (!in) {
      std::cerr << "error: cannot open config '" << *path << "'\n";
      return kBadInput;
    }
    try {
      config = from_json(json::parse(in));
    } catch (const std::exception& e) {
      std::cerr << "error: bad config '" << *path << "': " << e.what() << "\n";
      return kBadInput;
    }
  }

  CLI::App app{"Differential network estimation along the D-trace lasso path"};
  app.require_subcommand(1);
  std::string config_path;
  app.add_option("--config", config_path, "Replay a config.json echo; explicit flags override it");

  const auto add_common = [&](CLI::App* sub) {
    sub->add_option("--out", config.out, "Output directory");
    sub->add_option("--seed", config.seed, "Master seed");
    sub->add_option("--threads", config.threads, "Worker threads")->envname("DIFFPATH_THREADS")->check(CLI::PositiveNumber);
    sub->add_option("--config", config_path, "Replay a config.json echo; explicit flags override it");
  };

  auto* estimate = app.add_subcommand("estimate", "Estimate correlations, the path and a selected network");
  add_common(estimate);
  estimate->add_option("--manifest", config.manifest, "JSON manifest of dataset CSVs in two groups");
  estimate->add_option("--c", config.c, "Active-set budget (vec entries)");
  estimate->add_option("--mu", config.mu, "PSD clip parameter");
  estimate->add_option("--lambda-min", config.lambda_min, "Stop the path at this lambda");
  estimate->add_option("--lambda", config.lambda, "Report the network at this lambda instead of the StARS choice");
  estimate->add_option("--grid", config.grid, "StARS grid a:b:n:log|lin");
  estimate->add_option("--stars-repeats", config.stars_repeats, "Subsampling repeats");
  estimate->add_option("--stars-fraction", config.stars_fraction, "Subsample fraction");
  estimate->add_option("--stars-threshold", config.stars_threshold, "Instability threshold");

  auto* sim = app.add_subcommand("simulate", "Write a synthetic two-group benchmark");
  add_common(sim);
  sim->add_option("--d", config.d, "Variables");
  sim->add_option("--m", config.m, "Samples per dataset");
  sim->add_option("--datasets", config.datasets, "Datasets per group");
  sim->add_option("--k", config.k, "Edge changes (half deleted, half inserted)");
  sim->add_option("--attach-m", config.attach_m, "Edges per new node in preferential attachment");
  sim->add_option("--gamma-margin", config.gamma_margin, "Diagonal margin");

  auto* bench = app.add_subcommand("bench", "Time the path against proximal-gradient sweeps");
  add_common(bench);
  bench->add_option("--d", config.d, "Variables");
  bench->add_option("--m", config.m, "Samples per group");
  bench->add_option("--k", config.k, "Edge changes");
  bench->add_option("--c", config.c, "Active-set budget (vec entries)");
  bench->add_option("--grid", config.grid, "Lambda grid a:b:n:log|lin for the proximal methods");
  bench->add_option("--seeds", config.seeds, "Number of simulated instances");
  bench->add_option("--methods", config.methods, "Comma-separated subset of path,apgd5,apgd");

  if (!find_config_flag(argc, argv)) config.m = 0;  // subcommand-specific default, filled below
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kBadInput;
  }

  try {
    if (estimate->parsed()) {
      config.command = "estimate";
      if (config.manifest.empty()) throw InputError("--manifest is required");
      return cmd_estimate(config);
    }
    if (sim->parsed()) {
      config.command = "simulate";
      if (config.m == 0) config.m = 200;
      return cmd_simulate(config);
    }
    config.command = "bench";
    if (config.m == 0) config.m = 1000;
    return cmd_bench(config);
  } catch (const NoStableLambda& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kNoStableLambda;
  } catch (const NotPSD& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kNumerical;
  } catch (const SingularActiveSet& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kBadInput;
  }
}
