// Command-line front end: `run` executes one experiment, `sweep` repeats it
// over a seed list (optionally in parallel processes-worth of threads), and
// `compare` aggregates finished runs into the statistics report.

#include <cstdint>
#include <filesystem>
#include <future>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "coevogan/harness.hpp"

namespace {

using namespace coevogan;

struct CliOptions {
  RunConfig cfg;
  std::string variant = "mustangs";
  std::string grid = "3x3";
  std::string mode = "sequential";
  std::string dataset = "ring";
  std::string loss_menu;   // e.g. "minmax,leastsquare"
  std::string loss_probs;  // e.g. "0.5,0.5"
};

std::vector<std::string> split_list(const std::string& csv) {
  std::vector<std::string> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

void parse_grid_dims(const std::string& text, int& rows, int& cols) {
  const auto x = text.find('x');
  if (x == std::string::npos) throw CLI::ValidationError("--grid", "expected MxN, e.g. 3x3");
  rows = std::stoi(text.substr(0, x));
  cols = std::stoi(text.substr(x + 1));
}

RunConfig resolve(const CliOptions& opts) {
  RunConfig cfg = opts.cfg;
  cfg.variant = parse_variant(opts.variant);
  parse_grid_dims(opts.grid, cfg.grid_rows, cfg.grid_cols);
  cfg.mode = parse_run_mode(opts.mode);
  if (opts.dataset == "ring")
    cfg.dataset = DatasetKind::Ring;
  else if (opts.dataset == "grid")
    cfg.dataset = DatasetKind::Grid;
  else
    throw CLI::ValidationError("--data", "expected ring or grid");
  cfg.loss_menu.clear();
  for (const std::string& name : split_list(opts.loss_menu)) {
    if (name == "minmax")
      cfg.loss_menu.push_back(LossKind::Minmax);
    else if (name == "leastsquare")
      cfg.loss_menu.push_back(LossKind::LeastSquare);
    else if (name == "heuristic")
      cfg.loss_menu.push_back(LossKind::Heuristic);
    else
      throw CLI::ValidationError("--loss_menu", "unknown loss kind: " + name);
  }
  cfg.loss_probs.clear();
  for (const std::string& p : split_list(opts.loss_probs)) cfg.loss_probs.push_back(std::stod(p));
  return apply_variant_defaults(cfg);
}

void add_run_options(CLI::App* app, CliOptions& opts) {
  app->add_option("--variant", opts.variant,
                  "mustangs | lip-bce | lip-mse | lip-heu | e-gan | gan-bce");
  app->add_option("--grid", opts.grid, "grid dimensions MxN (grid variants only)");
  app->add_option("--epochs", opts.cfg.epochs, "training epochs");
  app->add_option("--seed", opts.cfg.seed, "master seed");
  app->add_option("--mode", opts.mode, "sequential | async");
  app->add_option("--out", opts.cfg.out_dir, "output directory for run.csv/summary.txt");
  app->add_option("--batch_size", opts.cfg.batch_size, "training batch size");
  app->add_option("--latent_dim", opts.cfg.latent_dim, "latent dimension");
  app->add_option("--hidden_layers", opts.cfg.hidden_layers, "hidden layer count");
  app->add_option("--hidden_size", opts.cfg.hidden_size, "neurons per hidden layer");
  app->add_option("--learning_rate", opts.cfg.initial_learning_rate, "initial Adam learning rate");
  app->add_option("--steps_per_mutation", opts.cfg.steps_per_mutation,
                  "gradient batches per mutation event");
  app->add_option("--tournament_size", opts.cfg.tournament_size, "selection tournament size");
  app->add_option("--hyperparam_mutation_probability", opts.cfg.hyperparam_mutation_probability,
                  "probability of perturbing a learning rate");
  app->add_option("--hyperparam_mutation_scale", opts.cfg.hyperparam_mutation_scale,
                  "std of the learning-rate perturbation");
  app->add_option("--mixture_mutation_scale", opts.cfg.mixture_mutation_scale,
                  "std of the (1+1)-ES weight perturbation");
  app->add_option("--metric_samples", opts.cfg.metric_samples,
                  "samples per mixture evaluation");
  app->add_option("--reference_samples", opts.cfg.reference_samples,
                  "real samples behind the Frechet reference");
  app->add_option("--data", opts.dataset, "target distribution: ring | grid");
  app->add_option("--data_modes", opts.cfg.data_modes, "ring mode count");
  app->add_option("--data_radius", opts.cfg.data_radius, "ring radius");
  app->add_option("--data_grid_side", opts.cfg.data_grid_side, "lattice side length");
  app->add_option("--data_extent", opts.cfg.data_extent, "lattice half-width");
  app->add_option("--data_std", opts.cfg.data_std, "per-mode Gaussian std");
  app->add_option("--loss_menu", opts.loss_menu,
                  "override loss menu, e.g. minmax,leastsquare,heuristic");
  app->add_option("--loss_probs", opts.loss_probs, "selection probabilities for --loss_menu");
  app->set_config("--config", "", "flat key = value configuration file");
}

int do_run(const CliOptions& opts) {
  const RunConfig cfg = resolve(opts);
  const RunLog log = run_experiment(cfg);
  std::cout << to_string(cfg.variant) << " seed " << cfg.seed << ": best_fd "
            << format_double(log.best_fd) << " (epoch " << log.best_epoch << "), final_fd "
            << format_double(log.final_fd) << ", coverage " << log.final_coverage << ", tvd "
            << format_double(log.final_tvd) << ", wall " << format_double(log.wall_time_s)
            << "s\n";
  return log.failed ? 1 : 0;
}

int do_sweep(const CliOptions& opts, const std::string& seeds_csv, int jobs) {
  std::vector<std::uint64_t> seeds;
  for (const std::string& s : split_list(seeds_csv)) seeds.push_back(std::stoull(s));
  if (seeds.empty()) {
    std::cerr << "sweep: no seeds given\n";
    return 2;
  }
  const RunConfig base = resolve(opts);
  if (base.out_dir.empty()) {
    std::cerr << "sweep: --out is required\n";
    return 2;
  }

  std::vector<RunConfig> configs;
  for (std::uint64_t seed : seeds) {
    RunConfig cfg = base;
    cfg.seed = seed;
    cfg.out_dir = (std::filesystem::path(base.out_dir) /
                   (std::string(to_string(cfg.variant)) + "_seed" + std::to_string(seed)))
                      .string();
    configs.push_back(std::move(cfg));
  }

  std::atomic<std::size_t> next{0};
  std::atomic<int> failures{0};
  auto worker = [&] {
    for (std::size_t i = next.fetch_add(1); i < configs.size(); i = next.fetch_add(1)) {
      try {
        const RunLog log = run_experiment(configs[i]);
        std::ostringstream line;
        line << to_string(configs[i].variant) << " seed " << configs[i].seed << ": best_fd "
             << format_double(log.best_fd) << ", coverage " << log.final_coverage << "\n";
        std::cout << line.str();
      } catch (const std::exception& e) {
        std::cerr << "seed " << configs[i].seed << " failed: " << e.what() << "\n";
        ++failures;
      }
    }
  };
  jobs = std::max(1, jobs);
  std::vector<std::thread> pool;
  for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  return failures.load() == 0 ? 0 : 1;
}

int do_compare(const std::vector<std::string>& inputs, double alpha) {
  const auto scores = collect_run_scores(inputs);
  if (scores.empty()) {
    std::cerr << "compare: no summary.txt files found\n";
    return 2;
  }
  std::cout << format_comparison(compare_runs(scores, alpha));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spatially distributed coevolutionary GAN training on 2-D benchmarks"};
  app.require_subcommand(1);

  CliOptions run_opts;
  CLI::App* run = app.add_subcommand("run", "execute one training run");
  add_run_options(run, run_opts);

  CliOptions sweep_opts;
  std::string seeds = "1,2,3,4,5";
  int jobs = 1;
  CLI::App* sweep = app.add_subcommand("sweep", "repeat run over a seed list");
  add_run_options(sweep, sweep_opts);
  sweep->add_option("--seeds", seeds, "comma-separated seed list");
  sweep->add_option("--jobs", jobs, "concurrent runs");

  std::vector<std::string> inputs;
  double alpha = 0.01;
  CLI::App* compare = app.add_subcommand("compare", "aggregate finished runs");
  compare->add_option("--inputs", inputs, "directories holding run outputs")->required();
  compare->add_option("--alpha", alpha, "significance level for the Holm-adjusted tests");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return do_run(run_opts);
    if (sweep->parsed()) return do_sweep(sweep_opts, seeds, jobs);
    if (compare->parsed()) return do_compare(inputs, alpha);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
