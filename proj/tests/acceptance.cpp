// Acceptance suite: executes every release criterion at its stated tolerance
// and prints one PASS/FAIL line per criterion. Exits nonzero if any fail.

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "coevogan/harness.hpp"
#include "oracles.hpp"

using namespace coevogan;
namespace fs = std::filesystem;

namespace {

struct Check {
  bool ok = true;
  std::ostringstream detail;

  void expect(bool condition, const std::string& what) {
    if (!condition) {
      ok = false;
      detail << (detail.str().empty() ? "" : "; ") << what;
    }
  }
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

double median_of(std::vector<double> v) { return quantile(std::move(v), 0.5); }

bool approx(double a, double b, double tol) { return std::abs(a - b) <= tol; }

// ---------------------------------------------------------------------------

Check analytic_loss_values() {
  Check c;
  const Eigen::VectorXd half = Eigen::VectorXd::Constant(16, 0.5);
  c.expect(approx(generator_loss(LossKind::Minmax, half), 0.5 * std::log(0.5), 1e-9),
           "minmax at D=0.5");
  c.expect(approx(generator_loss(LossKind::LeastSquare, half), 0.25, 1e-9),
           "leastsquare at D=0.5");
  c.expect(approx(generator_loss(LossKind::Heuristic, half), -0.5 * std::log(0.5), 1e-9),
           "heuristic at D=0.5");
  c.expect(approx(discriminator_loss(half, half), 2.0 * std::log(2.0), 1e-9), "BCE at D=0.5");

  Networks nets;
  nets.generator.layer_sizes = {2, 3, 2};
  nets.discriminator.layer_sizes = {2, 3, 1};
  nets.discriminator.output_activation = Activation::Sigmoid;
  Rng rng = make_rng(1);
  const ParamVector gen = init_params(nets.generator, rng);
  const ParamVector disc = ParamVector::Zero(param_count(nets.discriminator));
  const double value = gan_value(nets, gen, disc, Batch::Random(16, 2), Batch::Random(16, 2));
  c.expect(approx(value, -2.0 * std::log(2.0), 1e-9), "gan_value at D=0.5");
  return c;
}

Check gradient_correctness() {
  Check c;
  const auto start = std::chrono::steady_clock::now();
  Rng rng = make_rng(77);
  std::uniform_int_distribution<int> hidden(3, 8);
  std::uniform_int_distribution<int> latent(2, 6);
  std::uniform_int_distribution<int> rows(2, 16);
  for (int config = 0; config < 20; ++config) {
    Networks nets;
    nets.generator.layer_sizes = {latent(rng), hidden(rng), 2};
    nets.generator.output_activation = Activation::Tanh;
    nets.discriminator.layer_sizes = {2, hidden(rng), 1};
    nets.discriminator.output_activation = Activation::Sigmoid;
    const ParamVector gen = init_params(nets.generator, rng);
    const ParamVector disc = init_params(nets.discriminator, rng);
    const Batch latent_batch = Batch::Random(rows(rng), nets.generator.layer_sizes[0]);
    const Batch real_batch = Batch::Random(rows(rng), 2);

    for (LossKind kind : {LossKind::Minmax, LossKind::LeastSquare, LossKind::Heuristic}) {
      const ParamVector analytic = generator_grad(kind, nets, gen, disc, latent_batch);
      const auto loss = [&](const ParamVector& g) {
        const Batch fake = forward(nets.generator, g, latent_batch);
        return generator_loss(kind, forward(nets.discriminator, disc, fake).col(0));
      };
      const double err =
          oracles::max_relative_error(analytic, oracles::finite_difference_grad(loss, gen));
      c.expect(err <= 1e-4, std::string("generator ") + to_string(kind) + " grad error");
    }
    {
      const ParamVector analytic = discriminator_grad(nets, disc, gen, real_batch, latent_batch);
      const auto loss = [&](const ParamVector& d) {
        const Eigen::VectorXd on_real = forward(nets.discriminator, d, real_batch).col(0);
        const Eigen::VectorXd on_fake =
            forward(nets.discriminator, d, forward(nets.generator, gen, latent_batch)).col(0);
        return discriminator_loss(on_real, on_fake);
      };
      const double err =
          oracles::max_relative_error(analytic, oracles::finite_difference_grad(loss, disc));
      c.expect(err <= 1e-4, "discriminator grad error");
    }
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  c.detail << "20 configs x 4 losses in " << format_double(secs) << "s";
  c.expect(secs < 10.0, "runtime exceeded 10 s");
  return c;
}

Check frechet_exactness() {
  Check c;
  GaussianSummary a, b;
  a.covariance = Eigen::Matrix2d::Identity();
  b.covariance = Eigen::Matrix2d::Identity();
  b.mean << 3.0, 4.0;
  c.expect(approx(frechet_distance(a, b), 25.0, 1e-9), "mean shift != 25");
  GaussianSummary wide = a;
  wide.covariance = 4.0 * Eigen::Matrix2d::Identity();
  c.expect(approx(frechet_distance(wide, a), 2.0, 1e-9), "4I vs I != 2");

  Rng rng = make_rng(99);
  std::normal_distribution<double> normal(0.0, 1.0);
  const auto draw = [&](const Eigen::Vector2d& mean, double std_dev, int n) {
    Batch out(n, 2);
    for (int i = 0; i < n; ++i)
      out.row(i) = (mean + std_dev * Eigen::Vector2d(normal(rng), normal(rng))).transpose();
    return out;
  };
  const double mc_shift = frechet_distance(draw({0, 0}, 1.0, 10000), draw({3, 4}, 1.0, 10000));
  c.expect(std::abs(mc_shift - 25.0) <= 0.05 * 25.0, "MC mean shift off by > 5%");
  const double mc_scale = frechet_distance(draw({0, 0}, 2.0, 10000), draw({0, 0}, 1.0, 10000));
  c.expect(std::abs(mc_scale - 2.0) <= 0.05 * 2.0, "MC covariance case off by > 5%");
  return c;
}

Check tvd_and_ranksum() {
  Check c;
  c.expect(approx(tvd({0.5, 0.5}, {0.5, 0.5}), 0.0, 1e-12), "tvd identical");
  c.expect(approx(tvd({1.0, 0.0}, {0.0, 1.0}), 1.0, 1e-12), "tvd disjoint");
  c.expect(approx(tvd({0.5, 0.5}, {0.25, 0.75}), 0.25, 1e-12), "tvd quarter");

  const std::vector<double> adjusted = holm_adjust({0.01, 0.04});
  c.expect(approx(adjusted[0], 0.02, 1e-12) && approx(adjusted[1], 0.04, 1e-12),
           "holm step-down example");

  c.expect(approx(mann_whitney_p({1, 2, 3}, {100, 101, 102}), 0.1, 1e-12),
           "separated 3v3 p != 0.1");
  Rng rng = make_rng(7);
  std::uniform_int_distribution<int> size(3, 8);
  std::uniform_int_distribution<int> value(0, 9);
  for (int trial = 0; trial < 40; ++trial) {
    std::vector<double> a(size(rng)), b(size(rng));
    for (double& x : a) x = value(rng);
    for (double& x : b) x = value(rng);
    c.expect(approx(mann_whitney_p(a, b), oracles::exact_mann_whitney_p(a, b), 1e-12),
             "exact enumeration mismatch");
  }
  return c;
}

Check topology() {
  Check c;
  const GridConfig g33{3, 3};
  c.expect(neighborhood_coords(g33, {0, 0}) ==
               std::vector<GridCoord>{{0, 0}, {2, 0}, {1, 0}, {0, 2}, {0, 1}},
           "3x3 corner neighborhood");
  c.expect(neighborhood_coords(GridConfig{1, 1}, {0, 0}) == std::vector<GridCoord>{{0, 0}},
           "1x1 neighborhood");
  c.expect(neighborhood_coords(GridConfig{2, 2}, {0, 0}) ==
               std::vector<GridCoord>{{0, 0}, {1, 0}, {0, 1}},
           "2x2 collapsed neighborhood");
  std::vector<int> appearances(9, 0);
  for (int idx = 0; idx < 9; ++idx)
    for (const GridCoord& n : neighborhood_coords(g33, {idx / 3, idx % 3}))
      ++appearances[n.row * 3 + n.col];
  for (int count : appearances) c.expect(count == 5, "cell not in exactly 5 neighborhoods");
  return c;
}

Check loss_selection_uniformity() {
  Check c;
  Networks nets;
  nets.generator.layer_sizes = {2, 3, 2};
  nets.discriminator.layer_sizes = {2, 3, 1};
  nets.discriminator.output_activation = Activation::Sigmoid;
  const BatchSource batches{make_ring(4, 0.8, 0.05), LatentSpec{2}, 4};
  Rng rng = make_rng(2025);
  Individual gen = make_individual(nets.generator, Role::Generator, 2e-4, rng);
  Individual disc = make_individual(nets.discriminator, Role::Discriminator, 2e-4, rng);
  MutationConfig cfg;
  cfg.steps_per_mutation = 1;
  CoevStats stats;
  for (int i = 0; i < 9000; ++i) mutate_generator(nets, gen, disc, cfg, batches, rng, stats);
  for (std::size_t k = 0; k < stats.loss_counts.size(); ++k) {
    c.expect(stats.loss_counts[k] >= 2700 && stats.loss_counts[k] <= 3300,
             std::string(to_string(static_cast<LossKind>(k))) + " count out of [2700,3300]");
    c.detail << (k ? "/" : "") << stats.loss_counts[k];
  }
  return c;
}

RunConfig small_mustangs(std::uint64_t seed) {
  RunConfig cfg;
  cfg.variant = MethodVariant::Mustangs;
  cfg.seed = seed;
  cfg.hidden_size = 8;
  cfg.batch_size = 50;
  cfg.metric_samples = 128;
  cfg.reference_samples = 512;
  cfg.data_radius = 0.8;
  return cfg;
}

CellUpdateContext context_for(const RunConfig& cfg, const Networks& nets,
                              const SyntheticDataset& ds) {
  Rng ref_rng = make_rng(derive_seed(cfg.seed, kReferenceStream));
  const GaussianSummary reference = fit_gaussian(sample_real(ds, cfg.reference_samples, ref_rng));
  CellUpdateContext ctx;
  ctx.nets = nets;
  ctx.mutation = make_mutation_config(cfg);
  ctx.batches = {ds, LatentSpec{cfg.latent_dim}, cfg.batch_size};
  ctx.mixture_es = {cfg.mixture_mutation_scale, cfg.metric_samples};
  ctx.metric = [reference](const Batch& b) { return frechet_distance(reference, fit_gaussian(b)); };
  return ctx;
}

Check simplex_invariant() {
  Check c;
  RunConfig cfg = apply_variant_defaults(small_mustangs(11));
  cfg.epochs = 50;
  const Networks nets = make_networks(cfg);
  const SyntheticDataset ds = make_dataset(cfg);
  const CellUpdateContext ctx = context_for(cfg, nets, ds);

  Grid grid = make_grid({3, 3}, nets, cfg.initial_learning_rate, cfg.seed);
  std::vector<double> last_score(9, std::numeric_limits<double>::infinity());
  std::atomic<long> observed{0};
  bool simplex_ok = true;
  bool monotone_ok = true;
  GridRunOptions opts;
  opts.epochs = cfg.epochs;
  opts.on_cell_epoch = [&](const Cell& cell, int) {
    ++observed;
    const auto& w = cell.mixture_weights;
    if (std::abs(w.sum() - 1.0) > 1e-9 || w.minCoeff() < 0.0 || w.maxCoeff() > 1.0)
      simplex_ok = false;
    const int idx = cell.coord.row * 3 + cell.coord.col;
    if (cell.mixture_score > last_score[idx] + 1e-12) monotone_ok = false;
    last_score[idx] = cell.mixture_score;
  };
  run_grid(grid, ctx, opts, cfg.seed);
  c.detail << observed.load() << " cell-epochs observed";
  c.expect(simplex_ok, "weights left the simplex");
  c.expect(monotone_ok, "accepted ES score increased");
  c.expect(observed.load() == 50 * 9, "missing observations");
  return c;
}

Check determinism() {
  Check c;
  const fs::path base = fs::temp_directory_path() / "coevogan_acceptance_det";
  fs::remove_all(base);
  RunConfig cfg = small_mustangs(21);
  cfg.epochs = 6;
  cfg.grid_rows = 2;
  cfg.grid_cols = 2;
  cfg.out_dir = (base / "a").string();
  run_experiment(cfg);
  cfg.out_dir = (base / "b").string();
  run_experiment(cfg);
  c.expect(!slurp(base / "a" / "run.csv").empty(), "empty run.csv");
  c.expect(slurp(base / "a" / "run.csv") == slurp(base / "b" / "run.csv"),
           "run.csv differs between executions");
  fs::remove_all(base);
  return c;
}

Check async_completion() {
  Check c;
  RunConfig cfg = apply_variant_defaults(small_mustangs(31));
  cfg.epochs = 5;
  cfg.mode = RunMode::Asynchronous;
  const Networks nets = make_networks(cfg);
  const SyntheticDataset ds = make_dataset(cfg);
  const CellUpdateContext ctx = context_for(cfg, nets, ds);

  Grid grid = make_grid({3, 3}, nets, cfg.initial_learning_rate, cfg.seed);
  GridRunOptions opts;
  opts.epochs = 5;
  opts.mode = RunMode::Asynchronous;
  const GridRunResult result = run_grid(grid, ctx, opts, cfg.seed);
  c.expect(result.failed_cells.empty(), "cells failed");
  c.expect(result.reports.size() == 5, "missing epoch reports");
  for (int i = 0; i < 9; ++i)
    c.expect(grid.epoch_counter(i) == 5, "epoch counter != 5 on cell " + std::to_string(i));

  // center-locality: updating one cell must leave every other cell's bits alone
  const auto checksum = [](const Cell& cell) {
    std::uint64_t h = 1469598103934665603ULL;
    const auto mix = [&h](const Eigen::VectorXd& v) {
      for (Eigen::Index i = 0; i < v.size(); ++i) {
        std::uint64_t bits;
        std::memcpy(&bits, &v[i], sizeof(bits));
        h ^= bits;
        h *= 1099511628211ULL;
      }
    };
    mix(cell.center_generator.params);
    mix(cell.center_discriminator.params);
    mix(cell.mixture_weights);
    return h;
  };
  std::vector<std::uint64_t> before;
  for (int i = 0; i < 9; ++i) before.push_back(checksum(grid.read_cell(i)));
  Rng rng = make_rng(123);
  cell_update(grid, {1, 1}, ctx, rng);
  for (int i = 0; i < 9; ++i) {
    if (i == 4) continue;
    c.expect(checksum(grid.read_cell(i)) == before[i],
             "foreign cell " + std::to_string(i) + " was modified");
  }
  return c;
}

RunConfig ordering_config(MethodVariant variant, std::uint64_t seed) {
  RunConfig cfg;
  cfg.variant = variant;
  cfg.seed = seed;
  cfg.epochs = 150;
  cfg.hidden_size = 16;
  cfg.data_radius = 0.8;
  return cfg;
}

Check ordering_experiment() {
  Check c;
  const auto start = std::chrono::steady_clock::now();
  const unsigned jobs = std::max(1u, std::thread::hardware_concurrency());

  const auto run_seeds = [&](MethodVariant variant, const std::vector<std::uint64_t>& seeds,
                             std::vector<double>& fd, std::vector<double>& coverage) {
    std::atomic<std::size_t> next{0};
    std::vector<double> fd_out(seeds.size());
    std::vector<double> cov_out(seeds.size());
    const auto worker = [&] {
      for (std::size_t i = next.fetch_add(1); i < seeds.size(); i = next.fetch_add(1)) {
        const RunLog log = run_experiment(ordering_config(variant, seeds[i]));
        fd_out[i] = log.best_fd;
        cov_out[i] = log.final_coverage;
      }
    };
    std::vector<std::thread> pool;
    for (unsigned j = 0; j < jobs; ++j) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    fd.insert(fd.end(), fd_out.begin(), fd_out.end());
    coverage.insert(coverage.end(), cov_out.begin(), cov_out.end());
  };

  const std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5};
  std::vector<double> mustangs_fd, mustangs_cov, bce_fd, bce_cov;
  run_seeds(MethodVariant::Mustangs, seeds, mustangs_fd, mustangs_cov);
  run_seeds(MethodVariant::GANBCE, seeds, bce_fd, bce_cov);

  bool fd_ordering = median_of(mustangs_fd) < median_of(bce_fd);
  if (!fd_ordering) {
    // stated escalation: raise the run count to 11 seeds before judging
    const std::vector<std::uint64_t> extra = {6, 7, 8, 9, 10, 11};
    run_seeds(MethodVariant::Mustangs, extra, mustangs_fd, mustangs_cov);
    run_seeds(MethodVariant::GANBCE, extra, bce_fd, bce_cov);
    fd_ordering = median_of(mustangs_fd) < median_of(bce_fd);
    c.detail << "escalated to 11 seeds; ";
  }

  const double mustangs_cov_median = median_of(mustangs_cov);
  const double bce_cov_median = median_of(bce_cov);
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  c.detail << "median best-FD mustangs " << format_double(median_of(mustangs_fd))
           << " vs gan-bce " << format_double(median_of(bce_fd)) << "; median coverage "
           << format_double(mustangs_cov_median) << " vs " << format_double(bce_cov_median)
           << "; " << format_double(secs) << "s";
  c.expect(fd_ordering, "mustangs median best-FD not lower than gan-bce");
  c.expect(mustangs_cov_median >= 7.0, "mustangs median coverage < 7 of 8");
  c.expect(bce_cov_median <= mustangs_cov_median, "gan-bce median coverage exceeds mustangs");
  return c;
}

Check degenerate_menu_equivalence() {
  Check c;
  const fs::path base = fs::temp_directory_path() / "coevogan_acceptance_menu";
  fs::remove_all(base);
  RunConfig mustangs = small_mustangs(41);
  mustangs.epochs = 4;
  mustangs.loss_menu = {LossKind::Minmax};
  mustangs.out_dir = (base / "mustangs").string();
  run_experiment(mustangs);

  RunConfig lip = small_mustangs(41);
  lip.variant = MethodVariant::LipBCE;
  lip.epochs = 4;
  lip.out_dir = (base / "lip").string();
  run_experiment(lip);

  c.expect(!slurp(base / "mustangs" / "run.csv").empty(), "empty run.csv");
  c.expect(slurp(base / "mustangs" / "run.csv") == slurp(base / "lip" / "run.csv"),
           "trajectories differ");
  c.expect(slurp(base / "mustangs" / "weights.txt") == slurp(base / "lip" / "weights.txt"),
           "final weights differ");
  fs::remove_all(base);
  return c;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Check()>>> criteria = {
      {"analytic-loss-values", analytic_loss_values},
      {"gradient-correctness", gradient_correctness},
      {"frechet-exactness", frechet_exactness},
      {"tvd-and-ranksum-holm", tvd_and_ranksum},
      {"grid-topology", topology},
      {"loss-selection-uniformity", loss_selection_uniformity},
      {"simplex-invariant", simplex_invariant},
      {"sequential-determinism", determinism},
      {"async-completion", async_completion},
      {"ordering-experiment", ordering_experiment},
      {"degenerate-menu-equivalence", degenerate_menu_equivalence},
  };

  int failures = 0;
  for (const auto& [name, fn] : criteria) {
    Check result;
    try {
      result = fn();
    } catch (const std::exception& e) {
      result.ok = false;
      result.detail << "exception: " << e.what();
    }
    if (!result.ok) ++failures;
    std::printf("[%s] %s%s%s\n", result.ok ? "PASS" : "FAIL", name.c_str(),
                result.detail.str().empty() ? "" : " -- ", result.detail.str().c_str());
    std::fflush(stdout);
  }
  if (failures) std::printf("%d criterion(s) failed\n", failures);
  return failures == 0 ? 0 : 1;
}
