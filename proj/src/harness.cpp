#include "coevogan/harness.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <stdexcept>

namespace coevogan {

namespace {

constexpr std::array<LossKind, 3> kAllLossKinds = {LossKind::Minmax, LossKind::LeastSquare,
                                                   LossKind::Heuristic};

std::uint64_t fnv1a(std::uint64_t hash, const void* data, std::size_t bytes) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < bytes; ++i) {
    hash ^= p[i];
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

std::string digest_mixture(const MixtureCandidate& cand) {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (const Individual& g : cand.generators)
    hash = fnv1a(hash, g.params.data(), sizeof(double) * g.params.size());
  hash = fnv1a(hash, cand.weights.data(), sizeof(double) * cand.weights.size());
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(hash));
  return buf;
}

struct MetricContext {
  GaussianSummary reference;
  MixtureMetric metric;
};

MetricContext make_metric_context(const RunConfig& cfg, const SyntheticDataset& ds) {
  Rng ref_rng = make_rng(derive_seed(cfg.seed, kReferenceStream));
  MetricContext ctx;
  ctx.reference = fit_gaussian(sample_real(ds, cfg.reference_samples, ref_rng));
  const GaussianSummary ref = ctx.reference;
  ctx.metric = [ref](const Batch& fake) { return frechet_distance(ref, fit_gaussian(fake)); };
  return ctx;
}

/// Per-epoch reporting shared by the single-cell baselines: one fresh sample
/// batch serves the Frechet score, the mode histogram and the coverage count.
MetricReport single_cell_report(int epoch, const MixtureCandidate& cand, const Networks& nets,
                                const BatchSource& batches, const MixtureMetric& metric,
                                int eval_samples, Rng& rng) {
  MetricReport report;
  report.epoch = epoch;
  const Batch sample = sample_mixture(nets.generator, cand, eval_samples, batches.latent, rng);
  report.best_fd = metric(sample);
  report.best_cell = 0;
  report.cell_fd = {report.best_fd};
  const ModeHistogram hist =
      assign_modes(sample, batches.dataset.mode_centers, batches.dataset.mode_std);
  if (hist.assigned_total() == 0) {
    report.tvd = 1.0;
  } else {
    const std::vector<double> p = mode_proportions(hist);
    report.tvd = tvd(p, std::vector<double>(p.size(), 1.0 / static_cast<double>(p.size())));
  }
  report.mode_coverage = mode_coverage(
      hist, default_coverage_fraction(static_cast<int>(batches.dataset.mode_centers.size())));
  return report;
}

MixtureCandidate single_candidate(const Individual& gen) {
  MixtureCandidate cand;
  cand.generators = {gen};
  cand.weights = MixtureWeights::Constant(1, 1.0);
  return cand;
}

}  // namespace

MethodVariant parse_variant(const std::string& name) {
  if (name == "mustangs") return MethodVariant::Mustangs;
  if (name == "lip-bce") return MethodVariant::LipBCE;
  if (name == "lip-mse") return MethodVariant::LipMSE;
  if (name == "lip-heu") return MethodVariant::LipHEU;
  if (name == "e-gan") return MethodVariant::EGAN;
  if (name == "gan-bce") return MethodVariant::GANBCE;
  throw std::invalid_argument("unknown variant: " + name);
}

const char* to_string(MethodVariant v) {
  switch (v) {
    case MethodVariant::Mustangs:
      return "mustangs";
    case MethodVariant::LipBCE:
      return "lip-bce";
    case MethodVariant::LipMSE:
      return "lip-mse";
    case MethodVariant::LipHEU:
      return "lip-heu";
    case MethodVariant::EGAN:
      return "e-gan";
    case MethodVariant::GANBCE:
      return "gan-bce";
  }
  return "unknown";
}

bool is_grid_variant(MethodVariant v) {
  return v == MethodVariant::Mustangs || v == MethodVariant::LipBCE ||
         v == MethodVariant::LipMSE || v == MethodVariant::LipHEU;
}

RunMode parse_run_mode(const std::string& name) {
  if (name == "sequential") return RunMode::Sequential;
  if (name == "async" || name == "asynchronous") return RunMode::Asynchronous;
  throw std::invalid_argument("unknown mode: " + name);
}

const char* to_string(RunMode m) {
  return m == RunMode::Sequential ? "sequential" : "async";
}

RunConfig apply_variant_defaults(RunConfig cfg) {
  if (cfg.loss_menu.empty()) {
    switch (cfg.variant) {
      case MethodVariant::Mustangs:
        cfg.loss_menu = {LossKind::Minmax, LossKind::LeastSquare, LossKind::Heuristic};
        break;
      case MethodVariant::LipBCE:
      case MethodVariant::GANBCE:
        cfg.loss_menu = {LossKind::Minmax};
        break;
      case MethodVariant::LipMSE:
        cfg.loss_menu = {LossKind::LeastSquare};
        break;
      case MethodVariant::LipHEU:
        cfg.loss_menu = {LossKind::Heuristic};
        break;
      case MethodVariant::EGAN:
        cfg.loss_menu = {LossKind::Minmax, LossKind::LeastSquare, LossKind::Heuristic};
        break;
    }
    cfg.loss_probs.clear();
  }
  if (cfg.loss_probs.empty())
    cfg.loss_probs.assign(cfg.loss_menu.size(), 1.0 / static_cast<double>(cfg.loss_menu.size()));
  if (!is_grid_variant(cfg.variant)) {
    cfg.grid_rows = 1;
    cfg.grid_cols = 1;
  }

  if (cfg.grid_rows < 1 || cfg.grid_cols < 1)
    throw std::invalid_argument("RunConfig: grid dimensions must be >= 1");
  if (cfg.epochs < 1) throw std::invalid_argument("RunConfig: epochs must be >= 1");
  if (cfg.latent_dim < 1 || cfg.hidden_layers < 1 || cfg.hidden_size < 1)
    throw std::invalid_argument("RunConfig: invalid network shape");
  if (cfg.initial_learning_rate < kMinLearningRate || cfg.initial_learning_rate > kMaxLearningRate)
    throw std::invalid_argument("RunConfig: initial learning rate out of range");
  if (cfg.batch_size < 1) throw std::invalid_argument("RunConfig: batch_size must be >= 1");
  if (cfg.metric_samples < 3 || cfg.reference_samples < 3)
    throw std::invalid_argument("RunConfig: metric sample counts must be >= 3");
  if (cfg.mixture_mutation_scale < 0.0)
    throw std::invalid_argument("RunConfig: mixture mutation scale must be >= 0");
  validate(make_mutation_config(cfg));
  return cfg;
}

Networks make_networks(const RunConfig& cfg) {
  Networks nets;
  nets.generator.layer_sizes.push_back(cfg.latent_dim);
  for (int i = 0; i < cfg.hidden_layers; ++i) nets.generator.layer_sizes.push_back(cfg.hidden_size);
  nets.generator.layer_sizes.push_back(2);
  nets.generator.output_activation = Activation::Tanh;

  nets.discriminator.layer_sizes.push_back(2);
  for (int i = 0; i < cfg.hidden_layers; ++i)
    nets.discriminator.layer_sizes.push_back(cfg.hidden_size);
  nets.discriminator.layer_sizes.push_back(1);
  nets.discriminator.output_activation = Activation::Sigmoid;
  return nets;
}

SyntheticDataset make_dataset(const RunConfig& cfg) {
  if (cfg.dataset == DatasetKind::Ring)
    return make_ring(cfg.data_modes, cfg.data_radius, cfg.data_std);
  return make_grid(cfg.data_grid_side, cfg.data_extent, cfg.data_std);
}

MutationConfig make_mutation_config(const RunConfig& cfg) {
  MutationConfig mc;
  mc.loss_menu = cfg.loss_menu;
  mc.selection_probabilities = cfg.loss_probs;
  mc.steps_per_mutation = cfg.steps_per_mutation;
  mc.tournament_size = cfg.tournament_size;
  mc.hyperparam_mutation_probability = cfg.hyperparam_mutation_probability;
  mc.hyperparam_mutation_scale = cfg.hyperparam_mutation_scale;
  return mc;
}

EganResult egan_generation(const Networks& nets, const Individual& gen, const Individual& disc,
                           const MutationConfig& cfg, const BatchSource& batches, Rng& rng,
                           CoevStats& stats) {
  EganResult result;
  std::array<Individual, 3> clones;
  std::array<bool, 3> valid{};
  for (int k = 0; k < 3; ++k) {
    clones[k] = gen;
    bool diverged = false;
    for (int step = 0; step < cfg.steps_per_mutation && !diverged; ++step) {
      const Batch latent = batches.noise(rng);
      const ParamVector grad =
          generator_grad(kAllLossKinds[k], nets, clones[k].params, disc.params, latent);
      diverged = !adam_step(clones[k].params, grad, clones[k].adam, clones[k].learning_rate);
    }
    valid[k] = !diverged && clones[k].params.allFinite();
    if (!valid[k]) ++stats.divergences;
  }

  const Batch score_latent = batches.noise(rng);
  for (int k = 0; k < 3; ++k) {
    if (!valid[k]) {
      result.clone_scores[k] = -std::numeric_limits<double>::infinity();
      continue;
    }
    const Batch fake = forward(nets.generator, clones[k].params, score_latent);
    result.clone_scores[k] = forward(nets.discriminator, disc.params, fake).col(0).mean();
    if (result.winner < 0 || result.clone_scores[k] > result.clone_scores[result.winner])
      result.winner = k;
  }
  if (result.winner < 0) {
    result.generator = gen;  // every clone diverged
    return result;
  }
  result.winner_kind = kAllLossKinds[result.winner];
  ++stats.loss_counts[result.winner];
  result.generator = clones[result.winner];
  return result;
}

namespace {

struct LogSink {
  std::ofstream csv;
  bool enabled = false;

  void open(const std::filesystem::path& dir, int n_cells) {
    std::filesystem::create_directories(dir);
    csv.open(dir / "run.csv", std::ios::trunc);
    if (!csv) throw std::runtime_error("cannot open run.csv for writing");
    write_csv_header(csv, n_cells);
    csv.flush();
    enabled = true;
  }

  void row(const MetricReport& report) {
    if (!enabled) return;
    write_csv_row(csv, report);
    csv.flush();
  }
};

void run_grid_variant(const RunConfig& cfg, RunLog& log, LogSink& sink) {
  const Networks nets = make_networks(cfg);
  const SyntheticDataset ds = make_dataset(cfg);
  const BatchSource batches{ds, LatentSpec{cfg.latent_dim}, cfg.batch_size};
  const MetricContext metric = make_metric_context(cfg, ds);

  CellUpdateContext ctx;
  ctx.nets = nets;
  ctx.mutation = make_mutation_config(cfg);
  ctx.batches = batches;
  ctx.mixture_es = {cfg.mixture_mutation_scale, cfg.metric_samples};
  ctx.metric = metric.metric;

  Grid grid = make_grid({cfg.grid_rows, cfg.grid_cols}, nets, cfg.initial_learning_rate, cfg.seed);

  GridRunOptions opts;
  opts.epochs = cfg.epochs;
  opts.mode = cfg.mode;
  opts.on_report = [&](const MetricReport& report) {
    sink.row(report);
    log.reports.push_back(report);
  };
  const GridRunResult run = run_grid(grid, ctx, opts, cfg.seed);

  log.failed_cells = run.failed_cells;
  log.failed = !run.failed_cells.empty() &&
               static_cast<int>(run.failed_cells.size()) == grid.size();
  log.gan_evaluations = run.totals.gan_evaluations;
  log.divergences = run.totals.divergences;

  const BestMixture best =
      select_best_mixture(grid, nets.generator, batches.latent, metric.metric, cfg.metric_samples,
                          derive_seed(cfg.seed, kFinalEvalStream));
  log.final_fd = best.candidate.score;
  log.final_cell = best.cell_index;
  log.final_weights = best.candidate.weights;
  log.params_digest = digest_mixture(best.candidate);
  {
    Rng rng = make_rng(derive_seed(cfg.seed, kFinalEvalStream, 0xF00D));
    const Batch sample = sample_mixture(nets.generator, best.candidate, cfg.metric_samples,
                                        batches.latent, rng);
    const ModeHistogram hist = assign_modes(sample, ds.mode_centers, ds.mode_std);
    if (hist.assigned_total() == 0) {
      log.final_tvd = 1.0;
    } else {
      const std::vector<double> p = mode_proportions(hist);
      log.final_tvd =
          tvd(p, std::vector<double>(p.size(), 1.0 / static_cast<double>(p.size())));
    }
    log.final_coverage =
        mode_coverage(hist, default_coverage_fraction(static_cast<int>(ds.mode_centers.size())));
  }
}

void run_single_cell_variant(const RunConfig& cfg, RunLog& log, LogSink& sink) {
  const Networks nets = make_networks(cfg);
  const SyntheticDataset ds = make_dataset(cfg);
  const BatchSource batches{ds, LatentSpec{cfg.latent_dim}, cfg.batch_size};
  const MetricContext metric = make_metric_context(cfg, ds);
  const MutationConfig mutation = make_mutation_config(cfg);

  Rng init_rng = make_rng(derive_seed(cfg.seed, kInitStream, 0));
  Individual gen =
      make_individual(nets.generator, Role::Generator, cfg.initial_learning_rate, init_rng);
  Individual disc = make_individual(nets.discriminator, Role::Discriminator,
                                    cfg.initial_learning_rate, init_rng);
  Rng rng = make_rng(derive_seed(cfg.seed, kCellStream, 0));

  const auto start = std::chrono::steady_clock::now();
  CoevStats totals;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    CoevStats stats;
    if (cfg.variant == MethodVariant::EGAN) {
      EganResult egan = egan_generation(nets, gen, disc, mutation, batches, rng, stats);
      gen = std::move(egan.generator);
      bool diverged = false;
      Individual disc_next = disc;
      for (int step = 0; step < mutation.steps_per_mutation && !diverged; ++step) {
        const Batch real = batches.real(rng);
        const Batch latent = batches.noise(rng);
        const ParamVector grad =
            discriminator_grad(nets, disc_next.params, gen.params, real, latent);
        diverged = !adam_step(disc_next.params, grad, disc_next.adam, disc_next.learning_rate);
      }
      if (!diverged && disc_next.params.allFinite())
        disc = std::move(disc_next);
      else
        ++stats.divergences;
      stats.gan_evaluations += 3;  // three clones scored against one discriminator
    } else {  // gan-bce: pure alternating gradient training
      for (int step = 0; step < mutation.steps_per_mutation; ++step) {
        const Batch real = batches.real(rng);
        const Batch latent = batches.noise(rng);
        const ParamVector dgrad = discriminator_grad(nets, disc.params, gen.params, real, latent);
        if (!adam_step(disc.params, dgrad, disc.adam, disc.learning_rate)) ++stats.divergences;
        const Batch latent2 = batches.noise(rng);
        const ParamVector ggrad =
            generator_grad(LossKind::Minmax, nets, gen.params, disc.params, latent2);
        if (!adam_step(gen.params, ggrad, gen.adam, gen.learning_rate)) ++stats.divergences;
      }
      ++stats.loss_counts[static_cast<int>(LossKind::Minmax)];
      stats.gan_evaluations += 1;
    }

    MetricReport report = single_cell_report(epoch + 1, single_candidate(gen), nets, batches,
                                             metric.metric, cfg.metric_samples, rng);
    report.wall_time_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    report.gan_evaluations = stats.gan_evaluations;
    report.divergences = stats.divergences;
    report.loss_counts = stats.loss_counts;
    report.mean_gen_lr = gen.learning_rate;
    report.mean_disc_lr = disc.learning_rate;
    totals += stats;
    sink.row(report);
    log.reports.push_back(std::move(report));
  }

  log.gan_evaluations = totals.gan_evaluations;
  log.divergences = totals.divergences;

  MixtureCandidate cand = single_candidate(gen);
  Rng eval_rng = make_rng(derive_seed(cfg.seed, kMixtureEvalStream, 0));
  cand.score =
      score_mixture(nets.generator, cand, metric.metric, cfg.metric_samples, batches.latent,
                    eval_rng);
  log.final_fd = cand.score;
  log.final_cell = 0;
  log.final_weights = cand.weights;
  log.params_digest = digest_mixture(cand);
  {
    Rng rng2 = make_rng(derive_seed(cfg.seed, kFinalEvalStream, 0xF00D));
    const Batch sample =
        sample_mixture(nets.generator, cand, cfg.metric_samples, batches.latent, rng2);
    const ModeHistogram hist = assign_modes(sample, ds.mode_centers, ds.mode_std);
    if (hist.assigned_total() == 0) {
      log.final_tvd = 1.0;
    } else {
      const std::vector<double> p = mode_proportions(hist);
      log.final_tvd =
          tvd(p, std::vector<double>(p.size(), 1.0 / static_cast<double>(p.size())));
    }
    log.final_coverage =
        mode_coverage(hist, default_coverage_fraction(static_cast<int>(ds.mode_centers.size())));
  }
}

}  // namespace

RunLog run_experiment(const RunConfig& user_cfg) {
  const RunConfig cfg = apply_variant_defaults(user_cfg);
  RunLog log;
  log.config = cfg;

  LogSink sink;
  if (!cfg.out_dir.empty()) sink.open(cfg.out_dir, cfg.grid_rows * cfg.grid_cols);

  const auto start = std::chrono::steady_clock::now();
  try {
    if (is_grid_variant(cfg.variant))
      run_grid_variant(cfg, log, sink);
    else
      run_single_cell_variant(cfg, log, sink);
  } catch (...) {
    log.failed = true;
    log.wall_time_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (!cfg.out_dir.empty()) {
      std::ofstream summary(std::filesystem::path(cfg.out_dir) / "summary.txt", std::ios::trunc);
      write_summary(summary, log);
    }
    throw;
  }
  log.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  for (const MetricReport& r : log.reports) {
    if (!std::isnan(r.best_fd) && (log.best_epoch < 0 || r.best_fd < log.best_fd)) {
      log.best_fd = r.best_fd;
      log.best_epoch = r.epoch;
    }
  }

  if (!cfg.out_dir.empty()) {
    const std::filesystem::path dir(cfg.out_dir);
    {
      std::ofstream summary(dir / "summary.txt", std::ios::trunc);
      write_summary(summary, log);
    }
    {
      std::ofstream weights(dir / "weights.txt", std::ios::trunc);
      for (Eigen::Index i = 0; i < log.final_weights.size(); ++i)
        weights << format_double(log.final_weights[i]) << "\n";
    }
  }
  return log;
}

}  // namespace coevogan
