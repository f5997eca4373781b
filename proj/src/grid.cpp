#include "coevogan/grid.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>
#include <thread>

namespace coevogan {

namespace {

double uniform_reference_tvd(const ModeHistogram& hist) {
  if (hist.assigned_total() == 0) return 1.0;
  const std::vector<double> p = mode_proportions(hist);
  const std::vector<double> q(p.size(), 1.0 / static_cast<double>(p.size()));
  return tvd(p, q);
}

int argmax_fitness(const std::vector<Individual>& pop) {
  int best = 0;
  for (std::size_t i = 1; i < pop.size(); ++i)
    if (pop[i].fitness > pop[best].fitness) best = static_cast<int>(i);
  return best;
}

}  // namespace

Grid::Grid(GridConfig cfg) : cfg_(cfg) {
  if (cfg_.rows < 1 || cfg_.cols < 1)
    throw std::invalid_argument("Grid: rows and cols must be >= 1");
  slots_.reserve(static_cast<std::size_t>(size()));
  for (int i = 0; i < size(); ++i) {
    auto slot = std::make_unique<Slot>();
    slot->cell.coord = coord_of(i);
    slots_.push_back(std::move(slot));
  }
}

int Grid::checked_index(GridCoord c) const {
  if (!in_bounds(c)) throw std::out_of_range("Grid: coordinate out of bounds");
  return index_of(c);
}

Cell Grid::read_cell(int idx) const {
  const auto& slot = *slots_.at(idx);
  std::shared_lock lock(slot.mutex);
  return slot.cell;
}

long Grid::epoch_counter(int idx) const {
  const auto& slot = *slots_.at(idx);
  std::shared_lock lock(slot.mutex);
  return slot.cell.epoch_counter;
}

Grid make_grid(const GridConfig& cfg, const Networks& nets, double initial_lr,
               std::uint64_t master_seed) {
  Grid grid(cfg);
  for (int i = 0; i < grid.size(); ++i) {
    Rng rng = make_rng(derive_seed(master_seed, kInitStream, static_cast<std::uint64_t>(i)));
    const auto coords = neighborhood_coords(cfg, grid.coord_of(i));
    grid.update_cell(i, [&](Cell& cell) {
      cell.center_generator = make_individual(nets.generator, Role::Generator, initial_lr, rng);
      cell.center_discriminator =
          make_individual(nets.discriminator, Role::Discriminator, initial_lr, rng);
      cell.mixture_weights =
          MixtureWeights::Constant(coords.size(), 1.0 / static_cast<double>(coords.size()));
    });
  }
  return grid;
}

std::vector<GridCoord> neighborhood_coords(const GridConfig& cfg, GridCoord k) {
  if (k.row < 0 || k.row >= cfg.rows || k.col < 0 || k.col >= cfg.cols)
    throw std::out_of_range("neighborhood_coords: coordinate out of bounds");
  const auto wrap = [](int v, int m) { return ((v % m) + m) % m; };
  const std::array<GridCoord, 5> candidates = {
      k,
      GridCoord{wrap(k.row - 1, cfg.rows), k.col},  // north
      GridCoord{wrap(k.row + 1, cfg.rows), k.col},  // south
      GridCoord{k.row, wrap(k.col - 1, cfg.cols)},  // west
      GridCoord{k.row, wrap(k.col + 1, cfg.cols)},  // east
  };
  std::vector<GridCoord> coords;
  coords.reserve(candidates.size());
  for (const GridCoord& c : candidates)
    if (std::find(coords.begin(), coords.end(), c) == coords.end()) coords.push_back(c);
  return coords;
}

NeighborhoodPopulations gather_neighborhood(const Grid& grid, GridCoord k) {
  NeighborhoodPopulations nb;
  nb.coords = neighborhood_coords(grid.config(), k);
  nb.epochs.reserve(nb.coords.size());
  nb.pops.generators.reserve(nb.coords.size());
  nb.pops.discriminators.reserve(nb.coords.size());
  for (const GridCoord& c : nb.coords) {
    Cell cell = grid.read_cell(c);
    nb.epochs.push_back(cell.epoch_counter);
    nb.pops.generators.push_back(std::move(cell.center_generator));
    nb.pops.discriminators.push_back(std::move(cell.center_discriminator));
  }
  return nb;
}

GridSnapshot snapshot(const Grid& grid) {
  GridSnapshot snap;
  snap.cells.reserve(static_cast<std::size_t>(grid.size()));
  for (int i = 0; i < grid.size(); ++i) snap.cells.push_back(grid.read_cell(i));
  return snap;
}

CellUpdateResult cell_update(Grid& grid, GridCoord k, const CellUpdateContext& ctx, Rng& rng) {
  const int idx = grid.checked_index(k);
  CellUpdateResult result;

  NeighborhoodPopulations nb = gather_neighborhood(grid, k);
  PopulationPair next = coev_generation(ctx.nets, nb.pops, ctx.mutation, ctx.batches, rng,
                                        result.stats);
  const Individual& best_gen = next.generators[argmax_fitness(next.generators)];
  const Individual& best_disc = next.discriminators[argmax_fitness(next.discriminators)];

  // Mixture over the updated center plus the gathered (possibly stale)
  // neighbor generators, matching what the grid will hold after write-back.
  MixtureCandidate cand;
  cand.generators.reserve(nb.coords.size());
  cand.generators.push_back(best_gen);
  for (std::size_t i = 1; i < nb.coords.size(); ++i)
    cand.generators.push_back(nb.pops.generators[i]);
  {
    const Cell current = grid.read_cell(idx);
    cand.weights = current.mixture_weights;
    cand.score = current.mixture_score;
  }
  if (std::isnan(cand.score))
    cand.score = score_mixture(ctx.nets.generator, cand, ctx.metric,
                               ctx.mixture_es.eval_samples, ctx.batches.latent, rng);
  cand = es_1plus1_step(ctx.nets.generator, std::move(cand), ctx.metric, ctx.batches.latent,
                        ctx.mixture_es, rng);

  // Reported metrics come from one fresh draw of the accepted mixture; the
  // ES keeps its own elitist stored score for acceptance decisions.
  const Batch report_sample = sample_mixture(ctx.nets.generator, cand,
                                             ctx.mixture_es.eval_samples, ctx.batches.latent, rng);
  const ModeHistogram hist =
      assign_modes(report_sample, ctx.batches.dataset.mode_centers, ctx.batches.dataset.mode_std);
  result.fd = ctx.metric(report_sample);
  result.tvd = uniform_reference_tvd(hist);
  result.mode_coverage = mode_coverage(
      hist, default_coverage_fraction(static_cast<int>(ctx.batches.dataset.mode_centers.size())));
  result.gen_lr = best_gen.learning_rate;
  result.disc_lr = best_disc.learning_rate;

  grid.update_cell(idx, [&](Cell& cell) {
    if (best_gen.params.allFinite()) cell.center_generator = best_gen;
    if (best_disc.params.allFinite()) cell.center_discriminator = best_disc;
    cell.mixture_weights = cand.weights;
    cell.mixture_score = cand.score;
    cell.epoch_counter += 1;
  });
  return result;
}

namespace {

// Flat per-cell-per-epoch history filled by the owning worker only.
struct RunHistory {
  int epochs = 0;
  int cells = 0;
  std::vector<CellUpdateResult> results;  // cell-major: [cell * epochs + epoch]
  std::vector<std::atomic<int>> progress;  // epochs completed per cell

  RunHistory(int n_epochs, int n_cells)
      : epochs(n_epochs),
        cells(n_cells),
        results(static_cast<std::size_t>(n_epochs) * n_cells),
        progress(n_cells) {}

  CellUpdateResult& at(int cell, int epoch) {
    return results[static_cast<std::size_t>(cell) * epochs + epoch];
  }
};

MetricReport assemble_report(const RunHistory& history, const Grid& grid, int epoch,
                             double wall_time_s) {
  MetricReport report;
  report.epoch = epoch + 1;
  report.wall_time_s = wall_time_s;
  report.cell_fd.assign(history.cells, std::numeric_limits<double>::quiet_NaN());
  double lr_gen_sum = 0.0;
  double lr_disc_sum = 0.0;
  int lr_count = 0;
  for (int c = 0; c < history.cells; ++c) {
    const CellUpdateResult& r =
        history.results[static_cast<std::size_t>(c) * history.epochs + epoch];
    if (grid.failed(c) && std::isnan(r.fd)) continue;
    report.cell_fd[c] = r.fd;
    report.gan_evaluations += r.stats.gan_evaluations;
    report.divergences += r.stats.divergences;
    for (std::size_t k = 0; k < report.loss_counts.size(); ++k)
      report.loss_counts[k] += r.stats.loss_counts[k];
    lr_gen_sum += r.gen_lr;
    lr_disc_sum += r.disc_lr;
    ++lr_count;
    if (!std::isnan(r.fd) && (report.best_cell < 0 || r.fd < report.best_fd)) {
      report.best_fd = r.fd;
      report.best_cell = c;
      report.tvd = r.tvd;
      report.mode_coverage = r.mode_coverage;
    }
  }
  if (lr_count > 0) {
    report.mean_gen_lr = lr_gen_sum / lr_count;
    report.mean_disc_lr = lr_disc_sum / lr_count;
  }
  return report;
}

}  // namespace

GridRunResult run_grid(Grid& grid, const CellUpdateContext& ctx, const GridRunOptions& opts,
                       std::uint64_t master_seed) {
  if (opts.epochs < 1) throw std::invalid_argument("run_grid: epochs must be >= 1");
  const int n_cells = grid.size();
  RunHistory history(opts.epochs, n_cells);
  const auto start = std::chrono::steady_clock::now();
  const auto elapsed = [&] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  };

  GridRunResult result;
  result.reports.reserve(static_cast<std::size_t>(opts.epochs));

  const auto run_cell_epoch = [&](int cell_idx, int epoch, Rng& rng) {
    const GridCoord coord = grid.coord_of(cell_idx);
    history.at(cell_idx, epoch) = cell_update(grid, coord, ctx, rng);
    if (opts.on_cell_epoch) opts.on_cell_epoch(grid.read_cell(cell_idx), epoch + 1);
  };

  if (opts.mode == RunMode::Sequential) {
    std::vector<Rng> rngs;
    rngs.reserve(static_cast<std::size_t>(n_cells));
    for (int c = 0; c < n_cells; ++c)
      rngs.push_back(make_rng(derive_seed(master_seed, kCellStream, static_cast<std::uint64_t>(c))));
    for (int epoch = 0; epoch < opts.epochs; ++epoch) {
      for (int c = 0; c < n_cells; ++c) run_cell_epoch(c, epoch, rngs[c]);
      MetricReport report = assemble_report(history, grid, epoch, elapsed());
      if (opts.on_report) opts.on_report(report);
      result.reports.push_back(std::move(report));
    }
  } else {
    std::vector<std::thread> workers;
    workers.reserve(static_cast<std::size_t>(n_cells));
    for (int c = 0; c < n_cells; ++c) {
      workers.emplace_back([&, c] {
        Rng rng = make_rng(derive_seed(master_seed, kCellStream, static_cast<std::uint64_t>(c)));
        try {
          for (int epoch = 0; epoch < opts.epochs; ++epoch) {
            run_cell_epoch(c, epoch, rng);
            history.progress[c].store(epoch + 1, std::memory_order_release);
          }
        } catch (...) {
          // Freeze this cell at its last good state; the rest keep going.
          grid.mark_failed(c);
          history.progress[c].store(opts.epochs, std::memory_order_release);
        }
      });
    }
    int flushed = 0;
    while (flushed < opts.epochs) {
      int ready = opts.epochs;
      for (int c = 0; c < n_cells; ++c)
        ready = std::min(ready, history.progress[c].load(std::memory_order_acquire));
      for (; flushed < ready; ++flushed) {
        MetricReport report = assemble_report(history, grid, flushed, elapsed());
        if (opts.on_report) opts.on_report(report);
        result.reports.push_back(std::move(report));
      }
      if (flushed < opts.epochs) std::this_thread::sleep_for(std::chrono::milliseconds(5));
    }
    for (auto& w : workers) w.join();
  }

  for (int c = 0; c < n_cells; ++c) {
    if (grid.failed(c)) result.failed_cells.push_back(c);
    for (int e = 0; e < opts.epochs; ++e) result.totals += history.at(c, e).stats;
  }
  return result;
}

BestMixture select_best_mixture(const Grid& grid, const MlpSpec& gen_spec,
                                const LatentSpec& latent, const MixtureMetric& metric, int n_eval,
                                std::uint64_t eval_seed) {
  BestMixture best;
  for (int idx = 0; idx < grid.size(); ++idx) {
    NeighborhoodPopulations nb = gather_neighborhood(grid, grid.coord_of(idx));
    MixtureCandidate cand;
    cand.generators = std::move(nb.pops.generators);
    cand.weights = grid.read_cell(idx).mixture_weights;
    Rng rng = make_rng(derive_seed(eval_seed, kMixtureEvalStream, static_cast<std::uint64_t>(idx)));
    cand.score = score_mixture(gen_spec, cand, metric, n_eval, latent, rng);
    if (best.cell_index < 0 || cand.score < best.candidate.score) {
      best.candidate = std::move(cand);
      best.cell_index = idx;
    }
  }
  return best;
}

}  // namespace coevogan
