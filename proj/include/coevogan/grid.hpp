#pragma once

#include <array>
#include <atomic>
#include <functional>
#include <memory>
#include <mutex>
#include <shared_mutex>
#include <vector>

#include "coevogan/coevolution.hpp"
#include "coevogan/metrics.hpp"
#include "coevogan/mixture.hpp"

namespace coevogan {

struct GridConfig {
  int rows = 3;
  int cols = 3;
};

struct GridCoord {
  int row = 0;
  int col = 0;

  bool operator==(const GridCoord&) const = default;
};

/// One grid cell: a center generator-discriminator pair, the mixture weights
/// over its neighborhood and the score of the last accepted mixture.
struct Cell {
  GridCoord coord;
  Individual center_generator;
  Individual center_discriminator;
  MixtureWeights mixture_weights;
  double mixture_score = std::numeric_limits<double>::quiet_NaN();
  long epoch_counter = 0;
};

/// Toroidal cell store. Reads take per-cell shared locks and return copies;
/// each cell has a single writer, so neighbors are never blocked by training.
class Grid {
 public:
  explicit Grid(GridConfig cfg);

  const GridConfig& config() const { return cfg_; }
  int rows() const { return cfg_.rows; }
  int cols() const { return cfg_.cols; }
  int size() const { return cfg_.rows * cfg_.cols; }

  int index_of(GridCoord c) const { return c.row * cfg_.cols + c.col; }
  GridCoord coord_of(int idx) const { return {idx / cfg_.cols, idx % cfg_.cols}; }
  bool in_bounds(GridCoord c) const {
    return c.row >= 0 && c.row < cfg_.rows && c.col >= 0 && c.col < cfg_.cols;
  }

  Cell read_cell(int idx) const;
  Cell read_cell(GridCoord c) const { return read_cell(checked_index(c)); }

  template <typename Fn>
  void update_cell(int idx, Fn&& fn) {
    auto& slot = *slots_[idx];
    std::unique_lock lock(slot.mutex);
    fn(slot.cell);
  }

  long epoch_counter(int idx) const;
  void mark_failed(int idx) { slots_[idx]->failed.store(true); }
  bool failed(int idx) const { return slots_[idx]->failed.load(); }

  int checked_index(GridCoord c) const;

 private:
  struct Slot {
    Cell cell;
    mutable std::shared_mutex mutex;
    std::atomic<bool> failed{false};
  };

  GridConfig cfg_;
  std::vector<std::unique_ptr<Slot>> slots_;
};

/// Fresh grid with Glorot-initialized center pairs (one init stream per cell)
/// and uniform mixture weights.
Grid make_grid(const GridConfig& cfg, const Networks& nets, double initial_lr,
               std::uint64_t master_seed);

/// Center first, then N, S, W, E with toroidal wraparound; coordinates that
/// collide on small grids are dropped, keeping the first occurrence.
std::vector<GridCoord> neighborhood_coords(const GridConfig& cfg, GridCoord k);

struct NeighborhoodPopulations {
  std::vector<GridCoord> coords;
  std::vector<long> epochs;  // observed neighbor epoch counters
  PopulationPair pops;
};

/// Deep copies of the neighborhood's center pairs, ordered as
/// neighborhood_coords; mutating the copies never touches the grid.
NeighborhoodPopulations gather_neighborhood(const Grid& grid, GridCoord k);

/// Immutable per-cell copies taken one cell at a time.
struct GridSnapshot {
  std::vector<Cell> cells;
};

GridSnapshot snapshot(const Grid& grid);

/// Everything one cell update needs besides the grid itself.
struct CellUpdateContext {
  Networks nets;
  MutationConfig mutation;
  BatchSource batches;
  MixtureEsConfig mixture_es;
  MixtureMetric metric;  // lower is better; drives the (1+1)-ES and reporting
};

struct CellUpdateResult {
  CoevStats stats;
  double fd = std::numeric_limits<double>::quiet_NaN();
  double tvd = std::numeric_limits<double>::quiet_NaN();
  int mode_coverage = 0;
  double gen_lr = 0.0;
  double disc_lr = 0.0;
};

/// One coevolution generation over the gathered neighborhood, write-back of
/// the fittest pair into the center, then one mixture ES step. Only cell k is
/// ever written.
CellUpdateResult cell_update(Grid& grid, GridCoord k, const CellUpdateContext& ctx, Rng& rng);

enum class RunMode { Sequential, Asynchronous };

/// Per-epoch record assembled from the per-cell results.
struct MetricReport {
  int epoch = 0;
  double wall_time_s = 0.0;  // in-memory only; not part of the CSV contract
  long gan_evaluations = 0;
  long divergences = 0;
  double best_fd = std::numeric_limits<double>::quiet_NaN();
  int best_cell = -1;
  double tvd = std::numeric_limits<double>::quiet_NaN();
  int mode_coverage = 0;
  std::array<long, kNumLossKinds> loss_counts{};
  double mean_gen_lr = 0.0;
  double mean_disc_lr = 0.0;
  std::vector<double> cell_fd;  // row-major, NaN for failed cells
};

struct GridRunOptions {
  int epochs = 1;
  RunMode mode = RunMode::Sequential;
  /// Called after every cell update with the freshly written cell state. In
  /// asynchronous mode this runs on worker threads.
  std::function<void(const Cell&, int epoch)> on_cell_epoch;
  /// Streaming sink for completed per-epoch reports.
  std::function<void(const MetricReport&)> on_report;
};

struct GridRunResult {
  std::vector<MetricReport> reports;
  std::vector<int> failed_cells;
  CoevStats totals;
};

/// Sequential mode sweeps cells in row-major order and is deterministic under
/// a fixed seed; asynchronous mode runs one worker per cell, each looping
/// epochs times against possibly stale neighbor reads. A failing cell is
/// frozen at its last good state while the rest continue.
GridRunResult run_grid(Grid& grid, const CellUpdateContext& ctx, const GridRunOptions& opts,
                       std::uint64_t master_seed);

struct BestMixture {
  MixtureCandidate candidate;
  int cell_index = -1;
};

/// Evaluates every cell's current neighborhood mixture with its stored
/// weights on n_eval fresh samples and returns the minimizer; ties keep the
/// lowest row-major index. Each cell is scored on its own derived stream so
/// the result can be reproduced independently.
BestMixture select_best_mixture(const Grid& grid, const MlpSpec& gen_spec,
                                const LatentSpec& latent, const MixtureMetric& metric,
                                int n_eval, std::uint64_t eval_seed);

/// Stream tags for derived seeds (shared with the harness).
inline constexpr std::uint64_t kInitStream = 0xA1;
inline constexpr std::uint64_t kCellStream = 0xB2;
inline constexpr std::uint64_t kMixtureEvalStream = 0xC3;

}  // namespace coevogan
