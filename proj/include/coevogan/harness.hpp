#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "coevogan/grid.hpp"

namespace coevogan {

/// The six training methods under comparison. The four grid methods share the
/// spatial coevolution engine and differ only in their loss menus; e-gan and
/// gan-bce are single-cell baselines.
enum class MethodVariant { Mustangs, LipBCE, LipMSE, LipHEU, EGAN, GANBCE };

MethodVariant parse_variant(const std::string& name);  // throws on unknown names
const char* to_string(MethodVariant v);
bool is_grid_variant(MethodVariant v);

RunMode parse_run_mode(const std::string& name);
const char* to_string(RunMode m);

struct RunConfig {
  MethodVariant variant = MethodVariant::Mustangs;
  int grid_rows = 3;
  int grid_cols = 3;
  int epochs = 150;
  std::uint64_t seed = 1;
  RunMode mode = RunMode::Sequential;
  std::string out_dir;  // empty = in-memory only

  // networks
  int latent_dim = 8;
  int hidden_layers = 2;
  int hidden_size = 32;
  double initial_learning_rate = 2e-4;

  // data
  DatasetKind dataset = DatasetKind::Ring;
  int data_modes = 8;          // ring
  double data_radius = 2.0;    // ring
  int data_grid_side = 5;      // lattice
  double data_extent = 2.0;    // lattice
  double data_std = 0.05;
  int batch_size = 100;

  // mutation; empty menu means "use the variant's menu"
  std::vector<LossKind> loss_menu;
  std::vector<double> loss_probs;  // empty = uniform over the menu
  int steps_per_mutation = 20;
  int tournament_size = 2;
  double hyperparam_mutation_probability = 0.5;
  double hyperparam_mutation_scale = 1e-4;

  // mixture & metrics
  double mixture_mutation_scale = 0.01;
  int metric_samples = 512;      // ES scoring and per-epoch reporting
  int reference_samples = 4096;  // real reference for the Frechet metric
};

/// Resolves the variant's loss menu and grid shape (single-cell variants are
/// forced to 1x1) and validates everything. Throws on invalid settings.
RunConfig apply_variant_defaults(RunConfig cfg);

Networks make_networks(const RunConfig& cfg);
SyntheticDataset make_dataset(const RunConfig& cfg);
MutationConfig make_mutation_config(const RunConfig& cfg);

struct RunLog {
  RunConfig config;
  std::vector<MetricReport> reports;
  double best_fd = std::numeric_limits<double>::quiet_NaN();  // min over epochs
  int best_epoch = -1;
  double final_fd = std::numeric_limits<double>::quiet_NaN();  // fresh end-of-run evaluation
  int final_cell = -1;
  double final_tvd = std::numeric_limits<double>::quiet_NaN();
  int final_coverage = 0;
  Eigen::VectorXd final_weights;
  std::string params_digest;
  long gan_evaluations = 0;
  long divergences = 0;
  double wall_time_s = 0.0;
  bool failed = false;
  std::vector<int> failed_cells;
};

/// Executes one run to completion. When out_dir is set, run.csv is streamed
/// and flushed per epoch and summary.txt / weights.txt written at the end, so
/// partial runs leave a recoverable log.
RunLog run_experiment(const RunConfig& cfg);

struct EganResult {
  Individual generator;
  int winner = -1;  // clone index; -1 when every clone diverged
  LossKind winner_kind = LossKind::Minmax;
  std::array<double, kNumLossKinds> clone_scores{};
};

/// One e-gan generation: three clones trained with the three losses, scored
/// by mean D(G(z)) on one shared batch, best kept (ties to the lowest index).
/// The caller trains the discriminator afterwards.
EganResult egan_generation(const Networks& nets, const Individual& gen, const Individual& disc,
                           const MutationConfig& cfg, const BatchSource& batches, Rng& rng,
                           CoevStats& stats);

// --- statistics over run sets -------------------------------------------

struct MethodStats {
  std::string name;
  int runs = 0;
  double mean = 0.0;
  double std_pct = 0.0;  // sample std / mean * 100
  double median = 0.0;
  double iqr = 0.0;
};

struct ComparisonReport {
  double alpha = 0.01;
  std::vector<MethodStats> methods;
  std::vector<PairwiseComparison> pairwise;
};

/// Per-method summary statistics of best scores plus the Holm-adjusted
/// pairwise rank-sum matrix. Requires >= 3 runs per method.
ComparisonReport compare_runs(const std::map<std::string, std::vector<double>>& scores_by_method,
                              double alpha);

std::string format_comparison(const ComparisonReport& report);

/// Linear-interpolation quantile (the spreadsheet convention): with sorted
/// values x_0..x_{n-1}, q(p) interpolates at index (n-1)*p.
double quantile(std::vector<double> values, double p);

// --- log file formats ----------------------------------------------------

/// Shortest round-trippable decimal with 9 significant digits ("%.9g").
std::string format_double(double x);

void write_csv_header(std::ostream& out, int n_cells);
void write_csv_row(std::ostream& out, const MetricReport& report);
std::vector<MetricReport> parse_run_csv(std::istream& in);

void write_summary(std::ostream& out, const RunLog& log);
std::map<std::string, std::string> parse_key_value_file(std::istream& in);

/// Scans each directory recursively for summary.txt files and groups their
/// best_fd values by the variant recorded inside.
std::map<std::string, std::vector<double>> collect_run_scores(
    const std::vector<std::string>& directories);

inline constexpr std::uint64_t kReferenceStream = 0xD4;
inline constexpr std::uint64_t kFinalEvalStream = 0xE5;

}  // namespace coevogan
