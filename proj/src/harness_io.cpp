#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "coevogan/harness.hpp"

namespace coevogan {

namespace {

// RFC-style CSV quoting: only fields containing delimiters or quotes are
// quoted, inner quotes doubled.
std::string csv_escape(const std::string& field) {
  if (field.find_first_of(",\"\r\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string current;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          current += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        current += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(current));
      current.clear();
    } else {
      current += c;
    }
  }
  fields.push_back(std::move(current));
  return fields;
}

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

double mean_of(const std::vector<double>& v) {
  double sum = 0.0;
  for (double x : v) sum += x;
  return sum / static_cast<double>(v.size());
}

double sample_std(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double acc = 0.0;
  for (double x : v) acc += (x - m) * (x - m);
  return std::sqrt(acc / static_cast<double>(v.size() - 1));
}

}  // namespace

std::string format_double(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.9g", x);
  return buf;
}

double quantile(std::vector<double> values, double p) {
  if (values.empty()) throw std::invalid_argument("quantile: empty input");
  std::sort(values.begin(), values.end());
  const double pos = p * static_cast<double>(values.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = static_cast<std::size_t>(std::ceil(pos));
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

void write_csv_header(std::ostream& out, int n_cells) {
  out << "epoch,gan_evals,divergences,best_fd,best_cell,tvd,mode_coverage,"
         "n_minmax,n_leastsquare,n_heuristic,mean_gen_lr,mean_disc_lr";
  for (int c = 0; c < n_cells; ++c) out << ",fd_" << c;
  out << "\n";
}

void write_csv_row(std::ostream& out, const MetricReport& r) {
  out << r.epoch << ',' << r.gan_evaluations << ',' << r.divergences << ','
      << csv_escape(format_double(r.best_fd)) << ',' << r.best_cell << ','
      << csv_escape(format_double(r.tvd)) << ',' << r.mode_coverage << ',' << r.loss_counts[0]
      << ',' << r.loss_counts[1] << ',' << r.loss_counts[2] << ','
      << csv_escape(format_double(r.mean_gen_lr)) << ','
      << csv_escape(format_double(r.mean_disc_lr));
  for (double fd : r.cell_fd) out << ',' << csv_escape(format_double(fd));
  out << "\n";
}

std::vector<MetricReport> parse_run_csv(std::istream& in) {
  std::vector<MetricReport> reports;
  std::string line;
  if (!std::getline(in, line)) return reports;
  const std::size_t n_cols = split_csv_line(line).size();
  if (n_cols < 13) throw std::runtime_error("run.csv: malformed header");
  const std::size_t n_cells = n_cols - 12;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    const std::vector<std::string> f = split_csv_line(line);
    if (f.size() != n_cols) throw std::runtime_error("run.csv: malformed row");
    MetricReport r;
    r.epoch = std::stoi(f[0]);
    r.gan_evaluations = std::stol(f[1]);
    r.divergences = std::stol(f[2]);
    r.best_fd = std::stod(f[3]);
    r.best_cell = std::stoi(f[4]);
    r.tvd = std::stod(f[5]);
    r.mode_coverage = std::stoi(f[6]);
    r.loss_counts = {std::stol(f[7]), std::stol(f[8]), std::stol(f[9])};
    r.mean_gen_lr = std::stod(f[10]);
    r.mean_disc_lr = std::stod(f[11]);
    r.cell_fd.reserve(n_cells);
    for (std::size_t c = 0; c < n_cells; ++c) r.cell_fd.push_back(std::stod(f[12 + c]));
    reports.push_back(std::move(r));
  }
  return reports;
}

void write_summary(std::ostream& out, const RunLog& log) {
  const RunConfig& cfg = log.config;
  out << "variant = " << to_string(cfg.variant) << "\n";
  out << "seed = " << cfg.seed << "\n";
  out << "grid = " << cfg.grid_rows << "x" << cfg.grid_cols << "\n";
  out << "mode = " << to_string(cfg.mode) << "\n";
  out << "dataset = " << (cfg.dataset == DatasetKind::Ring ? "ring" : "grid") << "\n";
  out << "epochs = " << cfg.epochs << "\n";
  out << "epochs_completed = " << log.reports.size() << "\n";
  out << "best_fd = " << format_double(log.best_fd) << "\n";
  out << "best_epoch = " << log.best_epoch << "\n";
  out << "final_fd = " << format_double(log.final_fd) << "\n";
  out << "final_cell = " << log.final_cell << "\n";
  out << "final_tvd = " << format_double(log.final_tvd) << "\n";
  out << "final_coverage = " << log.final_coverage << "\n";
  out << "gan_evaluations = " << log.gan_evaluations << "\n";
  out << "divergences = " << log.divergences << "\n";
  out << "wall_time_s = " << format_double(log.wall_time_s) << "\n";
  out << "params_digest = " << log.params_digest << "\n";
  out << "status = " << (log.failed ? "failed" : "ok") << "\n";
  if (!log.failed_cells.empty()) {
    out << "failed_cells =";
    for (int c : log.failed_cells) out << " " << c;
    out << "\n";
  }
}

std::map<std::string, std::string> parse_key_value_file(std::istream& in) {
  std::map<std::string, std::string> kv;
  std::string line;
  while (std::getline(in, line)) {
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) continue;
    kv[trim(t.substr(0, eq))] = trim(t.substr(eq + 1));
  }
  return kv;
}

std::map<std::string, std::vector<double>> collect_run_scores(
    const std::vector<std::string>& directories) {
  namespace fs = std::filesystem;
  std::map<std::string, std::vector<double>> scores;
  for (const std::string& dir : directories) {
    if (!fs::exists(dir)) throw std::runtime_error("no such directory: " + dir);
    for (const auto& entry : fs::recursive_directory_iterator(dir)) {
      if (!entry.is_regular_file() || entry.path().filename() != "summary.txt") continue;
      std::ifstream in(entry.path());
      const auto kv = parse_key_value_file(in);
      const auto variant = kv.find("variant");
      const auto best = kv.find("best_fd");
      if (variant == kv.end() || best == kv.end()) continue;
      const auto status = kv.find("status");
      if (status != kv.end() && status->second != "ok") continue;
      scores[variant->second].push_back(std::stod(best->second));
    }
  }
  return scores;
}

ComparisonReport compare_runs(const std::map<std::string, std::vector<double>>& scores_by_method,
                              double alpha) {
  for (const auto& [name, runs] : scores_by_method)
    if (runs.size() < 3)
      throw std::invalid_argument("compare_runs: method '" + name + "' has fewer than 3 runs");

  ComparisonReport report;
  report.alpha = alpha;
  for (const auto& [name, runs] : scores_by_method) {
    MethodStats stats;
    stats.name = name;
    stats.runs = static_cast<int>(runs.size());
    stats.mean = mean_of(runs);
    const double sd = sample_std(runs);
    stats.std_pct = stats.mean == 0.0 ? 0.0 : 100.0 * sd / std::abs(stats.mean);
    stats.median = quantile(runs, 0.5);
    stats.iqr = quantile(runs, 0.75) - quantile(runs, 0.25);
    report.methods.push_back(std::move(stats));
  }
  if (scores_by_method.size() >= 2) report.pairwise = ranksum_holm(scores_by_method);
  return report;
}

std::string format_comparison(const ComparisonReport& report) {
  std::ostringstream out;
  out << "method,runs,mean,std_pct,median,iqr\n";
  for (const MethodStats& m : report.methods) {
    out << m.name << ',' << m.runs << ',' << format_double(m.mean) << ','
        << format_double(m.std_pct) << ',' << format_double(m.median) << ','
        << format_double(m.iqr) << "\n";
  }
  if (!report.pairwise.empty()) {
    out << "\npair,raw_p,holm_p,significant(alpha=" << format_double(report.alpha) << ")\n";
    for (const PairwiseComparison& p : report.pairwise) {
      out << p.method_a << " vs " << p.method_b << ',' << format_double(p.raw_p) << ','
          << format_double(p.adjusted_p) << ',' << (p.adjusted_p < report.alpha ? "yes" : "no")
          << "\n";
    }
  }
  return out.str();
}

}  // namespace coevogan
