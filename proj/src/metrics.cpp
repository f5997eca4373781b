#include "coevogan/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <numeric>
#include <stdexcept>

#include <Eigen/Dense>

namespace coevogan {

namespace {

// Symmetric PSD square root, eigenvalues clamped at the numerical floor.
Eigen::Matrix2d psd_sqrt(const Eigen::Matrix2d& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> eig(m);
  Eigen::Vector2d lambda = eig.eigenvalues().cwiseMax(0.0);
  return eig.eigenvectors() * lambda.cwiseSqrt().asDiagonal() * eig.eigenvectors().transpose();
}

void check_covariance(const GaussianSummary& s, const char* who) {
  if ((s.covariance - s.covariance.transpose()).cwiseAbs().maxCoeff() > 1e-12)
    throw std::invalid_argument(std::string(who) + ": covariance not symmetric");
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> eig(s.covariance);
  if (eig.eigenvalues().minCoeff() < -1e-10)
    throw std::invalid_argument(std::string(who) + ": covariance not positive semidefinite");
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

// Midranks of the pooled sample; values assumed pooled in `pooled`.
std::vector<double> midranks(const std::vector<double>& pooled) {
  const std::size_t n = pooled.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t i, std::size_t j) { return pooled[i] < pooled[j]; });
  std::vector<double> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && pooled[order[j + 1]] == pooled[order[i]]) ++j;
    const double r = 0.5 * (static_cast<double>(i + 1) + static_cast<double>(j + 1));
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r;
    i = j + 1;
  }
  return ranks;
}

double u_statistic_from_mask(const std::vector<double>& ranks, const std::vector<bool>& in_a,
                             std::size_t n_a) {
  double rank_sum_a = 0.0;
  for (std::size_t i = 0; i < ranks.size(); ++i)
    if (in_a[i]) rank_sum_a += ranks[i];
  return rank_sum_a - static_cast<double>(n_a) * (n_a + 1) / 2.0;
}

double exact_two_sided_p(const std::vector<double>& pooled, std::size_t n_a) {
  const std::size_t n = pooled.size();
  const std::vector<double> ranks = midranks(pooled);
  std::vector<bool> mask(n, false);
  std::fill(mask.begin(), mask.begin() + n_a, true);
  const double u_obs = u_statistic_from_mask(ranks, mask, n_a);
  const double center = static_cast<double>(n_a) * (n - n_a) / 2.0;
  const double dev_obs = std::abs(u_obs - center);

  // Iterate all C(n, n_a) label assignments via the sorted-mask permutation
  // order; prev_permutation enumerates each combination exactly once.
  std::sort(mask.begin(), mask.end(), std::greater<bool>());
  long total = 0;
  long at_least = 0;
  do {
    ++total;
    const double u = u_statistic_from_mask(ranks, mask, n_a);
    if (std::abs(u - center) >= dev_obs - 1e-12) ++at_least;
  } while (std::prev_permutation(mask.begin(), mask.end()));
  return static_cast<double>(at_least) / static_cast<double>(total);
}

double approx_two_sided_p(const std::vector<double>& pooled, std::size_t n_a) {
  const std::size_t n = pooled.size();
  const std::size_t n_b = n - n_a;
  const std::vector<double> ranks = midranks(pooled);
  std::vector<bool> mask(n, false);
  std::fill(mask.begin(), mask.begin() + n_a, true);
  const double u = u_statistic_from_mask(ranks, mask, n_a);
  const double mean_u = static_cast<double>(n_a) * n_b / 2.0;

  // Tie correction over pooled value multiplicities.
  std::vector<double> sorted = pooled;
  std::sort(sorted.begin(), sorted.end());
  double tie_term = 0.0;
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && sorted[j + 1] == sorted[i]) ++j;
    const double t = static_cast<double>(j - i + 1);
    tie_term += t * t * t - t;
    i = j + 1;
  }
  const double nn = static_cast<double>(n);
  const double var_u =
      (static_cast<double>(n_a) * n_b / 12.0) * ((nn + 1.0) - tie_term / (nn * (nn - 1.0)));
  if (var_u <= 0.0) return 1.0;  // all values tied
  const double z = (u - mean_u) / std::sqrt(var_u);
  return std::min(1.0, 2.0 * (1.0 - normal_cdf(std::abs(z))));
}

}  // namespace

double frechet_distance(const GaussianSummary& real, const GaussianSummary& fake) {
  check_covariance(real, "frechet_distance");
  check_covariance(fake, "frechet_distance");
  const Eigen::Matrix2d sqrt_fake = psd_sqrt(fake.covariance);
  const Eigen::Matrix2d product = sqrt_fake * real.covariance * sqrt_fake;
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> eig(0.5 * (product + product.transpose()));
  const double cross_trace = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt().sum();
  double fd = (real.mean - fake.mean).squaredNorm() + real.covariance.trace() +
              fake.covariance.trace() - 2.0 * cross_trace;
  if (fd < 0.0 && fd > -1e-8) fd = 0.0;
  return fd;
}

double frechet_distance(const Batch& real, const Batch& fake) {
  if (real.rows() < 3 || fake.rows() < 3)
    throw std::invalid_argument("frechet_distance: need at least 3 samples per batch");
  return frechet_distance(fit_gaussian(real), fit_gaussian(fake));
}

long ModeHistogram::assigned_total() const {
  return std::accumulate(counts.begin(), counts.end(), 0L);
}

ModeHistogram assign_modes(const Batch& samples, const std::vector<Eigen::Vector2d>& centers,
                           double mode_std) {
  if (centers.empty()) throw std::invalid_argument("assign_modes: no centers");
  ModeHistogram hist;
  hist.counts.assign(centers.size(), 0);
  const double radius = 3.0 * mode_std;
  for (Eigen::Index i = 0; i < samples.rows(); ++i) {
    const Eigen::Vector2d p = samples.row(i).transpose();
    int best = 0;
    double best_dist = (p - centers[0]).norm();
    for (std::size_t c = 1; c < centers.size(); ++c) {
      const double d = (p - centers[c]).norm();
      if (d < best_dist) {
        best_dist = d;
        best = static_cast<int>(c);
      }
    }
    if (best_dist <= radius)
      ++hist.counts[best];
    else
      ++hist.unassigned;
  }
  return hist;
}

std::vector<double> mode_proportions(const ModeHistogram& hist) {
  std::vector<double> p(hist.counts.size(), 0.0);
  const long total = hist.assigned_total();
  if (total == 0) return p;
  for (std::size_t i = 0; i < p.size(); ++i)
    p[i] = static_cast<double>(hist.counts[i]) / static_cast<double>(total);
  return p;
}

double tvd(const std::vector<double>& p, const std::vector<double>& q) {
  if (p.size() != q.size()) throw std::invalid_argument("tvd: length mismatch");
  auto check_simplex = [](const std::vector<double>& v) {
    const double sum = std::accumulate(v.begin(), v.end(), 0.0);
    if (std::abs(sum - 1.0) > 1e-9) throw std::invalid_argument("tvd: input does not sum to 1");
  };
  check_simplex(p);
  check_simplex(q);
  double acc = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) acc += std::abs(p[i] - q[i]);
  return 0.5 * acc;
}

int mode_coverage(const ModeHistogram& hist, double min_fraction) {
  if (min_fraction <= 0.0 || min_fraction >= 1.0)
    throw std::invalid_argument("mode_coverage: min_fraction must be in (0,1)");
  const long total = hist.assigned_total();
  if (total == 0) return 0;
  int covered = 0;
  for (long c : hist.counts)
    if (static_cast<double>(c) / static_cast<double>(total) >= min_fraction) ++covered;
  return covered;
}

double mann_whitney_p(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("mann_whitney_p: empty sample");
  std::vector<double> pooled = a;
  pooled.insert(pooled.end(), b.begin(), b.end());
  if (a.size() <= 8 && b.size() <= 8) return exact_two_sided_p(pooled, a.size());
  return approx_two_sided_p(pooled, a.size());
}

std::vector<double> holm_adjust(const std::vector<double>& raw_p) {
  const std::size_t k = raw_p.size();
  std::vector<std::size_t> order(k);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t i, std::size_t j) { return raw_p[i] < raw_p[j]; });
  std::vector<double> adjusted(k, 0.0);
  double running_max = 0.0;
  for (std::size_t rank = 0; rank < k; ++rank) {
    const double scaled = std::min(1.0, static_cast<double>(k - rank) * raw_p[order[rank]]);
    running_max = std::max(running_max, scaled);
    adjusted[order[rank]] = running_max;
  }
  return adjusted;
}

std::vector<PairwiseComparison> ranksum_holm(
    const std::map<std::string, std::vector<double>>& scores_by_method) {
  if (scores_by_method.size() < 2)
    throw std::invalid_argument("ranksum_holm: need at least 2 methods");
  for (const auto& [name, scores] : scores_by_method)
    if (scores.size() < 3)
      throw std::invalid_argument("ranksum_holm: method '" + name + "' has fewer than 3 runs");

  std::vector<PairwiseComparison> pairs;
  for (auto it = scores_by_method.begin(); it != scores_by_method.end(); ++it) {
    for (auto jt = std::next(it); jt != scores_by_method.end(); ++jt) {
      PairwiseComparison cmp;
      cmp.method_a = it->first;
      cmp.method_b = jt->first;
      cmp.raw_p = mann_whitney_p(it->second, jt->second);
      pairs.push_back(std::move(cmp));
    }
  }
  std::vector<double> raw(pairs.size());
  for (std::size_t i = 0; i < pairs.size(); ++i) raw[i] = pairs[i].raw_p;
  const std::vector<double> adj = holm_adjust(raw);
  for (std::size_t i = 0; i < pairs.size(); ++i) pairs[i].adjusted_p = adj[i];
  return pairs;
}

}  // namespace coevogan
