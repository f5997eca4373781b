#pragma once

#include <map>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "coevogan/nn.hpp"

namespace coevogan {

/// First and second moments of a 2-D sample set.
struct GaussianSummary {
  Eigen::Vector2d mean = Eigen::Vector2d::Zero();
  Eigen::Matrix2d covariance = Eigen::Matrix2d::Zero();
};

/// Sample mean and (n-1)-normalized covariance. Requires >= 3 rows.
template <typename Derived>
GaussianSummary fit_gaussian(const Eigen::MatrixBase<Derived>& samples) {
  GaussianSummary s;
  const Eigen::MatrixXd x = samples;
  s.mean = x.colwise().mean();
  const Eigen::MatrixXd centered = x.rowwise() - s.mean.transpose();
  s.covariance = centered.transpose() * centered / static_cast<double>(x.rows() - 1);
  return s;
}

/// Squared mean gap plus covariance trace term:
///   |mu_r - mu_f|^2 + tr(S_r + S_f - 2 (S_r S_f)^(1/2)).
/// The matrix square root is taken through the eigendecomposition of the
/// symmetrized product; tiny negative residue is clamped to zero.
double frechet_distance(const GaussianSummary& real, const GaussianSummary& fake);
double frechet_distance(const Batch& real, const Batch& fake);

struct ModeHistogram {
  std::vector<long> counts;
  long unassigned = 0;

  long assigned_total() const;
  long total() const { return assigned_total() + unassigned; }
};

/// Nearest-center assignment within a 3*mode_std radius; farther samples are
/// left unassigned.
ModeHistogram assign_modes(const Batch& samples, const std::vector<Eigen::Vector2d>& centers,
                           double mode_std);

/// Fraction of assigned samples per mode; empty histogram yields all zeros.
std::vector<double> mode_proportions(const ModeHistogram& hist);

/// Total variation distance: 0.5 * sum |p_i - q_i|. Both arguments must be
/// probability vectors of equal length.
double tvd(const std::vector<double>& p, const std::vector<double>& q);

/// Number of modes holding at least min_fraction of the assigned samples.
int mode_coverage(const ModeHistogram& hist, double min_fraction);

inline double default_coverage_fraction(int n_modes) { return 1.0 / (4.0 * n_modes); }

/// Two-sided Mann-Whitney U p-value with midranks. Exact enumeration over all
/// label assignments when both samples have <= 8 observations, otherwise the
/// normal approximation with tie correction.
double mann_whitney_p(const std::vector<double>& a, const std::vector<double>& b);

/// Holm step-down adjustment; input order is preserved in the output.
std::vector<double> holm_adjust(const std::vector<double>& raw_p);

struct PairwiseComparison {
  std::string method_a;
  std::string method_b;
  double raw_p = 1.0;
  double adjusted_p = 1.0;
};

/// All pairwise rank-sum tests between methods, Holm-adjusted across the
/// whole pair set. Requires >= 2 methods with >= 3 runs each.
std::vector<PairwiseComparison> ranksum_holm(
    const std::map<std::string, std::vector<double>>& scores_by_method);

}  // namespace coevogan
