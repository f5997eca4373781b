#include "coevogan/data.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace coevogan {

SyntheticDataset make_ring(int modes, double radius, double std_dev) {
  if (modes < 1) throw std::invalid_argument("make_ring: modes must be >= 1");
  if (std_dev < 0.0) throw std::invalid_argument("make_ring: std_dev must be >= 0");
  SyntheticDataset ds;
  ds.kind = DatasetKind::Ring;
  ds.mode_std = std_dev;
  ds.mode_centers.reserve(modes);
  for (int i = 0; i < modes; ++i) {
    const double angle = 2.0 * std::numbers::pi * i / modes;
    ds.mode_centers.emplace_back(radius * std::cos(angle), radius * std::sin(angle));
  }
  return ds;
}

SyntheticDataset make_grid(int side, double extent, double std_dev) {
  if (side < 1) throw std::invalid_argument("make_grid: side must be >= 1");
  if (std_dev < 0.0) throw std::invalid_argument("make_grid: std_dev must be >= 0");
  SyntheticDataset ds;
  ds.kind = DatasetKind::Grid;
  ds.mode_std = std_dev;
  ds.mode_centers.reserve(static_cast<std::size_t>(side) * side);
  for (int r = 0; r < side; ++r) {
    for (int c = 0; c < side; ++c) {
      const double x = side == 1 ? 0.0 : -extent + 2.0 * extent * c / (side - 1);
      const double y = side == 1 ? 0.0 : -extent + 2.0 * extent * r / (side - 1);
      ds.mode_centers.emplace_back(x, y);
    }
  }
  return ds;
}

Batch sample_real(const SyntheticDataset& ds, int n, Rng& rng) {
  if (n < 1) throw std::invalid_argument("sample_real: n must be >= 1");
  std::uniform_int_distribution<int> which(0, static_cast<int>(ds.mode_centers.size()) - 1);
  std::normal_distribution<double> noise(0.0, 1.0);
  Batch out(n, 2);
  for (int i = 0; i < n; ++i) {
    const Eigen::Vector2d& center = ds.mode_centers[which(rng)];
    out(i, 0) = center.x() + ds.mode_std * noise(rng);
    out(i, 1) = center.y() + ds.mode_std * noise(rng);
  }
  return out;
}

Batch sample_latent(const LatentSpec& spec, int n, Rng& rng) {
  if (n < 1) throw std::invalid_argument("sample_latent: n must be >= 1");
  if (spec.dimension < 1) throw std::invalid_argument("sample_latent: dimension must be >= 1");
  std::normal_distribution<double> noise(0.0, 1.0);
  Batch out(n, spec.dimension);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < spec.dimension; ++j) out(i, j) = noise(rng);
  return out;
}

}  // namespace coevogan
