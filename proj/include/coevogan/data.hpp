#pragma once

#include <vector>

#include <Eigen/Core>

#include "coevogan/nn.hpp"
#include "coevogan/rng.hpp"

namespace coevogan {

enum class DatasetKind { Ring, Grid };

/// Synthetic 2-D target distribution: an equally weighted Gaussian mixture
/// whose centers sit on a ring or a square lattice.
struct SyntheticDataset {
  DatasetKind kind = DatasetKind::Ring;
  std::vector<Eigen::Vector2d> mode_centers;
  double mode_std = 0.05;
};

/// Centers at angle 2*pi*i/modes on a circle of the given radius.
SyntheticDataset make_ring(int modes = 8, double radius = 2.0, double std_dev = 0.05);

/// side*side centers on a regular lattice spanning [-extent, extent]^2.
SyntheticDataset make_grid(int side, double extent = 2.0, double std_dev = 0.05);

/// n samples, one per row: a uniformly chosen center plus isotropic noise.
Batch sample_real(const SyntheticDataset& ds, int n, Rng& rng);

struct LatentSpec {
  int dimension = 8;  // standard normal entries
};

Batch sample_latent(const LatentSpec& spec, int n, Rng& rng);

/// Dataset + latent source + batch size bundled for training loops.
struct BatchSource {
  SyntheticDataset dataset;
  LatentSpec latent;
  int batch_size = 100;

  Batch real(Rng& rng) const { return sample_real(dataset, batch_size, rng); }
  Batch noise(Rng& rng) const { return sample_latent(latent, batch_size, rng); }
};

}  // namespace coevogan
