#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "coevogan/data.hpp"
#include "coevogan/metrics.hpp"

using namespace coevogan;

TEST_CASE("ring centers sit on the circle at equal angles") {
  const SyntheticDataset ds = make_ring(4, 1.0, 0.05);
  REQUIRE(ds.mode_centers.size() == 4);
  const std::vector<Eigen::Vector2d> expected = {
      {1.0, 0.0}, {0.0, 1.0}, {-1.0, 0.0}, {0.0, -1.0}};
  for (int i = 0; i < 4; ++i)
    CHECK((ds.mode_centers[i] - expected[i]).norm() <= 1e-12);
}

TEST_CASE("ring centers are rotation-invariant up to relabeling") {
  const int modes = 8;
  const SyntheticDataset ds = make_ring(modes, 2.0, 0.05);
  const double angle = 2.0 * std::numbers::pi / modes;
  Eigen::Matrix2d rot;
  rot << std::cos(angle), -std::sin(angle), std::sin(angle), std::cos(angle);
  for (int i = 0; i < modes; ++i) {
    const Eigen::Vector2d rotated = rot * ds.mode_centers[i];
    CHECK((rotated - ds.mode_centers[(i + 1) % modes]).norm() <= 1e-12);
  }
}

TEST_CASE("zero std puts every sample exactly on a center") {
  const SyntheticDataset ds = make_ring(8, 2.0, 0.0);
  Rng rng = make_rng(5);
  const Batch samples = sample_real(ds, 200, rng);
  for (int i = 0; i < samples.rows(); ++i) {
    double best = 1e9;
    for (const auto& c : ds.mode_centers)
      best = std::min(best, (samples.row(i).transpose() - c).norm());
    CHECK(best <= 1e-12);
  }
}

TEST_CASE("lattice dataset covers side^2 centers") {
  const SyntheticDataset ds = make_grid(3, 2.0, 0.01);
  CHECK(ds.mode_centers.size() == 9);
  CHECK((ds.mode_centers.front() - Eigen::Vector2d(-2.0, -2.0)).norm() <= 1e-12);
  CHECK((ds.mode_centers.back() - Eigen::Vector2d(2.0, 2.0)).norm() <= 1e-12);
  const SyntheticDataset single = make_grid(1);
  CHECK(single.mode_centers.size() == 1);
  CHECK(single.mode_centers[0].norm() == 0.0);
}

TEST_CASE("sampling is deterministic under a fixed seed") {
  const SyntheticDataset ds = make_ring();
  Rng a = make_rng(99);
  Rng b = make_rng(99);
  CHECK(sample_real(ds, 50, a) == sample_real(ds, 50, b));
  const LatentSpec latent{8};
  Rng c = make_rng(123);
  Rng d = make_rng(123);
  CHECK(sample_latent(latent, 50, c) == sample_latent(latent, 50, d));
}

TEST_CASE("batch shapes: real width 2, latent width = dimension") {
  const SyntheticDataset ds = make_ring();
  Rng rng = make_rng(1);
  const Batch real = sample_real(ds, 10, rng);
  CHECK(real.rows() == 10);
  CHECK(real.cols() == 2);
  const Batch z = sample_latent(LatentSpec{5}, 7, rng);
  CHECK(z.rows() == 7);
  CHECK(z.cols() == 5);
}

TEST_CASE("modes are drawn uniformly: 10000 ring samples, counts in [1150, 1350]") {
  const SyntheticDataset ds = make_ring(8, 2.0, 0.05);
  Rng rng = make_rng(2718);
  const Batch samples = sample_real(ds, 10000, rng);
  const ModeHistogram hist = assign_modes(samples, ds.mode_centers, ds.mode_std);
  CHECK(hist.unassigned < 150);  // 3-sigma radius keeps ~99.7% per mode
  for (long c : hist.counts) {
    CHECK(c >= 1150);
    CHECK(c <= 1350);
  }
}

TEST_CASE("latent mean over 100000 draws is within 0.02 per coordinate") {
  Rng rng = make_rng(31415);
  const Batch z = sample_latent(LatentSpec{4}, 100000, rng);
  const Eigen::VectorXd mean = z.colwise().mean();
  for (int j = 0; j < 4; ++j) CHECK(std::abs(mean[j]) <= 0.02);
}

TEST_CASE("input validation") {
  CHECK_THROWS_AS(make_ring(0), std::invalid_argument);
  CHECK_THROWS_AS(make_grid(0), std::invalid_argument);
  const SyntheticDataset ds = make_ring();
  Rng rng = make_rng(1);
  CHECK_THROWS_AS(sample_real(ds, 0, rng), std::invalid_argument);
  CHECK_THROWS_AS(sample_latent(LatentSpec{0}, 3, rng), std::invalid_argument);
}
