#pragma once

#include <functional>
#include <limits>
#include <vector>

#include "coevogan/coevolution.hpp"
#include "coevogan/data.hpp"

namespace coevogan {

/// Simplex element over a neighborhood's generators.
using MixtureWeights = Eigen::VectorXd;

bool is_simplex(const MixtureWeights& w, double tol = 1e-9);

/// Clamp to [0,1] and renormalize; an all-zero vector falls back to uniform.
MixtureWeights repair_weights(MixtureWeights w);

/// A neighborhood of generators with mixture weights and the score of the
/// last accepted evaluation (lower is better).
struct MixtureCandidate {
  std::vector<Individual> generators;
  MixtureWeights weights;
  double score = std::numeric_limits<double>::quiet_NaN();
};

/// Sample-batch scorer, lower is better.
using MixtureMetric = std::function<double(const Batch&)>;

/// n points, one per row: each drawn by picking generator i with probability
/// weights[i] and mapping a fresh latent draw through it.
Batch sample_mixture(const MlpSpec& gen_spec, const MixtureCandidate& cand, int n,
                     const LatentSpec& latent, Rng& rng);

struct MixtureEsConfig {
  double mutation_scale = 0.01;  // per-coordinate Gaussian std
  int eval_samples = 512;        // fresh batch size per scoring
};

/// (1+1)-ES step on the weights: Gaussian perturbation, repair, fresh-batch
/// scoring, elitist acceptance (ties accept the offspring). The candidate's
/// stored score never increases.
MixtureCandidate es_1plus1_step(const MlpSpec& gen_spec, MixtureCandidate cand,
                                const MixtureMetric& metric, const LatentSpec& latent,
                                const MixtureEsConfig& cfg, Rng& rng);

/// Scores a candidate on one fresh batch.
double score_mixture(const MlpSpec& gen_spec, const MixtureCandidate& cand,
                     const MixtureMetric& metric, int eval_samples, const LatentSpec& latent,
                     Rng& rng);

}  // namespace coevogan
