#include "coevogan/mixture.hpp"

#include <cmath>
#include <stdexcept>

namespace coevogan {

bool is_simplex(const MixtureWeights& w, double tol) {
  if (w.size() == 0) return false;
  if (w.minCoeff() < 0.0 || w.maxCoeff() > 1.0) return false;
  return std::abs(w.sum() - 1.0) <= tol;
}

MixtureWeights repair_weights(MixtureWeights w) {
  w = w.cwiseMax(0.0).cwiseMin(1.0);
  const double sum = w.sum();
  if (sum <= 0.0) return MixtureWeights::Constant(w.size(), 1.0 / static_cast<double>(w.size()));
  return w / sum;
}

Batch sample_mixture(const MlpSpec& gen_spec, const MixtureCandidate& cand, int n,
                     const LatentSpec& latent, Rng& rng) {
  if (cand.generators.empty() ||
      cand.weights.size() != static_cast<Eigen::Index>(cand.generators.size()))
    throw std::invalid_argument("sample_mixture: generators/weights mismatch");
  if (!is_simplex(cand.weights)) throw std::invalid_argument("sample_mixture: invalid simplex");

  std::vector<int> component(n);
  const std::span<const double> probs(cand.weights.data(),
                                      static_cast<std::size_t>(cand.weights.size()));
  for (int i = 0; i < n; ++i) component[i] = pick_weighted(probs, rng);
  const Batch latents = sample_latent(latent, n, rng);

  const int out_dim = gen_spec.layer_sizes.back();
  Batch out(n, out_dim);
  for (std::size_t g = 0; g < cand.generators.size(); ++g) {
    std::vector<int> rows;
    for (int i = 0; i < n; ++i)
      if (component[i] == static_cast<int>(g)) rows.push_back(i);
    if (rows.empty()) continue;
    Batch z(rows.size(), latents.cols());
    for (std::size_t r = 0; r < rows.size(); ++r) z.row(r) = latents.row(rows[r]);
    const Batch mapped = forward(gen_spec, cand.generators[g].params, z);
    for (std::size_t r = 0; r < rows.size(); ++r) out.row(rows[r]) = mapped.row(r);
  }
  return out;
}

double score_mixture(const MlpSpec& gen_spec, const MixtureCandidate& cand,
                     const MixtureMetric& metric, int eval_samples, const LatentSpec& latent,
                     Rng& rng) {
  return metric(sample_mixture(gen_spec, cand, eval_samples, latent, rng));
}

MixtureCandidate es_1plus1_step(const MlpSpec& gen_spec, MixtureCandidate cand,
                                const MixtureMetric& metric, const LatentSpec& latent,
                                const MixtureEsConfig& cfg, Rng& rng) {
  if (std::isnan(cand.score))
    throw std::invalid_argument("es_1plus1_step: candidate must be scored first");

  MixtureCandidate offspring = cand;
  MixtureWeights perturbed = cand.weights;
  for (Eigen::Index i = 0; i < perturbed.size(); ++i)
    perturbed[i] += cfg.mutation_scale * standard_normal(rng);
  offspring.weights = repair_weights(std::move(perturbed));
  offspring.score = score_mixture(gen_spec, offspring, metric, cfg.eval_samples, latent, rng);

  return offspring.score <= cand.score ? offspring : cand;
}

}  // namespace coevogan
