#include "coevogan/coevolution.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace coevogan {

namespace {

double interaction_fitness(const Networks& nets, const Individual& subject,
                           const std::vector<Individual>& opponents, const Batch& real_batch,
                           const Batch& latent_batch) {
  double fitness = 0.0;
  for (const Individual& opp : opponents) {
    const double value = subject.role == Role::Generator
                             ? gan_value(nets, subject.params, opp.params, real_batch, latent_batch)
                             : gan_value(nets, opp.params, subject.params, real_batch, latent_batch);
    fitness += subject.role == Role::Generator ? -value : value;
  }
  return fitness;
}

void sort_one(std::vector<Individual>& pop) {
  std::stable_sort(pop.begin(), pop.end(),
                   [](const Individual& a, const Individual& b) { return a.fitness > b.fitness; });
}

LossKind sample_loss_kind(const MutationConfig& cfg, Rng& rng, CoevStats& stats) {
  int idx = 0;
  if (cfg.loss_menu.size() > 1) idx = pick_weighted(cfg.selection_probabilities, rng);
  const LossKind kind = cfg.loss_menu[idx];
  ++stats.loss_counts[static_cast<int>(kind)];
  return kind;
}

}  // namespace

Individual make_individual(const MlpSpec& spec, Role role, double learning_rate, Rng& rng) {
  Individual ind;
  ind.params = init_params(spec, rng);
  ind.learning_rate = learning_rate;
  ind.adam = make_adam_state(static_cast<int>(ind.params.size()));
  ind.role = role;
  return ind;
}

void validate(const MutationConfig& cfg) {
  if (cfg.loss_menu.empty()) throw std::invalid_argument("MutationConfig: empty loss menu");
  if (cfg.loss_menu.size() != cfg.selection_probabilities.size())
    throw std::invalid_argument("MutationConfig: menu/probability length mismatch");
  const double sum = std::accumulate(cfg.selection_probabilities.begin(),
                                     cfg.selection_probabilities.end(), 0.0);
  if (std::abs(sum - 1.0) > 1e-12)
    throw std::invalid_argument("MutationConfig: selection probabilities must sum to 1");
  for (double p : cfg.selection_probabilities)
    if (p < 0.0) throw std::invalid_argument("MutationConfig: negative selection probability");
  if (cfg.steps_per_mutation < 1)
    throw std::invalid_argument("MutationConfig: steps_per_mutation must be positive");
  if (cfg.hyperparam_mutation_probability < 0.0 || cfg.hyperparam_mutation_probability > 1.0)
    throw std::invalid_argument("MutationConfig: hyperparam mutation probability out of [0,1]");
  if (cfg.hyperparam_mutation_scale < 0.0)
    throw std::invalid_argument("MutationConfig: hyperparam mutation scale must be >= 0");
  if (cfg.tournament_size < 1)
    throw std::invalid_argument("MutationConfig: tournament size must be positive");
}

CoevStats& CoevStats::operator+=(const CoevStats& other) {
  for (std::size_t i = 0; i < loss_counts.size(); ++i) loss_counts[i] += other.loss_counts[i];
  divergences += other.divergences;
  gan_evaluations += other.gan_evaluations;
  return *this;
}

void evaluate_all(const Networks& nets, PopulationPair& pop, const Batch& real_batch,
                  const Batch& latent_batch, CoevStats* stats) {
  if (pop.generators.size() != pop.discriminators.size() || pop.generators.empty())
    throw std::invalid_argument("evaluate_all: populations must be nonempty and equal-sized");
  for (Individual& g : pop.generators) g.fitness = 0.0;
  for (Individual& d : pop.discriminators) d.fitness = 0.0;
  for (Individual& g : pop.generators) {
    for (Individual& d : pop.discriminators) {
      const double value = gan_value(nets, g.params, d.params, real_batch, latent_batch);
      g.fitness -= value;
      d.fitness += value;
      if (stats) ++stats->gan_evaluations;
    }
  }
}

void sort_by_fitness(PopulationPair& pop) {
  sort_one(pop.generators);
  sort_one(pop.discriminators);
}

Individual tournament_select(const std::vector<Individual>& pop, int k, Rng& rng) {
  if (pop.empty()) throw std::invalid_argument("tournament_select: empty population");
  k = std::min<int>(k, static_cast<int>(pop.size()));
  // Partial Fisher-Yates over an index pool gives k distinct uniform draws.
  std::vector<int> indices(pop.size());
  std::iota(indices.begin(), indices.end(), 0);
  int best = -1;
  for (int i = 0; i < k; ++i) {
    std::uniform_int_distribution<int> pick(i, static_cast<int>(indices.size()) - 1);
    std::swap(indices[i], indices[pick(rng)]);
    if (best < 0 || pop[indices[i]].fitness > pop[best].fitness) best = indices[i];
  }
  return pop[best];
}

Individual mutate_hyperparams(Individual ind, const MutationConfig& cfg, Rng& rng) {
  if (uniform01(rng) < cfg.hyperparam_mutation_probability) {
    const double delta = cfg.hyperparam_mutation_scale * standard_normal(rng);
    ind.learning_rate =
        std::clamp(ind.learning_rate + delta, kMinLearningRate, kMaxLearningRate);
  }
  return ind;
}

Individual mutate_generator(const Networks& nets, const Individual& gen, const Individual& disc,
                            const MutationConfig& cfg, const BatchSource& batches, Rng& rng,
                            CoevStats& stats) {
  Individual offspring = mutate_hyperparams(gen, cfg, rng);
  const LossKind kind = sample_loss_kind(cfg, rng, stats);
  bool diverged = false;
  for (int step = 0; step < cfg.steps_per_mutation && !diverged; ++step) {
    const Batch latent = batches.noise(rng);
    const ParamVector grad = generator_grad(kind, nets, offspring.params, disc.params, latent);
    diverged = !adam_step(offspring.params, grad, offspring.adam, offspring.learning_rate);
  }
  if (diverged || !offspring.params.allFinite()) {
    ++stats.divergences;
    return gen;
  }
  return offspring;
}

Individual mutate_discriminator(const Networks& nets, const Individual& disc,
                                const Individual& gen, const MutationConfig& cfg,
                                const BatchSource& batches, Rng& rng, CoevStats& stats) {
  Individual offspring = mutate_hyperparams(disc, cfg, rng);
  bool diverged = false;
  for (int step = 0; step < cfg.steps_per_mutation && !diverged; ++step) {
    const Batch real = batches.real(rng);
    const Batch latent = batches.noise(rng);
    const ParamVector grad =
        discriminator_grad(nets, offspring.params, gen.params, real, latent);
    diverged = !adam_step(offspring.params, grad, offspring.adam, offspring.learning_rate);
  }
  if (diverged || !offspring.params.allFinite()) {
    ++stats.divergences;
    return disc;
  }
  return offspring;
}

Individual replace_if_better(const Networks& nets, Individual parent, Individual offspring,
                             const std::vector<Individual>& opponents, const Batch& real_batch,
                             const Batch& latent_batch) {
  if (parent.role != offspring.role)
    throw std::invalid_argument("replace_if_better: role mismatch");
  parent.fitness = interaction_fitness(nets, parent, opponents, real_batch, latent_batch);
  offspring.fitness = interaction_fitness(nets, offspring, opponents, real_batch, latent_batch);
  return offspring.fitness >= parent.fitness ? offspring : parent;
}

PopulationPair coev_generation(const Networks& nets, const PopulationPair& pop,
                               const MutationConfig& cfg, const BatchSource& batches, Rng& rng,
                               CoevStats& stats) {
  const std::size_t t = pop.generators.size();
  PopulationPair working = pop;

  const Batch eval_real = batches.real(rng);
  const Batch eval_latent = batches.noise(rng);
  evaluate_all(nets, working, eval_real, eval_latent, &stats);
  sort_by_fitness(working);

  PopulationPair selected;
  selected.generators.reserve(t);
  selected.discriminators.reserve(t);
  for (std::size_t i = 0; i < t; ++i)
    selected.generators.push_back(tournament_select(working.generators, cfg.tournament_size, rng));
  for (std::size_t i = 0; i < t; ++i)
    selected.discriminators.push_back(
        tournament_select(working.discriminators, cfg.tournament_size, rng));

  PopulationPair next;
  next.generators.reserve(t);
  next.discriminators.reserve(t);

  {
    std::vector<Individual> offspring;
    offspring.reserve(t);
    for (std::size_t i = 0; i < t; ++i)
      offspring.push_back(mutate_generator(nets, selected.generators[i],
                                           selected.discriminators[i], cfg, batches, rng, stats));
    const Batch real = batches.real(rng);
    const Batch latent = batches.noise(rng);
    for (std::size_t i = 0; i < t; ++i)
      next.generators.push_back(replace_if_better(nets, selected.generators[i],
                                                  std::move(offspring[i]),
                                                  selected.discriminators, real, latent));
  }
  {
    std::vector<Individual> offspring;
    offspring.reserve(t);
    for (std::size_t i = 0; i < t; ++i)
      offspring.push_back(mutate_discriminator(nets, selected.discriminators[i],
                                               next.generators[i], cfg, batches, rng, stats));
    const Batch real = batches.real(rng);
    const Batch latent = batches.noise(rng);
    for (std::size_t i = 0; i < t; ++i)
      next.discriminators.push_back(replace_if_better(nets, selected.discriminators[i],
                                                      std::move(offspring[i]), next.generators,
                                                      real, latent));
  }
  return next;
}

}  // namespace coevogan
