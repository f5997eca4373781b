#pragma once

#include <array>
#include <vector>

#include "coevogan/data.hpp"
#include "coevogan/nn.hpp"
#include "coevogan/objectives.hpp"
#include "coevogan/rng.hpp"

namespace coevogan {

inline constexpr double kMinLearningRate = 1e-6;
inline constexpr double kMaxLearningRate = 1.0;

enum class Role { Generator, Discriminator };

/// One network genome with its evolvable hyperparameter, optimizer state and
/// the fitness accumulated in the last evaluation pass.
struct Individual {
  ParamVector params;
  double learning_rate = 2e-4;
  AdamState adam;
  double fitness = 0.0;
  Role role = Role::Generator;
};

Individual make_individual(const MlpSpec& spec, Role role, double learning_rate, Rng& rng);

struct PopulationPair {
  std::vector<Individual> generators;
  std::vector<Individual> discriminators;
};

struct MutationConfig {
  std::vector<LossKind> loss_menu = {LossKind::Minmax, LossKind::LeastSquare,
                                     LossKind::Heuristic};
  std::vector<double> selection_probabilities = {1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0};
  int steps_per_mutation = 20;  // batches of gradient descent per mutation event
  double hyperparam_mutation_probability = 0.5;
  double hyperparam_mutation_scale = 1e-4;  // std of the learning-rate perturbation
  int tournament_size = 2;
};

/// Throws std::invalid_argument on any violated invariant. Called at the
/// configuration boundary, not inside the operators.
void validate(const MutationConfig& cfg);

/// Counters accumulated across mutation and evaluation events.
struct CoevStats {
  std::array<long, kNumLossKinds> loss_counts{};
  long divergences = 0;
  long gan_evaluations = 0;  // pairwise gan_value calls in the all-vs-all pass

  CoevStats& operator+=(const CoevStats& other);
};

/// All-vs-all evaluation on shared batches: generator fitness is minus the
/// sum of its interaction values, discriminator fitness the plus sum.
void evaluate_all(const Networks& nets, PopulationPair& pop, const Batch& real_batch,
                  const Batch& latent_batch, CoevStats* stats = nullptr);

/// Descending fitness, stable within ties.
void sort_by_fitness(PopulationPair& pop);

/// k distinct uniform draws, best fitness wins; k is clamped to the
/// population size.
Individual tournament_select(const std::vector<Individual>& pop, int k, Rng& rng);

/// Gaussian learning-rate perturbation with the configured probability,
/// clamped to the legal range.
Individual mutate_hyperparams(Individual ind, const MutationConfig& cfg, Rng& rng);

/// One mutation event: hyperparameter perturbation, one loss kind sampled
/// from the menu, then steps_per_mutation Adam steps against a frozen
/// discriminator. A nonfinite offspring is discarded and the parent returned.
Individual mutate_generator(const Networks& nets, const Individual& gen, const Individual& disc,
                            const MutationConfig& cfg, const BatchSource& batches, Rng& rng,
                            CoevStats& stats);

/// Same shape as mutate_generator, always trained on the discriminator loss.
Individual mutate_discriminator(const Networks& nets, const Individual& disc,
                                const Individual& gen, const MutationConfig& cfg,
                                const BatchSource& batches, Rng& rng, CoevStats& stats);

/// Scores parent and offspring against the same opponents and batches and
/// keeps the fitter one; ties keep the offspring. The survivor carries its
/// freshly computed fitness.
Individual replace_if_better(const Networks& nets, Individual parent, Individual offspring,
                             const std::vector<Individual>& opponents, const Batch& real_batch,
                             const Batch& latent_batch);

/// One generational pass: evaluate, sort, tournament-select, mutate both
/// populations and keep the winners. Generators mutate against the selected
/// discriminators; discriminators then mutate against the already-updated
/// generators, which makes the T=1 case plain alternating training with
/// accept/reject.
PopulationPair coev_generation(const Networks& nets, const PopulationPair& pop,
                               const MutationConfig& cfg, const BatchSource& batches, Rng& rng,
                               CoevStats& stats);

}  // namespace coevogan
