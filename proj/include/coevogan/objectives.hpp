#pragma once

#include <algorithm>
#include <cmath>

#include "coevogan/nn.hpp"

namespace coevogan {

/// Concave measuring function: log with its input clamped to [clamp_eps, 1],
/// so every loss and gradient stays finite for any network output.
struct MeasuringFunction {
  double clamp_eps = 1e-7;

  double operator()(double x) const { return std::log(std::clamp(x, clamp_eps, 1.0)); }

  // Subgradient of the clamped log: zero outside the active range.
  double derivative(double x) const {
    return (x >= clamp_eps && x <= 1.0) ? 1.0 / x : 0.0;
  }
};

inline constexpr MeasuringFunction kPhi{};

/// The three generator training objectives. Minmax is the classic saturating
/// objective, LeastSquare the squared-error criterion, Heuristic the
/// non-saturating variant.
enum class LossKind { Minmax, LeastSquare, Heuristic };

inline constexpr int kNumLossKinds = 3;

const char* to_string(LossKind kind);

/// Generator/discriminator shape pair for one experiment.
struct Networks {
  MlpSpec generator;
  MlpSpec discriminator;
};

/// Adversarial value L(u, v) = mean phi(D(x)) + mean phi(1 - D(G(z))).
/// The coevolution fitness interaction; generators seek low values,
/// discriminators high ones.
double gan_value(const Networks& nets, const ParamVector& gen, const ParamVector& disc,
                 const Batch& real_batch, const Batch& latent_batch);

/// Mean mutation loss given the discriminator's outputs on generated samples.
double generator_loss(LossKind kind, const Eigen::VectorXd& disc_outputs_on_fake);

/// d generator_loss / d output for each sample, already scaled by 1/n.
Eigen::VectorXd generator_loss_output_grad(LossKind kind, const Eigen::VectorXd& disc_outputs_on_fake);

/// Binary cross entropy with labels real=1, fake=0; the negation of gan_value
/// on the same batches.
double discriminator_loss(const Eigen::VectorXd& disc_outputs_on_real,
                          const Eigen::VectorXd& disc_outputs_on_fake);

/// Gradient of generator_loss(kind) with respect to the generator parameters,
/// flowing through a frozen discriminator.
ParamVector generator_grad(LossKind kind, const Networks& nets, const ParamVector& gen,
                           const ParamVector& disc, const Batch& latent_batch);

/// Gradient of discriminator_loss with respect to the discriminator parameters,
/// against a frozen generator.
ParamVector discriminator_grad(const Networks& nets, const ParamVector& disc,
                               const ParamVector& gen, const Batch& real_batch,
                               const Batch& latent_batch);

}  // namespace coevogan
