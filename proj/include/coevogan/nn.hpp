#pragma once

#include <vector>

#include <Eigen/Core>

#include "coevogan/rng.hpp"

namespace coevogan {

/// One sample per row.
using Batch = Eigen::MatrixXd;

/// Flat network genome: per layer, weights (column-major) then biases.
using ParamVector = Eigen::VectorXd;

enum class Activation { Tanh, Sigmoid, Identity };

/// Fully connected network shape. Hidden layers always use tanh; the output
/// activation distinguishes generators (tanh), discriminators (sigmoid) and
/// test fixtures (identity).
struct MlpSpec {
  std::vector<int> layer_sizes;
  Activation hidden_activation = Activation::Tanh;
  Activation output_activation = Activation::Tanh;
};

bool is_valid(const MlpSpec& spec);
int param_count(const MlpSpec& spec);

template <typename Derived>
Eigen::MatrixXd apply_activation(const Eigen::MatrixBase<Derived>& z, Activation act) {
  switch (act) {
    case Activation::Tanh:
      return z.array().tanh();
    case Activation::Sigmoid:
      return 1.0 / (1.0 + (-z.array()).exp());
    case Activation::Identity:
      return z;
  }
  return z;
}

/// Glorot-uniform weights, zero biases. Deterministic for a given engine state.
ParamVector init_params(const MlpSpec& spec, Rng& rng);

/// Batched forward pass; inputs and result hold one sample per row.
Batch forward(const MlpSpec& spec, const ParamVector& params, const Batch& inputs);

struct BackwardResult {
  ParamVector param_grad;
  Batch input_grad;
};

/// Backpropagates output_grad (d loss / d output, one row per sample) to the
/// parameter and input gradients of the summed batch loss.
BackwardResult backward(const MlpSpec& spec, const ParamVector& params,
                        const Batch& inputs, const Batch& output_grad);

struct AdamState {
  Eigen::VectorXd first_moment;
  Eigen::VectorXd second_moment;
  long step_count = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

AdamState make_adam_state(int n_params);

/// Bias-corrected Adam update in place. Returns false (and leaves params and
/// state untouched) when the gradient contains nonfinite entries.
bool adam_step(ParamVector& params, const ParamVector& grad, AdamState& state, double lr);

}  // namespace coevogan
