#include "coevogan/nn.hpp"

#include <cmath>
#include <stdexcept>

namespace coevogan {

namespace {

struct LayerView {
  Eigen::Map<const Eigen::MatrixXd> weights;
  Eigen::Map<const Eigen::VectorXd> biases;
};

LayerView layer_view(const ParamVector& params, int offset, int in, int out) {
  return {Eigen::Map<const Eigen::MatrixXd>(params.data() + offset, in, out),
          Eigen::Map<const Eigen::VectorXd>(params.data() + offset + in * out, out)};
}

Eigen::MatrixXd activation_derivative(const Eigen::MatrixXd& activated, Activation act) {
  switch (act) {
    case Activation::Tanh:
      return 1.0 - activated.array().square();
    case Activation::Sigmoid:
      return activated.array() * (1.0 - activated.array());
    case Activation::Identity:
      return Eigen::MatrixXd::Ones(activated.rows(), activated.cols());
  }
  return Eigen::MatrixXd::Ones(activated.rows(), activated.cols());
}

void check_forward_shapes(const MlpSpec& spec, const ParamVector& params, const Batch& inputs) {
  if (!is_valid(spec)) throw std::invalid_argument("nn: invalid MlpSpec");
  if (params.size() != param_count(spec))
    throw std::invalid_argument("nn: parameter vector length does not match spec");
  if (inputs.cols() != spec.layer_sizes.front())
    throw std::invalid_argument("nn: input width does not match first layer");
}

}  // namespace

bool is_valid(const MlpSpec& spec) {
  if (spec.layer_sizes.size() < 2) return false;
  for (int n : spec.layer_sizes)
    if (n < 1) return false;
  return true;
}

int param_count(const MlpSpec& spec) {
  int total = 0;
  for (std::size_t l = 0; l + 1 < spec.layer_sizes.size(); ++l)
    total += (spec.layer_sizes[l] + 1) * spec.layer_sizes[l + 1];
  return total;
}

ParamVector init_params(const MlpSpec& spec, Rng& rng) {
  if (!is_valid(spec)) throw std::invalid_argument("nn: invalid MlpSpec");
  ParamVector params = ParamVector::Zero(param_count(spec));
  int offset = 0;
  for (std::size_t l = 0; l + 1 < spec.layer_sizes.size(); ++l) {
    const int in = spec.layer_sizes[l];
    const int out = spec.layer_sizes[l + 1];
    const double bound = std::sqrt(6.0 / static_cast<double>(in + out));
    std::uniform_real_distribution<double> dist(-bound, bound);
    for (int i = 0; i < in * out; ++i) params[offset + i] = dist(rng);
    // biases stay zero
    offset += (in + 1) * out;
  }
  return params;
}

Batch forward(const MlpSpec& spec, const ParamVector& params, const Batch& inputs) {
  check_forward_shapes(spec, params, inputs);
  Batch a = inputs;
  int offset = 0;
  const std::size_t last = spec.layer_sizes.size() - 2;
  for (std::size_t l = 0; l + 1 < spec.layer_sizes.size(); ++l) {
    const int in = spec.layer_sizes[l];
    const int out = spec.layer_sizes[l + 1];
    const auto layer = layer_view(params, offset, in, out);
    const Activation act = (l == last) ? spec.output_activation : spec.hidden_activation;
    a = apply_activation((a * layer.weights).rowwise() + layer.biases.transpose(), act);
    offset += (in + 1) * out;
  }
  return a;
}

BackwardResult backward(const MlpSpec& spec, const ParamVector& params,
                        const Batch& inputs, const Batch& output_grad) {
  check_forward_shapes(spec, params, inputs);
  if (output_grad.cols() != spec.layer_sizes.back() || output_grad.rows() != inputs.rows())
    throw std::invalid_argument("nn: output_grad shape does not match forward output");

  const std::size_t n_layers = spec.layer_sizes.size() - 1;
  std::vector<Batch> activations(n_layers + 1);
  std::vector<int> offsets(n_layers);
  activations[0] = inputs;
  int offset = 0;
  for (std::size_t l = 0; l < n_layers; ++l) {
    const int in = spec.layer_sizes[l];
    const int out = spec.layer_sizes[l + 1];
    offsets[l] = offset;
    const auto layer = layer_view(params, offset, in, out);
    const Activation act = (l == n_layers - 1) ? spec.output_activation : spec.hidden_activation;
    activations[l + 1] =
        apply_activation((activations[l] * layer.weights).rowwise() + layer.biases.transpose(), act);
    offset += (in + 1) * out;
  }

  BackwardResult result;
  result.param_grad = ParamVector::Zero(params.size());
  Batch grad = output_grad;
  for (std::size_t li = n_layers; li-- > 0;) {
    const int in = spec.layer_sizes[li];
    const int out = spec.layer_sizes[li + 1];
    const auto layer = layer_view(params, offsets[li], in, out);
    const Activation act = (li == n_layers - 1) ? spec.output_activation : spec.hidden_activation;
    const Batch delta = grad.cwiseProduct(activation_derivative(activations[li + 1], act));
    Eigen::Map<Eigen::MatrixXd>(result.param_grad.data() + offsets[li], in, out) =
        activations[li].transpose() * delta;
    Eigen::Map<Eigen::VectorXd>(result.param_grad.data() + offsets[li] + in * out, out) =
        delta.colwise().sum();
    grad = delta * layer.weights.transpose();
  }
  result.input_grad = std::move(grad);
  return result;
}

AdamState make_adam_state(int n_params) {
  AdamState state;
  state.first_moment = Eigen::VectorXd::Zero(n_params);
  state.second_moment = Eigen::VectorXd::Zero(n_params);
  return state;
}

bool adam_step(ParamVector& params, const ParamVector& grad, AdamState& state, double lr) {
  if (params.size() != grad.size() || state.first_moment.size() != params.size() ||
      state.second_moment.size() != params.size())
    throw std::invalid_argument("adam_step: size mismatch");
  if (lr <= 0.0) throw std::invalid_argument("adam_step: lr must be positive");
  if (!grad.allFinite()) return false;

  state.step_count += 1;
  state.first_moment = state.beta1 * state.first_moment + (1.0 - state.beta1) * grad;
  state.second_moment =
      state.beta2 * state.second_moment.array() + (1.0 - state.beta2) * grad.array().square();
  const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step_count));
  const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step_count));
  const Eigen::ArrayXd m_hat = state.first_moment.array() / bc1;
  const Eigen::ArrayXd v_hat = state.second_moment.array() / bc2;
  params.array() -= lr * m_hat / (v_hat.sqrt() + state.epsilon);
  return true;
}

}  // namespace coevogan
