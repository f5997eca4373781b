#include "coevogan/objectives.hpp"

#include <stdexcept>

namespace coevogan {

namespace {

Eigen::VectorXd disc_outputs(const Networks& nets, const ParamVector& disc, const Batch& x) {
  return forward(nets.discriminator, disc, x).col(0);
}

}  // namespace

const char* to_string(LossKind kind) {
  switch (kind) {
    case LossKind::Minmax:
      return "minmax";
    case LossKind::LeastSquare:
      return "leastsquare";
    case LossKind::Heuristic:
      return "heuristic";
  }
  return "unknown";
}

double gan_value(const Networks& nets, const ParamVector& gen, const ParamVector& disc,
                 const Batch& real_batch, const Batch& latent_batch) {
  if (real_batch.rows() == 0 || latent_batch.rows() == 0)
    throw std::invalid_argument("gan_value: empty batch");
  const Eigen::VectorXd d_real = disc_outputs(nets, disc, real_batch);
  const Eigen::VectorXd d_fake =
      disc_outputs(nets, disc, forward(nets.generator, gen, latent_batch));
  const double real_term = d_real.unaryExpr([](double v) { return kPhi(v); }).mean();
  const double fake_term = d_fake.unaryExpr([](double v) { return kPhi(1.0 - v); }).mean();
  return real_term + fake_term;
}

double generator_loss(LossKind kind, const Eigen::VectorXd& d_fake) {
  if (d_fake.size() == 0) throw std::invalid_argument("generator_loss: empty batch");
  switch (kind) {
    case LossKind::Minmax:
      return 0.5 * d_fake.unaryExpr([](double v) { return kPhi(1.0 - v); }).mean();
    case LossKind::LeastSquare:
      return (d_fake.array() - 1.0).square().mean();
    case LossKind::Heuristic:
      return -0.5 * d_fake.unaryExpr([](double v) { return kPhi(v); }).mean();
  }
  throw std::logic_error("generator_loss: unhandled kind");
}

Eigen::VectorXd generator_loss_output_grad(LossKind kind, const Eigen::VectorXd& d_fake) {
  const double inv_n = 1.0 / static_cast<double>(d_fake.size());
  switch (kind) {
    case LossKind::Minmax:
      return d_fake.unaryExpr(
          [inv_n](double v) { return -0.5 * inv_n * kPhi.derivative(1.0 - v); });
    case LossKind::LeastSquare:
      return (2.0 * inv_n) * (d_fake.array() - 1.0);
    case LossKind::Heuristic:
      return d_fake.unaryExpr([inv_n](double v) { return -0.5 * inv_n * kPhi.derivative(v); });
  }
  throw std::logic_error("generator_loss_output_grad: unhandled kind");
}

double discriminator_loss(const Eigen::VectorXd& d_real, const Eigen::VectorXd& d_fake) {
  if (d_real.size() == 0 || d_fake.size() == 0)
    throw std::invalid_argument("discriminator_loss: empty batch");
  const double real_term = d_real.unaryExpr([](double v) { return kPhi(v); }).mean();
  const double fake_term = d_fake.unaryExpr([](double v) { return kPhi(1.0 - v); }).mean();
  return -real_term - fake_term;
}

ParamVector generator_grad(LossKind kind, const Networks& nets, const ParamVector& gen,
                           const ParamVector& disc, const Batch& latent_batch) {
  const Batch fake = forward(nets.generator, gen, latent_batch);
  const Eigen::VectorXd d_fake = forward(nets.discriminator, disc, fake).col(0);
  const Eigen::VectorXd d_out_grad = generator_loss_output_grad(kind, d_fake);
  const Batch fake_grad = backward(nets.discriminator, disc, fake, d_out_grad).input_grad;
  return backward(nets.generator, gen, latent_batch, fake_grad).param_grad;
}

ParamVector discriminator_grad(const Networks& nets, const ParamVector& disc,
                               const ParamVector& gen, const Batch& real_batch,
                               const Batch& latent_batch) {
  const Eigen::VectorXd d_real = disc_outputs(nets, disc, real_batch);
  const double inv_m = 1.0 / static_cast<double>(d_real.size());
  const Eigen::VectorXd real_grad =
      d_real.unaryExpr([inv_m](double v) { return -inv_m * kPhi.derivative(v); });
  ParamVector grad = backward(nets.discriminator, disc, real_batch, real_grad).param_grad;

  const Batch fake = forward(nets.generator, gen, latent_batch);
  const Eigen::VectorXd d_fake = disc_outputs(nets, disc, fake);
  const double inv_n = 1.0 / static_cast<double>(d_fake.size());
  const Eigen::VectorXd fake_grad =
      d_fake.unaryExpr([inv_n](double v) { return inv_n * kPhi.derivative(1.0 - v); });
  grad += backward(nets.discriminator, disc, fake, fake_grad).param_grad;
  return grad;
}

}  // namespace coevogan
