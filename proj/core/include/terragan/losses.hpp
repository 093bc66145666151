#pragma once

#include <span>

#include "terragan/tensor.hpp"

namespace terragan {

struct WassersteinLosses {
  double critic_loss = 0.0;     // mean(fake) - mean(real)
  double generator_loss = 0.0;  // -mean(fake)
  double estimate_real = 0.0;
  double estimate_fake = 0.0;
  double gap = 0.0;  // estimate_real - estimate_fake
};

/// Score statistics of a critic over real and fake populations. Minimizing
/// critic_loss maximizes the real/fake gap; critic_loss == -gap exactly and
/// generator_loss == -estimate_fake exactly.
WassersteinLosses wasserstein_losses(std::span<const float> scores_real,
                                     std::span<const float> scores_fake);

struct ScalarLoss {
  double loss = 0.0;
  Tensor grad;  // d(loss)/d(model output)
};

/// Mean binary cross-entropy of probabilities against one target per sample.
/// Probabilities are clipped to [1e-7, 1 - 1e-7] as is conventional for
/// sigmoid outputs.
ScalarLoss bce_loss(const Tensor& probs, std::span<const float> targets);

struct VaeLossParts {
  double total = 0.0;
  double reconstruction = 0.0;
  double kl = 0.0;
};

/// Pixel-wise binary cross-entropy summed over pixels and averaged over the
/// batch, plus the KL divergence of N(mu, sigma^2) from N(0, 1), averaged
/// over the batch. x and x_hat must lie in [0, 1]; mu and sigma are
/// (n, latent, 1, 1) with sigma as standard deviation.
VaeLossParts vae_loss(const Tensor& x, const Tensor& x_hat, const Tensor& mu,
                      const Tensor& sigma);

/// Gradient-producing counterpart used by the trainer; operates on the
/// log-variance parameterization of the sigma head.
struct VaeGrads {
  VaeLossParts parts;
  Tensor d_xhat;
  Tensor d_mu;
  Tensor d_logvar;
};
VaeGrads vae_loss_grads(const Tensor& x, const Tensor& x_hat, const Tensor& mu,
                        const Tensor& logvar);

}  // namespace terragan
