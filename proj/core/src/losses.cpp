#include "terragan/losses.hpp"

#include <algorithm>
#include <cmath>

#include "terragan/errors.hpp"

namespace terragan {
namespace {

constexpr float kProbEps = 1e-7f;

double mean_of(std::span<const float> xs) {
  double sum = 0.0;
  for (float x : xs) sum += x;
  return sum / static_cast<double>(xs.size());
}

}  // namespace

WassersteinLosses wasserstein_losses(std::span<const float> scores_real,
                                     std::span<const float> scores_fake) {
  if (scores_fake.empty()) throw DataError("wasserstein_losses: empty fake scores");
  WassersteinLosses w;
  w.estimate_fake = mean_of(scores_fake);
  w.generator_loss = -w.estimate_fake;
  if (scores_real.empty()) throw DataError("wasserstein_losses: empty real scores");
  w.estimate_real = mean_of(scores_real);
  w.critic_loss = w.estimate_fake - w.estimate_real;
  w.gap = w.estimate_real - w.estimate_fake;
  return w;
}

ScalarLoss bce_loss(const Tensor& probs, std::span<const float> targets) {
  if (probs.per_sample() != 1 || static_cast<size_t>(probs.n) != targets.size())
    throw DataError("bce_loss: expected one probability per sample");
  ScalarLoss out;
  out.grad = Tensor(probs.n, 1, 1, 1);
  double sum = 0.0;
  const double inv_n = 1.0 / probs.n;
  for (int i = 0; i < probs.n; ++i) {
    float p = std::clamp(probs.v[static_cast<size_t>(i)], kProbEps, 1.0f - kProbEps);
    float t = targets[static_cast<size_t>(i)];
    sum += -(t * std::log(static_cast<double>(p)) +
             (1.0 - t) * std::log(1.0 - static_cast<double>(p)));
    out.grad.v[static_cast<size_t>(i)] =
        static_cast<float>(inv_n * (p - t) / (static_cast<double>(p) * (1.0 - p)));
  }
  out.loss = sum * inv_n;
  return out;
}

VaeLossParts vae_loss(const Tensor& x, const Tensor& x_hat, const Tensor& mu,
                      const Tensor& sigma) {
  if (!x.same_shape(x_hat)) throw DataError("vae_loss: shape mismatch");
  if (!mu.same_shape(sigma)) throw DataError("vae_loss: mu/sigma shape mismatch");
  for (float v : x.v)
    if (v < 0.0f || v > 1.0f) throw DataError("vae_loss: x outside [0,1]");

  VaeLossParts parts;
  const double inv_n = 1.0 / x.n;
  double recon = 0.0;
  for (size_t i = 0; i < x.v.size(); ++i) {
    double p = std::clamp(static_cast<double>(x_hat.v[i]),
                          static_cast<double>(kProbEps),
                          1.0 - static_cast<double>(kProbEps));
    double t = x.v[i];
    recon += -(t * std::log(p) + (1.0 - t) * std::log(1.0 - p));
  }
  parts.reconstruction = recon * inv_n;

  double kl = 0.0;
  for (size_t i = 0; i < mu.v.size(); ++i) {
    double m = mu.v[i];
    double s2 = static_cast<double>(sigma.v[i]) * sigma.v[i];
    kl += -0.5 * (1.0 + std::log(s2) - m * m - s2);
  }
  parts.kl = kl * inv_n;
  parts.total = parts.reconstruction + parts.kl;
  return parts;
}

VaeGrads vae_loss_grads(const Tensor& x, const Tensor& x_hat, const Tensor& mu,
                        const Tensor& logvar) {
  if (!x.same_shape(x_hat)) throw DataError("vae_loss: shape mismatch");
  VaeGrads out;
  out.d_xhat = Tensor(x_hat.n, x_hat.c, x_hat.h, x_hat.w);
  out.d_mu = Tensor(mu.n, mu.c, mu.h, mu.w);
  out.d_logvar = Tensor(logvar.n, logvar.c, logvar.h, logvar.w);

  const double inv_n = 1.0 / x.n;
  double recon = 0.0;
  for (size_t i = 0; i < x.v.size(); ++i) {
    double p = std::clamp(static_cast<double>(x_hat.v[i]),
                          static_cast<double>(kProbEps),
                          1.0 - static_cast<double>(kProbEps));
    double t = x.v[i];
    recon += -(t * std::log(p) + (1.0 - t) * std::log(1.0 - p));
    out.d_xhat.v[i] = static_cast<float>(inv_n * (p - t) / (p * (1.0 - p)));
  }
  out.parts.reconstruction = recon * inv_n;

  double kl = 0.0;
  for (size_t i = 0; i < mu.v.size(); ++i) {
    double m = mu.v[i];
    double lv = logvar.v[i];
    double ev = std::exp(lv);
    kl += -0.5 * (1.0 + lv - m * m - ev);
    out.d_mu.v[i] = static_cast<float>(inv_n * m);
    out.d_logvar.v[i] = static_cast<float>(inv_n * 0.5 * (ev - 1.0));
  }
  out.parts.kl = kl * inv_n;
  out.parts.total = out.parts.reconstruction + out.parts.kl;
  return out;
}

}  // namespace terragan
