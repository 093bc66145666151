#include "terragan/optimizer.hpp"

#include <algorithm>
#include <cmath>

#include "terragan/errors.hpp"

namespace terragan {

AdamOpt::AdamOpt(std::vector<Param*> params, double lr, double beta1,
                 double beta2, double eps)
    : Optimizer(std::move(params)), lr_(lr), beta1_(beta1), beta2_(beta2),
      eps_(eps) {
  for (Param* p : params_) {
    m_.emplace_back(p->value.v.size(), 0.0f);
    v_.emplace_back(p->value.v.size(), 0.0f);
  }
}

void AdamOpt::step() {
  ++t_;
  const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  const float lr_t = static_cast<float>(lr_ * std::sqrt(bc2) / bc1);
  const float b1 = static_cast<float>(beta1_);
  const float b2 = static_cast<float>(beta2_);
  const float eps = static_cast<float>(eps_);
  for (size_t k = 0; k < params_.size(); ++k) {
    Param* p = params_[k];
    if (!p->trainable) continue;
    float* w = p->value.v.data();
    const float* g = p->grad.v.data();
    float* m = m_[k].data();
    float* v = v_[k].data();
    const size_t n = p->value.v.size();
    for (size_t i = 0; i < n; ++i) {
      m[i] = b1 * m[i] + (1.0f - b1) * g[i];
      v[i] = b2 * v[i] + (1.0f - b2) * g[i] * g[i];
      w[i] -= lr_t * m[i] / (std::sqrt(v[i]) + eps);
    }
  }
}

RmsPropOpt::RmsPropOpt(std::vector<Param*> params, double lr, double rho,
                       double eps)
    : Optimizer(std::move(params)), lr_(lr), rho_(rho), eps_(eps) {
  for (Param* p : params_) acc_.emplace_back(p->value.v.size(), 0.0f);
}

void RmsPropOpt::step() {
  const float lr = static_cast<float>(lr_);
  const float rho = static_cast<float>(rho_);
  const float eps = static_cast<float>(eps_);
  for (size_t k = 0; k < params_.size(); ++k) {
    Param* p = params_[k];
    if (!p->trainable) continue;
    float* w = p->value.v.data();
    const float* g = p->grad.v.data();
    float* a = acc_[k].data();
    const size_t n = p->value.v.size();
    for (size_t i = 0; i < n; ++i) {
      a[i] = rho * a[i] + (1.0f - rho) * g[i] * g[i];
      w[i] -= lr * g[i] / (std::sqrt(a[i]) + eps);
    }
  }
}

void clip_weights(std::vector<Param*> params, double c) {
  if (!(c > 0.0)) throw DataError("clip constant must be positive");
  const float lo = static_cast<float>(-c);
  const float hi = static_cast<float>(c);
  for (Param* p : params) {
    if (!p->trainable) continue;
    for (float& w : p->value.v) w = std::clamp(w, lo, hi);
  }
}

}  // namespace terragan
