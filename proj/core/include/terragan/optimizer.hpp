#pragma once

#include <memory>
#include <vector>

#include "terragan/layers.hpp"

namespace terragan {

/// Gradient-descent update over a fixed parameter list. step() consumes the
/// accumulated grads; callers zero them between steps.
class Optimizer {
 public:
  explicit Optimizer(std::vector<Param*> params) : params_(std::move(params)) {}
  virtual ~Optimizer() = default;
  virtual void step() = 0;
  void zero_grad() {
    for (Param* p : params_) p->grad.zero();
  }

 protected:
  std::vector<Param*> params_;
};

class AdamOpt : public Optimizer {
 public:
  AdamOpt(std::vector<Param*> params, double lr, double beta1,
          double beta2 = 0.999, double eps = 1e-7);
  void step() override;

 private:
  double lr_, beta1_, beta2_, eps_;
  int64_t t_ = 0;
  std::vector<std::vector<float>> m_, v_;
};

class RmsPropOpt : public Optimizer {
 public:
  RmsPropOpt(std::vector<Param*> params, double lr, double rho = 0.9,
             double eps = 1e-7);
  void step() override;

 private:
  double lr_, rho_, eps_;
  std::vector<std::vector<float>> acc_;
};

/// Replaces every trainable weight w by clamp(w, -c, c). Idempotent.
void clip_weights(std::vector<Param*> params, double c);

}  // namespace terragan
