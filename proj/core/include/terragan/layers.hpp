#pragma once

#include <memory>
#include <string>
#include <vector>

#include "terragan/model_spec.hpp"
#include "terragan/tensor.hpp"

namespace terragan {

struct Param {
  std::string name;
  Tensor value;
  Tensor grad;
  bool trainable = true;
};

/// A differentiable op. forward caches whatever backward needs; the pattern
/// is strictly forward-then-backward per step.
class Layer {
 public:
  explicit Layer(std::string name) : name_(std::move(name)) {}
  virtual ~Layer() = default;

  virtual Tensor forward(const Tensor& x, bool train) = 0;
  virtual Tensor backward(const Tensor& dy) = 0;
  virtual void collect_params(std::vector<Param*>&) {}
  virtual void set_dropout_rng(Rng*) {}

  const std::string& name() const { return name_; }

 protected:
  std::string name_;
};

void apply_activation(Activation act, Tensor& t);
/// Multiplies dy in place by f'(x), expressed through the cached output y.
void activation_backward(Activation act, const Tensor& y, Tensor& dy);

class DenseLayer : public Layer {
 public:
  DenseLayer(std::string name, int in_dim, int out_dim, Activation act, Rng& init);
  Tensor forward(const Tensor& x, bool train) override;
  Tensor backward(const Tensor& dy) override;
  void collect_params(std::vector<Param*>& out) override;

  Param weight, bias;

 private:
  int in_dim_, out_dim_;
  Activation act_;
  Tensor x_, y_;
};

class ConvLayer : public Layer {
 public:
  ConvLayer(std::string name, int in_c, int out_c, int kernel, int stride,
            Activation act, Rng& init);
  Tensor forward(const Tensor& x, bool train) override;
  Tensor backward(const Tensor& dy) override;
  void collect_params(std::vector<Param*>& out) override;

  Param weight, bias;  // weight is (out_c, in_c, k, k)

 private:
  int in_c_, out_c_, kernel_, stride_;
  Activation act_;
  Tensor x_, y_;
};

class DeconvLayer : public Layer {
 public:
  DeconvLayer(std::string name, int in_c, int out_c, int kernel, int stride,
              Activation act, Rng& init);
  Tensor forward(const Tensor& x, bool train) override;
  Tensor backward(const Tensor& dy) override;
  void collect_params(std::vector<Param*>& out) override;

  Param weight, bias;  // weight is (in_c, out_c, k, k)

 private:
  int in_c_, out_c_, kernel_, stride_;
  Activation act_;
  Tensor x_, y_;
};

class BatchNormLayer : public Layer {
 public:
  BatchNormLayer(std::string name, int channels, double momentum = 0.9,
                 double eps = 1e-5);
  Tensor forward(const Tensor& x, bool train) override;
  Tensor backward(const Tensor& dy) override;
  void collect_params(std::vector<Param*>& out) override;

  Param gamma, beta;
  Param running_mean, running_var;  // buffers, not trained

 private:
  int channels_;
  double momentum_, eps_;
  Tensor xhat_;
  std::vector<float> inv_std_;
};

class ActivationLayer : public Layer {
 public:
  ActivationLayer(std::string name, Activation act);
  Tensor forward(const Tensor& x, bool train) override;
  Tensor backward(const Tensor& dy) override;

 private:
  Activation act_;
  Tensor y_;
};

class DropoutLayer : public Layer {
 public:
  DropoutLayer(std::string name, double rate);
  Tensor forward(const Tensor& x, bool train) override;
  Tensor backward(const Tensor& dy) override;
  void set_dropout_rng(Rng* rng) override { rng_ = rng; }

 private:
  double rate_;
  Rng* rng_ = nullptr;
  std::vector<float> mask_;
  bool active_ = false;
};

class ReshapeLayer : public Layer {
 public:
  /// to_c < 0 flattens to (count, 1, 1).
  ReshapeLayer(std::string name, int to_c, int to_h, int to_w);
  Tensor forward(const Tensor& x, bool train) override;
  Tensor backward(const Tensor& dy) override;

 private:
  int to_c_, to_h_, to_w_;
  int from_c_ = 0, from_h_ = 0, from_w_ = 0;
};

class UpsampleLayer : public Layer {
 public:
  explicit UpsampleLayer(std::string name);
  Tensor forward(const Tensor& x, bool train) override;
  Tensor backward(const Tensor& dy) override;
};

class DownsampleLayer : public Layer {
 public:
  explicit DownsampleLayer(std::string name);
  Tensor forward(const Tensor& x, bool train) override;
  Tensor backward(const Tensor& dy) override;
};

}  // namespace terragan
