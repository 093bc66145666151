#pragma once

#include <memory>
#include <string>
#include <vector>

#include "terragan/layers.hpp"
#include "terragan/model_spec.hpp"

namespace terragan {

/// Executable network materialized from a ModelSpec. Owns its layers and the
/// rng used by dropout masks.
class Network {
 public:
  Network() = default;
  Network(Network&&) = default;
  Network& operator=(Network&&) = default;

  /// Instantiates layers and initializes weights from init_rng, consuming
  /// draws in layer order. Growth-stage specs take their fade-in weight from
  /// `alpha`; other specs ignore it.
  static Network materialize(const ModelSpec& spec, Rng& init_rng,
                             std::shared_ptr<double> alpha = nullptr);

  Tensor forward(const Tensor& x, bool train);
  Tensor backward(const Tensor& dy);

  std::vector<Param*> params();            // everything, buffers included
  std::vector<Param*> trainable_params();
  void zero_grads();

  /// Copies every parameter (and buffer) whose name and shape match a
  /// parameter of src. Returns the number of tensors copied.
  int copy_matching_params(Network& src);

  void set_dropout_seed(uint64_t seed);

  const ModelSpec& spec() const { return spec_; }

 private:
  ModelSpec spec_;
  std::vector<std::unique_ptr<Layer>> layers_;
  std::unique_ptr<Rng> dropout_rng_;

  friend class BlendLayer;
  static std::vector<std::unique_ptr<Layer>> build_layers(
      const std::vector<LayerSpec>& rows, Rng& init_rng,
      std::shared_ptr<double> alpha);
};

/// Fade-in: y = (1 - alpha) * branch_a(x) + alpha * branch_b(x).
class BlendLayer : public Layer {
 public:
  BlendLayer(std::string name, std::vector<std::unique_ptr<Layer>> branch_a,
             std::vector<std::unique_ptr<Layer>> branch_b,
             std::shared_ptr<double> alpha);
  Tensor forward(const Tensor& x, bool train) override;
  Tensor backward(const Tensor& dy) override;
  void collect_params(std::vector<Param*>& out) override;
  void set_dropout_rng(Rng* rng) override;

 private:
  std::vector<std::unique_ptr<Layer>> a_, b_;
  std::shared_ptr<double> alpha_;
};

/// Encoder trunk plus the parallel mu / log-variance heads. The sigma head
/// is treated as log(sigma^2) internally and exponentiated on capture.
class VaeEncoder {
 public:
  static VaeEncoder materialize(const ModelSpec& spec, Rng& init_rng);

  /// Returns (mu, logvar), each (n, latent_dim, 1, 1).
  std::pair<Tensor, Tensor> forward(const Tensor& x, bool train);
  Tensor backward(const Tensor& dmu, const Tensor& dlogvar);

  std::vector<Param*> params();
  std::vector<Param*> trainable_params();
  void zero_grads();
  void set_dropout_seed(uint64_t seed);

  int latent_dim() const { return latent_dim_; }

 private:
  Network trunk_;
  std::unique_ptr<DenseLayer> mu_head_;
  std::unique_ptr<DenseLayer> logvar_head_;
  int latent_dim_ = 0;
};

}  // namespace terragan
