#include "terragan/network.hpp"

#include <map>

#include "terragan/errors.hpp"

namespace terragan {

std::vector<std::unique_ptr<Layer>> Network::build_layers(
    const std::vector<LayerSpec>& rows, Rng& init_rng,
    std::shared_ptr<double> alpha) {
  std::vector<std::unique_ptr<Layer>> layers;
  for (const LayerSpec& l : rows) {
    if (l.parallel)
      throw DataError("parallel heads require a dedicated materializer");
    switch (l.kind) {
      case LayerKind::kDense:
        layers.push_back(std::make_unique<DenseLayer>(
            l.name, static_cast<int>(l.in.count()), l.out.c, l.act, init_rng));
        break;
      case LayerKind::kConv:
        layers.push_back(std::make_unique<ConvLayer>(l.name, l.in.c, l.out.c,
                                                     l.kernel, l.stride, l.act,
                                                     init_rng));
        break;
      case LayerKind::kDeconv:
        layers.push_back(std::make_unique<DeconvLayer>(l.name, l.in.c, l.out.c,
                                                       l.kernel, l.stride, l.act,
                                                       init_rng));
        break;
      case LayerKind::kBatchNorm:
        layers.push_back(std::make_unique<BatchNormLayer>(l.name, l.in.c));
        break;
      case LayerKind::kLeakyRelu:
        layers.push_back(
            std::make_unique<ActivationLayer>(l.name, Activation::kLeakyRelu));
        break;
      case LayerKind::kRelu:
        layers.push_back(
            std::make_unique<ActivationLayer>(l.name, Activation::kRelu));
        break;
      case LayerKind::kDropout:
        layers.push_back(std::make_unique<DropoutLayer>(l.name, l.rate));
        break;
      case LayerKind::kFlatten:
        layers.push_back(std::make_unique<ReshapeLayer>(l.name, -1, 1, 1));
        break;
      case LayerKind::kReshape:
        layers.push_back(
            std::make_unique<ReshapeLayer>(l.name, l.out.c, l.out.h, l.out.w));
        break;
      case LayerKind::kUpsample:
        layers.push_back(std::make_unique<UpsampleLayer>(l.name));
        break;
      case LayerKind::kDownsample:
        layers.push_back(std::make_unique<DownsampleLayer>(l.name));
        break;
      case LayerKind::kWeightedSum: {
        if (!alpha)
          throw DataError("growth stage materialized without an alpha handle");
        auto a = build_layers(l.branch_a, init_rng, alpha);
        auto b = build_layers(l.branch_b, init_rng, alpha);
        layers.push_back(
            std::make_unique<BlendLayer>(l.name, std::move(a), std::move(b), alpha));
        break;
      }
    }
  }
  return layers;
}

Network Network::materialize(const ModelSpec& spec, Rng& init_rng,
                             std::shared_ptr<double> alpha) {
  validate_spec_shapes(spec);
  Network net;
  net.spec_ = spec;
  net.layers_ = build_layers(spec.layers, init_rng, std::move(alpha));
  net.dropout_rng_ = std::make_unique<Rng>(0);
  for (auto& l : net.layers_) l->set_dropout_rng(net.dropout_rng_.get());
  return net;
}

Tensor Network::forward(const Tensor& x, bool train) {
  Tensor cur = x;
  for (auto& l : layers_) cur = l->forward(cur, train);
  return cur;
}

Tensor Network::backward(const Tensor& dy) {
  Tensor cur = dy;
  for (auto it = layers_.rbegin(); it != layers_.rend(); ++it)
    cur = (*it)->backward(cur);
  return cur;
}

std::vector<Param*> Network::params() {
  std::vector<Param*> out;
  for (auto& l : layers_) l->collect_params(out);
  return out;
}

std::vector<Param*> Network::trainable_params() {
  std::vector<Param*> out;
  for (Param* p : params())
    if (p->trainable) out.push_back(p);
  return out;
}

void Network::zero_grads() {
  for (Param* p : params()) p->grad.zero();
}

int Network::copy_matching_params(Network& src) {
  std::map<std::string, Param*> by_name;
  for (Param* p : src.params()) by_name[p->name] = p;
  int copied = 0;
  for (Param* p : params()) {
    auto it = by_name.find(p->name);
    if (it == by_name.end()) continue;
    if (!p->value.same_shape(it->second->value)) continue;
    p->value.v = it->second->value.v;
    ++copied;
  }
  return copied;
}

void Network::set_dropout_seed(uint64_t seed) {
  *dropout_rng_ = Rng(seed);
}

// -------------------------------------------------------------------- blend

BlendLayer::BlendLayer(std::string name, std::vector<std::unique_ptr<Layer>> branch_a,
                       std::vector<std::unique_ptr<Layer>> branch_b,
                       std::shared_ptr<double> alpha)
    : Layer(std::move(name)),
      a_(std::move(branch_a)),
      b_(std::move(branch_b)),
      alpha_(std::move(alpha)) {}

Tensor BlendLayer::forward(const Tensor& x, bool train) {
  Tensor ya = x;
  for (auto& l : a_) ya = l->forward(ya, train);
  Tensor yb = x;
  for (auto& l : b_) yb = l->forward(yb, train);
  if (!ya.same_shape(yb)) throw DataError(name_ + ": branch shape mismatch");
  const float alpha = static_cast<float>(*alpha_);
  Tensor y = ya;
  for (size_t i = 0; i < y.v.size(); ++i)
    y.v[i] = (1.0f - alpha) * ya.v[i] + alpha * yb.v[i];
  return y;
}

Tensor BlendLayer::backward(const Tensor& dy) {
  const float alpha = static_cast<float>(*alpha_);
  Tensor da = dy;
  for (float& v : da.v) v *= 1.0f - alpha;
  Tensor db = dy;
  for (float& v : db.v) v *= alpha;
  for (auto it = a_.rbegin(); it != a_.rend(); ++it) da = (*it)->backward(da);
  for (auto it = b_.rbegin(); it != b_.rend(); ++it) db = (*it)->backward(db);
  if (!da.same_shape(db)) throw DataError(name_ + ": branch grad mismatch");
  Tensor dx = da;
  for (size_t i = 0; i < dx.v.size(); ++i) dx.v[i] += db.v[i];
  return dx;
}

void BlendLayer::collect_params(std::vector<Param*>& out) {
  for (auto& l : a_) l->collect_params(out);
  for (auto& l : b_) l->collect_params(out);
}

void BlendLayer::set_dropout_rng(Rng* rng) {
  for (auto& l : a_) l->set_dropout_rng(rng);
  for (auto& l : b_) l->set_dropout_rng(rng);
}

// ------------------------------------------------------------------ encoder

VaeEncoder VaeEncoder::materialize(const ModelSpec& spec, Rng& init_rng) {
  if (spec.layers.size() < 2)
    throw DataError("encoder spec too small");
  size_t n = spec.layers.size();
  const LayerSpec& mu = spec.layers[n - 2];
  const LayerSpec& logvar = spec.layers[n - 1];
  if (mu.kind != LayerKind::kDense || !logvar.parallel)
    throw DataError("encoder spec must end with parallel dense heads");

  ModelSpec trunk_spec = spec;
  trunk_spec.layers.resize(n - 2);
  trunk_spec.output = mu.in;

  VaeEncoder enc;
  enc.trunk_ = Network::materialize(trunk_spec, init_rng);
  enc.mu_head_ = std::make_unique<DenseLayer>(
      mu.name, static_cast<int>(mu.in.count()), mu.out.c, Activation::kNone,
      init_rng);
  enc.logvar_head_ = std::make_unique<DenseLayer>(
      logvar.name, static_cast<int>(logvar.in.count()), logvar.out.c,
      Activation::kNone, init_rng);
  enc.latent_dim_ = mu.out.c;
  return enc;
}

std::pair<Tensor, Tensor> VaeEncoder::forward(const Tensor& x, bool train) {
  Tensor features = trunk_.forward(x, train);
  Tensor mu = mu_head_->forward(features, train);
  Tensor logvar = logvar_head_->forward(features, train);
  return {std::move(mu), std::move(logvar)};
}

Tensor VaeEncoder::backward(const Tensor& dmu, const Tensor& dlogvar) {
  Tensor dfeat = mu_head_->backward(dmu);
  Tensor dfeat2 = logvar_head_->backward(dlogvar);
  for (size_t i = 0; i < dfeat.v.size(); ++i) dfeat.v[i] += dfeat2.v[i];
  return trunk_.backward(dfeat);
}

std::vector<Param*> VaeEncoder::params() {
  std::vector<Param*> out = trunk_.params();
  mu_head_->collect_params(out);
  logvar_head_->collect_params(out);
  return out;
}

std::vector<Param*> VaeEncoder::trainable_params() {
  std::vector<Param*> out;
  for (Param* p : params())
    if (p->trainable) out.push_back(p);
  return out;
}

void VaeEncoder::zero_grads() {
  for (Param* p : params()) p->grad.zero();
}

void VaeEncoder::set_dropout_seed(uint64_t seed) {
  trunk_.set_dropout_seed(seed);
}

}  // namespace terragan
