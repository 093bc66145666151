#include "terragan/builders.hpp"

#include <string>

#include "terragan/errors.hpp"

namespace terragan {
namespace {

int scaled(int channels, int div) {
  if (div < 1 || channels % div != 0 || channels / div < 1)
    throw DataError("width divisor " + std::to_string(div) +
                    " does not divide channel count " + std::to_string(channels));
  return channels / div;
}

int check_resolution(int px) {
  if (px != 32 && px != 64 && px != 128)
    throw DataError("unsupported resolution " + std::to_string(px) +
                    " (expected 32, 64 or 128)");
  return px;
}

struct RowBuilder {
  std::vector<LayerSpec> rows;
  Shape3 cur;

  LayerSpec& push(LayerSpec l) {
    l.in = cur;
    cur = l.out;
    rows.push_back(std::move(l));
    return rows.back();
  }

  void dense(const std::string& name, int out, Activation act = Activation::kNone,
             const char* label = nullptr, bool parallel = false) {
    LayerSpec l;
    l.kind = LayerKind::kDense;
    l.name = name;
    if (label) l.label = label;
    l.act = act;
    l.out = Shape3{out, 1, 1};
    l.parallel = parallel;
    if (parallel) {
      // Same input as the previous row; cur already holds that row's output,
      // which must match this one.
      l.in = rows.back().in;
      rows.push_back(std::move(l));
    } else {
      push(std::move(l));
    }
  }

  void reshape(const std::string& name, Shape3 to) {
    LayerSpec l;
    l.kind = LayerKind::kReshape;
    l.name = name;
    l.out = to;
    push(std::move(l));
  }

  void conv(const std::string& name, int out_c, int stride,
            Activation act = Activation::kNone) {
    LayerSpec l;
    l.kind = LayerKind::kConv;
    l.name = name;
    l.act = act;
    l.kernel = kKernel;
    l.stride = stride;
    l.out = Shape3{out_c, conv_out_size(cur.h, stride), conv_out_size(cur.w, stride)};
    push(std::move(l));
  }

  void deconv(const std::string& name, int out_c, int stride,
              Activation act = Activation::kNone) {
    LayerSpec l;
    l.kind = LayerKind::kDeconv;
    l.name = name;
    l.act = act;
    l.kernel = kKernel;
    l.stride = stride;
    l.out = Shape3{out_c, deconv_out_size(cur.h, stride),
                   deconv_out_size(cur.w, stride)};
    push(std::move(l));
  }

  void batchnorm(const std::string& name) {
    LayerSpec l;
    l.kind = LayerKind::kBatchNorm;
    l.name = name;
    l.out = cur;
    push(std::move(l));
  }

  void leaky_relu(const std::string& name) {
    LayerSpec l;
    l.kind = LayerKind::kLeakyRelu;
    l.name = name;
    l.act = Activation::kLeakyRelu;
    l.rate = kLeakySlope;
    l.out = cur;
    push(std::move(l));
  }

  void relu(const std::string& name) {
    LayerSpec l;
    l.kind = LayerKind::kRelu;
    l.name = name;
    l.act = Activation::kRelu;
    l.out = cur;
    push(std::move(l));
  }

  void dropout(const std::string& name) {
    LayerSpec l;
    l.kind = LayerKind::kDropout;
    l.name = name;
    l.rate = kDropoutRate;
    l.out = cur;
    push(std::move(l));
  }

  void flatten(const std::string& name) {
    LayerSpec l;
    l.kind = LayerKind::kFlatten;
    l.name = name;
    l.out = Shape3{static_cast<int>(cur.count()), 1, 1};
    push(std::move(l));
  }

  void upsample(const std::string& name) {
    LayerSpec l;
    l.kind = LayerKind::kUpsample;
    l.name = name;
    l.out = Shape3{cur.c, cur.h * 2, cur.w * 2};
    push(std::move(l));
  }

  void downsample(const std::string& name) {
    LayerSpec l;
    l.kind = LayerKind::kDownsample;
    l.name = name;
    l.out = Shape3{cur.c, cur.h / 2, cur.w / 2};
    push(std::move(l));
  }
};

ModelSpec finish(const std::string& name, Shape3 input, int latent_dim,
                 RowBuilder&& rb) {
  ModelSpec spec;
  spec.name = name;
  spec.input = input;
  spec.output = rb.cur;
  spec.latent_dim = latent_dim;
  spec.layers = std::move(rb.rows);
  validate_spec_shapes(spec);
  return spec;
}

}  // namespace

ModelSpec build_dcgan_generator(int latent_dim, int out, const BuildOptions& opts) {
  check_resolution(out);
  const int d = opts.width_div;
  const int block_channels[4] = {scaled(256, d), scaled(128, d), scaled(64, d),
                                 scaled(32, d)};
  // 8x8 base; out = 128 keeps all four stride-2 blocks.
  int ups = 0;
  for (int px = 8; px < out; px *= 2) ++ups;

  RowBuilder rb;
  rb.cur = Shape3{latent_dim, 1, 1};
  const int base_c = scaled(1024, d);
  rb.dense("g_dense", base_c * 8 * 8);
  rb.reshape("g_reshape", Shape3{base_c, 8, 8});
  for (int i = 0; i < ups; ++i) {
    std::string idx = std::to_string(i + 1);
    rb.deconv("g_deconv" + idx, block_channels[i], 2);
    rb.batchnorm("g_bn" + idx);
    rb.leaky_relu("g_act" + idx);
    if (opts.g_dropout) rb.dropout("g_drop" + idx);
  }
  rb.deconv("g_head", 1, 1, Activation::kTanh);
  return finish("dcgan-g", Shape3{latent_dim, 1, 1}, latent_dim, std::move(rb));
}

namespace {

ModelSpec build_discriminator(const std::string& name, int in,
                              const BuildOptions& opts, Activation head) {
  check_resolution(in);
  const int d = opts.width_div;
  const int block_channels[4] = {scaled(32, d), scaled(64, d), scaled(128, d),
                                 scaled(256, d)};
  int downs = 0;
  for (int px = in; px > 8; px /= 2) ++downs;

  RowBuilder rb;
  rb.cur = Shape3{1, in, in};
  rb.conv("d_conv0", 1, 1);
  rb.leaky_relu("d_act0");
  if (opts.d_dropout) rb.dropout("d_drop0");
  for (int i = 0; i < downs; ++i) {
    // Keep the trailing blocks so the network still bottoms out at 8x8.
    int c = block_channels[4 - downs + i];
    std::string idx = std::to_string(i + 1);
    rb.conv("d_conv" + idx, c, 2);
    rb.batchnorm("d_bn" + idx);
    rb.leaky_relu("d_act" + idx);
    if (opts.d_dropout) rb.dropout("d_drop" + idx);
  }
  rb.flatten("d_flatten");
  rb.dense("d_dense", 1, head);
  return finish(name, Shape3{1, in, in}, 0, std::move(rb));
}

}  // namespace

ModelSpec build_dcgan_discriminator(int in, const BuildOptions& opts) {
  return build_discriminator("dcgan-d", in, opts, Activation::kSigmoid);
}

std::pair<ModelSpec, ModelSpec> build_wgan(int latent_dim, int out,
                                           const BuildOptions& opts) {
  ModelSpec gen = build_dcgan_generator(latent_dim, out, opts);
  gen.name = "wgan-g";
  BuildOptions critic_opts = opts;
  critic_opts.d_dropout = false;
  ModelSpec critic =
      build_discriminator("wgan-c", out, critic_opts, Activation::kLinear);
  return {std::move(gen), std::move(critic)};
}

namespace {

void append_prog_block(RowBuilder& rb, ProgBlock block, int width_div) {
  const int c64 = scaled(64, width_div);
  const int c128 = scaled(128, width_div);
  switch (block) {
    case ProgBlock::kDeconv1:
      rb.deconv("d1_deconv_a", c128, 1);
      rb.batchnorm("d1_bn_a");
      rb.leaky_relu("d1_act_a");
      rb.deconv("d1_deconv_b", c128, 1);
      rb.batchnorm("d1_bn_b");
      rb.leaky_relu("d1_act_b");
      break;
    case ProgBlock::kDeconv2:
      rb.upsample("d2_up");
      rb.deconv("d2_deconv_a", c64, 1);
      rb.batchnorm("d2_bn_a");
      rb.leaky_relu("d2_act_a");
      rb.deconv("d2_deconv_b", c64, 1);
      rb.batchnorm("d2_bn_b");
      rb.leaky_relu("d2_act_b");
      break;
    case ProgBlock::kConv1:
      rb.conv("c1_conv_a", c64, 1);
      rb.batchnorm("c1_bn_a");
      rb.leaky_relu("c1_act_a");
      rb.conv("c1_conv_b", c128, 1);
      rb.batchnorm("c1_bn_b");
      rb.leaky_relu("c1_act_b");
      rb.downsample("c1_down");
      break;
    case ProgBlock::kConv2:
      rb.conv("c2_conv_a", c128, 1);
      rb.batchnorm("c2_bn_a");
      rb.leaky_relu("c2_act_a");
      rb.conv("c2_conv_b", c128, 1);
      rb.batchnorm("c2_bn_b");
      rb.leaky_relu("c2_act_b");
      break;
  }
}

Shape3 prog_block_input(ProgBlock block, int low_res, int width_div) {
  const int c64 = scaled(64, width_div);
  const int c128 = scaled(128, width_div);
  switch (block) {
    case ProgBlock::kDeconv1: return Shape3{c64, low_res, low_res};
    case ProgBlock::kDeconv2: return Shape3{c128, low_res, low_res};
    case ProgBlock::kConv1: return Shape3{c64, low_res * 2, low_res * 2};
    case ProgBlock::kConv2: return Shape3{c128, low_res, low_res};
  }
  return {};
}

}  // namespace

std::vector<LayerSpec> build_prog_block(ProgBlock block, int low_res,
                                        int width_div) {
  RowBuilder rb;
  rb.cur = prog_block_input(block, low_res, width_div);
  append_prog_block(rb, block, width_div);
  return std::move(rb.rows);
}

ModelSpec build_prog_stage(ProgStage stage, int high_res, int width_div) {
  check_resolution(high_res);
  const int low = high_res / 2;
  const int d = width_div;
  const int c64 = scaled(64, d);
  const int c128 = scaled(128, d);
  const Shape3 latent{100, 1, 1};

  auto gen_trunk = [&](RowBuilder& rb) {
    rb.cur = latent;
    rb.dense("latent_dense", c64 * low * low);
    rb.reshape("reshape", Shape3{c64, low, low});
    append_prog_block(rb, ProgBlock::kDeconv1, d);
  };

  switch (stage) {
    case ProgStage::kG64: {
      RowBuilder rb;
      gen_trunk(rb);
      rb.deconv("to_image_low", 1, 1, Activation::kTanh);
      return finish("prog-g" + std::to_string(low), latent, 100, std::move(rb));
    }
    case ProgStage::kG128: {
      RowBuilder rb;
      gen_trunk(rb);
      append_prog_block(rb, ProgBlock::kDeconv2, d);
      rb.deconv("to_image_high", 1, 1, Activation::kTanh);
      return finish("prog-g" + std::to_string(high_res), latent, 100,
                    std::move(rb));
    }
    case ProgStage::kGGrowth: {
      RowBuilder rb;
      gen_trunk(rb);
      // Old path renders the low-resolution image then upsamples it; new
      // path grows through DECONV_2 to the high-resolution head.
      RowBuilder old_path;
      old_path.cur = rb.cur;
      old_path.deconv("to_image_low", 1, 1, Activation::kTanh);
      old_path.upsample("old_up");
      RowBuilder new_path;
      new_path.cur = rb.cur;
      append_prog_block(new_path, ProgBlock::kDeconv2, d);
      new_path.deconv("to_image_high", 1, 1, Activation::kTanh);

      LayerSpec blend;
      blend.kind = LayerKind::kWeightedSum;
      blend.name = "fade";
      blend.out = new_path.cur;
      blend.branch_a = std::move(old_path.rows);
      blend.branch_b = std::move(new_path.rows);
      rb.push(std::move(blend));
      return finish("prog-g-growth", latent, 100, std::move(rb));
    }
    case ProgStage::kC64: {
      RowBuilder rb;
      rb.cur = Shape3{1, low, low};
      rb.conv("from_image_low", c128, 1);
      rb.leaky_relu("from_act_low");
      append_prog_block(rb, ProgBlock::kConv2, d);
      rb.flatten("flatten");
      rb.dense("score_dense", 1, Activation::kLinear);
      return finish("prog-c" + std::to_string(low), Shape3{1, low, low}, 0,
                    std::move(rb));
    }
    case ProgStage::kC128: {
      RowBuilder rb;
      rb.cur = Shape3{1, high_res, high_res};
      rb.conv("from_image_high", c64, 1);
      rb.leaky_relu("from_act_high");
      append_prog_block(rb, ProgBlock::kConv1, d);
      append_prog_block(rb, ProgBlock::kConv2, d);
      rb.flatten("flatten");
      rb.dense("score_dense", 1, Activation::kLinear);
      return finish("prog-c" + std::to_string(high_res),
                    Shape3{1, high_res, high_res}, 0, std::move(rb));
    }
    case ProgStage::kCGrowth: {
      RowBuilder rb;
      rb.cur = Shape3{1, high_res, high_res};
      RowBuilder old_path;
      old_path.cur = rb.cur;
      old_path.downsample("old_down");
      old_path.conv("from_image_low", c128, 1);
      old_path.leaky_relu("from_act_low");
      RowBuilder new_path;
      new_path.cur = rb.cur;
      new_path.conv("from_image_high", c64, 1);
      new_path.leaky_relu("from_act_high");
      append_prog_block(new_path, ProgBlock::kConv1, d);

      LayerSpec blend;
      blend.kind = LayerKind::kWeightedSum;
      blend.name = "fade";
      blend.out = new_path.cur;
      blend.branch_a = std::move(old_path.rows);
      blend.branch_b = std::move(new_path.rows);
      rb.push(std::move(blend));
      append_prog_block(rb, ProgBlock::kConv2, d);
      rb.flatten("flatten");
      rb.dense("score_dense", 1, Activation::kLinear);
      return finish("prog-c-growth", Shape3{1, high_res, high_res}, 0,
                    std::move(rb));
    }
  }
  throw DataError("unknown progressive stage");
}

ModelSpec build_vae_encoder(int latent_dim, int in, int width_div) {
  check_resolution(in);
  const int d = width_div;
  const int conv_channels[4] = {scaled(16, d), scaled(32, d), scaled(64, d),
                                scaled(128, d)};
  int downs = 0;
  for (int px = in; px > 8; px /= 2) ++downs;

  RowBuilder rb;
  rb.cur = Shape3{1, in, in};
  for (int i = 0; i < downs; ++i) {
    int c = conv_channels[4 - downs + i];
    std::string idx = std::to_string(i + 1);
    rb.conv("e_conv" + idx, c, 2);
    rb.batchnorm("e_bn" + idx);
    rb.relu("e_act" + idx);
  }
  rb.flatten("e_flatten");
  rb.dense("e_dense", scaled(1024, d));
  rb.batchnorm("e_bn_dense");
  rb.relu("e_act_dense");
  rb.dense("e_mu", latent_dim, Activation::kNone, "dense_mu");
  rb.dense("e_sigma", latent_dim, Activation::kNone, "dense_sigma",
           /*parallel=*/true);
  return finish("vae-enc", Shape3{1, in, in}, latent_dim, std::move(rb));
}

ModelSpec build_vae_decoder(int latent_dim, int out, const BuildOptions& opts) {
  ModelSpec spec = build_dcgan_generator(latent_dim, out, opts);
  spec.name = "vae-dec";
  spec.layers.back().act = Activation::kSigmoid;
  validate_spec_shapes(spec);
  return spec;
}

std::vector<float> reparameterize(const std::vector<float>& mu,
                                  const std::vector<float>& sigma,
                                  const std::vector<float>& eps) {
  if (mu.size() != sigma.size() || mu.size() != eps.size())
    throw DataError("reparameterize: length mismatch");
  std::vector<float> z(mu.size());
  for (size_t i = 0; i < z.size(); ++i) z[i] = mu[i] + sigma[i] * eps[i];
  return z;
}

}  // namespace terragan
