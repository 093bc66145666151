#include "terragan/layers.hpp"

#include <Eigen/Core>

#include <cmath>

#include "terragan/builders.hpp"
#include "terragan/errors.hpp"

namespace terragan {
namespace {

using RowMat = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapM = Eigen::Map<RowMat>;
using CMapM = Eigen::Map<const RowMat>;

// Gathers sliding windows: cols[(c,ky,kx), (gy,gx)] =
// src[c, gy*stride + ky - pad, gx*stride + kx - pad], zero outside.
void im2col(const float* src, int channels, int src_h, int src_w, int kernel,
            int stride, int pad_t, int pad_l, int grid_h, int grid_w,
            float* cols) {
  for (int c = 0; c < channels; ++c) {
    for (int ky = 0; ky < kernel; ++ky) {
      for (int kx = 0; kx < kernel; ++kx) {
        float* row = cols + ((static_cast<int64_t>(c) * kernel + ky) * kernel + kx) *
                                grid_h * grid_w;
        for (int gy = 0; gy < grid_h; ++gy) {
          int sy = gy * stride + ky - pad_t;
          float* out = row + static_cast<int64_t>(gy) * grid_w;
          if (sy < 0 || sy >= src_h) {
            std::fill(out, out + grid_w, 0.0f);
            continue;
          }
          const float* in = src + (static_cast<int64_t>(c) * src_h + sy) * src_w;
          for (int gx = 0; gx < grid_w; ++gx) {
            int sx = gx * stride + kx - pad_l;
            out[gx] = (sx < 0 || sx >= src_w) ? 0.0f : in[sx];
          }
        }
      }
    }
  }
}

// Scatter-add transpose of im2col.
void col2im(const float* cols, int channels, int dst_h, int dst_w, int kernel,
            int stride, int pad_t, int pad_l, int grid_h, int grid_w,
            float* dst) {
  for (int c = 0; c < channels; ++c) {
    for (int ky = 0; ky < kernel; ++ky) {
      for (int kx = 0; kx < kernel; ++kx) {
        const float* row = cols + ((static_cast<int64_t>(c) * kernel + ky) * kernel +
                                   kx) *
                                      grid_h * grid_w;
        for (int gy = 0; gy < grid_h; ++gy) {
          int dy = gy * stride + ky - pad_t;
          if (dy < 0 || dy >= dst_h) continue;
          float* out = dst + (static_cast<int64_t>(c) * dst_h + dy) * dst_w;
          const float* in = row + static_cast<int64_t>(gy) * grid_w;
          for (int gx = 0; gx < grid_w; ++gx) {
            int dx = gx * stride + kx - pad_l;
            if (dx >= 0 && dx < dst_w) out[dx] += in[gx];
          }
        }
      }
    }
  }
}

Param make_param(const std::string& name, int n, int c, int h, int w,
                 bool trainable = true) {
  Param p;
  p.name = name;
  p.value = Tensor(n, c, h, w);
  p.grad = Tensor(n, c, h, w);
  p.trainable = trainable;
  return p;
}

}  // namespace

void apply_activation(Activation act, Tensor& t) {
  switch (act) {
    case Activation::kNone:
    case Activation::kLinear:
      return;
    case Activation::kRelu:
      for (float& x : t.v) x = x > 0.0f ? x : 0.0f;
      return;
    case Activation::kLeakyRelu: {
      const float slope = static_cast<float>(kLeakySlope);
      for (float& x : t.v) x = x > 0.0f ? x : slope * x;
      return;
    }
    case Activation::kTanh:
      for (float& x : t.v) x = std::tanh(x);
      return;
    case Activation::kSigmoid:
      for (float& x : t.v) x = 1.0f / (1.0f + std::exp(-x));
      return;
  }
}

void activation_backward(Activation act, const Tensor& y, Tensor& dy) {
  switch (act) {
    case Activation::kNone:
    case Activation::kLinear:
      return;
    case Activation::kRelu:
      for (size_t i = 0; i < dy.v.size(); ++i)
        if (y.v[i] <= 0.0f) dy.v[i] = 0.0f;
      return;
    case Activation::kLeakyRelu: {
      const float slope = static_cast<float>(kLeakySlope);
      for (size_t i = 0; i < dy.v.size(); ++i)
        if (y.v[i] <= 0.0f) dy.v[i] *= slope;
      return;
    }
    case Activation::kTanh:
      for (size_t i = 0; i < dy.v.size(); ++i)
        dy.v[i] *= 1.0f - y.v[i] * y.v[i];
      return;
    case Activation::kSigmoid:
      for (size_t i = 0; i < dy.v.size(); ++i)
        dy.v[i] *= y.v[i] * (1.0f - y.v[i]);
      return;
  }
}

// -------------------------------------------------------------------- dense

DenseLayer::DenseLayer(std::string name, int in_dim, int out_dim, Activation act,
                       Rng& init)
    : Layer(std::move(name)),
      weight(make_param(name_ + ".w", out_dim, in_dim, 1, 1)),
      bias(make_param(name_ + ".b", out_dim, 1, 1, 1)),
      in_dim_(in_dim),
      out_dim_(out_dim),
      act_(act) {
  fill_normal(weight.value.v, 0.02f, init);
}

Tensor DenseLayer::forward(const Tensor& x, bool) {
  if (x.per_sample() != in_dim_)
    throw DataError(name_ + ": dense input size mismatch");
  x_ = x;
  Tensor y(x.n, out_dim_, 1, 1);
  CMapM xm(x.v.data(), x.n, in_dim_);
  CMapM wm(weight.value.v.data(), out_dim_, in_dim_);
  MapM ym(y.v.data(), x.n, out_dim_);
  ym.noalias() = xm * wm.transpose();
  for (int i = 0; i < x.n; ++i)
    for (int j = 0; j < out_dim_; ++j) y.v[static_cast<size_t>(i) * out_dim_ + j] +=
        bias.value.v[static_cast<size_t>(j)];
  apply_activation(act_, y);
  y_ = y;
  return y;
}

Tensor DenseLayer::backward(const Tensor& dy_in) {
  Tensor dy = dy_in;
  activation_backward(act_, y_, dy);
  CMapM dym(dy.v.data(), dy.n, out_dim_);
  CMapM xm(x_.v.data(), x_.n, in_dim_);
  CMapM wm(weight.value.v.data(), out_dim_, in_dim_);
  MapM dwm(weight.grad.v.data(), out_dim_, in_dim_);
  dwm.noalias() += dym.transpose() * xm;
  for (int i = 0; i < dy.n; ++i)
    for (int j = 0; j < out_dim_; ++j)
      bias.grad.v[static_cast<size_t>(j)] += dy.v[static_cast<size_t>(i) * out_dim_ + j];
  Tensor dx(x_.n, x_.c, x_.h, x_.w);
  MapM dxm(dx.v.data(), x_.n, in_dim_);
  dxm.noalias() = dym * wm;
  return dx;
}

void DenseLayer::collect_params(std::vector<Param*>& out) {
  out.push_back(&weight);
  out.push_back(&bias);
}

// --------------------------------------------------------------------- conv

ConvLayer::ConvLayer(std::string name, int in_c, int out_c, int kernel, int stride,
                     Activation act, Rng& init)
    : Layer(std::move(name)),
      weight(make_param(name_ + ".w", out_c, in_c, kernel, kernel)),
      bias(make_param(name_ + ".b", out_c, 1, 1, 1)),
      in_c_(in_c),
      out_c_(out_c),
      kernel_(kernel),
      stride_(stride),
      act_(act) {
  fill_normal(weight.value.v, 0.02f, init);
}

Tensor ConvLayer::forward(const Tensor& x, bool) {
  if (x.c != in_c_) throw DataError(name_ + ": conv channel mismatch");
  x_ = x;
  const int oh = conv_out_size(x.h, stride_);
  const int ow = conv_out_size(x.w, stride_);
  const int pad_t = same_pad_total_conv(x.h, kernel_, stride_) / 2;
  const int pad_l = same_pad_total_conv(x.w, kernel_, stride_) / 2;
  const int64_t patch = static_cast<int64_t>(in_c_) * kernel_ * kernel_;

  Tensor y(x.n, out_c_, oh, ow);
  FloatVec cols(static_cast<size_t>(patch) * oh * ow);
  CMapM wm(weight.value.v.data(), out_c_, patch);
  for (int i = 0; i < x.n; ++i) {
    im2col(x.sample(i), in_c_, x.h, x.w, kernel_, stride_, pad_t, pad_l, oh, ow,
           cols.data());
    CMapM cm(cols.data(), patch, static_cast<int64_t>(oh) * ow);
    MapM ym(y.sample(i), out_c_, static_cast<int64_t>(oh) * ow);
    ym.noalias() = wm * cm;
    for (int co = 0; co < out_c_; ++co)
      ym.row(co).array() += bias.value.v[static_cast<size_t>(co)];
  }
  apply_activation(act_, y);
  y_ = y;
  return y;
}

Tensor ConvLayer::backward(const Tensor& dy_in) {
  Tensor dy = dy_in;
  activation_backward(act_, y_, dy);
  const int oh = dy.h, ow = dy.w;
  const int pad_t = same_pad_total_conv(x_.h, kernel_, stride_) / 2;
  const int pad_l = same_pad_total_conv(x_.w, kernel_, stride_) / 2;
  const int64_t patch = static_cast<int64_t>(in_c_) * kernel_ * kernel_;

  Tensor dx(x_.n, x_.c, x_.h, x_.w);
  FloatVec cols(static_cast<size_t>(patch) * oh * ow);
  FloatVec dcols(cols.size());
  CMapM wm(weight.value.v.data(), out_c_, patch);
  MapM dwm(weight.grad.v.data(), out_c_, patch);
  for (int i = 0; i < dy.n; ++i) {
    im2col(x_.sample(i), in_c_, x_.h, x_.w, kernel_, stride_, pad_t, pad_l, oh, ow,
           cols.data());
    CMapM cm(cols.data(), patch, static_cast<int64_t>(oh) * ow);
    CMapM dym(dy.sample(i), out_c_, static_cast<int64_t>(oh) * ow);
    dwm.noalias() += dym * cm.transpose();
    for (int co = 0; co < out_c_; ++co)
      bias.grad.v[static_cast<size_t>(co)] += dym.row(co).sum();
    MapM dcm(dcols.data(), patch, static_cast<int64_t>(oh) * ow);
    dcm.noalias() = wm.transpose() * dym;
    col2im(dcols.data(), in_c_, x_.h, x_.w, kernel_, stride_, pad_t, pad_l, oh, ow,
           dx.sample(i));
  }
  return dx;
}

void ConvLayer::collect_params(std::vector<Param*>& out) {
  out.push_back(&weight);
  out.push_back(&bias);
}

// ------------------------------------------------------------------- deconv

DeconvLayer::DeconvLayer(std::string name, int in_c, int out_c, int kernel,
                         int stride, Activation act, Rng& init)
    : Layer(std::move(name)),
      weight(make_param(name_ + ".w", in_c, out_c, kernel, kernel)),
      bias(make_param(name_ + ".b", out_c, 1, 1, 1)),
      in_c_(in_c),
      out_c_(out_c),
      kernel_(kernel),
      stride_(stride),
      act_(act) {
  fill_normal(weight.value.v, 0.02f, init);
}

Tensor DeconvLayer::forward(const Tensor& x, bool) {
  if (x.c != in_c_) throw DataError(name_ + ": deconv channel mismatch");
  x_ = x;
  const int oh = deconv_out_size(x.h, stride_);
  const int ow = deconv_out_size(x.w, stride_);
  const int pad = same_pad_total_deconv(kernel_, stride_) / 2;
  const int64_t patch = static_cast<int64_t>(out_c_) * kernel_ * kernel_;
  const int64_t grid = static_cast<int64_t>(x.h) * x.w;

  Tensor y(x.n, out_c_, oh, ow);
  FloatVec cols(static_cast<size_t>(patch) * grid);
  CMapM wm(weight.value.v.data(), in_c_, patch);
  for (int i = 0; i < x.n; ++i) {
    CMapM xm(x.sample(i), in_c_, grid);
    MapM cm(cols.data(), patch, grid);
    cm.noalias() = wm.transpose() * xm;
    col2im(cols.data(), out_c_, oh, ow, kernel_, stride_, pad, pad, x.h, x.w,
           y.sample(i));
    MapM ym(y.sample(i), out_c_, static_cast<int64_t>(oh) * ow);
    for (int co = 0; co < out_c_; ++co)
      ym.row(co).array() += bias.value.v[static_cast<size_t>(co)];
  }
  apply_activation(act_, y);
  y_ = y;
  return y;
}

Tensor DeconvLayer::backward(const Tensor& dy_in) {
  Tensor dy = dy_in;
  activation_backward(act_, y_, dy);
  const int pad = same_pad_total_deconv(kernel_, stride_) / 2;
  const int64_t patch = static_cast<int64_t>(out_c_) * kernel_ * kernel_;
  const int64_t grid = static_cast<int64_t>(x_.h) * x_.w;

  Tensor dx(x_.n, x_.c, x_.h, x_.w);
  FloatVec cols(static_cast<size_t>(patch) * grid);
  CMapM wm(weight.value.v.data(), in_c_, patch);
  MapM dwm(weight.grad.v.data(), in_c_, patch);
  for (int i = 0; i < dy.n; ++i) {
    im2col(dy.sample(i), out_c_, dy.h, dy.w, kernel_, stride_, pad, pad, x_.h, x_.w,
           cols.data());
    CMapM cm(cols.data(), patch, grid);
    CMapM xm(x_.sample(i), in_c_, grid);
    dwm.noalias() += xm * cm.transpose();
    CMapM dym(dy.sample(i), out_c_, static_cast<int64_t>(dy.h) * dy.w);
    for (int co = 0; co < out_c_; ++co)
      bias.grad.v[static_cast<size_t>(co)] += dym.row(co).sum();
    MapM dxm(dx.sample(i), in_c_, grid);
    dxm.noalias() = wm * cm;
  }
  return dx;
}

void DeconvLayer::collect_params(std::vector<Param*>& out) {
  out.push_back(&weight);
  out.push_back(&bias);
}

// ---------------------------------------------------------------- batchnorm

BatchNormLayer::BatchNormLayer(std::string name, int channels, double momentum,
                               double eps)
    : Layer(std::move(name)),
      gamma(make_param(name_ + ".gamma", channels, 1, 1, 1)),
      beta(make_param(name_ + ".beta", channels, 1, 1, 1)),
      running_mean(make_param(name_ + ".running_mean", channels, 1, 1, 1, false)),
      running_var(make_param(name_ + ".running_var", channels, 1, 1, 1, false)),
      channels_(channels),
      momentum_(momentum),
      eps_(eps) {
  std::fill(gamma.value.v.begin(), gamma.value.v.end(), 1.0f);
  std::fill(running_var.value.v.begin(), running_var.value.v.end(), 1.0f);
}

Tensor BatchNormLayer::forward(const Tensor& x, bool train) {
  if (x.c != channels_) throw DataError(name_ + ": batchnorm channel mismatch");
  const int64_t plane = static_cast<int64_t>(x.h) * x.w;
  const int64_t m = static_cast<int64_t>(x.n) * plane;
  Tensor y(x.n, x.c, x.h, x.w);
  xhat_ = Tensor(x.n, x.c, x.h, x.w);
  inv_std_.assign(static_cast<size_t>(channels_), 0.0f);

  for (int c = 0; c < channels_; ++c) {
    double mean, var;
    if (train) {
      double sum = 0.0, sq = 0.0;
      for (int i = 0; i < x.n; ++i) {
        const float* p = x.sample(i) + c * plane;
        for (int64_t j = 0; j < plane; ++j) {
          sum += p[j];
          sq += static_cast<double>(p[j]) * p[j];
        }
      }
      mean = sum / static_cast<double>(m);
      var = sq / static_cast<double>(m) - mean * mean;
      if (var < 0.0) var = 0.0;
      running_mean.value.v[static_cast<size_t>(c)] = static_cast<float>(
          momentum_ * running_mean.value.v[static_cast<size_t>(c)] +
          (1.0 - momentum_) * mean);
      running_var.value.v[static_cast<size_t>(c)] = static_cast<float>(
          momentum_ * running_var.value.v[static_cast<size_t>(c)] +
          (1.0 - momentum_) * var);
    } else {
      mean = running_mean.value.v[static_cast<size_t>(c)];
      var = running_var.value.v[static_cast<size_t>(c)];
    }
    const float inv = static_cast<float>(1.0 / std::sqrt(var + eps_));
    inv_std_[static_cast<size_t>(c)] = inv;
    const float g = gamma.value.v[static_cast<size_t>(c)];
    const float b = beta.value.v[static_cast<size_t>(c)];
    const float fmean = static_cast<float>(mean);
    for (int i = 0; i < x.n; ++i) {
      const float* p = x.sample(i) + c * plane;
      float* xh = xhat_.sample(i) + c * plane;
      float* yp = y.sample(i) + c * plane;
      for (int64_t j = 0; j < plane; ++j) {
        xh[j] = (p[j] - fmean) * inv;
        yp[j] = g * xh[j] + b;
      }
    }
  }
  return y;
}

Tensor BatchNormLayer::backward(const Tensor& dy) {
  const int64_t plane = static_cast<int64_t>(dy.h) * dy.w;
  const int64_t m = static_cast<int64_t>(dy.n) * plane;
  Tensor dx(dy.n, dy.c, dy.h, dy.w);
  for (int c = 0; c < channels_; ++c) {
    double sum_dy = 0.0, sum_dy_xhat = 0.0;
    for (int i = 0; i < dy.n; ++i) {
      const float* d = dy.sample(i) + c * plane;
      const float* xh = xhat_.sample(i) + c * plane;
      for (int64_t j = 0; j < plane; ++j) {
        sum_dy += d[j];
        sum_dy_xhat += static_cast<double>(d[j]) * xh[j];
      }
    }
    gamma.grad.v[static_cast<size_t>(c)] += static_cast<float>(sum_dy_xhat);
    beta.grad.v[static_cast<size_t>(c)] += static_cast<float>(sum_dy);
    const float g = gamma.value.v[static_cast<size_t>(c)];
    const float inv = inv_std_[static_cast<size_t>(c)];
    const float mean_dy = static_cast<float>(sum_dy / static_cast<double>(m));
    const float mean_dy_xhat =
        static_cast<float>(sum_dy_xhat / static_cast<double>(m));
    for (int i = 0; i < dy.n; ++i) {
      const float* d = dy.sample(i) + c * plane;
      const float* xh = xhat_.sample(i) + c * plane;
      float* out = dx.sample(i) + c * plane;
      for (int64_t j = 0; j < plane; ++j)
        out[j] = g * inv * (d[j] - mean_dy - xh[j] * mean_dy_xhat);
    }
  }
  return dx;
}

void BatchNormLayer::collect_params(std::vector<Param*>& out) {
  out.push_back(&gamma);
  out.push_back(&beta);
  out.push_back(&running_mean);
  out.push_back(&running_var);
}

// --------------------------------------------------------------- activation

ActivationLayer::ActivationLayer(std::string name, Activation act)
    : Layer(std::move(name)), act_(act) {}

Tensor ActivationLayer::forward(const Tensor& x, bool) {
  Tensor y = x;
  apply_activation(act_, y);
  y_ = y;
  return y;
}

Tensor ActivationLayer::backward(const Tensor& dy_in) {
  Tensor dy = dy_in;
  activation_backward(act_, y_, dy);
  return dy;
}

// ------------------------------------------------------------------ dropout

DropoutLayer::DropoutLayer(std::string name, double rate)
    : Layer(std::move(name)), rate_(rate) {}

Tensor DropoutLayer::forward(const Tensor& x, bool train) {
  active_ = train && rate_ > 0.0;
  if (!active_) return x;
  if (rng_ == nullptr)
    throw DataError(name_ + ": dropout used in training without an rng");
  const float scale = static_cast<float>(1.0 / (1.0 - rate_));
  mask_.resize(x.v.size());
  Tensor y = x;
  for (size_t i = 0; i < x.v.size(); ++i) {
    mask_[i] = rng_->uniform() < rate_ ? 0.0f : scale;
    y.v[i] *= mask_[i];
  }
  return y;
}

Tensor DropoutLayer::backward(const Tensor& dy_in) {
  if (!active_) return dy_in;
  Tensor dy = dy_in;
  for (size_t i = 0; i < dy.v.size(); ++i) dy.v[i] *= mask_[i];
  return dy;
}

// ------------------------------------------------------------ shape changes

ReshapeLayer::ReshapeLayer(std::string name, int to_c, int to_h, int to_w)
    : Layer(std::move(name)), to_c_(to_c), to_h_(to_h), to_w_(to_w) {}

Tensor ReshapeLayer::forward(const Tensor& x, bool) {
  from_c_ = x.c;
  from_h_ = x.h;
  from_w_ = x.w;
  if (to_c_ < 0) return x.reshaped(x.n, static_cast<int>(x.per_sample()), 1, 1);
  return x.reshaped(x.n, to_c_, to_h_, to_w_);
}

Tensor ReshapeLayer::backward(const Tensor& dy) {
  return dy.reshaped(dy.n, from_c_, from_h_, from_w_);
}

// --------------------------------------------------------------- resampling

UpsampleLayer::UpsampleLayer(std::string name) : Layer(std::move(name)) {}

Tensor UpsampleLayer::forward(const Tensor& x, bool) {
  Tensor y(x.n, x.c, x.h * 2, x.w * 2);
  for (int i = 0; i < x.n; ++i) {
    for (int c = 0; c < x.c; ++c) {
      const float* src = x.sample(i) + static_cast<int64_t>(c) * x.h * x.w;
      float* dst = y.sample(i) + static_cast<int64_t>(c) * y.h * y.w;
      for (int r = 0; r < x.h; ++r) {
        for (int col = 0; col < x.w; ++col) {
          float v = src[static_cast<int64_t>(r) * x.w + col];
          float* d = dst + (static_cast<int64_t>(2 * r) * y.w + 2 * col);
          d[0] = v;
          d[1] = v;
          d[y.w] = v;
          d[y.w + 1] = v;
        }
      }
    }
  }
  return y;
}

Tensor UpsampleLayer::backward(const Tensor& dy) {
  Tensor dx(dy.n, dy.c, dy.h / 2, dy.w / 2);
  for (int i = 0; i < dy.n; ++i) {
    for (int c = 0; c < dy.c; ++c) {
      const float* src = dy.sample(i) + static_cast<int64_t>(c) * dy.h * dy.w;
      float* dst = dx.sample(i) + static_cast<int64_t>(c) * dx.h * dx.w;
      for (int r = 0; r < dx.h; ++r) {
        for (int col = 0; col < dx.w; ++col) {
          const float* s = src + (static_cast<int64_t>(2 * r) * dy.w + 2 * col);
          dst[static_cast<int64_t>(r) * dx.w + col] =
              s[0] + s[1] + s[dy.w] + s[dy.w + 1];
        }
      }
    }
  }
  return dx;
}

DownsampleLayer::DownsampleLayer(std::string name) : Layer(std::move(name)) {}

Tensor DownsampleLayer::forward(const Tensor& x, bool) {
  Tensor y(x.n, x.c, x.h / 2, x.w / 2);
  for (int i = 0; i < x.n; ++i) {
    for (int c = 0; c < x.c; ++c) {
      const float* src = x.sample(i) + static_cast<int64_t>(c) * x.h * x.w;
      float* dst = y.sample(i) + static_cast<int64_t>(c) * y.h * y.w;
      for (int r = 0; r < y.h; ++r) {
        for (int col = 0; col < y.w; ++col) {
          const float* s = src + (static_cast<int64_t>(2 * r) * x.w + 2 * col);
          dst[static_cast<int64_t>(r) * y.w + col] =
              0.25f * (s[0] + s[1] + s[x.w] + s[x.w + 1]);
        }
      }
    }
  }
  return y;
}

Tensor DownsampleLayer::backward(const Tensor& dy) {
  Tensor dx(dy.n, dy.c, dy.h * 2, dy.w * 2);
  for (int i = 0; i < dy.n; ++i) {
    for (int c = 0; c < dy.c; ++c) {
      const float* src = dy.sample(i) + static_cast<int64_t>(c) * dy.h * dy.w;
      float* dst = dx.sample(i) + static_cast<int64_t>(c) * dx.h * dx.w;
      for (int r = 0; r < dy.h; ++r) {
        for (int col = 0; col < dy.w; ++col) {
          float v = 0.25f * src[static_cast<int64_t>(r) * dy.w + col];
          float* d = dst + (static_cast<int64_t>(2 * r) * dx.w + 2 * col);
          d[0] = v;
          d[1] = v;
          d[dx.w] = v;
          d[dx.w + 1] = v;
        }
      }
    }
  }
  return dx;
}

}  // namespace terragan
