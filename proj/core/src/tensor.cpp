#include "terragan/tensor.hpp"

#include "terragan/errors.hpp"

namespace terragan {

Tensor Tensor::reshaped(int n_, int c_, int h_, int w_) const {
  if (static_cast<int64_t>(n_) * c_ * h_ * w_ != count())
    throw DataError("reshape changes element count");
  Tensor t;
  t.n = n_;
  t.c = c_;
  t.h = h_;
  t.w = w_;
  t.v = v;
  return t;
}

void fill_normal(FloatVec& values, float stddev, Rng& rng) {
  for (float& x : values) x = rng.normal_f(stddev);
}

}  // namespace terragan
